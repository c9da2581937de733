// SPDX-License-Identifier: Apache-2.0
#include "planrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "planrl/errors.hpp"

namespace planrl {

PolicyParams init_params(std::uint64_t seed, double init_scale, int n_rows, int n_tokens,
                         std::uint64_t vocab_fingerprint) {
    if (init_scale < 0.0) throw ConfigError("init_params: init_scale must be >= 0");
    if (n_rows < 1 || n_tokens < 1) throw ConfigError("init_params: table shape must be positive");
    PolicyParams params;
    params.vocab_fingerprint = vocab_fingerprint;
    params.logits.resize(n_rows, n_tokens);
    Rng rng = derive_rng(seed, {0x1337ull});
    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < n_tokens; ++c) {
            params.logits(r, c) = init_scale * (2.0 * rng.next_double() - 1.0);
        }
    }
    return params;
}

int TokenDistribution::sample(Rng& rng) const {
    const double u = rng.next_double();
    double cum = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return support[static_cast<std::size_t>(i)];
    }
    return support.back();
}

int TokenDistribution::argmax() const {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return support[static_cast<std::size_t>(best)];
}

double TokenDistribution::prob_of(int token_id) const {
    auto it = std::lower_bound(support.begin(), support.end(), token_id);
    if (it == support.end() || *it != token_id) return 0.0;
    return probs[static_cast<Eigen::Index>(it - support.begin())];
}

double TokenDistribution::log_prob_of(int token_id) const {
    const double p = prob_of(token_id);
    return std::log(p);
}

TokenDistribution next_distribution(const PolicyParams& params, int row,
                                    const std::vector<int>& legal_tokens) {
    if (legal_tokens.empty()) {
        throw ContractError("next_distribution: grammar mask admits no token");
    }
    if (row < 0 || row >= params.n_rows()) {
        throw ContractError("next_distribution: feature row out of range");
    }
    TokenDistribution dist;
    dist.support = legal_tokens;
    const Eigen::Index n = static_cast<Eigen::Index>(legal_tokens.size());
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int tok = legal_tokens[static_cast<std::size_t>(i)];
        if (tok < 0 || tok >= params.n_tokens()) {
            throw ContractError("next_distribution: token id out of range");
        }
        z[i] = params.logits(row, tok);
    }
    const double zmax = z.maxCoeff();
    Eigen::VectorXd e = (z.array() - zmax).exp();
    const double total = e.sum();
    dist.probs = e / total;
    // H = -sum p log p, computed as log Z - sum p z for stability.
    const double log_z = std::log(total) + zmax;
    dist.entropy = log_z - dist.probs.dot(z);
    if (dist.entropy < 0.0 && dist.entropy > -1e-15) dist.entropy = 0.0;
    return dist;
}

SurrogateGrad surrogate_gradient(const PolicyParams& params,
                                 const std::vector<std::vector<TokenDecision>>& group,
                                 double clip_eps, double kl_beta) {
    if (clip_eps <= 0.0 || clip_eps >= 1.0) {
        throw ContractError("surrogate_gradient: clip_eps must lie in (0, 1)");
    }
    double token_total = 0.0;
    for (const auto& rollout : group) token_total += static_cast<double>(rollout.size());
    if (token_total == 0.0) {
        throw ContractError("surrogate_gradient: group has no tokens");
    }

    SurrogateGrad out;
    out.grads = Eigen::MatrixXd::Zero(params.logits.rows(), params.logits.cols());
    const double inv_tokens = 1.0 / token_total;

    for (const auto& rollout : group) {
        for (const TokenDecision& d : rollout) {
            TokenDistribution dist = next_distribution(params, d.row, d.legal);
            const double log_p = dist.log_prob_of(d.chosen);
            const double ratio = std::exp(log_p - d.old_log_prob);
            const double a = d.advantage;

            const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
            const double surrogate = std::min(ratio * a, clipped * a);
            // The ratio branch carries gradient unless the min picked a
            // saturated clip: a > 0 with ratio above band, or a < 0 with
            // ratio below band.
            const bool flows = !((a > 0.0 && ratio > 1.0 + clip_eps) ||
                                 (a < 0.0 && ratio < 1.0 - clip_eps));

            double objective = surrogate;
            double coeff = flows ? a * ratio : 0.0;
            if (kl_beta != 0.0) {
                // Sampled-token KL estimator: r - 1 - log r, whose gradient
                // is (r - 1) d log pi.
                objective -= kl_beta * (ratio - 1.0 - (log_p - d.old_log_prob));
                coeff -= kl_beta * (ratio - 1.0);
            }
            out.objective_value += inv_tokens * objective;

            if (coeff != 0.0) {
                const double scale = inv_tokens * coeff;
                for (std::size_t i = 0; i < d.legal.size(); ++i) {
                    const int tok = d.legal[i];
                    const double indicator = tok == d.chosen ? 1.0 : 0.0;
                    out.grads(d.row, tok) +=
                        scale * (indicator - dist.probs[static_cast<Eigen::Index>(i)]);
                }
            }
        }
    }
    return out;
}

PolicyParams apply_update(PolicyParams params, const Eigen::MatrixXd& grad, double learning_rate,
                          double max_grad_norm) {
    if (learning_rate < 0.0) throw ConfigError("apply_update: learning rate must be >= 0");
    if (grad.rows() != params.logits.rows() || grad.cols() != params.logits.cols()) {
        throw ContractError("apply_update: gradient shape mismatch");
    }
    if (!grad.allFinite()) {
        throw NumericalError("apply_update: non-finite gradient");
    }
    double scale = 1.0;
    if (max_grad_norm > 0.0) {
        const double norm = grad.norm();
        if (norm > max_grad_norm) scale = max_grad_norm / norm;
    }
    params.logits += (learning_rate * scale) * grad;
    return params;
}

void save_checkpoint(const PolicyParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_checkpoint: cannot open " + path);
    out << "planrl-checkpoint v1\n";
    char head[96];
    std::snprintf(head, sizeof(head), "rows %d tokens %d vocab %016llx\n", params.n_rows(),
                  params.n_tokens(), static_cast<unsigned long long>(params.vocab_fingerprint));
    out << head;
    char buf[48];
    for (int r = 0; r < params.n_rows(); ++r) {
        for (int c = 0; c < params.n_tokens(); ++c) {
            // Hexfloat keeps the round trip exact.
            std::snprintf(buf, sizeof(buf), "%a", params.logits(r, c));
            out << buf << (c + 1 == params.n_tokens() ? '\n' : ' ');
        }
    }
    if (!out) throw DataError("save_checkpoint: failed writing " + path);
}

PolicyParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_checkpoint: cannot open " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != "planrl-checkpoint v1") {
        throw DataError("load_checkpoint: unrecognized header in " + path);
    }
    std::string header;
    std::getline(in, header);
    int rows = 0, tokens = 0;
    unsigned long long fingerprint = 0;
    if (std::sscanf(header.c_str(), "rows %d tokens %d vocab %llx", &rows, &tokens, &fingerprint) !=
            3 ||
        rows < 1 || tokens < 1) {
        throw DataError("load_checkpoint: malformed shape header in " + path);
    }
    PolicyParams params;
    params.vocab_fingerprint = fingerprint;
    params.logits.resize(rows, tokens);
    std::string cell;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < tokens; ++c) {
            if (!(in >> cell)) throw DataError("load_checkpoint: truncated table in " + path);
            params.logits(r, c) = std::strtod(cell.c_str(), nullptr);
        }
    }
    return params;
}

void require_compatible(const PolicyParams& params, int n_rows, int n_tokens,
                        std::uint64_t vocab_fingerprint) {
    if (params.n_rows() != n_rows || params.n_tokens() != n_tokens) {
        std::ostringstream msg;
        msg << "checkpoint shape " << params.n_rows() << "x" << params.n_tokens()
            << " does not match expected " << n_rows << "x" << n_tokens;
        throw DataError(msg.str());
    }
    if (params.vocab_fingerprint != vocab_fingerprint) {
        throw DataError("checkpoint vocabulary does not match this world");
    }
}

} // namespace planrl
