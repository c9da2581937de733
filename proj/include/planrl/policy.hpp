// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "planrl/rng.hpp"

namespace planrl {

// Tabular categorical policy: one logit row per state-feature bucket, one
// column per vocabulary token. The only mutable training state.
struct PolicyParams {
    Eigen::MatrixXd logits; // n_rows x n_tokens
    std::uint64_t vocab_fingerprint = 0;

    int n_rows() const { return static_cast<int>(logits.rows()); }
    int n_tokens() const { return static_cast<int>(logits.cols()); }
};

PolicyParams init_params(std::uint64_t seed, double init_scale, int n_rows, int n_tokens,
                         std::uint64_t vocab_fingerprint);

// Softmax over the grammar-masked support at temperature 1. Tokens outside
// the mask have probability exactly zero (they are not represented at all).
struct TokenDistribution {
    std::vector<int> support;  // legal token ids, ascending
    Eigen::VectorXd probs;     // aligned with support, sums to 1
    double entropy = 0.0;      // nats

    int sample(Rng& rng) const;
    int argmax() const; // ties broken by lowest token id
    double log_prob_of(int token_id) const;
    double prob_of(int token_id) const;
};

TokenDistribution next_distribution(const PolicyParams& params, int row,
                                    const std::vector<int>& legal_tokens);

// One sampled token with everything needed to re-evaluate its probability
// under later parameters. old_log_prob is frozen at sampling time.
struct TokenDecision {
    int row = 0;
    std::vector<int> legal; // ascending token ids
    int chosen = 0;
    double old_log_prob = 0.0;
    double advantage = 0.0; // filled by the trainer after shaping
};

struct SurrogateGrad {
    Eigen::MatrixXd grads; // same shape as PolicyParams.logits
    double objective_value = 0.0;
};

// Clipped token-level surrogate over one rollout group:
//   (1/sum_i |y_i|) sum_i sum_t min(r A, clip(r, 1-eps, 1+eps) A) - beta KL
// with r = exp(log pi_theta - log pi_old). Advantages and entropies are
// constants; the KL penalty uses the sampled-token estimator
// r - 1 - log r and is skipped entirely when beta == 0.
SurrogateGrad surrogate_gradient(const PolicyParams& params,
                                 const std::vector<std::vector<TokenDecision>>& group,
                                 double clip_eps, double kl_beta);

// Plain ascent step: logits + lr * grad, with an optional global gradient
// norm clip (0 disables). Throws NumericalError on non-finite gradients.
PolicyParams apply_update(PolicyParams params, const Eigen::MatrixXd& grad, double learning_rate,
                          double max_grad_norm = 0.0);

void save_checkpoint(const PolicyParams& params, const std::string& path);
PolicyParams load_checkpoint(const std::string& path);
// Throws DataError when the checkpoint does not match the expected table
// shape or vocabulary.
void require_compatible(const PolicyParams& params, int n_rows, int n_tokens,
                        std::uint64_t vocab_fingerprint);

} // namespace planrl
