// SPDX-License-Identifier: Apache-2.0
#include "planrl/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "planrl/errors.hpp"

namespace planrl {

void ShapingConfig::validate() const {
    if (alpha < 0.0) throw ConfigError("shaping: alpha must be >= 0");
    if (kappa <= 1.0) throw ConfigError("shaping: kappa must be > 1");
    if (lambda < 1.0) throw ConfigError("shaping: lambda must be >= 1");
    if (complexity_c < 0) throw ConfigError("shaping: complexity threshold must be >= 0");
}

Eigen::ArrayXd group_advantage(const Eigen::ArrayXd& rewards) {
    if (rewards.size() < 2) {
        throw ContractError("group_advantage: a group needs at least 2 rollouts");
    }
    const double mean = rewards.mean();
    const double var = (rewards - mean).square().mean();
    if (var == 0.0) return Eigen::ArrayXd::Zero(rewards.size());
    return (rewards - mean) / std::sqrt(var);
}

int tool_call_count(const Rollout& rollout) {
    int n = 0;
    for (const Step& step : rollout.steps) {
        if (step.action_kind == ActionKind::ToolCall) ++n;
    }
    return n;
}

std::vector<int> select_sau(const std::vector<int>& tool_calls, const Eigen::ArrayXd& rewards,
                            const ShapingConfig& cfg) {
    if (static_cast<Eigen::Index>(tool_calls.size()) != rewards.size()) {
        throw ContractError("select_sau: tool call counts misaligned with rewards");
    }
    int min_calls = std::numeric_limits<int>::max();
    for (Eigen::Index i = 0; i < rewards.size(); ++i) {
        if (rewards[i] == 1.0) {
            min_calls = std::min(min_calls, tool_calls[static_cast<std::size_t>(i)]);
        }
    }
    std::vector<int> selected;
    if (min_calls == std::numeric_limits<int>::max() || min_calls < cfg.complexity_c) {
        return selected;
    }
    for (Eigen::Index i = 0; i < rewards.size(); ++i) {
        if (rewards[i] == 1.0 && tool_calls[static_cast<std::size_t>(i)] == min_calls) {
            selected.push_back(static_cast<int>(i));
        }
    }
    return selected;
}

std::vector<int> select_sau(const RolloutGroup& group, const Eigen::ArrayXd& rewards,
                            const ShapingConfig& cfg) {
    std::vector<int> counts;
    counts.reserve(group.rollouts.size());
    for (const Rollout& r : group.rollouts) counts.push_back(tool_call_count(r));
    return select_sau(counts, rewards, cfg);
}

void apply_sau(Eigen::ArrayXd& sample_advantages, const std::vector<int>& selected, double lambda) {
    if (lambda < 1.0) throw ContractError("apply_sau: lambda must be >= 1");
    for (int i : selected) {
        if (i < 0 || i >= sample_advantages.size()) {
            throw ContractError("apply_sau: selected index out of range");
        }
        sample_advantages[i] *= lambda;
    }
}

double eas_term(double entropy, double advantage, double alpha, double kappa) {
    return std::min(alpha * entropy, std::abs(advantage) / kappa);
}

double ShapedAdvantages::objective_token_count() const {
    double n = 0.0;
    for (const RolloutShaped& r : rollouts) n += static_cast<double>(r.final_advantage.size());
    return n;
}

ShapedAdvantages shape(const RolloutGroup& group, const Eigen::ArrayXd& rewards,
                       const std::vector<Eigen::ArrayXd>& entropies, const ShapingConfig& cfg) {
    cfg.validate();
    const int g = group.size();
    if (g < 2) throw ContractError("shape: a group needs at least 2 rollouts");
    if (rewards.size() != g || static_cast<int>(entropies.size()) != g) {
        throw ContractError("shape: rewards/entropies misaligned with group");
    }
    for (int i = 0; i < g; ++i) {
        if (entropies[static_cast<std::size_t>(i)].size() !=
            static_cast<Eigen::Index>(group.rollouts[static_cast<std::size_t>(i)].token_count())) {
            throw ContractError("shape: entropy vector misaligned with rollout tokens");
        }
    }

    Eigen::ArrayXd sample = group_advantage(rewards);
    const Eigen::ArrayXd base = sample;

    std::vector<int> selected;
    if (cfg.enable_sau) {
        selected = select_sau(group, rewards, cfg);
        apply_sau(sample, selected, cfg.lambda);
    }

    ShapedAdvantages shaped;
    shaped.rollouts.resize(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i) {
        RolloutShaped& rs = shaped.rollouts[static_cast<std::size_t>(i)];
        const Eigen::ArrayXd& h = entropies[static_cast<std::size_t>(i)];
        rs.base_advantage = base[i];
        rs.sau_selected =
            std::find(selected.begin(), selected.end(), i) != selected.end();
        rs.sau_scaled_advantage = sample[i];
        if (cfg.enable_eas) {
            const double cap = std::abs(sample[i]) / cfg.kappa;
            rs.psi = (cfg.alpha * h).min(cap);
            rs.eas_clipped.resize(static_cast<std::size_t>(h.size()));
            for (Eigen::Index t = 0; t < h.size(); ++t) {
                rs.eas_clipped[static_cast<std::size_t>(t)] = cfg.alpha * h[t] > cap;
            }
        } else {
            rs.psi = Eigen::ArrayXd::Zero(h.size());
            rs.eas_clipped.assign(static_cast<std::size_t>(h.size()), false);
        }
        rs.final_advantage = rs.sau_scaled_advantage + rs.psi;
    }
    return shaped;
}

} // namespace planrl
