// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "planrl/trajectory.hpp"

namespace planrl {

struct ShapingConfig {
    double alpha = 0.1;    // entropy shaping coefficient
    double kappa = 2.0;    // clipping factor, > 1; caps the bonus at |A|/kappa
    double lambda = 2.0;   // selective upweighting factor, >= 1
    int complexity_c = 2;  // minimum tool calls for a group to qualify
    bool enable_eas = true;
    bool enable_sau = true;

    void validate() const;
};

// Sample-level group-relative advantage: (r_i - mean(r)) / std(r) with the
// population standard deviation. A zero-variance group yields all zeros.
Eigen::ArrayXd group_advantage(const Eigen::ArrayXd& rewards);

int tool_call_count(const Rollout& rollout);

// Indices of rollouts that (1) hit the maximum reward 1.0 and (2) tie for
// the fewest tool calls among those, provided that minimum is >= c.
std::vector<int> select_sau(const std::vector<int>& tool_calls, const Eigen::ArrayXd& rewards,
                            const ShapingConfig& cfg);
std::vector<int> select_sau(const RolloutGroup& group, const Eigen::ArrayXd& rewards,
                            const ShapingConfig& cfg);

// Scales the sample-level advantages of selected rollouts by lambda.
void apply_sau(Eigen::ArrayXd& sample_advantages, const std::vector<int>& selected, double lambda);

// Entropy bonus psi = min(alpha * H, |A| / kappa). Nonnegative, capped so a
// negative advantage can never flip sign; constant w.r.t. policy parameters.
double eas_term(double entropy, double advantage, double alpha, double kappa);

template <typename DerivedH, typename DerivedA>
Eigen::ArrayXd eas_term(const Eigen::ArrayBase<DerivedH>& entropies,
                        const Eigen::ArrayBase<DerivedA>& advantages, double alpha, double kappa) {
    return (alpha * entropies.derived()).min(advantages.derived().abs() / kappa);
}

struct RolloutShaped {
    double base_advantage = 0.0;   // group-relative, broadcast over tokens
    bool sau_selected = false;
    double sau_scaled_advantage = 0.0; // base * lambda when selected
    Eigen::ArrayXd psi;            // per-token entropy bonus
    Eigen::ArrayXd final_advantage; // sau_scaled_advantage + psi
    std::vector<bool> eas_clipped; // true where the |A|/kappa cap was binding
};

struct ShapedAdvantages {
    std::vector<RolloutShaped> rollouts;

    double objective_token_count() const;
};

// Full pipeline: group-relative advantages, selective upweighting, then the
// entropy bonus computed from the post-upweighting advantage magnitude.
// `entropies[i]` must hold rollout i's sampling-time per-token entropies.
ShapedAdvantages shape(const RolloutGroup& group, const Eigen::ArrayXd& rewards,
                       const std::vector<Eigen::ArrayXd>& entropies, const ShapingConfig& cfg);

} // namespace planrl
