// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "planrl/trajectory.hpp"

namespace planrl {

// Aggregates derivable from a trajectory log alone. The trainer and the
// analyze command both go through this function, so their numbers can only
// agree.
struct LogAggregates {
    int n_rollouts = 0;
    double mean_reward = 0.0;
    double frac_zero = 0.0;
    double frac_half = 0.0;
    double frac_full = 0.0;
    double planning_entropy = 0.0; // mean over Planning-stage tokens
    double other_entropy = 0.0;    // mean over all other loss-masked tokens
    double mean_tool_calls = 0.0;
};

LogAggregates aggregate_rollouts(const std::vector<Rollout>& rollouts);

struct StepMetrics {
    int step = 0;
    double mean_reward = 0.0;
    double frac_zero = 0.0;
    double frac_half = 0.0;
    double frac_full = 0.0;
    double planning_entropy = 0.0;
    double other_entropy = 0.0;
    double mean_tool_calls = 0.0;
    double mean_psi_ratio = 0.0;    // mean psi/|A| over tokens with |A| > 0
    double selected_fraction = 0.0; // upweighted rollouts / all rollouts
};

std::string format_double(double v);

std::string metrics_csv_header();
std::string metrics_csv_row(const StepMetrics& m);
void write_metrics_csv(const std::string& path, const std::vector<StepMetrics>& metrics);
std::vector<StepMetrics> read_metrics_csv(const std::string& path);

} // namespace planrl
