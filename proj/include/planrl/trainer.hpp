// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "planrl/metrics.hpp"
#include "planrl/policy.hpp"
#include "planrl/sampler.hpp"
#include "planrl/shaping.hpp"
#include "planrl/world.hpp"

namespace planrl {

struct TrainConfig {
    std::uint64_t seed = 0;
    int batch_queries = 64;
    int rollouts_per_query = 8; // G
    int steps = 48;
    double learning_rate = 0.5;
    double clip_eps = 0.2;
    double kl_beta = 0.0;
    int epochs = 1; // >1 re-walks the batch so ratios leave 1 and clipping engages
    double max_grad_norm = 0.0;
    double init_scale = 0.0;
    int feature_rows = 8192;
    int search_top_k = 10;
    SamplerLimits limits;
    ShapingConfig shaping;
    std::string judge = "normalized_exact_match";
    bool sample_with_replacement = false;
    int checkpoint_every = 0; // 0: final checkpoint only
    bool dump_shaping = false;

    void validate() const;
};

// Mode strings: vanilla | eas | sau | both. Overrides the shaping enables.
void apply_mode(TrainConfig& cfg, const std::string& mode);

struct TrainResult {
    PolicyParams params;
    std::vector<StepMetrics> metrics;
};

// One full run: per step, sample a query batch, collect G rollouts each,
// score, shape advantages, take the surrogate-ascent step, and append
// metrics. Fully determined by (config, world, queries). When out_dir is
// nonempty, writes metrics.csv, trajectories/step_XXX.jsonl, and
// checkpoints/.
TrainResult train(const TrainConfig& cfg, const KnowledgeWorld& world,
                  const std::vector<Query>& queries, const std::string& out_dir = "");

struct EvalResult {
    double accuracy = 0.0;     // fraction of rollouts with total reward 1.0
    double mean_tool_calls = 0.0;
    int n_queries = 0;
};

EvalResult evaluate(const PolicyParams& params, const KnowledgeWorld& world,
                    const std::vector<Query>& queries, bool greedy, const TrainConfig& cfg,
                    std::uint64_t eval_seed = 0x9e11);

// Runs the four shaping configurations from identical seeds and inputs.
std::vector<std::pair<std::string, TrainResult>> compare_ablations(
    const TrainConfig& base, const KnowledgeWorld& world, const std::vector<Query>& queries,
    const std::string& out_root = "");

} // namespace planrl
