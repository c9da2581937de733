// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "planrl/features.hpp"
#include "planrl/policy.hpp"
#include "planrl/trajectory.hpp"
#include "planrl/vocab.hpp"
#include "planrl/world.hpp"

namespace planrl {

struct SamplerLimits {
    int max_steps = 8;
    int max_segment_tokens = 16;
};

// A rollout plus the sampling-time decision records the gradient needs.
// Only the Rollout part is ever serialized.
struct SampledRollout {
    Rollout rollout;
    std::vector<TokenDecision> decisions; // aligned with rollout.per_token
};

// Runs the agent loop against the world under the constrained decoder:
// step 0 must plan, tool calls always satisfy their schema, segments cannot
// overrun; only running out of steps can break the format. Per-token
// log-probs and entropies are recorded at sampling time (the behavior
// policy) and never recomputed. greedy picks the argmax instead of sampling.
SampledRollout sample_rollout(const PolicyParams& params, const KnowledgeWorld& world,
                              const Query& query, Rng& rng, const SamplerLimits& limits,
                              const TokenVocab& vocab, int search_top_k, bool greedy = false);

} // namespace planrl
