// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "planrl/trajectory.hpp"
#include "planrl/vocab.hpp"
#include "planrl/world.hpp"

namespace planrl::testing {

inline ActionToken think_tok(int symbol) { return ActionToken{TokenKind::Think, symbol}; }
inline ActionToken arg_tok(int symbol) { return ActionToken{TokenKind::Arg, symbol}; }
inline ActionToken end_tok() { return ActionToken{TokenKind::EndSeg, -1}; }
inline ActionToken marker_tok(TokenKind kind) { return ActionToken{kind, -1}; }

// think_syms are prefixed to the segment and closed with <end>; the action
// segment is [marker, args..., <end>].
inline Step make_step(ActionKind kind, TokenKind marker, const std::vector<int>& think_syms,
                      const std::vector<int>& args, const char* response = nullptr) {
    Step step;
    for (int s : think_syms) step.think_segment.push_back(think_tok(s));
    step.think_segment.push_back(end_tok());
    step.action_segment.push_back(marker_tok(marker));
    for (int a : args) step.action_segment.push_back(arg_tok(a));
    step.action_segment.push_back(end_tok());
    step.action_kind = kind;
    if (response != nullptr) step.tool_response = response;
    return step;
}

inline Step plan_step(const std::vector<int>& think_syms, const std::vector<int>& plan_syms) {
    return make_step(ActionKind::Plan, TokenKind::Plan, think_syms, plan_syms);
}

inline Step search_step(const std::vector<int>& think_syms, const std::vector<int>& args,
                        const char* response = "results") {
    return make_step(ActionKind::ToolCall, TokenKind::Search, think_syms, args, response);
}

inline Step browse_step(const std::vector<int>& think_syms, const std::vector<int>& args,
                        const char* response = "pages") {
    return make_step(ActionKind::ToolCall, TokenKind::Browse, think_syms, args, response);
}

inline Step answer_step(const std::vector<int>& think_syms, int answer_sym) {
    return make_step(ActionKind::Answer, TokenKind::Answer, think_syms, {answer_sym});
}

inline Rollout make_rollout(std::string query_id, std::vector<Step> steps, double reward = 0.0) {
    Rollout r;
    r.query_id = std::move(query_id);
    r.steps = std::move(steps);
    r.reward = reward;
    return r;
}

// Fills per-token stats with fixed placeholder values and stage labels.
inline void fill_stats(Rollout& r, double entropy = 0.5, double log_prob = -1.0) {
    const std::size_t n = r.token_count();
    r.per_token.log_prob.assign(n, log_prob);
    r.per_token.entropy.assign(n, entropy);
    r.per_token.loss_mask.assign(n, true);
    label_stages(r);
}

inline KnowledgeWorld tiny_world(std::uint64_t seed = 7, int entities = 10, int relations = 2,
                                 std::pair<int, int> hops = {1, 2}) {
    return generate_world(seed, entities, relations, hops);
}

} // namespace planrl::testing
