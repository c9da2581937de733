// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "planrl/trajectory.hpp"
#include "planrl/vocab.hpp"
#include "planrl/world.hpp"

namespace planrl {

// Which token the policy is about to emit. Together with a hashed context
// digest and the position in the current segment this selects the logit row.
enum class DecisionContext : std::uint8_t {
    ActionKind,   // choosing between <plan>/<search>/<browse>/<answer>
    ThinkContent, // inside a <think> segment
    PlanContent,  // inside a <plan> segment
    SearchArg,    // query words of a web_search call
    BrowseArg,    // urls of a browse_webpage call
    AnswerArg,    // the single answer entity
};

enum class ResponseKind : std::uint8_t { None, Search, Browse, Error };

// Rolling observation state: the query plus everything tool responses have
// surfaced so far, reduced to the symbols the grammar and the feature
// digests draw on. Updated deterministically after every tool call.
struct AgentContext {
    const Query* query = nullptr;
    const TokenVocab* vocab = nullptr;

    std::vector<int> entity_symbols;   // first-seen order
    std::vector<int> relation_symbols;
    std::vector<int> filler_symbols;
    std::vector<int> last_search_urls; // page tokens of the latest results, rank order
    std::vector<std::vector<std::string>> last_search_titles; // tokenized, aligned with urls
    std::vector<int> last_browse_entities; // entities named by the latest browse response
    ResponseKind last_response = ResponseKind::None;
    int tool_calls_made = 0;
    int browses_made = 0;

    // Verified progress along the query's hop chain, driven by browsed facts.
    int progress = 0;
    std::string current_subject; // entity reached after `progress` hops
    std::vector<Triple> browsed_facts;

    bool has_pending_relation() const {
        return progress < static_cast<int>(query->hop_chain.size());
    }
    const std::string& pending_relation() const; // only when pending
};

AgentContext make_agent_context(const Query& query, const TokenVocab& vocab);

void observe_search(AgentContext& ctx, const std::vector<SearchResponse>& responses);
void observe_browse(AgentContext& ctx, const std::vector<BrowseEntry>& entries);

// Grammar mask: the legal next tokens, ascending. pos counts content tokens
// already emitted in the current segment; at max_segment_tokens only the
// terminator stays legal, so overlong segments cannot occur. last_step marks
// the final step of the budget, where an agent that has read anything must
// commit to an answer.
std::vector<int> legal_tokens(DecisionContext dc, const AgentContext& ctx, int step_index,
                              int pos, int max_segment_tokens, bool last_step = false);

int feature_row(DecisionContext dc, const AgentContext& ctx, int pos, int n_rows);

} // namespace planrl
