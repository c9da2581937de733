// SPDX-License-Identifier: Apache-2.0
#include "planrl/features.hpp"

#include <algorithm>

#include "planrl/errors.hpp"
#include "planrl/rng.hpp"
#include "planrl/text.hpp"

namespace planrl {

namespace {

void add_symbol(std::vector<int>& list, int symbol) {
    if (std::find(list.begin(), list.end(), symbol) == list.end()) list.push_back(symbol);
}

// Classify a word into the context pools; unknown words are ignored.
void ingest_word(AgentContext& ctx, const std::string& word, bool from_browse) {
    const int id = ctx.vocab->find(word);
    if (id < 0) return;
    if (ctx.vocab->is_entity(id)) {
        add_symbol(ctx.entity_symbols, id);
        if (from_browse) add_symbol(ctx.last_browse_entities, id);
    } else if (ctx.vocab->is_relation(id)) {
        add_symbol(ctx.relation_symbols, id);
    } else if (ctx.vocab->is_filler(id)) {
        add_symbol(ctx.filler_symbols, id);
    }
}

void ingest_text(AgentContext& ctx, const std::string& text, bool from_browse = false) {
    for (const std::string& word : tokenize(text)) ingest_word(ctx, word, from_browse);
}

void advance_progress(AgentContext& ctx) {
    bool moved = true;
    while (moved && ctx.has_pending_relation()) {
        moved = false;
        const std::string& rel = ctx.pending_relation();
        for (const Triple& fact : ctx.browsed_facts) {
            if (fact.subject == ctx.current_subject && fact.relation == rel) {
                ctx.current_subject = fact.object;
                ++ctx.progress;
                moved = true;
                break;
            }
        }
    }
}

std::vector<int> sorted_unique(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

} // namespace

const std::string& AgentContext::pending_relation() const {
    return query->hop_chain[static_cast<std::size_t>(progress)];
}

AgentContext make_agent_context(const Query& query, const TokenVocab& vocab) {
    AgentContext ctx;
    ctx.query = &query;
    ctx.vocab = &vocab;
    ctx.current_subject = query.start_entity;
    ingest_text(ctx, query.surface_form);
    return ctx;
}

void observe_search(AgentContext& ctx, const std::vector<SearchResponse>& responses) {
    ctx.last_search_urls.clear();
    ctx.last_search_titles.clear();
    ++ctx.tool_calls_made;
    bool any_error = false;
    for (const SearchResponse& resp : responses) {
        if (!resp.error.empty()) {
            any_error = true;
            continue;
        }
        for (const SearchResult& result : resp.results) {
            const int url_id = ctx.vocab->find(result.url);
            if (url_id >= 0 &&
                std::find(ctx.last_search_urls.begin(), ctx.last_search_urls.end(), url_id) ==
                    ctx.last_search_urls.end()) {
                ctx.last_search_urls.push_back(url_id);
                ctx.last_search_titles.push_back(tokenize(result.title));
            }
            ingest_text(ctx, result.title);
            ingest_text(ctx, result.snippet);
        }
    }
    ctx.last_response =
        any_error && ctx.last_search_urls.empty() ? ResponseKind::Error : ResponseKind::Search;
}

void observe_browse(AgentContext& ctx, const std::vector<BrowseEntry>& entries) {
    ctx.last_browse_entities.clear();
    ++ctx.tool_calls_made;
    ++ctx.browses_made;
    for (const BrowseEntry& entry : entries) {
        if (!entry.found) continue;
        ingest_text(ctx, entry.info, true);
        for (const Triple& fact : entry.facts) ctx.browsed_facts.push_back(fact);
    }
    ctx.last_response = ResponseKind::Browse;
    advance_progress(ctx);
}

std::vector<int> legal_tokens(DecisionContext dc, const AgentContext& ctx, int step_index,
                              int pos, int max_segment_tokens, bool last_step) {
    std::vector<int> mask;
    const bool at_cap = pos >= max_segment_tokens;
    switch (dc) {
        case DecisionContext::ActionKind: {
            if (step_index == 0) return {TokenVocab::kPlanMarker};
            // no answering before reading a page; once the budget runs out,
            // an agent that has read something must commit to an answer
            if (ctx.browses_made > 0 && last_step) return {TokenVocab::kAnswerMarker};
            mask = {TokenVocab::kPlanMarker, TokenVocab::kSearchMarker};
            if (!ctx.last_search_urls.empty()) mask.push_back(TokenVocab::kBrowseMarker);
            if (ctx.browses_made > 0) mask.push_back(TokenVocab::kAnswerMarker);
            return sorted_unique(std::move(mask));
        }
        case DecisionContext::ThinkContent:
        case DecisionContext::PlanContent: {
            if (at_cap) return {TokenVocab::kEndSeg};
            mask = ctx.entity_symbols;
            mask.insert(mask.end(), ctx.relation_symbols.begin(), ctx.relation_symbols.end());
            mask.insert(mask.end(), ctx.filler_symbols.begin(), ctx.filler_symbols.end());
            mask.push_back(TokenVocab::kEndSeg);
            return sorted_unique(std::move(mask));
        }
        case DecisionContext::SearchArg: {
            // fixed query shape "<entity> <relation>": the subject slot then
            // the relation slot, drawn from symbols in scope
            if (pos == 0 && !at_cap) return sorted_unique(ctx.entity_symbols);
            if (pos == 1 && !at_cap) return sorted_unique(ctx.relation_symbols);
            return {TokenVocab::kEndSeg};
        }
        case DecisionContext::BrowseArg: {
            // one url per browse call, preferring results whose title names
            // the entity under investigation
            if (pos >= 1) return {TokenVocab::kEndSeg};
            for (std::size_t i = 0; i < ctx.last_search_urls.size(); ++i) {
                const auto& title = ctx.last_search_titles[i];
                if (std::find(title.begin(), title.end(), ctx.current_subject) != title.end()) {
                    mask.push_back(ctx.last_search_urls[i]);
                }
            }
            if (mask.empty()) mask = ctx.last_search_urls;
            return sorted_unique(std::move(mask));
        }
        case DecisionContext::AnswerArg: {
            if (pos >= 1) return {TokenVocab::kEndSeg}; // the answer is a single entity
            // answers come from pages actually read, not from result teasers
            mask = ctx.last_browse_entities;
            const int start = ctx.vocab->find(ctx.query->start_entity);
            if (start >= 0) mask.push_back(start);
            return sorted_unique(std::move(mask));
        }
    }
    throw ContractError("legal_tokens: unknown decision context");
}

int feature_row(DecisionContext dc, const AgentContext& ctx, int pos, int n_rows) {
    if (n_rows < 1) throw ContractError("feature_row: table has no rows");
    // What matters for control flow is whether the hop chain is resolved,
    // not how many hops it took; sharing the bucket lets the discipline
    // learned on single-hop queries carry over to deeper chains.
    const char* pending = ctx.has_pending_relation() ? "1" : "0";
    std::string digest;
    switch (dc) {
        case DecisionContext::ActionKind:
            digest = "k|" + std::to_string(static_cast<int>(ctx.last_response)) + "|" + pending +
                     "|" + (ctx.last_search_urls.empty() ? "0" : "1");
            break;
        case DecisionContext::ThinkContent:
            digest = "t|" + std::to_string(static_cast<int>(ctx.last_response)) + "|" + pending;
            break;
        case DecisionContext::PlanContent:
            digest = "p|" + std::to_string(static_cast<int>(ctx.last_response)) + "|" + pending;
            break;
        case DecisionContext::SearchArg:
            digest = "s|" + ctx.current_subject + "|" +
                     (ctx.has_pending_relation() ? ctx.pending_relation() : "-");
            break;
        case DecisionContext::BrowseArg:
            // keyed on what the agent is looking for, not on what the
            // search happened to rank first
            digest = "b|" + ctx.current_subject + "|" +
                     (ctx.has_pending_relation() ? ctx.pending_relation() : "-");
            break;
        case DecisionContext::AnswerArg:
            digest = "a|" + ctx.current_subject + "|" + (ctx.has_pending_relation() ? "1" : "0");
            break;
    }
    std::uint64_t h = fnv1a64(static_cast<std::uint64_t>(dc));
    h = fnv1a64(digest, h);
    h = fnv1a64(static_cast<std::uint64_t>(std::min(pos, 3)), h);
    return static_cast<int>(h % static_cast<std::uint64_t>(n_rows));
}

} // namespace planrl
