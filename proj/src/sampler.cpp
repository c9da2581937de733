// SPDX-License-Identifier: Apache-2.0
#include "planrl/sampler.hpp"

#include <string>

#include "planrl/errors.hpp"
#include "planrl/text.hpp"

namespace planrl {

namespace {

struct Emitter {
    const PolicyParams& params;
    const AgentContext& ctx;
    SampledRollout& out;
    Rng& rng;
    bool greedy;
    bool last_step = false;

    // Samples one token under the masked distribution, recording frozen
    // behavior-policy statistics and the decision for the gradient pass.
    int emit(DecisionContext dc, int step_index, int pos, int max_segment_tokens) {
        std::vector<int> legal =
            legal_tokens(dc, ctx, step_index, pos, max_segment_tokens, last_step);
        const int row = feature_row(dc, ctx, pos, params.n_rows());
        TokenDistribution dist = next_distribution(params, row, legal);
        const int tok = greedy ? dist.argmax() : dist.sample(rng);
        out.rollout.per_token.log_prob.push_back(dist.log_prob_of(tok));
        out.rollout.per_token.entropy.push_back(dist.entropy);
        out.rollout.per_token.loss_mask.push_back(true);
        out.decisions.push_back(
            TokenDecision{row, std::move(legal), tok, dist.log_prob_of(tok), 0.0});
        return tok;
    }
};

std::string search_response_text(const std::vector<SearchResponse>& responses) {
    std::string text;
    for (const SearchResponse& resp : responses) {
        if (!text.empty()) text += "\n";
        if (!resp.error.empty()) {
            text += resp.error;
            continue;
        }
        text += "results for \"" + resp.query + "\":";
        int rank = 1;
        for (const SearchResult& r : resp.results) {
            text += "\n" + std::to_string(rank++) + ". " + r.title + " | url=" + r.url + " | " +
                    r.snippet;
        }
    }
    return text;
}

std::string browse_response_text(const std::vector<BrowseEntry>& entries) {
    std::string text;
    for (const BrowseEntry& entry : entries) {
        if (!text.empty()) text += "\n";
        text += entry.url + ": " + entry.info;
    }
    return text;
}

} // namespace

SampledRollout sample_rollout(const PolicyParams& params, const KnowledgeWorld& world,
                              const Query& query, Rng& rng, const SamplerLimits& limits,
                              const TokenVocab& vocab, int search_top_k, bool greedy) {
    if (limits.max_steps < 1 || limits.max_segment_tokens < 1) {
        throw ConfigError("sample_rollout: limits must be positive");
    }

    SampledRollout out;
    out.rollout.query_id = query.query_id;
    AgentContext ctx = make_agent_context(query, vocab);
    SearchCache cache; // rollout-private; results are deterministic anyway
    Emitter emit{params, ctx, out, rng, greedy};

    bool answered = false;
    for (int step_index = 0; step_index < limits.max_steps && !answered; ++step_index) {
        emit.last_step = step_index + 1 == limits.max_steps;
        Step step;

        for (int pos = 0;; ++pos) {
            const int tok =
                emit.emit(DecisionContext::ThinkContent, step_index, pos, limits.max_segment_tokens);
            if (tok == TokenVocab::kEndSeg) {
                step.think_segment.push_back(ActionToken{TokenKind::EndSeg, -1});
                break;
            }
            step.think_segment.push_back(ActionToken{TokenKind::Think, tok});
        }

        const int marker =
            emit.emit(DecisionContext::ActionKind, step_index, 0, limits.max_segment_tokens);
        DecisionContext arg_ctx = DecisionContext::PlanContent;
        switch (marker) {
            case TokenVocab::kPlanMarker:
                step.action_kind = ActionKind::Plan;
                step.action_segment.push_back(ActionToken{TokenKind::Plan, -1});
                arg_ctx = DecisionContext::PlanContent;
                break;
            case TokenVocab::kSearchMarker:
                step.action_kind = ActionKind::ToolCall;
                step.action_segment.push_back(ActionToken{TokenKind::Search, -1});
                arg_ctx = DecisionContext::SearchArg;
                break;
            case TokenVocab::kBrowseMarker:
                step.action_kind = ActionKind::ToolCall;
                step.action_segment.push_back(ActionToken{TokenKind::Browse, -1});
                arg_ctx = DecisionContext::BrowseArg;
                break;
            case TokenVocab::kAnswerMarker:
                step.action_kind = ActionKind::Answer;
                step.action_segment.push_back(ActionToken{TokenKind::Answer, -1});
                arg_ctx = DecisionContext::AnswerArg;
                break;
            default:
                throw ContractError("sample_rollout: action-kind mask produced a non-marker");
        }

        std::vector<int> args;
        for (int pos = 0;; ++pos) {
            const int tok = emit.emit(arg_ctx, step_index, pos, limits.max_segment_tokens);
            if (tok == TokenVocab::kEndSeg) {
                step.action_segment.push_back(ActionToken{TokenKind::EndSeg, -1});
                break;
            }
            args.push_back(tok);
            step.action_segment.push_back(ActionToken{TokenKind::Arg, tok});
        }

        if (step.action_kind == ActionKind::ToolCall) {
            if (marker == TokenVocab::kSearchMarker) {
                std::vector<std::string> words;
                words.reserve(args.size());
                for (int tok : args) words.push_back(vocab.name(tok));
                auto responses = web_search(world, cache, {join(words, " ")}, search_top_k);
                step.tool_response = search_response_text(responses);
                observe_search(ctx, responses);
            } else {
                std::vector<std::string> urls;
                urls.reserve(args.size());
                for (int tok : args) urls.push_back(vocab.name(tok));
                auto entries = web_browse(world, cache, urls, query.surface_form);
                step.tool_response = browse_response_text(entries);
                observe_browse(ctx, entries);
            }
        } else if (step.action_kind == ActionKind::Answer) {
            answered = true;
        }

        out.rollout.steps.push_back(std::move(step));
    }

    label_stages(out.rollout);
    return out;
}

} // namespace planrl
