// SPDX-License-Identifier: Apache-2.0
#include "planrl/reward.hpp"

#include "planrl/errors.hpp"
#include "planrl/text.hpp"

namespace planrl {

std::string normalize_answer(std::string_view s) {
    auto tokens = tokenize(s);
    std::vector<std::string> kept;
    for (auto& tok : tokens) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        kept.push_back(std::move(tok));
    }
    return join(kept, " ");
}

Judge make_judge(const std::string& key) {
    if (key == "normalized_exact_match") {
        return Judge{key, [](const std::string& pred, const std::string& gold) {
                         return normalize_answer(pred) == normalize_answer(gold);
                     }};
    }
    throw ConfigError("unknown judge \"" + key + "\"");
}

bool judge_match(const std::string& prediction, const std::string& gold, const Judge& judge) {
    return judge.match(prediction, gold);
}

namespace {

// The answer text is the single argument of the terminal answer segment.
std::string extract_answer(const Rollout& rollout, const TokenVocab& vocab) {
    if (rollout.steps.empty()) return "";
    const Step& last = rollout.steps.back();
    if (last.action_kind != ActionKind::Answer) return "";
    for (const ActionToken& tok : last.action_segment) {
        if (tok.kind == TokenKind::Arg) return vocab.name(tok.symbol);
    }
    return "";
}

} // namespace

RewardBreakdown score(const Rollout& rollout, const Query& query, const Judge& judge,
                      const TokenVocab& vocab) {
    RewardBreakdown out;
    out.format_ok = validate_format(rollout).ok;
    const std::string prediction = extract_answer(rollout, vocab);
    out.answer_ok = !prediction.empty() && judge_match(prediction, query.answer, judge);
    // Format violations override correctness.
    out.total = out.format_ok ? (out.answer_ok ? 1.0 : 0.5) : 0.0;
    return out;
}

} // namespace planrl
