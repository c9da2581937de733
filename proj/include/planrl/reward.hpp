// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

#include "planrl/trajectory.hpp"
#include "planrl/world.hpp"

namespace planrl {

// Terminal reward split: 0.5 for strict structure, 0.5 for a matching
// answer, and a format failure zeroes the total outright.
struct RewardBreakdown {
    bool format_ok = false;
    bool answer_ok = false;
    double total = 0.0;
};

// Deterministic answer judge; swap the strategy to plug in a different
// equivalence notion later.
struct Judge {
    std::string name;
    std::function<bool(const std::string& prediction, const std::string& gold)> match;
};

// Known keys: "normalized_exact_match" (default: lowercase, trim, strip
// articles and punctuation).
Judge make_judge(const std::string& key);

std::string normalize_answer(std::string_view s);

bool judge_match(const std::string& prediction, const std::string& gold, const Judge& judge);

RewardBreakdown score(const Rollout& rollout, const Query& query, const Judge& judge,
                      const TokenVocab& vocab);

} // namespace planrl
