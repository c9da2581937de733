// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "planrl/vocab.hpp"

namespace planrl {

enum class TokenKind : std::uint8_t {
    Think,   // content token inside a <think> segment
    Plan,    // the <plan> marker
    Search,  // the <search> marker (tool name web_search)
    Browse,  // the <browse> marker (tool name browse_webpage)
    Answer,  // the <answer> marker
    Arg,     // content token inside an action segment
    EndSeg,  // segment terminator
};

struct ActionToken {
    TokenKind kind;
    std::int32_t symbol = -1; // vocab id for Think/Arg tokens, -1 for markers

    bool operator==(const ActionToken&) const = default;
};

enum class ActionKind : std::uint8_t { Plan, ToolCall, Answer };

enum class Stage : std::uint8_t { Planning, ToolCall, Answer, OtherThink };

struct Step {
    std::vector<ActionToken> think_segment;  // content tokens then EndSeg
    ActionKind action_kind = ActionKind::Plan;
    std::vector<ActionToken> action_segment; // marker, args, EndSeg
    std::optional<std::string> tool_response; // present iff action_kind == ToolCall
};

// Per-token policy statistics, parallel across all agent-generated tokens
// in step order (think segment then action segment within each step).
struct PerTokenStats {
    std::vector<double> log_prob;
    std::vector<double> entropy; // nats, over the grammar-masked support
    std::vector<Stage> stage;
    std::vector<bool> loss_mask;

    std::size_t size() const { return log_prob.size(); }
    bool aligned() const {
        return entropy.size() == log_prob.size() && stage.size() == log_prob.size() &&
               loss_mask.size() == log_prob.size();
    }
    bool operator==(const PerTokenStats&) const = default;
};

struct Rollout {
    std::string query_id;
    std::vector<Step> steps;
    double reward = 0.0; // terminal, in {0, 0.5, 1.0} once scored
    PerTokenStats per_token;

    std::size_t token_count() const;
    bool operator==(const Rollout&) const;
};

struct RolloutGroup {
    std::string query_id;
    std::vector<Rollout> rollouts;

    int size() const { return static_cast<int>(rollouts.size()); }
};

// Stage of every agent token, derived from each step's action kind: tokens
// of Plan steps are Planning, of ToolCall steps ToolCall, of Answer steps
// Answer (think tokens follow their host step). Throws DataError naming the
// step index when a step is malformed.
std::vector<Stage> stage_labels(const Rollout& rollout);

// Fills per_token.stage from stage_labels; other per_token lists, when
// already populated, must have matching length.
void label_stages(Rollout& rollout);

enum class FormatViolation : std::uint8_t {
    MissingInitialPlan,
    MultipleActionsInStep,
    SchemaViolation,
    NoTerminalAnswer,
    MalformedSegment,
};

std::string to_string(FormatViolation v);

struct FormatReport {
    bool ok = false;
    std::vector<FormatViolation> violations;
};

FormatReport validate_format(const Rollout& rollout);

std::string serialize_rollout(const Rollout& rollout, const TokenVocab& vocab);
Rollout parse_rollout(const std::string& line, const TokenVocab& vocab);

void append_rollout_log(const std::string& path, const std::vector<Rollout>& rollouts,
                        const TokenVocab& vocab);
std::vector<Rollout> load_rollout_log(const std::string& path, const TokenVocab& vocab);

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);
const char* action_kind_name(ActionKind k);
ActionKind action_kind_from_name(const std::string& name);

} // namespace planrl
