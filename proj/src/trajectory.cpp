// SPDX-License-Identifier: Apache-2.0
#include "planrl/trajectory.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "planrl/errors.hpp"

namespace planrl {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_action_marker(TokenKind k) {
    return k == TokenKind::Plan || k == TokenKind::Search || k == TokenKind::Browse ||
           k == TokenKind::Answer;
}

bool marker_matches(TokenKind marker, ActionKind kind) {
    switch (kind) {
        case ActionKind::Plan: return marker == TokenKind::Plan;
        case ActionKind::ToolCall: return marker == TokenKind::Search || marker == TokenKind::Browse;
        case ActionKind::Answer: return marker == TokenKind::Answer;
    }
    return false;
}

std::string token_text(const ActionToken& tok, const TokenVocab& vocab) {
    switch (tok.kind) {
        case TokenKind::EndSeg: return "<end>";
        case TokenKind::Plan: return "<plan>";
        case TokenKind::Search: return "<search>";
        case TokenKind::Browse: return "<browse>";
        case TokenKind::Answer: return "<answer>";
        case TokenKind::Think:
        case TokenKind::Arg: return vocab.name(tok.symbol);
    }
    throw ContractError("token_text: unknown token kind");
}

ActionToken token_from_text(const std::string& text, bool in_think, const TokenVocab& vocab) {
    if (text == "<end>") return ActionToken{TokenKind::EndSeg, -1};
    if (text == "<plan>") return ActionToken{TokenKind::Plan, -1};
    if (text == "<search>") return ActionToken{TokenKind::Search, -1};
    if (text == "<browse>") return ActionToken{TokenKind::Browse, -1};
    if (text == "<answer>") return ActionToken{TokenKind::Answer, -1};
    int id = vocab.find(text);
    if (id < 0) throw DataError("parse_rollout: unknown token \"" + text + "\"");
    return ActionToken{in_think ? TokenKind::Think : TokenKind::Arg, id};
}

} // namespace

std::size_t Rollout::token_count() const {
    std::size_t n = 0;
    for (const Step& s : steps) n += s.think_segment.size() + s.action_segment.size();
    return n;
}

bool Rollout::operator==(const Rollout& other) const {
    return query_id == other.query_id && reward == other.reward && per_token == other.per_token &&
           steps.size() == other.steps.size() &&
           std::equal(steps.begin(), steps.end(), other.steps.begin(),
                      [](const Step& a, const Step& b) {
                          return a.think_segment == b.think_segment &&
                                 a.action_kind == b.action_kind &&
                                 a.action_segment == b.action_segment &&
                                 a.tool_response == b.tool_response;
                      });
}

std::vector<Stage> stage_labels(const Rollout& rollout) {
    if (rollout.steps.empty()) throw DataError("stage labeling: rollout has no steps");
    std::vector<Stage> out;
    out.reserve(rollout.token_count());
    for (std::size_t i = 0; i < rollout.steps.size(); ++i) {
        const Step& step = rollout.steps[i];
        if (step.action_segment.empty()) {
            throw DataError("stage labeling: step " + std::to_string(i) +
                            " has an empty action segment");
        }
        Stage stage = Stage::Planning;
        switch (step.action_kind) {
            case ActionKind::Plan: stage = Stage::Planning; break;
            case ActionKind::ToolCall: stage = Stage::ToolCall; break;
            case ActionKind::Answer: stage = Stage::Answer; break;
        }
        for (std::size_t t = 0; t < step.think_segment.size() + step.action_segment.size(); ++t) {
            out.push_back(stage);
        }
    }
    return out;
}

void label_stages(Rollout& rollout) {
    std::vector<Stage> labels = stage_labels(rollout);
    if (!rollout.per_token.log_prob.empty() && rollout.per_token.log_prob.size() != labels.size()) {
        throw ContractError("label_stages: per-token stats disagree with step token count");
    }
    rollout.per_token.stage = std::move(labels);
}

std::string to_string(FormatViolation v) {
    switch (v) {
        case FormatViolation::MissingInitialPlan: return "missing_initial_plan";
        case FormatViolation::MultipleActionsInStep: return "multiple_actions_in_step";
        case FormatViolation::SchemaViolation: return "schema_violation";
        case FormatViolation::NoTerminalAnswer: return "no_terminal_answer";
        case FormatViolation::MalformedSegment: return "malformed_segment";
    }
    return "unknown";
}

FormatReport validate_format(const Rollout& rollout) {
    FormatReport report;
    auto add = [&](FormatViolation v) {
        if (std::find(report.violations.begin(), report.violations.end(), v) ==
            report.violations.end()) {
            report.violations.push_back(v);
        }
    };

    if (rollout.steps.empty()) {
        add(FormatViolation::MissingInitialPlan);
        add(FormatViolation::NoTerminalAnswer);
        report.ok = false;
        return report;
    }

    if (rollout.steps.front().action_kind != ActionKind::Plan) {
        add(FormatViolation::MissingInitialPlan);
    }

    for (const Step& step : rollout.steps) {
        int marker_count = 0;
        bool think_ok = true;
        for (std::size_t t = 0; t < step.think_segment.size(); ++t) {
            const ActionToken& tok = step.think_segment[t];
            if (is_action_marker(tok.kind)) {
                ++marker_count;
            } else if (tok.kind == TokenKind::EndSeg) {
                if (t + 1 != step.think_segment.size()) think_ok = false;
            } else if (tok.kind != TokenKind::Think) {
                think_ok = false;
            }
        }
        if (!step.think_segment.empty() && step.think_segment.back().kind != TokenKind::EndSeg) {
            think_ok = false;
        }
        if (!think_ok) add(FormatViolation::MalformedSegment);

        int args = 0;
        if (step.action_segment.empty()) {
            add(FormatViolation::MalformedSegment);
        } else {
            const ActionToken& head = step.action_segment.front();
            if (!is_action_marker(head.kind) || !marker_matches(head.kind, step.action_kind)) {
                add(FormatViolation::MalformedSegment);
            }
            if (is_action_marker(head.kind)) ++marker_count;
            if (step.action_segment.back().kind != TokenKind::EndSeg) {
                add(FormatViolation::MalformedSegment);
            }
            for (std::size_t t = 1; t + 1 < step.action_segment.size(); ++t) {
                const ActionToken& tok = step.action_segment[t];
                if (is_action_marker(tok.kind)) {
                    ++marker_count;
                } else if (tok.kind == TokenKind::Arg) {
                    ++args;
                } else {
                    add(FormatViolation::MalformedSegment);
                }
            }
        }
        if (marker_count > 1) add(FormatViolation::MultipleActionsInStep);

        if (step.action_kind == ActionKind::ToolCall) {
            // Tool schema: web_search and browse_webpage both require a
            // nonempty argument array.
            if (args < 1) add(FormatViolation::SchemaViolation);
            if (!step.tool_response.has_value()) add(FormatViolation::MalformedSegment);
        } else {
            if (step.tool_response.has_value()) add(FormatViolation::MalformedSegment);
            if (step.action_kind == ActionKind::Answer && args != 1) {
                add(FormatViolation::MalformedSegment);
            }
        }
    }

    if (rollout.steps.back().action_kind != ActionKind::Answer) {
        add(FormatViolation::NoTerminalAnswer);
    }

    report.ok = report.violations.empty();
    return report;
}

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Planning: return "planning";
        case Stage::ToolCall: return "tool_call";
        case Stage::Answer: return "answer";
        case Stage::OtherThink: return "other_think";
    }
    return "unknown";
}

Stage stage_from_name(const std::string& name) {
    if (name == "planning") return Stage::Planning;
    if (name == "tool_call") return Stage::ToolCall;
    if (name == "answer") return Stage::Answer;
    if (name == "other_think") return Stage::OtherThink;
    throw DataError("unknown stage name \"" + name + "\"");
}

const char* action_kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::Plan: return "plan";
        case ActionKind::ToolCall: return "tool_call";
        case ActionKind::Answer: return "answer";
    }
    return "unknown";
}

ActionKind action_kind_from_name(const std::string& name) {
    if (name == "plan") return ActionKind::Plan;
    if (name == "tool_call") return ActionKind::ToolCall;
    if (name == "answer") return ActionKind::Answer;
    throw DataError("unknown action kind \"" + name + "\"");
}

std::string serialize_rollout(const Rollout& rollout, const TokenVocab& vocab) {
    ordered_json doc;
    doc["query_id"] = rollout.query_id;
    ordered_json steps = ordered_json::array();
    for (const Step& step : rollout.steps) {
        ordered_json js;
        ordered_json think = ordered_json::array();
        for (const ActionToken& tok : step.think_segment) think.push_back(token_text(tok, vocab));
        js["think"] = std::move(think);
        js["action_kind"] = action_kind_name(step.action_kind);
        ordered_json action = ordered_json::array();
        for (const ActionToken& tok : step.action_segment) action.push_back(token_text(tok, vocab));
        js["action"] = std::move(action);
        js["tool_response"] = step.tool_response ? ordered_json(*step.tool_response)
                                                 : ordered_json(nullptr);
        steps.push_back(std::move(js));
    }
    doc["steps"] = std::move(steps);
    doc["reward"] = rollout.reward;
    ordered_json per;
    per["logprob"] = rollout.per_token.log_prob;
    per["entropy"] = rollout.per_token.entropy;
    ordered_json stages = ordered_json::array();
    for (Stage s : rollout.per_token.stage) stages.push_back(stage_name(s));
    per["stage"] = std::move(stages);
    per["mask"] = rollout.per_token.loss_mask;
    doc["per_token"] = std::move(per);
    return doc.dump();
}

Rollout parse_rollout(const std::string& line, const TokenVocab& vocab) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("parse_rollout: parse error at byte " + std::to_string(e.byte) + ": " +
                        e.what());
    }
    try {
        Rollout r;
        r.query_id = doc.at("query_id").get<std::string>();
        for (const auto& js : doc.at("steps")) {
            Step step;
            for (const auto& jt : js.at("think")) {
                step.think_segment.push_back(token_from_text(jt.get<std::string>(), true, vocab));
            }
            step.action_kind = action_kind_from_name(js.at("action_kind").get<std::string>());
            for (const auto& jt : js.at("action")) {
                step.action_segment.push_back(token_from_text(jt.get<std::string>(), false, vocab));
            }
            if (!js.at("tool_response").is_null()) {
                step.tool_response = js.at("tool_response").get<std::string>();
            }
            r.steps.push_back(std::move(step));
        }
        r.reward = doc.at("reward").get<double>();
        const auto& per = doc.at("per_token");
        r.per_token.log_prob = per.at("logprob").get<std::vector<double>>();
        r.per_token.entropy = per.at("entropy").get<std::vector<double>>();
        for (const auto& js : per.at("stage")) {
            r.per_token.stage.push_back(stage_from_name(js.get<std::string>()));
        }
        r.per_token.loss_mask = per.at("mask").get<std::vector<bool>>();
        if (!r.per_token.aligned()) {
            throw DataError("parse_rollout: per_token lists have mismatched lengths");
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("parse_rollout: malformed rollout record: " + std::string(e.what()));
    }
}

void append_rollout_log(const std::string& path, const std::vector<Rollout>& rollouts,
                        const TokenVocab& vocab) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw DataError("append_rollout_log: cannot open " + path);
    for (const Rollout& r : rollouts) out << serialize_rollout(r, vocab) << "\n";
    if (!out) throw DataError("append_rollout_log: failed writing " + path);
}

std::vector<Rollout> load_rollout_log(const std::string& path, const TokenVocab& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_rollout_log: cannot open " + path);
    std::vector<Rollout> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(parse_rollout(line, vocab));
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

} // namespace planrl
