// SPDX-License-Identifier: Apache-2.0
#include "planrl/config.hpp"

#include <fstream>
#include <sstream>

#include "planrl/errors.hpp"
#include "planrl/text.hpp"

namespace planrl {

KvMap parse_config_text(const std::string& text) {
    KvMap kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        if (!kv.emplace(key, value).second) {
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " + key);
        }
    }
    if (!kv.count("config_version")) {
        throw ConfigError("config: missing config_version key");
    }
    if (kv.at("config_version") != "1") {
        throw ConfigError("config: unsupported config_version " + kv.at("config_version"));
    }
    return kv;
}

KvMap load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const KvMap& kv) {
    std::ostringstream out;
    for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
    return out.str();
}

namespace {

struct KvReader {
    const KvMap& kv;
    KvMap remaining;

    explicit KvReader(const KvMap& kv_) : kv(kv_), remaining(kv_) {
        remaining.erase("config_version");
    }

    bool take(const std::string& key, std::string& out) {
        auto it = kv.find(key);
        if (it == kv.end()) return false;
        remaining.erase(key);
        out = it->second;
        return true;
    }
    void get(const std::string& key, std::string& field) {
        std::string raw;
        if (take(key, raw)) field = raw;
    }
    void get(const std::string& key, double& field) {
        std::string raw;
        if (!take(key, raw)) return;
        try {
            std::size_t used = 0;
            field = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
        } catch (const std::exception&) {
            throw ConfigError("config: " + key + " expects a number, got \"" + raw + "\"");
        }
    }
    void get(const std::string& key, int& field) {
        std::string raw;
        if (!take(key, raw)) return;
        try {
            std::size_t used = 0;
            field = std::stoi(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
        } catch (const std::exception&) {
            throw ConfigError("config: " + key + " expects an integer, got \"" + raw + "\"");
        }
    }
    void get(const std::string& key, std::uint64_t& field) {
        std::string raw;
        if (!take(key, raw)) return;
        try {
            std::size_t used = 0;
            field = std::stoull(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
        } catch (const std::exception&) {
            throw ConfigError("config: " + key + " expects an unsigned integer, got \"" + raw +
                              "\"");
        }
    }
    void get(const std::string& key, bool& field) {
        std::string raw;
        if (!take(key, raw)) return;
        if (raw == "true" || raw == "1") field = true;
        else if (raw == "false" || raw == "0") field = false;
        else throw ConfigError("config: " + key + " expects true/false, got \"" + raw + "\"");
    }
};

} // namespace

RunSpec run_spec_from_kv(const KvMap& kv) {
    RunSpec spec;
    KvReader reader(kv);
    TrainConfig& t = spec.train;
    reader.get("seed", t.seed);
    reader.get("batch_queries", t.batch_queries);
    reader.get("rollouts_per_query", t.rollouts_per_query);
    reader.get("steps", t.steps);
    reader.get("learning_rate", t.learning_rate);
    reader.get("clip_eps", t.clip_eps);
    reader.get("kl_beta", t.kl_beta);
    reader.get("epochs", t.epochs);
    reader.get("max_grad_norm", t.max_grad_norm);
    reader.get("init_scale", t.init_scale);
    reader.get("feature_rows", t.feature_rows);
    reader.get("search_top_k", t.search_top_k);
    reader.get("max_steps", t.limits.max_steps);
    reader.get("max_segment_tokens", t.limits.max_segment_tokens);
    reader.get("alpha", t.shaping.alpha);
    reader.get("kappa", t.shaping.kappa);
    reader.get("lambda", t.shaping.lambda);
    reader.get("complexity_c", t.shaping.complexity_c);
    reader.get("enable_eas", t.shaping.enable_eas);
    reader.get("enable_sau", t.shaping.enable_sau);
    reader.get("judge", t.judge);
    reader.get("sample_with_replacement", t.sample_with_replacement);
    reader.get("checkpoint_every", t.checkpoint_every);
    reader.get("dump_shaping", t.dump_shaping);
    reader.get("train_queries", spec.train_queries);
    reader.get("heldout_queries", spec.heldout_queries);
    reader.get("query_seed", spec.query_seed);
    reader.get("multihop_fraction", spec.multihop_fraction);
    if (!reader.remaining.empty()) {
        throw ConfigError("config: unknown key \"" + reader.remaining.begin()->first + "\"");
    }
    return spec;
}

KvMap kv_from_run_spec(const RunSpec& spec) {
    const TrainConfig& t = spec.train;
    KvMap kv;
    auto put = [&](const std::string& key, const std::string& value) { kv[key] = value; };
    auto put_num = [&](const std::string& key, double v) { put(key, format_double(v)); };
    put("config_version", "1");
    put("seed", std::to_string(t.seed));
    put("batch_queries", std::to_string(t.batch_queries));
    put("rollouts_per_query", std::to_string(t.rollouts_per_query));
    put("steps", std::to_string(t.steps));
    put_num("learning_rate", t.learning_rate);
    put_num("clip_eps", t.clip_eps);
    put_num("kl_beta", t.kl_beta);
    put("epochs", std::to_string(t.epochs));
    put_num("max_grad_norm", t.max_grad_norm);
    put_num("init_scale", t.init_scale);
    put("feature_rows", std::to_string(t.feature_rows));
    put("search_top_k", std::to_string(t.search_top_k));
    put("max_steps", std::to_string(t.limits.max_steps));
    put("max_segment_tokens", std::to_string(t.limits.max_segment_tokens));
    put_num("alpha", t.shaping.alpha);
    put_num("kappa", t.shaping.kappa);
    put_num("lambda", t.shaping.lambda);
    put("complexity_c", std::to_string(t.shaping.complexity_c));
    put("enable_eas", t.shaping.enable_eas ? "true" : "false");
    put("enable_sau", t.shaping.enable_sau ? "true" : "false");
    put("judge", t.judge);
    put("sample_with_replacement", t.sample_with_replacement ? "true" : "false");
    put("checkpoint_every", std::to_string(t.checkpoint_every));
    put("dump_shaping", t.dump_shaping ? "true" : "false");
    put("train_queries", std::to_string(spec.train_queries));
    put("heldout_queries", std::to_string(spec.heldout_queries));
    put("query_seed", std::to_string(spec.query_seed));
    put_num("multihop_fraction", spec.multihop_fraction);
    return kv;
}

} // namespace planrl
