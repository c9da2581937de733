// SPDX-License-Identifier: Apache-2.0
//
// planrl: generate synthetic research worlds, train the tool-calling agent
// with group-relative advantage shaping, evaluate checkpoints, and analyze
// trajectory logs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planrl/config.hpp"
#include "planrl/errors.hpp"
#include "planrl/manifest.hpp"
#include "planrl/metrics.hpp"
#include "planrl/trainer.hpp"
#include "planrl/world.hpp"

namespace fs = std::filesystem;
using namespace planrl;

namespace {

// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical abort.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string resolve_out_dir(const std::string& dir) {
    if (dir.empty()) return dir;
    fs::path p(dir);
    if (p.is_absolute()) return dir;
    if (const char* root = std::getenv("PLANRL_OUT_ROOT"); root != nullptr && *root != '\0') {
        return (fs::path(root) / p).string();
    }
    return dir;
}

std::pair<int, int> parse_hops(const std::string& hops) {
    const std::size_t colon = hops.find(':');
    try {
        if (colon == std::string::npos) {
            const int h = std::stoi(hops);
            return {h, h};
        }
        return {std::stoi(hops.substr(0, colon)), std::stoi(hops.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ConfigError("--hops expects LO:HI or a single depth, got \"" + hops + "\"");
    }
}

struct TrainArgs {
    std::string config_path;
    std::string world_path;
    std::string out_dir;
    std::string mode = "both";
    std::string from_manifest;
    std::int64_t seed = -1;
    int steps = -1;
};

int run_train(const TrainArgs& args) {
    RunSpec spec;
    std::string mode = args.mode;
    std::string world_path = args.world_path;

    if (!args.from_manifest.empty()) {
        RunManifest m = load_manifest(args.from_manifest);
        spec = run_spec_from_kv(m.config);
        mode = m.mode;
        world_path = m.world_path;
        if (file_hash_hex(world_path) != m.world_hash) {
            throw DataError("world file " + world_path + " does not match the manifest hash");
        }
    } else {
        if (!args.config_path.empty()) spec = run_spec_from_kv(load_config_file(args.config_path));
        // Precedence: command-line flags beat config-file values.
        if (args.seed >= 0) spec.train.seed = static_cast<std::uint64_t>(args.seed);
        if (args.steps >= 0) spec.train.steps = args.steps;
        apply_mode(spec.train, mode);
    }
    if (world_path.empty()) throw ConfigError("train: --world is required");

    const KnowledgeWorld world = load_world(world_path);
    auto queries = sample_queries(world, spec.train_queries + spec.heldout_queries,
                                  spec.query_seed, spec.multihop_fraction);
    std::vector<Query> train_set(queries.begin(), queries.begin() + spec.train_queries);

    const std::string out_dir = resolve_out_dir(args.out_dir);
    if (out_dir.empty()) throw ConfigError("train: --out-dir is required");
    fs::create_directories(out_dir);

    RunManifest manifest;
    manifest.config = kv_from_run_spec(spec);
    manifest.mode = mode;
    manifest.world_path = world_path;
    manifest.world_hash = file_hash_hex(world_path);
    manifest.code_version = kCodeVersion;
    manifest.started_at = timestamp_utc();
    manifest.out_dir = out_dir;
    const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    write_manifest(manifest, manifest_path);

    TrainResult result = train(spec.train, world, train_set, out_dir);

    manifest.finished_at = timestamp_utc();
    write_manifest(manifest, manifest_path);

    if (!result.metrics.empty()) {
        const StepMetrics& last = result.metrics.back();
        std::cout << "trained " << result.metrics.size() << " steps; final mean reward "
                  << format_double(last.mean_reward) << "\n";
    } else {
        std::cout << "trained 0 steps\n";
    }
    std::cout << "outputs in " << out_dir << "\n";
    return 0;
}

struct AnalyzeTables {
    std::vector<std::pair<int, LogAggregates>> rows;
};

AnalyzeTables analyze_logs(const std::vector<std::string>& inputs, const TokenVocab& vocab) {
    std::vector<std::string> files;
    for (const std::string& input : inputs) {
        if (fs::is_directory(input)) {
            std::vector<std::string> found;
            for (const auto& entry : fs::directory_iterator(input)) {
                if (entry.path().extension() == ".jsonl") found.push_back(entry.path().string());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(input);
        }
    }
    AnalyzeTables tables;
    int fallback_step = 0;
    for (const std::string& file : files) {
        const std::vector<Rollout> rollouts = load_rollout_log(file, vocab);
        int step = fallback_step;
        const std::string stem = fs::path(file).stem().string();
        if (stem.rfind("step_", 0) == 0) {
            try {
                step = std::stoi(stem.substr(5));
            } catch (const std::exception&) {
                step = fallback_step;
            }
        }
        tables.rows.emplace_back(step, aggregate_rollouts(rollouts));
        ++fallback_step;
    }
    return tables;
}

int run_analyze(const std::vector<std::string>& inputs, const std::string& world_path,
                const std::string& out_dir) {
    const KnowledgeWorld world = load_world(world_path);
    const TokenVocab vocab = TokenVocab::build(world);
    const AnalyzeTables tables = analyze_logs(inputs, vocab);

    std::ostringstream stage, tiers, tools;
    stage << "step,planning_entropy,other_entropy\n";
    tiers << "step,mean_reward,frac_reward_0,frac_reward_half,frac_reward_1\n";
    tools << "step,mean_tool_calls\n";
    for (const auto& [step, agg] : tables.rows) {
        stage << step << ',' << format_double(agg.planning_entropy) << ','
              << format_double(agg.other_entropy) << "\n";
        tiers << step << ',' << format_double(agg.mean_reward) << ','
              << format_double(agg.frac_zero) << ',' << format_double(agg.frac_half) << ','
              << format_double(agg.frac_full) << "\n";
        tools << step << ',' << format_double(agg.mean_tool_calls) << "\n";
    }

    if (out_dir.empty()) {
        std::cout << "# stage entropy\n" << stage.str() << "# reward tiers\n" << tiers.str()
                  << "# tool calls\n" << tools.str();
    } else {
        const std::string resolved = resolve_out_dir(out_dir);
        fs::create_directories(resolved);
        for (const auto& [name, text] :
             {std::pair<std::string, std::string>{"stage_entropy.csv", stage.str()},
              {"reward_tiers.csv", tiers.str()},
              {"tool_calls.csv", tools.str()}}) {
            std::ofstream out(fs::path(resolved) / name, std::ios::binary);
            if (!out) throw DataError("analyze: cannot write " + name);
            out << text;
        }
        std::cout << "tables written to " << resolved << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale research-agent RL harness"};
    app.require_subcommand(1);

    // gen-world
    auto* gen = app.add_subcommand("gen-world", "generate a seeded synthetic knowledge world");
    std::uint64_t gw_seed = 0;
    int gw_entities = 50;
    int gw_relations = 4;
    std::string gw_hops = "1:2";
    std::string gw_out;
    gen->add_option("--seed", gw_seed, "world seed")->required();
    gen->add_option("--entities", gw_entities, "number of entities")->required();
    gen->add_option("--relations", gw_relations, "number of relation labels")->required();
    gen->add_option("--hops", gw_hops, "query hop depth range LO:HI (default 1:2)");
    gen->add_option("--out", gw_out, "output world file")->required();

    // train
    auto* tr = app.add_subcommand("train", "run RL training against a world");
    TrainArgs train_args;
    tr->add_option("--config", train_args.config_path, "flat key = value config file");
    tr->add_option("--world", train_args.world_path, "world file from gen-world");
    tr->add_option("--out-dir", train_args.out_dir, "run output directory")->required();
    tr->add_option("--mode", train_args.mode, "vanilla|eas|sau|both (default both)");
    tr->add_option("--seed", train_args.seed, "override the config seed");
    tr->add_option("--steps", train_args.steps, "override the config step count");
    tr->add_option("--from-manifest", train_args.from_manifest,
                   "replay a previous run from its manifest");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on sampled queries");
    std::string ev_ckpt, ev_world;
    int ev_queries = 48;
    int ev_skip = 0;
    std::uint64_t ev_query_seed = 1;
    double ev_mix = 0.75;
    bool ev_greedy = false;
    ev->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
    ev->add_option("--world", ev_world, "world file")->required();
    ev->add_option("--queries", ev_queries, "number of evaluation queries");
    ev->add_option("--skip", ev_skip, "skip this many sampled queries first");
    ev->add_option("--query-seed", ev_query_seed, "query sampling seed");
    ev->add_option("--multihop-fraction", ev_mix, "multi-hop share of sampled queries");
    ev->add_flag("--greedy", ev_greedy, "argmax decoding instead of sampling");

    // analyze
    auto* an = app.add_subcommand("analyze", "aggregate trajectory logs into metric tables");
    std::vector<std::string> an_logs;
    std::string an_world, an_out;
    an->add_option("--logs", an_logs, "log files or directories")->required();
    an->add_option("--world", an_world, "world file the logs were produced against")->required();
    an->add_option("--out-dir", an_out, "write CSV tables here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const KnowledgeWorld world =
                generate_world(gw_seed, gw_entities, gw_relations, parse_hops(gw_hops));
            save_world(world, gw_out);
            std::cout << "world with " << world.entities.size() << " entities, "
                      << world.relations.size() << " facts, " << world.pages.size()
                      << " pages -> " << gw_out << "\n";
            return 0;
        }
        if (tr->parsed()) return run_train(train_args);
        if (ev->parsed()) {
            const KnowledgeWorld world = load_world(ev_world);
            const TokenVocab vocab = TokenVocab::build(world);
            PolicyParams params = load_checkpoint(ev_ckpt);
            require_compatible(params, params.n_rows(), vocab.size(), vocab.fingerprint());
            auto queries = sample_queries(world, ev_skip + ev_queries, ev_query_seed, ev_mix);
            std::vector<Query> held(queries.begin() + ev_skip, queries.end());
            TrainConfig cfg;
            const EvalResult result = evaluate(params, world, held, ev_greedy, cfg);
            std::cout << "queries " << result.n_queries << "\naccuracy "
                      << format_double(result.accuracy) << "\nmean_tool_calls "
                      << format_double(result.mean_tool_calls) << "\n";
            return 0;
        }
        if (an->parsed()) return run_analyze(an_logs, an_world, an_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ContractError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
