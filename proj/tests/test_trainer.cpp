// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "planrl/errors.hpp"
#include "planrl/trainer.hpp"

using namespace planrl;
using namespace planrl::testing;

namespace {

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.seed = 5;
    cfg.batch_queries = 4;
    cfg.rollouts_per_query = 4;
    cfg.steps = 3;
    cfg.learning_rate = 50.0;
    cfg.feature_rows = 512;
    cfg.search_top_k = 5;
    cfg.limits.max_steps = 6;
    cfg.limits.max_segment_tokens = 4;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("steps=0 returns the initial params and no metrics") {
    const KnowledgeWorld world = tiny_world();
    auto queries = sample_queries(world, 8, 2);
    TrainConfig cfg = small_config();
    cfg.steps = 0;
    const TrainResult result = train(cfg, world, queries);
    CHECK(result.metrics.empty());
    const TokenVocab vocab = TokenVocab::build(world);
    const PolicyParams init =
        init_params(cfg.seed, cfg.init_scale, cfg.feature_rows, vocab.size(), vocab.fingerprint());
    CHECK(result.params.logits == init.logits);
}

TEST_CASE("training is deterministic given (seed, config, world)") {
    const KnowledgeWorld world = tiny_world(31, 10, 2);
    auto queries = sample_queries(world, 6, 2);
    TrainConfig cfg = small_config();
    cfg.batch_queries = 2;
    cfg.rollouts_per_query = 2;
    const TrainResult a = train(cfg, world, queries);
    const TrainResult b = train(cfg, world, queries);
    REQUIRE(a.metrics.size() == b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
        CHECK(metrics_csv_row(a.metrics[i]) == metrics_csv_row(b.metrics[i]));
    }
    CHECK(a.params.logits == b.params.logits);
}

TEST_CASE("metrics have one row per step with coherent tier fractions") {
    const KnowledgeWorld world = tiny_world();
    auto queries = sample_queries(world, 8, 2);
    TrainConfig cfg = small_config();
    const TrainResult result = train(cfg, world, queries);
    REQUIRE(result.metrics.size() == static_cast<std::size_t>(cfg.steps));
    for (const StepMetrics& m : result.metrics) {
        CHECK(std::abs(m.frac_zero + m.frac_half + m.frac_full - 1.0) < 1e-12);
        CHECK(m.mean_reward >= 0.0);
        CHECK(m.mean_reward <= 1.0);
        CHECK(m.selected_fraction >= 0.0);
        CHECK(m.mean_psi_ratio >= 0.0);
    }
}

TEST_CASE("every collected rollout lands in the trajectory log") {
    namespace fs = std::filesystem;
    const KnowledgeWorld world = tiny_world();
    auto queries = sample_queries(world, 8, 2);
    TrainConfig cfg = small_config();
    const auto out_dir = fs::temp_directory_path() / "planrl_trainer_log_test";
    fs::remove_all(out_dir);
    train(cfg, world, queries, out_dir.string());

    const TokenVocab vocab = TokenVocab::build(world);
    for (int step = 0; step < cfg.steps; ++step) {
        char name[32];
        std::snprintf(name, sizeof(name), "step_%03d.jsonl", step);
        const auto rollouts = load_rollout_log((out_dir / "trajectories" / name).string(), vocab);
        CHECK(rollouts.size() ==
              static_cast<std::size_t>(cfg.batch_queries * cfg.rollouts_per_query));
    }
    CHECK(fs::exists(out_dir / "metrics.csv"));
    CHECK(fs::exists(out_dir / "checkpoints" / "final.ckpt"));
    fs::remove_all(out_dir);
}

TEST_CASE("a run and its file outputs replay byte-identically") {
    namespace fs = std::filesystem;
    const KnowledgeWorld world = tiny_world(47, 10, 2);
    auto queries = sample_queries(world, 6, 9);
    TrainConfig cfg = small_config();
    cfg.batch_queries = 3;
    const auto dir_a = fs::temp_directory_path() / "planrl_replay_a";
    const auto dir_b = fs::temp_directory_path() / "planrl_replay_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    train(cfg, world, queries, dir_a.string());
    train(cfg, world, queries, dir_b.string());
    CHECK(slurp((dir_a / "metrics.csv").string()) == slurp((dir_b / "metrics.csv").string()));
    CHECK(slurp((dir_a / "trajectories" / "step_000.jsonl").string()) ==
          slurp((dir_b / "trajectories" / "step_000.jsonl").string()));
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("training rejects unusable configurations") {
    const KnowledgeWorld world = tiny_world();
    auto queries = sample_queries(world, 4, 2);
    TrainConfig cfg = small_config();
    cfg.batch_queries = 16; // more than available without replacement
    CHECK_THROWS_AS(train(cfg, world, queries), ConfigError);
    cfg.sample_with_replacement = true;
    CHECK_NOTHROW(train(cfg, world, queries));

    TrainConfig bad = small_config();
    bad.rollouts_per_query = 1;
    CHECK_THROWS_AS(train(bad, world, queries), ConfigError);
    CHECK_THROWS_AS(train(small_config(), world, {}), ConfigError);
}

TEST_CASE("evaluation needs queries and scores an untrained policy near chance") {
    const KnowledgeWorld world = generate_world(3, 30, 3, {2, 2});
    auto queries = sample_queries(world, 40, 7, 1.0);
    TrainConfig cfg = small_config();
    const TokenVocab vocab = TokenVocab::build(world);
    const PolicyParams params =
        init_params(1, 0.0, cfg.feature_rows, vocab.size(), vocab.fingerprint());
    CHECK_THROWS_AS(evaluate(params, world, {}, true, cfg), ConfigError);
    const EvalResult result = evaluate(params, world, queries, false, cfg);
    CHECK(result.n_queries == 40);
    CHECK(result.accuracy < 0.10); // two-hop chance level
}

TEST_CASE("compare_ablations runs all four modes from one seed") {
    const KnowledgeWorld world = tiny_world(61, 10, 2);
    auto queries = sample_queries(world, 8, 3);
    TrainConfig cfg = small_config();
    cfg.steps = 2;
    auto results = compare_ablations(cfg, world, queries);
    REQUIRE(results.size() == 4);
    CHECK(results[0].first == "vanilla");
    CHECK(results[3].first == "both");
    for (const auto& [mode, result] : results) {
        CHECK(result.metrics.size() == 2);
    }
    // identical seeds: step-0 collection metrics agree across modes
    // (shaping only affects the update, not the first batch)
    const StepMetrics& vanilla0 = results[0].second.metrics[0];
    for (std::size_t i = 1; i < results.size(); ++i) {
        const StepMetrics& other0 = results[i].second.metrics[0];
        CHECK(vanilla0.mean_reward == other0.mean_reward);
        CHECK(vanilla0.frac_zero == other0.frac_zero);
        CHECK(vanilla0.planning_entropy == other0.planning_entropy);
        CHECK(vanilla0.other_entropy == other0.other_entropy);
        CHECK(vanilla0.mean_tool_calls == other0.mean_tool_calls);
    }
    // vanilla never upweights or adds entropy bonuses
    for (const StepMetrics& m : results[0].second.metrics) {
        CHECK(m.selected_fraction == 0.0);
        CHECK(m.mean_psi_ratio == 0.0);
    }
}

TEST_CASE("aggregate_rollouts matches hand-computed values") {
    Rollout a = make_rollout("q", {plan_step({1}, {2}), answer_step({}, 3)}, 1.0);
    fill_stats(a, 0.8);
    Rollout b = make_rollout("q", {plan_step({}, {}), search_step({}, {2}),
                                   answer_step({}, 3)}, 0.0);
    fill_stats(b, 0.2);
    const LogAggregates agg = aggregate_rollouts({a, b});
    CHECK(agg.n_rollouts == 2);
    CHECK(agg.mean_reward == doctest::Approx(0.5));
    CHECK(agg.frac_zero == doctest::Approx(0.5));
    CHECK(agg.frac_full == doctest::Approx(0.5));
    CHECK(agg.mean_tool_calls == doctest::Approx(0.5));
    // planning tokens: all of a's plan step (5) + b's plan step (3)
    const double expected_planning = (5 * 0.8 + 3 * 0.2) / 8.0;
    CHECK(agg.planning_entropy == doctest::Approx(expected_planning));
}
