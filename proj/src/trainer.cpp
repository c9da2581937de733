// SPDX-License-Identifier: Apache-2.0
#include "planrl/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "planrl/errors.hpp"
#include "planrl/reward.hpp"

namespace planrl {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
    if (batch_queries < 1) throw ConfigError("train: batch_queries must be >= 1");
    if (rollouts_per_query < 2) throw ConfigError("train: rollouts_per_query must be >= 2");
    if (steps < 0) throw ConfigError("train: steps must be >= 0");
    if (learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");
    if (clip_eps <= 0.0 || clip_eps >= 1.0) throw ConfigError("train: clip_eps must be in (0, 1)");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (feature_rows < 1) throw ConfigError("train: feature_rows must be >= 1");
    if (search_top_k < 1) throw ConfigError("train: search_top_k must be >= 1");
    if (limits.max_steps < 1 || limits.max_segment_tokens < 1) {
        throw ConfigError("train: sampler limits must be positive");
    }
    shaping.validate();
}

void apply_mode(TrainConfig& cfg, const std::string& mode) {
    if (mode == "vanilla") {
        cfg.shaping.enable_eas = false;
        cfg.shaping.enable_sau = false;
    } else if (mode == "eas") {
        cfg.shaping.enable_eas = true;
        cfg.shaping.enable_sau = false;
    } else if (mode == "sau") {
        cfg.shaping.enable_eas = false;
        cfg.shaping.enable_sau = true;
    } else if (mode == "both") {
        cfg.shaping.enable_eas = true;
        cfg.shaping.enable_sau = true;
    } else {
        throw ConfigError("unknown mode \"" + mode + "\" (expected vanilla|eas|sau|both)");
    }
}

namespace {

struct BatchSchedule {
    std::vector<std::size_t> order;
    std::size_t pos = 0;
    std::uint64_t epoch = 0;
    std::uint64_t seed = 0;

    explicit BatchSchedule(std::size_t n, std::uint64_t seed_) : seed(seed_) {
        order.resize(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        reshuffle();
    }
    void reshuffle() {
        Rng rng = derive_rng(seed, {0xE90Cull, epoch++});
        rng.shuffle(order);
        pos = 0;
    }
    std::size_t next() {
        if (pos == order.size()) reshuffle();
        return order[pos++];
    }
};

std::string step_log_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "step_%03d.jsonl", step);
    return buf;
}

std::string step_ckpt_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "step_%03d.ckpt", step);
    return buf;
}

} // namespace

TrainResult train(const TrainConfig& cfg, const KnowledgeWorld& world,
                  const std::vector<Query>& queries, const std::string& out_dir) {
    cfg.validate();
    if (queries.empty()) throw ConfigError("train: no training queries");
    if (queries.size() < static_cast<std::size_t>(cfg.batch_queries) &&
        !cfg.sample_with_replacement) {
        throw ConfigError("train: fewer queries than batch_queries; enable "
                          "sample_with_replacement or shrink the batch");
    }

    const TokenVocab vocab = TokenVocab::build(world);
    const Judge judge = make_judge(cfg.judge);
    PolicyParams params = init_params(cfg.seed, cfg.init_scale, cfg.feature_rows, vocab.size(),
                                      vocab.fingerprint());

    const bool writing = !out_dir.empty();
    fs::path root(out_dir);
    std::ofstream shaping_dump;
    if (writing) {
        fs::create_directories(root / "trajectories");
        fs::create_directories(root / "checkpoints");
        if (cfg.dump_shaping) {
            shaping_dump.open(root / "shaping.jsonl", std::ios::binary);
        }
    }

    TrainResult result;
    BatchSchedule schedule(queries.size(), cfg.seed);
    Rng replacement_rng = derive_rng(cfg.seed, {0xBA7Cull});

    for (int step = 0; step < cfg.steps; ++step) {
        std::vector<RolloutGroup> groups;
        std::vector<std::vector<std::vector<TokenDecision>>> group_decisions;
        std::vector<ShapedAdvantages> shaped_groups;
        groups.reserve(static_cast<std::size_t>(cfg.batch_queries));

        int selected_rollouts = 0;
        double psi_ratio_sum = 0.0;
        long psi_ratio_n = 0;
        std::vector<Rollout> all_rollouts;

        for (int b = 0; b < cfg.batch_queries; ++b) {
            const std::size_t qi = cfg.sample_with_replacement
                                       ? static_cast<std::size_t>(
                                             replacement_rng.next_below(queries.size()))
                                       : schedule.next();
            const Query& query = queries[qi];

            RolloutGroup group;
            group.query_id = query.query_id;
            std::vector<std::vector<TokenDecision>> decisions;
            Eigen::ArrayXd rewards(cfg.rollouts_per_query);
            std::vector<Eigen::ArrayXd> entropies;
            for (int g = 0; g < cfg.rollouts_per_query; ++g) {
                Rng rng = derive_rng(cfg.seed, {0x5A11ull, static_cast<std::uint64_t>(step),
                                                fnv1a64(query.query_id),
                                                static_cast<std::uint64_t>(g)});
                SampledRollout sampled = sample_rollout(params, world, query, rng, cfg.limits,
                                                        vocab, cfg.search_top_k);
                const RewardBreakdown breakdown = score(sampled.rollout, query, judge, vocab);
                sampled.rollout.reward = breakdown.total;
                rewards[g] = breakdown.total;
                Eigen::ArrayXd h(static_cast<Eigen::Index>(sampled.rollout.per_token.size()));
                for (std::size_t t = 0; t < sampled.rollout.per_token.size(); ++t) {
                    h[static_cast<Eigen::Index>(t)] = sampled.rollout.per_token.entropy[t];
                }
                entropies.push_back(std::move(h));
                group.rollouts.push_back(std::move(sampled.rollout));
                decisions.push_back(std::move(sampled.decisions));
            }

            ShapedAdvantages shaped = shape(group, rewards, entropies, cfg.shaping);
            for (int g = 0; g < cfg.rollouts_per_query; ++g) {
                const RolloutShaped& rs = shaped.rollouts[static_cast<std::size_t>(g)];
                auto& dec = decisions[static_cast<std::size_t>(g)];
                if (static_cast<Eigen::Index>(dec.size()) != rs.final_advantage.size()) {
                    throw ContractError("train: decisions misaligned with shaped advantages");
                }
                for (std::size_t t = 0; t < dec.size(); ++t) {
                    dec[t].advantage = rs.final_advantage[static_cast<Eigen::Index>(t)];
                }
                if (rs.sau_selected) ++selected_rollouts;
                const double abs_adv = std::abs(rs.sau_scaled_advantage);
                if (abs_adv > 0.0) {
                    psi_ratio_sum += (rs.psi / abs_adv).sum();
                    psi_ratio_n += rs.psi.size();
                }
                if (writing && cfg.dump_shaping) {
                    nlohmann::ordered_json line;
                    line["step"] = step;
                    line["rollout"] = group.query_id + "#" + std::to_string(g);
                    line["base_advantage"] = rs.base_advantage;
                    line["upweighted"] = rs.sau_selected;
                    line["mean_psi"] =
                        rs.psi.size() ? rs.psi.mean() : 0.0;
                    shaping_dump << line.dump() << "\n";
                }
            }

            for (const Rollout& r : group.rollouts) all_rollouts.push_back(r);
            groups.push_back(std::move(group));
            group_decisions.push_back(std::move(decisions));
            shaped_groups.push_back(std::move(shaped));
        }

        // Gradient phase: mean over groups of the per-group token-mean
        // surrogate. Extra epochs reuse the frozen behavior stats.
        const double inv_groups = 1.0 / static_cast<double>(groups.size());
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(params.logits.rows(),
                                                         params.logits.cols());
            double objective = 0.0;
            for (const auto& decisions : group_decisions) {
                SurrogateGrad g = surrogate_gradient(params, decisions, cfg.clip_eps, cfg.kl_beta);
                grad += inv_groups * g.grads;
                objective += inv_groups * g.objective_value;
            }
            if (!std::isfinite(objective) || !grad.allFinite()) {
                if (writing) save_checkpoint(params, (root / "checkpoints" / "last_good.ckpt").string());
                throw NumericalError("train: non-finite objective at step " +
                                     std::to_string(step));
            }
            params = apply_update(std::move(params), grad, cfg.learning_rate, cfg.max_grad_norm);
        }

        StepMetrics m;
        const LogAggregates agg = aggregate_rollouts(all_rollouts);
        m.step = step;
        m.mean_reward = agg.mean_reward;
        m.frac_zero = agg.frac_zero;
        m.frac_half = agg.frac_half;
        m.frac_full = agg.frac_full;
        m.planning_entropy = agg.planning_entropy;
        m.other_entropy = agg.other_entropy;
        m.mean_tool_calls = agg.mean_tool_calls;
        m.mean_psi_ratio = psi_ratio_n ? psi_ratio_sum / static_cast<double>(psi_ratio_n) : 0.0;
        m.selected_fraction =
            static_cast<double>(selected_rollouts) / static_cast<double>(all_rollouts.size());
        result.metrics.push_back(m);

        if (writing) {
            append_rollout_log((root / "trajectories" / step_log_name(step)).string(),
                               all_rollouts, vocab);
            if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0) {
                save_checkpoint(params, (root / "checkpoints" / step_ckpt_name(step)).string());
            }
        }
    }

    if (writing) {
        save_checkpoint(params, (root / "checkpoints" / "final.ckpt").string());
        write_metrics_csv((root / "metrics.csv").string(), result.metrics);
    }
    result.params = std::move(params);
    return result;
}

EvalResult evaluate(const PolicyParams& params, const KnowledgeWorld& world,
                    const std::vector<Query>& queries, bool greedy, const TrainConfig& cfg,
                    std::uint64_t eval_seed) {
    if (queries.empty()) throw ConfigError("evaluate: no queries to evaluate");
    const TokenVocab vocab = TokenVocab::build(world);
    require_compatible(params, params.n_rows(), params.n_tokens(), vocab.fingerprint());
    const Judge judge = make_judge(cfg.judge);

    EvalResult out;
    out.n_queries = static_cast<int>(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        Rng rng = derive_rng(eval_seed, {0xE7A1ull, fnv1a64(queries[i].query_id)});
        SampledRollout sampled =
            sample_rollout(params, world, queries[i], rng, cfg.limits, vocab, cfg.search_top_k,
                           greedy);
        const RewardBreakdown breakdown = score(sampled.rollout, queries[i], judge, vocab);
        if (breakdown.total == 1.0) out.accuracy += 1.0;
        out.mean_tool_calls += tool_call_count(sampled.rollout);
    }
    out.accuracy /= static_cast<double>(queries.size());
    out.mean_tool_calls /= static_cast<double>(queries.size());
    return out;
}

std::vector<std::pair<std::string, TrainResult>> compare_ablations(
    const TrainConfig& base, const KnowledgeWorld& world, const std::vector<Query>& queries,
    const std::string& out_root) {
    std::vector<std::pair<std::string, TrainResult>> results;
    for (const char* mode : {"vanilla", "eas", "sau", "both"}) {
        TrainConfig cfg = base;
        apply_mode(cfg, mode);
        std::string out_dir;
        if (!out_root.empty()) {
            out_dir = (fs::path(out_root) / mode).string();
            fs::create_directories(out_dir);
        }
        results.emplace_back(mode, train(cfg, world, queries, out_dir));
    }
    return results;
}

} // namespace planrl
