// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "planrl/errors.hpp"
#include "planrl/rng.hpp"
#include "planrl/shaping.hpp"

using namespace planrl;
using namespace planrl::testing;

namespace {

Eigen::ArrayXd arr(std::initializer_list<double> vals) {
    Eigen::ArrayXd a(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double v : vals) a[i++] = v;
    return a;
}

// Group with the given rewards; rollout i makes tool_calls[i] search calls
// before answering, and every token reports the same entropy.
RolloutGroup group_with(const std::vector<double>& rewards, const std::vector<int>& tool_calls) {
    RolloutGroup group;
    group.query_id = "q";
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        std::vector<Step> steps{plan_step({}, {})};
        for (int c = 0; c < tool_calls[i]; ++c) steps.push_back(search_step({}, {7}));
        steps.push_back(answer_step({}, 7));
        Rollout r = make_rollout("q", std::move(steps), rewards[i]);
        fill_stats(r);
        group.rollouts.push_back(std::move(r));
    }
    return group;
}

std::vector<Eigen::ArrayXd> constant_entropies(const RolloutGroup& group, double h) {
    std::vector<Eigen::ArrayXd> out;
    for (const Rollout& r : group.rollouts) {
        out.push_back(Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(r.token_count()), h));
    }
    return out;
}

} // namespace

TEST_CASE("two-point groups standardize to +1/-1") {
    const Eigen::ArrayXd a = group_advantage(arr({1.0, 0.0}));
    CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("zero-variance groups contribute no advantage") {
    const Eigen::ArrayXd a = group_advantage(arr({0.5, 0.5, 0.5, 0.5}));
    for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a[i] == 0.0);
}

TEST_CASE("eight-point group matches the hand mean/std oracle") {
    const Eigen::ArrayXd rewards = arr({1, 1, 0, 0, 0, 0, 0, 0});
    // hand oracle: mean 0.25, population variance 0.1875
    double mean = 0.0;
    for (Eigen::Index i = 0; i < rewards.size(); ++i) mean += rewards[i];
    mean /= 8.0;
    double var = 0.0;
    for (Eigen::Index i = 0; i < rewards.size(); ++i) {
        var += (rewards[i] - mean) * (rewards[i] - mean);
    }
    var /= 8.0;
    CHECK(mean == doctest::Approx(0.25));
    CHECK(var == doctest::Approx(0.1875));
    const Eigen::ArrayXd a = group_advantage(rewards);
    CHECK(a[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(a[2] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("group_advantage needs at least two rollouts") {
    CHECK_THROWS_AS(static_cast<void>(group_advantage(arr({1.0}))), ContractError);
}

TEST_CASE("tool_call_count counts tool steps only") {
    RolloutGroup g = group_with({1.0, 0.5}, {2, 0});
    CHECK(tool_call_count(g.rollouts[0]) == 2);
    CHECK(tool_call_count(g.rollouts[1]) == 0);

    // truncated 8-step rollout: plan then seven tool calls, no answer
    std::vector<Step> steps{plan_step({}, {})};
    for (int i = 0; i < 7; ++i) steps.push_back(browse_step({}, {8}));
    CHECK(tool_call_count(make_rollout("q", std::move(steps))) == 7);
}

TEST_CASE("select_sau picks max-reward rollouts with the fewest tool calls") {
    ShapingConfig cfg;
    cfg.complexity_c = 2;
    CHECK(select_sau({3, 5, 2}, arr({1.0, 1.0, 0.5}), cfg) == std::vector<int>{0});
    CHECK(select_sau({1, 4}, arr({1.0, 1.0}), cfg).empty());     // min below threshold
    CHECK(select_sau({3, 2}, arr({0.5, 0.0}), cfg).empty());     // no max-reward rollout
    CHECK(select_sau({4, 4, 9}, arr({1.0, 1.0, 1.0}), cfg) == std::vector<int>{0, 1}); // ties
}

TEST_CASE("select_sau agrees with brute force on random groups") {
    Rng rng(0xBEEF);
    ShapingConfig cfg;
    for (int trial = 0; trial < 1000; ++trial) {
        const int g = 2 + static_cast<int>(rng.next_below(7));
        cfg.complexity_c = static_cast<int>(rng.next_below(4));
        Eigen::ArrayXd rewards(g);
        std::vector<int> calls(static_cast<std::size_t>(g));
        for (int i = 0; i < g; ++i) {
            rewards[i] = 0.5 * static_cast<double>(rng.next_below(3));
            calls[static_cast<std::size_t>(i)] = static_cast<int>(rng.next_below(7));
        }
        // brute force: evaluate the predicate literally for every index
        std::vector<int> expected;
        for (int i = 0; i < g; ++i) {
            if (rewards[i] != 1.0) continue;
            bool minimal = true;
            for (int j = 0; j < g; ++j) {
                if (rewards[j] == 1.0 &&
                    calls[static_cast<std::size_t>(j)] < calls[static_cast<std::size_t>(i)]) {
                    minimal = false;
                }
            }
            if (minimal && calls[static_cast<std::size_t>(i)] >= cfg.complexity_c) {
                expected.push_back(i);
            }
        }
        CHECK(select_sau(calls, rewards, cfg) == expected);
    }
}

TEST_CASE("apply_sau scales selected rollouts only") {
    Eigen::ArrayXd a = arr({1.0, -0.5, 0.0});
    apply_sau(a, {0}, 2.0);
    CHECK(a[0] == 2.0);
    CHECK(a[1] == -0.5);

    Eigen::ArrayXd b = arr({1.0, -1.0});
    apply_sau(b, {}, 2.0);
    CHECK(b[0] == 1.0);

    Eigen::ArrayXd c = arr({0.0, 1.0});
    apply_sau(c, {0}, 2.0);
    CHECK(c[0] == 0.0);
}

TEST_CASE("eas_term caps the bonus so negative advantages keep their sign") {
    CHECK(eas_term(10.0, -1.0, 0.1, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(-1.0 + eas_term(10.0, -1.0, 0.1, 2.0) == doctest::Approx(-0.5));
    CHECK(eas_term(0.0, 5.0, 0.1, 2.0) == 0.0);
    CHECK(eas_term(100.0, 0.0, 0.1, 2.0) == 0.0);
}

TEST_CASE("shape composes upweighting before the entropy bonus") {
    RolloutGroup group = group_with({1.0, 0.0}, {2, 2});
    ShapingConfig cfg; // defaults: alpha .1, kappa 2, lambda 2, c 2
    auto shaped = shape(group, arr({1.0, 0.0}), constant_entropies(group, 0.0), cfg);
    REQUIRE(shaped.rollouts.size() == 2);
    CHECK(shaped.rollouts[0].sau_selected);
    CHECK(shaped.rollouts[0].base_advantage == doctest::Approx(1.0));
    CHECK(shaped.rollouts[0].sau_scaled_advantage == doctest::Approx(2.0));
    CHECK(!shaped.rollouts[1].sau_selected);
    for (Eigen::Index t = 0; t < shaped.rollouts[0].final_advantage.size(); ++t) {
        CHECK(shaped.rollouts[0].final_advantage[t] == doctest::Approx(2.0));
        CHECK(shaped.rollouts[0].psi[t] == 0.0);
    }
    for (Eigen::Index t = 0; t < shaped.rollouts[1].final_advantage.size(); ++t) {
        CHECK(shaped.rollouts[1].final_advantage[t] == doctest::Approx(-1.0));
    }
}

TEST_CASE("disabling both mechanisms reproduces plain group advantages bit-exactly") {
    RolloutGroup group = group_with({1.0, 0.5, 0.0, 1.0}, {2, 3, 1, 4});
    ShapingConfig cfg;
    cfg.enable_eas = false;
    cfg.enable_sau = false;
    const Eigen::ArrayXd rewards = arr({1.0, 0.5, 0.0, 1.0});
    auto shaped = shape(group, rewards, constant_entropies(group, 1.7), cfg);
    const Eigen::ArrayXd base = group_advantage(rewards);
    for (int i = 0; i < 4; ++i) {
        const auto& rs = shaped.rollouts[static_cast<std::size_t>(i)];
        CHECK(rs.base_advantage == base[i]);
        CHECK(!rs.sau_selected);
        for (Eigen::Index t = 0; t < rs.final_advantage.size(); ++t) {
            CHECK(rs.final_advantage[t] == base[i]); // bit-exact
            CHECK(rs.psi[t] == 0.0);
        }
    }
}

TEST_CASE("alpha=0 and lambda=1 are identities") {
    RolloutGroup group = group_with({1.0, 0.0}, {3, 2});
    const Eigen::ArrayXd rewards = arr({1.0, 0.0});
    ShapingConfig cfg;
    cfg.alpha = 0.0;
    cfg.lambda = 1.0;
    auto shaped = shape(group, rewards, constant_entropies(group, 2.5), cfg);
    const Eigen::ArrayXd base = group_advantage(rewards);
    for (int i = 0; i < 2; ++i) {
        const auto& rs = shaped.rollouts[static_cast<std::size_t>(i)];
        for (Eigen::Index t = 0; t < rs.final_advantage.size(); ++t) {
            CHECK(rs.final_advantage[t] == base[i]);
        }
    }
}

TEST_CASE("shaping invariants hold on random instances") {
    Rng rng(0xD1CE);
    ShapingConfig cfg;
    for (int trial = 0; trial < 300; ++trial) {
        const int g = 2 + static_cast<int>(rng.next_below(7));
        std::vector<double> rewards(static_cast<std::size_t>(g));
        std::vector<int> calls(static_cast<std::size_t>(g));
        for (int i = 0; i < g; ++i) {
            rewards[static_cast<std::size_t>(i)] = 0.5 * static_cast<double>(rng.next_below(3));
            calls[static_cast<std::size_t>(i)] = static_cast<int>(rng.next_below(6));
        }
        RolloutGroup group = group_with(rewards, calls);
        std::vector<Eigen::ArrayXd> entropies;
        Eigen::ArrayXd reward_arr(g);
        for (int i = 0; i < g; ++i) {
            reward_arr[i] = rewards[static_cast<std::size_t>(i)];
            const auto n = static_cast<Eigen::Index>(
                group.rollouts[static_cast<std::size_t>(i)].token_count());
            Eigen::ArrayXd h(n);
            for (Eigen::Index t = 0; t < n; ++t) h[t] = 4.0 * rng.next_double();
            entropies.push_back(std::move(h));
        }
        auto shaped = shape(group, reward_arr, entropies, cfg);

        const Eigen::ArrayXd base = group_advantage(reward_arr);
        const double var = (reward_arr - reward_arr.mean()).square().mean();
        if (var > 0.0) {
            CHECK(std::abs(base.mean()) < 1e-9);
            CHECK(std::abs(std::sqrt(base.square().mean()) - 1.0) < 1e-9);
        }
        for (int i = 0; i < g; ++i) {
            const auto& rs = shaped.rollouts[static_cast<std::size_t>(i)];
            const double post = rs.sau_scaled_advantage;
            for (Eigen::Index t = 0; t < rs.psi.size(); ++t) {
                const double h = entropies[static_cast<std::size_t>(i)][t];
                CHECK(rs.psi[t] >= 0.0);
                CHECK(rs.psi[t] <= cfg.alpha * h + 1e-15);
                CHECK(rs.psi[t] <= std::abs(post) / cfg.kappa + 1e-15);
                if (post < 0.0) {
                    CHECK(rs.final_advantage[t] < 0.0);
                    CHECK(std::abs(rs.final_advantage[t]) >=
                          std::abs(post) * (1.0 - 1.0 / cfg.kappa) - 1e-12);
                }
                // monotone in H for fixed A: spot-check adjacent pairs
                if (t > 0 && entropies[static_cast<std::size_t>(i)][t - 1] <= h) {
                    CHECK(eas_term(entropies[static_cast<std::size_t>(i)][t - 1], post, cfg.alpha,
                                   cfg.kappa) <= rs.psi[t] + 1e-15);
                }
            }
        }
    }
}

TEST_CASE("shape rejects misaligned inputs") {
    RolloutGroup group = group_with({1.0, 0.0}, {2, 2});
    ShapingConfig cfg;
    std::vector<Eigen::ArrayXd> short_entropies = {Eigen::ArrayXd::Zero(1),
                                                   Eigen::ArrayXd::Zero(1)};
    CHECK_THROWS_AS(static_cast<void>(shape(group, arr({1.0, 0.0}), short_entropies, cfg)),
                    ContractError);
    CHECK_THROWS_AS(static_cast<void>(shape(group, arr({1.0}), constant_entropies(group, 0.0), cfg)),
                    ContractError);
}
