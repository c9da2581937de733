// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "planrl/errors.hpp"
#include "planrl/sampler.hpp"

using namespace planrl;
using namespace planrl::testing;

namespace {

struct Fixture {
    KnowledgeWorld world = tiny_world(23, 12, 2, {1, 2});
    TokenVocab vocab = TokenVocab::build(world);
    PolicyParams params = init_params(1, 0.0, 512, vocab.size(), vocab.fingerprint());
    std::vector<Query> queries = sample_queries(world, 10, 3);
    SamplerLimits limits;
};

} // namespace

TEST_CASE("sampled rollouts satisfy the grammar by construction") {
    Fixture f;
    for (const Query& q : f.queries) {
        for (std::uint64_t g = 0; g < 6; ++g) {
            Rng rng = derive_rng(5, {fnv1a64(q.query_id), g});
            const SampledRollout s =
                sample_rollout(f.params, f.world, q, rng, f.limits, f.vocab, 5);
            const FormatReport report = validate_format(s.rollout);
            // only the terminal-answer requirement may fail, via step cutoff
            for (FormatViolation v : report.violations) {
                CHECK(v == FormatViolation::NoTerminalAnswer);
            }
            CHECK(s.rollout.steps.front().action_kind == ActionKind::Plan);
            CHECK(s.rollout.steps.size() <= static_cast<std::size_t>(f.limits.max_steps));
            // per-token stats aligned with the token stream, all loss-masked
            CHECK(s.rollout.per_token.aligned());
            CHECK(s.rollout.per_token.size() == s.rollout.token_count());
            CHECK(s.decisions.size() == s.rollout.token_count());
            for (bool m : s.rollout.per_token.loss_mask) CHECK(m);
            // tool responses exactly on tool steps
            for (const Step& step : s.rollout.steps) {
                CHECK(step.tool_response.has_value() ==
                      (step.action_kind == ActionKind::ToolCall));
            }
        }
    }
}

TEST_CASE("sampling is deterministic per rng stream") {
    Fixture f;
    const Query& q = f.queries[0];
    Rng rng_a = derive_rng(7, {1});
    Rng rng_b = derive_rng(7, {1});
    const SampledRollout a = sample_rollout(f.params, f.world, q, rng_a, f.limits, f.vocab, 5);
    const SampledRollout b = sample_rollout(f.params, f.world, q, rng_b, f.limits, f.vocab, 5);
    CHECK(a.rollout == b.rollout);
}

TEST_CASE("greedy decoding is deterministic without randomness") {
    Fixture f;
    Rng rng(1);
    const SampledRollout a =
        sample_rollout(f.params, f.world, f.queries[1], rng, f.limits, f.vocab, 5, true);
    Rng rng2(999);
    const SampledRollout b =
        sample_rollout(f.params, f.world, f.queries[1], rng2, f.limits, f.vocab, 5, true);
    CHECK(a.rollout == b.rollout);
}

TEST_CASE("a one-step limit truncates without an answer") {
    Fixture f;
    SamplerLimits limits;
    limits.max_steps = 1;
    Rng rng(3);
    const SampledRollout s =
        sample_rollout(f.params, f.world, f.queries[0], rng, limits, f.vocab, 5);
    CHECK(s.rollout.steps.size() == 1);
    CHECK(s.rollout.steps[0].action_kind == ActionKind::Plan);
    CHECK(!validate_format(s.rollout).ok);
}

TEST_CASE("segment caps bound every segment") {
    Fixture f;
    SamplerLimits limits;
    limits.max_segment_tokens = 3;
    for (std::uint64_t g = 0; g < 8; ++g) {
        Rng rng = derive_rng(11, {g});
        const SampledRollout s =
            sample_rollout(f.params, f.world, f.queries[2], rng, limits, f.vocab, 5);
        for (const Step& step : s.rollout.steps) {
            CHECK(step.think_segment.size() <= 4);  // 3 content + <end>
            CHECK(step.action_segment.size() <= 5); // marker + 3 args + <end>
        }
    }
}

TEST_CASE("behavior-policy log-probs are frozen at sampling time") {
    Fixture f;
    Rng rng(17);
    const SampledRollout s =
        sample_rollout(f.params, f.world, f.queries[3], rng, f.limits, f.vocab, 5);
    for (const TokenDecision& d : s.decisions) {
        const TokenDistribution dist = next_distribution(f.params, d.row, d.legal);
        // ratios at collection time are exactly one
        CHECK(std::exp(dist.log_prob_of(d.chosen) - d.old_log_prob) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("entropy stays within the masked-support bound") {
    Fixture f;
    PolicyParams params = init_params(5, 0.8, 512, f.vocab.size(), f.vocab.fingerprint());
    Rng rng(23);
    const SampledRollout s =
        sample_rollout(params, f.world, f.queries[4], rng, f.limits, f.vocab, 5);
    for (std::size_t t = 0; t < s.decisions.size(); ++t) {
        const double h = s.rollout.per_token.entropy[t];
        CHECK(h >= 0.0);
        CHECK(h <= std::log(static_cast<double>(s.decisions[t].legal.size())) + 1e-12);
    }
}

TEST_CASE("a trained-deterministic policy replays identical rollouts") {
    Fixture f;
    // force determinism: a steep id-ordered ramp makes the lowest legal
    // token dominate every masked softmax
    PolicyParams params = init_params(1, 0.0, 512, f.vocab.size(), f.vocab.fingerprint());
    for (int c = 0; c < params.n_tokens(); ++c) {
        params.logits.col(c).setConstant(40.0 * static_cast<double>(params.n_tokens() - c));
    }
    Rng rng_a(1), rng_b(2);
    const SampledRollout a =
        sample_rollout(params, f.world, f.queries[5], rng_a, f.limits, f.vocab, 5);
    const SampledRollout b =
        sample_rollout(params, f.world, f.queries[5], rng_b, f.limits, f.vocab, 5);
    CHECK(a.rollout == b.rollout);
}
