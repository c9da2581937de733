// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "helpers.hpp"
#include "planrl/errors.hpp"
#include "planrl/reward.hpp"

using namespace planrl;
using namespace planrl::testing;

TEST_CASE("normalized exact match judge") {
    const Judge judge = make_judge("normalized_exact_match");
    CHECK(judge_match("Pawtucket, Rhode Island", "pawtucket, rhode island", judge));
    CHECK(!judge_match("Darby", "Pawtucket", judge));
    CHECK(judge_match("the Eiffel Tower", "Eiffel Tower", judge));
    CHECK(judge_match("  spaced  out  ", "spaced out", judge));
    CHECK(!judge_match("", "something", judge));
    CHECK_THROWS_AS(make_judge("llm"), ConfigError);
}

namespace {

struct Fixture {
    KnowledgeWorld world = tiny_world();
    TokenVocab vocab = TokenVocab::build(world);
    Judge judge = make_judge("normalized_exact_match");
    Query query;

    Fixture() {
        query = sample_queries(world, 1, 4)[0];
    }
    int sym(const std::string& name) const { return vocab.id(name); }

    Rollout well_formed(const std::string& answer) const {
        return make_rollout(query.query_id,
                            {plan_step({}, {}),
                             search_step({}, {sym(query.start_entity)}),
                             answer_step({}, sym(answer))});
    }
};

} // namespace

TEST_CASE("score: well-formed and correct earns the full reward") {
    Fixture f;
    const auto breakdown = score(f.well_formed(f.query.answer), f.query, f.judge, f.vocab);
    CHECK(breakdown.format_ok);
    CHECK(breakdown.answer_ok);
    CHECK(breakdown.total == 1.0);
}

TEST_CASE("score: format failure zeroes a correct answer") {
    Fixture f;
    Rollout r = f.well_formed(f.query.answer);
    r.steps.erase(r.steps.begin()); // drop the first-round plan
    const auto breakdown = score(r, f.query, f.judge, f.vocab);
    CHECK(!breakdown.format_ok);
    CHECK(breakdown.answer_ok);
    CHECK(breakdown.total == 0.0);
}

TEST_CASE("score: well-formed but wrong answer earns the format half") {
    Fixture f;
    std::string wrong = f.world.entities[0] == f.query.answer ? f.world.entities[1]
                                                              : f.world.entities[0];
    const auto breakdown = score(f.well_formed(wrong), f.query, f.judge, f.vocab);
    CHECK(breakdown.format_ok);
    CHECK(!breakdown.answer_ok);
    CHECK(breakdown.total == 0.5);
}

TEST_CASE("reward image is exactly {0, 0.5, 1} and the override is monotone") {
    Fixture f;
    // enumerate format-good/bad x answer-good/bad
    for (bool good_format : {true, false}) {
        for (bool good_answer : {true, false}) {
            Rollout r = f.well_formed(good_answer ? f.query.answer
                                                  : f.world.entities[0] == f.query.answer
                                                        ? f.world.entities[1]
                                                        : f.world.entities[0]);
            if (!good_format) r.steps.erase(r.steps.begin());
            const auto breakdown = score(r, f.query, f.judge, f.vocab);
            CHECK((breakdown.total == 0.0 || breakdown.total == 0.5 || breakdown.total == 1.0));
            if (!good_format) CHECK(breakdown.total == 0.0);
        }
    }
}

TEST_CASE("truncated rollouts score zero even mid-task") {
    Fixture f;
    Rollout r = make_rollout(f.query.query_id,
                             {plan_step({}, {}), search_step({}, {f.sym(f.query.start_entity)})});
    const auto breakdown = score(r, f.query, f.judge, f.vocab);
    CHECK(breakdown.total == 0.0);
    CHECK(!breakdown.answer_ok);
}
