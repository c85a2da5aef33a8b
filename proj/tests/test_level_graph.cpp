#include "support.hpp"

#include "irm/error.hpp"
#include "irm/level_graph.hpp"

#include <doctest.h>

using namespace irm;

namespace {

void check_against_oracle(const LevelGraphSpec& spec)
{
    auto g = validate(spec);
    for (const auto& l : spec.levels) {
        CHECK(g.out_influence(l) == oracle::out_hood(spec.influence_edges, l));
        CHECK(g.in_influence(l) == oracle::in_hood(spec.influence_edges, l));
        CHECK(g.out_perception(l) == oracle::out_hood(spec.perception_edges, l));
        CHECK(g.in_perception(l) == oracle::in_hood(spec.perception_edges, l));
    }
}

} // namespace

TEST_CASE("perception edge only")
{
    auto g = validate({{"l", "l2"}, {}, {{"l", "l2"}}});
    CHECK(g.warnings().empty());
    CHECK(g.out_perception(LevelId{"l"}) == LevelSet{"l", "l2"});
    CHECK(g.out_perception(LevelId{"l2"}) == LevelSet{"l2"});
    CHECK(g.out_influence(LevelId{"l"}) == LevelSet{"l"});
}

TEST_CASE("self-loops are dropped with a warning")
{
    auto g = validate({{"l"}, {{"l", "l"}}, {}});
    REQUIRE(g.warnings().size() == 1);
    CHECK(g.out_influence(LevelId{"l"}) == LevelSet{"l"});
    CHECK_FALSE(g.has_influence_edge("l", "l"));
}

TEST_CASE("graph construction errors")
{
    CHECK_THROWS_WITH_AS(validate({{"l"}, {{"l", "x"}}, {}}), doctest::Contains("UnknownLevelEndpoint"), Error);
    try {
        validate({{}, {}, {}});
        FAIL("expected an error");
    }
    catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyLevelSet);
    }
    auto g = validate({{"l"}, {}, {}});
    CHECK_THROWS_AS(g.out_influence(LevelId{"nope"}), Error);
}

TEST_CASE("micro/macro pair")
{
    auto g = validate({{"mu", "M"}, {{"mu", "M"}, {"M", "mu"}}, {}});
    CHECK(g.out_influence(LevelId{"mu"}) == LevelSet{"mu", "M"});
    auto h = validate({{"mu", "M"}, {{"mu", "M"}}, {}});
    CHECK(h.in_influence(LevelId{"M"}) == LevelSet{"M", "mu"});
    CHECK(h.in_influence(LevelId{"mu"}) == LevelSet{"mu"});
    CHECK(h.out_perception(LevelId{"mu"}) == LevelSet{"mu"});
}

TEST_CASE("neighborhoods match the set definitions on random graphs")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        auto spec = oracle::random_graph(rng, 6);
        check_against_oracle(spec);
        auto g = validate(spec);
        for (const auto& a : spec.levels) {
            for (const auto& b : spec.levels) {
                CHECK((g.out_influence(a).count(b) != 0) == (g.in_influence(b).count(a) != 0));
            }
        }
    }
}

TEST_CASE("set-valued neighborhoods are unions")
{
    auto g = validate({{"a", "b", "c"}, {{"a", "b"}, {"c", "a"}}, {{"b", "c"}}});
    CHECK(g.out_influence(LevelSet{"a", "c"}) == LevelSet{"a", "b", "c"});
    CHECK(g.out_perception(LevelSet{"a", "b"}) == LevelSet{"a", "b", "c"});
    CHECK(g.out_influence(LevelSet{}) == LevelSet{});
}
