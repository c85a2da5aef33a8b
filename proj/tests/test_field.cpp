#include "support.hpp"

#include "irm/error.hpp"
#include "irm/fms/field.hpp"

#include <doctest.h>

using namespace irm;
using namespace irm::fms;

TEST_CASE("single attractor decays linearly")
{
    GridMap g(5, 5);
    std::vector<Emitter> a{{Cell{2, 2}, 5}};
    auto f = compute_fields(g, a, {});
    CHECK(f.at(Cell{2, 2}) == 5);
    CHECK(f.at(Cell{2, 0}) == 3);
    CHECK(f.at(Cell{0, 0}) == 1);
    CHECK(f.at(Cell{4, 4}) == 1);
}

TEST_CASE("attraction and repulsion at one cell add up")
{
    GridMap g(5, 5);
    std::vector<Emitter> a{{Cell{2, 2}, 5}};
    std::vector<Emitter> r{{Cell{2, 2}, 3}};
    auto f = compute_fields(g, a, r);
    CHECK(f.at(Cell{2, 2}) == 2);
    CHECK(f.at(Cell{3, 2}) == 2);
    CHECK(f.at(Cell{4, 2}) == 2);
    CHECK(f.at(Cell{4, 4}) == 1);
}

TEST_CASE("no emitters give a flat zero field")
{
    auto g = GridMap::from_rows({"..#", "...", "#.."});
    auto f = compute_fields(g, {}, {});
    CHECK(f.potential == std::vector<int>(g.size(), 0));
}

TEST_CASE("walls bend distances")
{
    auto g = GridMap::from_rows({".#.", ".#.", "..."});
    std::vector<Emitter> a{{Cell{0, 0}, 10}};
    auto f = compute_fields(g, a, {});
    CHECK(f.at(Cell{2, 0}) == 10 - 6);
    CHECK(f.at(Cell{1, 0}) == 0);
}

TEST_CASE("emitter on a blocked cell is rejected")
{
    auto g = GridMap::from_rows({".#"});
    std::vector<Emitter> a{{Cell{1, 0}, 3}};
    try {
        compute_fields(g, a, {});
        FAIL("expected an error");
    }
    catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmitterOnBlockedCell);
    }
    std::vector<Emitter> outside{{Cell{5, 0}, 3}};
    CHECK_THROWS_AS(compute_fields(g, {}, outside), Error);
}

TEST_CASE("random placements match the relaxation oracle")
{
    std::mt19937_64 rng(31);
    for (int round = 0; round < 60; ++round) {
        const int w = std::uniform_int_distribution<int>(1, 9)(rng);
        const int h = std::uniform_int_distribution<int>(1, 9)(rng);
        std::set<Cell> blocked;
        std::bernoulli_distribution wall(0.25);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (wall(rng)) blocked.insert(Cell{x, y});
        GridMap g(w, h, blocked);
        std::vector<Cell> free;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g.is_free(g.cell_at(i))) free.push_back(g.cell_at(i));
        if (free.empty()) continue;
        std::vector<Emitter> a, r;
        const int na = std::uniform_int_distribution<int>(0, 4)(rng);
        const int nr = std::uniform_int_distribution<int>(0, 4)(rng);
        for (int i = 0; i < na; ++i) a.push_back({free[rng() % free.size()], static_cast<int>(rng() % 12)});
        for (int i = 0; i < nr; ++i) r.push_back({free[rng() % free.size()], static_cast<int>(rng() % 6)});
        const auto par = compute_fields(g, a, r);
        CHECK(par.potential == oracle::brute_field(g, a, r));
        CHECK(par == compute_fields_serial(g, a, r));
    }
}
