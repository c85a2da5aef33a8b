#include "support.hpp"

#include "irm/fms/deadlock.hpp"

#include <doctest.h>

using namespace irm;
using namespace irm::fms;

namespace {

// Two loaded AGVs facing each other in a four-cell aisle with one side pocket.
testkit::FmsFixture pocket(bool control)
{
    FmsParams p;
    p.repulse_amplitude = 0;
    p.control = control;
    auto fx = testkit::fms_fixture({"....", "#.##"}, {{"S0", {0, 0}}, {"S1", {3, 0}}}, {{"a1", {1, 0}}, {"a2", {2, 0}}},
                                   {{"t1", "S0", "S1", 0}, {"t2", "S1", "S0", 0}}, p);
    auto load = [&](TaskBook& b, const std::string& t, const std::string& a) {
        auto r = testkit::assigned_record(*fx.world, t, a);
        r.state = TaskState::picked;
        r.history.push_back(TaskState::picked);
        b.tasks[t] = r;
    };
    fx.state = testkit::edit_tasks(fx.state, *fx.world, [&](TaskBook& b) {
        load(b, "t1", "a1");
        load(b, "t2", "a2");
        b.tasks["t2"].arrival = 1;
        b.next_arrival = 2;
    });
    fx.state = testkit::edit_floor(fx.state, *fx.world, [](FloorView& v) {
        auto& a1 = v.agvs.at("a1");
        a1.carrying = a1.assigned = "t1";
        a1.goal = "S1";
        auto& a2 = v.agvs.at("a2");
        a2.carrying = a2.assigned = "t2";
        a2.goal = "S0";
        v.progress = {{"t1", "picked"}, {"t2", "picked"}};
        v.shops.at("S1").pending = {"t1"};
        v.shops.at("S0").pending = {"t2"};
        v.shops.at("S0").emitting = v.shops.at("S1").emitting = true;
    });
    return fx;
}

std::vector<Influence> emergences(const Production& p)
{
    std::vector<Influence> out;
    for (const auto& [l, set] : p.per_level)
        for (const auto& [id, i] : set)
            if (i.cls == InfluenceClass::emergence) out.push_back(i);
    return out;
}

ControlBook control_of(const testkit::FmsFixture& fx, const SystemState& s)
{
    return ControlBook::read(s.level(fx.world->levels().control).properties);
}

} // namespace

TEST_CASE("facing AGVs form a wait cycle and raise one emergence")
{
    auto fx = pocket(false);
    auto floor = FloorView::read(fx.state.level(fx.world->levels().floor).properties);
    auto w = analyze_waits(*fx.world, floor);
    CHECK(w.edges.at("a1") == std::set<std::string>{"a2"});
    CHECK(w.edges.at("a2") == std::set<std::string>{"a1"});
    CHECK(w.cycle_members == std::set<std::string>{"a1", "a2"});
    CHECK(w.groups == std::vector<std::set<std::string>>{{"a1", "a2"}});

    auto e = emergences(produce_influences(fx.model, fx.state));
    REQUIRE(e.size() == 1);
    CHECK(e[0].kind == kinds::deadlock_emergence);
    CHECK(e[0].target == fx.world->levels().control);
    CHECK(trapped_members(e[0].payload) == std::set<std::string>{"a1", "a2"});
}

TEST_CASE("the pocket deadlock is solved within four ticks of detection")
{
    auto fx = pocket(true);
    auto s = fx.state;
    std::optional<Tick> detected;
    std::optional<Tick> resolved;
    for (int t = 0; t < 20 && !resolved; ++t) {
        s = step(fx.model, s);
        auto book = control_of(fx, s);
        if (!detected && book.spawned > 0) {
            detected = s.time;
            REQUIRE(book.active.size() == 1);
            CHECK(book.active.begin()->second == std::set<std::string>{"a1", "a2"});
            CHECK(s.agents.count(AgentId(book.active.begin()->first)) == 1);
        }
        if (book.resolved > 0) resolved = s.time;
        CHECK(fms::safety_violations(*fx.world, s).empty());
    }
    REQUIRE(detected);
    REQUIRE(resolved);
    CHECK(*resolved - *detected <= 4);
    auto book = control_of(fx, s);
    CHECK(book.active.empty());
    for (const auto& [id, a] : s.agents) CHECK(a.type != types::deadlock_solver);

    auto r = run(fx.model, s, 40, RunOptions{{}, {all_delivered(fx.world)}, {}});
    CHECK(r.stop_reason == "all-delivered");
}

TEST_CASE("without control the deadlock is only recorded")
{
    auto fx = pocket(false);
    auto r = run(fx.model, fx.state, 30);
    auto book = control_of(fx, r.final_state);
    CHECK(book.detected() == 1);
    CHECK(book.resolved == 0);
    CHECK(testkit::agv_at(r.final_state, *fx.world, "a1").cell == Cell{1, 0});
    CHECK(testkit::agv_at(r.final_state, *fx.world, "a2").cell == Cell{2, 0});
}

TEST_CASE("free-flowing traffic raises nothing")
{
    auto fx = testkit::fms_fixture({"......."}, {{"S0", {0, 0}}, {"S1", {6, 0}}}, {{"a1", {3, 0}}},
                                   {{"t1", "S0", "S1", 0}, {"t2", "S1", "S0", 4}});
    auto s = fx.state;
    for (int t = 0; t < 40; ++t) {
        CHECK(emergences(produce_influences(fx.model, s)).empty());
        s = step(fx.model, s);
    }
    CHECK(control_of(fx, s).spawned == 0);
}

TEST_CASE("idle AGVs are never reported")
{
    auto fx = testkit::fms_fixture({"....."}, {{"S0", {0, 0}}, {"S1", {4, 0}}}, {{"a1", {1, 0}}, {"a2", {2, 0}}, {"a3", {3, 0}}}, {});
    auto r = run(fx.model, fx.state, 15);
    auto floor = FloorView::read(r.final_state.level(fx.world->levels().floor).properties);
    auto w = analyze_waits(*fx.world, floor);
    CHECK(w.edges.empty());
    CHECK(w.stalled.empty());
    CHECK(control_of(fx, r.final_state).spawned == 0);
}

TEST_CASE("reported cycle members are exactly the nodes on cycles")
{
    std::mt19937_64 rng(17);
    for (int round = 0; round < 150; ++round) {
        const int w = std::uniform_int_distribution<int>(2, 7)(rng);
        const int h = std::uniform_int_distribution<int>(1, 5)(rng);
        std::vector<Cell> cells;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) cells.push_back(Cell{x, y});
        std::shuffle(cells.begin(), cells.end(), rng);
        FmsConfig cfg;
        cfg.grid = GridMap(w, h);
        cfg.params.repulse_amplitude = std::uniform_int_distribution<int>(0, 3)(rng);
        cfg.shops = {{"S0", cells[0]}, {"S1", cells[1]}};
        FmsWorld world(cfg);
        FloorView floor;
        const std::size_t n = std::min<std::size_t>(cells.size() - 2, 2 + rng() % 6);
        for (std::size_t i = 0; i < n; ++i) {
            AgvBody b;
            b.cell = cells[2 + i];
            if (rng() % 4 != 0) {
                b.assigned = "t";
                b.goal = rng() % 2 ? "S0" : "S1";
                b.repulsing = rng() % 2 == 0;
            }
            b.moved = rng() % 5 == 0;
            floor.agvs["a" + std::to_string(i)] = b;
        }
        auto analysis = analyze_waits(world, floor);
        CHECK(analysis.cycle_members == oracle::cycle_nodes(analysis.edges));
        for (const auto& [id, targets] : analysis.edges) {
            const auto& b = floor.agvs.at(id);
            CHECK_FALSE(b.idle());
            CHECK_FALSE(b.moved);
            CHECK(targets.count(id) == 0);
        }
        std::set<std::string> grouped;
        for (const auto& g : analysis.groups) grouped.insert(g.begin(), g.end());
        std::set<std::string> expected = analysis.cycle_members;
        expected.insert(analysis.stalled.begin(), analysis.stalled.end());
        CHECK(grouped == expected);
    }
}

TEST_CASE("a sealed aisle has no escape")
{
    FmsParams p;
    p.repulse_amplitude = 0;
    auto fx = testkit::fms_fixture({"...."}, {{"S0", {0, 0}}, {"S1", {3, 0}}}, {{"a1", {1, 0}}, {"a2", {2, 0}}},
                                   {{"t1", "S0", "S1", 0}, {"t2", "S1", "S0", 0}}, p);
    FloorView floor = FloorView::read(fx.state.level(fx.world->levels().floor).properties);
    auto& a1 = floor.agvs.at("a1");
    a1.carrying = a1.assigned = "t1";
    a1.goal = "S1";
    auto& a2 = floor.agvs.at("a2");
    a2.carrying = a2.assigned = "t2";
    a2.goal = "S0";
    auto action = plan_resolution(*fx.world, floor, {"a1", "a2"}, std::nullopt, std::nullopt);
    CHECK(action.kind == SolverAction::Kind::no_escape);
}
