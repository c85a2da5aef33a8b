#include "support.hpp"

#include "irm/engine.hpp"
#include "irm/error.hpp"

#include <doctest.h>

using namespace irm;

namespace {

BehaviorRule emitting(std::vector<InfluenceDraft> drafts)
{
    BehaviorRule b;
    b.perception = [](const Percept&, AgentContext&) { return Value(); };
    b.memorization = [](const Value&, const Value& s, AgentContext&) { return s; };
    b.decision = [drafts](const Value&, AgentContext&) { return drafts; };
    return b;
}

Model one_level(BehaviorRule behavior)
{
    Model m{validate({{"l"}, {}, {}}), {}, {}, {}, {}, {}, 0};
    m.reactions[LevelId{"l"}] = identity_reaction;
    m.producible_kinds[LevelId{"l"}] = {"move"};
    m.agent_types["mover"] = AgentType{"mover", {LevelId{"l"}}, std::move(behavior)};
    return m;
}

SystemState with_agent(const Model& m, const LevelId& l)
{
    auto s = make_initial_state(m.graph);
    s = add_agent(s, AgentRecord{"a", "mover", Value(), {}});
    return register_body(s, "a", l, Body{l, Value::object()});
}

} // namespace

TEST_CASE("empty model produces nothing and only advances time")
{
    Model m{validate({{"l"}, {}, {}}), {}, {}, {{LevelId{"l"}, identity_reaction}}, {}, {}, 0};
    auto s = make_initial_state(m.graph);
    auto p = produce_influences(m, s);
    CHECK(p.per_level.at(LevelId{"l"}).empty());
    auto next = step(m, s);
    CHECK(next.time == 1);
    auto expected = s;
    expected.time = 1;
    CHECK(next == expected);
}

TEST_CASE("one agent adds its move to the carried-over set")
{
    auto m = one_level(emitting({{"move", LevelId{"l"}, Value{{"to", 1}}}}));
    auto s = with_agent(m, LevelId{"l"});
    Influence carried{InfluenceId{"reaction:l", 0, 0}, "move", LevelId{"l"}, ProducerRef::reaction("l"), Value::object(),
                      InfluenceClass::ordinary};
    s.per_level.at(LevelId{"l"}).influences.insert(carried);
    auto p = produce_influences(m, s);
    const auto& g = p.per_level.at(LevelId{"l"});
    CHECK(g.size() == 2);
    CHECK(g.contains(carried.id));
    CHECK(g.contains(InfluenceId{"agent:a", 0, 0}));
}

TEST_CASE("identity reaction clears influences and keeps sigma")
{
    auto m = one_level(emitting({{"move", LevelId{"l"}, Value::object()}}));
    auto s = with_agent(m, LevelId{"l"});
    auto next = step(m, s);
    CHECK(next.time == s.time + 1);
    CHECK(next.level(LevelId{"l"}).properties == s.level(LevelId{"l"}).properties);
    CHECK(next.level(LevelId{"l"}).influences.empty());
}

TEST_CASE("influence outside N_I+ is a contract violation")
{
    Model m{validate({{"l", "x"}, {}, {}}), {}, {}, {}, {}, {}, 0};
    m.reactions = {{LevelId{"l"}, identity_reaction}, {LevelId{"x"}, identity_reaction}};
    m.producible_kinds = {{LevelId{"l"}, {"move"}}, {LevelId{"x"}, {"move"}}};
    m.agent_types["mover"] = AgentType{"mover", {LevelId{"l"}}, emitting({{"move", LevelId{"x"}, Value::object()}})};
    auto s = with_agent(m, LevelId{"l"});
    try {
        produce_influences(m, s);
        FAIL("expected a contract violation");
    }
    catch (const ContractViolation& e) {
        CHECK(e.code() == ErrorCode::IllegalInfluenceTarget);
    }
}

TEST_CASE("undeclared kinds are rejected")
{
    auto m = one_level(emitting({{"teleport", LevelId{"l"}, Value::object()}}));
    auto s = with_agent(m, LevelId{"l"});
    CHECK_THROWS_AS(produce_influences(m, s), ContractViolation);
}

TEST_CASE("reaction failures are wrapped")
{
    auto m = one_level(emitting({}));
    m.reactions[LevelId{"l"}] = [](const ReactionInput&) -> ReactionResult { throw std::runtime_error("boom"); };
    auto s = with_agent(m, LevelId{"l"});
    try {
        step(m, s);
        FAIL("expected ReactionFault");
    }
    catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ReactionFault);
    }
}

TEST_CASE("emergence from a macro-level producer is refused at run time")
{
    Model m{validate({{"mu", "M"}, {{"mu", "M"}, {"M", "mu"}}, {{"mu", "M"}, {"M", "mu"}}}), {}, {}, {}, {}, {}, 0};
    m.reactions = {{LevelId{"mu"}, identity_reaction}, {LevelId{"M"}, identity_reaction}};
    m.producible_kinds = {{LevelId{"mu"}, {"move"}}, {LevelId{"M"}, {"jam"}}};
    m.hierarchy.couplings = {{LevelId{"mu"}, LevelId{"M"}}};
    m.hierarchy.emergences = {{"jam", LevelId{"M"}, "mover"}};
    m.agent_types["mover"] = AgentType{"mover", {LevelId{"mu"}}, emitting({{"jam", LevelId{"M"}, Value{{"trapped", {"a"}}}}})};
    auto s = make_initial_state(m.graph);
    s = add_agent(s, AgentRecord{"a", "mover", Value(), {}});
    s = register_body(s, "a", LevelId{"M"}, Body{LevelId{"M"}, {}});
    CHECK_THROWS_AS(produce_influences(m, s), ContractViolation);

    auto ok = remove_body(s, "a", LevelId{"M"});
    ok = register_body(ok, "a", LevelId{"mu"}, Body{LevelId{"mu"}, {}});
    auto p = produce_influences(m, ok);
    REQUIRE(p.per_level.at(LevelId{"M"}).size() == 1);
    CHECK(p.per_level.at(LevelId{"M"}).begin()->second.cls == InfluenceClass::emergence);
}

TEST_CASE("level processing order does not matter")
{
    std::mt19937_64 rng(21);
    for (int round = 0; round < 20; ++round) {
        auto log = std::make_shared<testkit::ProbeLog>();
        auto rm = testkit::random_walkers(rng, 3, 8, log);
        auto prod = produce_influences(rm.model, rm.state);
        std::vector<LevelId> order(rm.model.graph.levels().begin(), rm.model.graph.levels().end());
        std::shuffle(order.begin(), order.end(), rng);
        StepOptions shuffled{Execution::serial, std::nullopt, order};
        CHECK(react(rm.model, rm.state, prod).state == react(rm.model, rm.state, prod, shuffled).state);
    }
}

TEST_CASE("steps are pure and run(1) equals step")
{
    std::mt19937_64 rng(8);
    auto log = std::make_shared<testkit::ProbeLog>();
    auto rm = testkit::random_walkers(rng, 2, 5, log);
    const auto before = rm.state;
    auto a = step(rm.model, rm.state);
    auto b = step(rm.model, rm.state);
    CHECK(a == b);
    CHECK(rm.state == before);
    CHECK(run(rm.model, rm.state, 1).final_state == a);
    CHECK(step(rm.model, a) == run(rm.model, rm.state, 2).final_state);
    CHECK(log->same_step_sightings == 0);
}

TEST_CASE("serial and parallel production agree")
{
    std::mt19937_64 rng(13);
    for (int round = 0; round < 10; ++round) {
        auto log = std::make_shared<testkit::ProbeLog>();
        auto rm = testkit::random_walkers(rng, 3, 15, log);
        auto s = rm.state;
        for (int t = 0; t < 3; ++t) {
            CHECK(produce_influences_serial(rm.model, s) == produce_influences(rm.model, s));
            s = step(rm.model, s);
        }
    }
}

TEST_CASE("run stops on termination and records observer values")
{
    std::mt19937_64 rng(2);
    auto log = std::make_shared<testkit::ProbeLog>();
    auto rm = testkit::random_walkers(rng, 1, 3, log);
    RunOptions opts;
    opts.observers.push_back({"time", [](const TickView& v) -> std::optional<Value> { return Value(v.state.time); }});
    opts.termination.push_back({"three", [](const SystemState& s) { return s.time == 3; }});
    auto r = run(rm.model, rm.state, 10, opts);
    CHECK(r.ticks_run == 3);
    CHECK(r.stop_reason == "three");
    REQUIRE(r.records.size() == 3);
    CHECK(r.records.back().values == Value(3));

    auto budget = run(rm.model, rm.state, 4);
    CHECK(budget.ticks_run == 4);
    CHECK(budget.stop_reason == "tick-budget");
}
