#include "support.hpp"

#include "irm/hierarchy.hpp"

#include <doctest.h>

using namespace irm;

namespace {

Influence ordinary(const std::string& producer, std::uint32_t seq, const std::string& kind, Value payload = Value::object())
{
    return Influence{InfluenceId{producer, 0, seq}, kind, LevelId{"mu"}, ProducerRef::parse(producer), std::move(payload),
                     InfluenceClass::ordinary};
}

Influence constraint(const std::string& producer, std::uint32_t seq, const InfluenceSelector& sel)
{
    return Influence{InfluenceId{producer, 0, seq}, "no-move", LevelId{"mu"}, ProducerRef::parse(producer),
                     constraint_payload(sel), InfluenceClass::constraint};
}

struct Setup {
    ValidatedLevelGraph graph = validate({{"mu", "M"}, {{"mu", "M"}, {"M", "mu"}}, {{"mu", "M"}, {"M", "mu"}}});
    KindTable kinds{{LevelId{"mu"}, {"move", "no-move"}}, {LevelId{"M"}, {"jam", "cleared"}}};
    HierarchySpec spec{{{LevelId{"mu"}, LevelId{"M"}}},
                       {{"jam", LevelId{"M"}, "detector"}},
                       {{"no-move", LevelId{"mu"}, "move", {"solver"}}}};
    std::vector<ProducerDecl> producers{{"walker", {LevelId{"mu"}}}, {"detector", {LevelId{"mu"}}}, {"solver", {LevelId{"M"}}}};
};

bool has_code(const std::vector<HierarchyViolation>& v, ErrorCode c)
{
    return std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.code == c; });
}

} // namespace

TEST_CASE("well-formed hierarchy passes the static check")
{
    Setup s;
    CHECK(check_hierarchy(s.graph, s.kinds, s.spec, s.producers).empty());
}

TEST_CASE("emergence legality")
{
    Setup s;
    Influence jam{InfluenceId{"env:detector", 0, 0}, "jam", LevelId{"M"}, ProducerRef::environment("detector"),
                  Value{{"trapped", {"a1", "a2"}}}, InfluenceClass::emergence};
    const auto& c = s.spec.couplings.front();
    CHECK_FALSE(check_emergence_legality(s.kinds, s.spec, c, jam, s.producers[1]).has_value());

    auto v = check_emergence_legality(s.kinds, s.spec, c, jam, s.producers[2]);
    REQUIRE(v.has_value());
    CHECK(v->code == ErrorCode::ForbiddenEmergenceProducer);

    s.spec.emergences.front().detector = "solver";
    CHECK(has_code(check_hierarchy(s.graph, s.kinds, s.spec, s.producers), ErrorCode::ForbiddenEmergenceProducer));

    Setup t;
    t.kinds[LevelId{"mu"}].insert("jam");
    CHECK(has_code(check_hierarchy(t.graph, t.kinds, t.spec, t.producers), ErrorCode::KindDiscipline));
}

TEST_CASE("constraint declarations")
{
    Setup s;
    s.kinds[LevelId{"mu"}].insert("no-no-move");
    s.spec.constraints.push_back({"no-no-move", LevelId{"mu"}, "no-move", {"solver"}});
    CHECK(has_code(check_hierarchy(s.graph, s.kinds, s.spec, s.producers), ErrorCode::ConstraintOverConstraint));

    Setup t;
    t.spec.constraints.front().producers.push_back("walker");
    CHECK(has_code(check_hierarchy(t.graph, t.kinds, t.spec, t.producers), ErrorCode::ForbiddenConstraintProducer));

    Setup u;
    u.graph = validate({{"mu", "M"}, {{"M", "mu"}}, {}});
    CHECK(has_code(check_hierarchy(u.graph, u.kinds, u.spec, u.producers), ErrorCode::UnknownCoupling));
}

TEST_CASE("runtime constraint legality")
{
    Setup s;
    auto c = constraint("agent:m1", 0, InfluenceSelector{"move", std::nullopt, Value::object()});
    CHECK_FALSE(check_constraint_legality(s.kinds, s.spec, c, s.producers[2]).has_value());
    CHECK(check_constraint_legality(s.kinds, s.spec, c, s.producers[0])->code == ErrorCode::ForbiddenConstraintProducer);
    c.payload = Value::object();
    CHECK(check_constraint_legality(s.kinds, s.spec, c, s.producers[2])->code == ErrorCode::MalformedConstraint);
}

TEST_CASE("a constraint inhibits the matching influence")
{
    auto i = ordinary("agent:a", 0, "move");
    auto not_i = constraint("agent:m", 0, InfluenceSelector{"move", ProducerRef::agent("a"), Value::object()});
    auto out = apply_constraints(InfluenceSet{i, not_i});
    CHECK(out.filtered.empty());
    REQUIRE(out.log.size() == 1);
    CHECK(out.log[0].constraint == not_i.id);
    CHECK(out.log[0].inhibited == std::vector<InfluenceId>{i.id});

    auto alone = apply_constraints(InfluenceSet{i});
    CHECK(alone.filtered == InfluenceSet{i});
    CHECK(alone.log.empty());
}

TEST_CASE("inhibition filters element-wise by selector")
{
    std::mt19937_64 rng(3);
    for (int round = 0; round < 100; ++round) {
        InfluenceSet set;
        std::vector<Influence> items;
        for (std::uint32_t k = 0; k < 12; ++k) {
            auto i = ordinary("agent:a" + std::to_string(rng() % 4), k, rng() % 2 ? "move" : "wait", Value{{"n", rng() % 3}});
            items.push_back(i);
            set.insert(i);
        }
        InfluenceSelector sel{rng() % 2 ? "move" : "wait", std::nullopt, Value::object()};
        if (rng() % 2) sel.match_producer = ProducerRef::agent("a" + std::to_string(rng() % 4));
        if (rng() % 2) sel.match_payload = Value{{"n", rng() % 3}};
        set.insert(constraint("agent:m", 0, sel));

        InfluenceSet expected;
        for (const auto& i : items) {
            bool hit = i.kind == sel.match_kind && (!sel.match_producer || i.producer == *sel.match_producer);
            for (const auto& [f, v] : sel.match_payload.items()) hit = hit && i.payload.at(f) == v;
            if (!hit) expected.insert(i);
        }
        CHECK(apply_constraints(set).filtered == expected);
    }
}

TEST_CASE("selectors never match emergence or constraint influences")
{
    auto c1 = constraint("agent:m", 0, InfluenceSelector{"no-move", std::nullopt, Value::object()});
    auto c2 = constraint("agent:m", 1, InfluenceSelector{"move", std::nullopt, Value::object()});
    auto out = apply_constraints(InfluenceSet{c1, c2});
    CHECK(out.filtered.empty());
    for (const auto& r : out.log) CHECK(r.inhibited.empty());
}

TEST_CASE("macro agent life cycle")
{
    Setup s;
    auto state = make_initial_state(s.graph);
    Influence jam{InfluenceId{"env:detector", 4, 0}, "jam", LevelId{"M"}, ProducerRef::environment("detector"),
                  Value{{"trapped", {"a1", "a2"}}}, InfluenceClass::emergence};
    const auto& c = s.spec.couplings.front();
    auto spawned = spawn_macro_agent(state, s.graph, c, jam, "m1", "solver");
    REQUIRE(spawned.agents.count("m1") == 1);
    CHECK(trapped_members(spawned.agents.at("m1").bodies.at(LevelId{"M"}).attributes) == std::set<std::string>{"a1", "a2"});
    CHECK(member_levels(spawned, "m1") == LevelSet{"M"});

    auto gone = dissolve_macro_agent(spawned, s.graph, c, "m1");
    CHECK(gone.agents.count("m1") == 0);

    HierarchicalCoupling bogus{LevelId{"mu"}, LevelId{"nowhere"}};
    CHECK_THROWS_AS(spawn_macro_agent(state, s.graph, bogus, jam, "m1", "solver"), Error);
}

TEST_CASE("overlapping trapped sets merge into components")
{
    std::mt19937_64 rng(5);
    for (int round = 0; round < 200; ++round) {
        std::map<AgentId, std::set<std::string>> existing;
        std::vector<std::set<std::string>> emergent;
        std::vector<std::set<std::string>> all;
        auto random_set = [&] {
            std::set<std::string> s;
            const int n = 1 + static_cast<int>(rng() % 3);
            for (int i = 0; i < n; ++i) s.insert("a" + std::to_string(rng() % 10));
            return s;
        };
        const int e = static_cast<int>(rng() % 3);
        for (int i = 0; i < e; ++i) {
            auto s = random_set();
            // Existing macro agents never overlap each other.
            bool clash = false;
            for (const auto& [id, t] : existing)
                for (const auto& m : s) clash = clash || t.count(m) != 0;
            if (clash) continue;
            existing["m" + std::to_string(i)] = s;
            all.push_back(s);
        }
        const int n = static_cast<int>(rng() % 4);
        for (int i = 0; i < n; ++i) {
            emergent.push_back(random_set());
            all.push_back(emergent.back());
        }
        auto groups = group_trapped_sets(existing, emergent);
        std::vector<std::set<std::string>> got;
        for (const auto& g : groups) {
            got.push_back(g.members);
            if (g.keeper) {
                for (const auto& [id, t] : existing) {
                    bool inside = std::includes(g.members.begin(), g.members.end(), t.begin(), t.end());
                    if (inside) CHECK(g.keeper.value() <= id);
                }
            }
        }
        std::sort(got.begin(), got.end());
        CHECK(got == oracle::overlap_components(all));
    }
}
