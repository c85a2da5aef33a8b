#pragma once

// Independent oracles and model builders shared by the unit and acceptance
// tests. Nothing here calls the code it is used to check.

#include "irm/engine.hpp"
#include "irm/fms/model.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using irm::LevelId;
using irm::LevelSet;

// Neighborhoods straight from the set definitions over the raw edge lists.
inline LevelSet out_hood(const std::vector<irm::LevelEdge>& edges, const LevelId& l)
{
    LevelSet s{l};
    for (const auto& [a, b] : edges) {
        if (a == l) s.insert(b);
    }
    return s;
}

inline LevelSet in_hood(const std::vector<irm::LevelEdge>& edges, const LevelId& l)
{
    LevelSet s{l};
    for (const auto& [a, b] : edges) {
        if (b == l) s.insert(a);
    }
    return s;
}

inline irm::LevelGraphSpec random_graph(std::mt19937_64& rng, int max_levels)
{
    irm::LevelGraphSpec g;
    const int n = std::uniform_int_distribution<int>(1, max_levels)(rng);
    std::vector<LevelId> ls;
    for (int i = 0; i < n; ++i) ls.push_back(LevelId{"L" + std::to_string(i)});
    g.levels = {ls.begin(), ls.end()};
    std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.05, 0.7)(rng));
    for (const auto& a : ls) {
        for (const auto& b : ls) {
            if (coin(rng)) g.influence_edges.push_back({a, b});
            if (coin(rng)) g.perception_edges.push_back({a, b});
        }
    }
    std::shuffle(g.influence_edges.begin(), g.influence_edges.end(), rng);
    if (!g.influence_edges.empty() && coin(rng)) g.influence_edges.push_back(g.influence_edges.front());
    return g;
}

// Shortest free-cell distances by repeated relaxation until nothing changes.
inline std::vector<int> relaxed_distances(const irm::fms::GridMap& grid, irm::fms::Cell source)
{
    const int inf = 1 << 28;
    std::vector<int> d(grid.size(), inf);
    if (!grid.is_free(source)) return d;
    d[grid.index(source)] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int y = 0; y < grid.height(); ++y) {
            for (int x = 0; x < grid.width(); ++x) {
                irm::fms::Cell c{x, y};
                if (!grid.is_free(c)) continue;
                const int dx[] = {1, -1, 0, 0};
                const int dy[] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    irm::fms::Cell n{x + dx[k], y + dy[k]};
                    if (!grid.in_bounds(n) || !grid.is_free(n)) continue;
                    if (d[grid.index(n)] + 1 < d[grid.index(c)]) {
                        d[grid.index(c)] = d[grid.index(n)] + 1;
                        changed = true;
                    }
                }
            }
        }
    }
    return d;
}

inline std::vector<int> brute_field(const irm::fms::GridMap& grid, const std::vector<irm::fms::Emitter>& attract,
                                    const std::vector<irm::fms::Emitter>& repulse)
{
    std::vector<int> out(grid.size(), 0);
    auto add = [&](const irm::fms::Emitter& e, int sign) {
        auto d = relaxed_distances(grid, e.cell);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (d[i] < (1 << 28)) out[i] += sign * std::max(0, e.amplitude - d[i]);
        }
    };
    for (const auto& e : attract) add(e, 1);
    for (const auto& e : repulse) add(e, -1);
    return out;
}

// Transitive closure; a node is on a cycle iff it reaches itself.
inline std::set<std::string> cycle_nodes(const std::map<std::string, std::set<std::string>>& edges)
{
    std::set<std::string> nodes;
    for (const auto& [a, bs] : edges) {
        nodes.insert(a);
        nodes.insert(bs.begin(), bs.end());
    }
    std::vector<std::string> v(nodes.begin(), nodes.end());
    const std::size_t n = v.size();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        auto it = edges.find(v[i]);
        if (it == edges.end()) continue;
        for (std::size_t j = 0; j < n; ++j) r[i][j] = it->second.count(v[j]) != 0;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = true;
    std::set<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i][i]) out.insert(v[i]);
    }
    return out;
}

// Components of "shares a member" by repeated pairwise merging.
inline std::vector<std::set<std::string>> overlap_components(std::vector<std::set<std::string>> sets)
{
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < sets.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < sets.size() && !merged; ++j) {
                std::vector<std::string> common;
                std::set_intersection(sets[i].begin(), sets[i].end(), sets[j].begin(), sets[j].end(), std::back_inserter(common));
                if (!common.empty()) {
                    sets[i].insert(sets[j].begin(), sets[j].end());
                    sets.erase(sets.begin() + static_cast<std::ptrdiff_t>(j));
                    merged = true;
                }
            }
        }
    }
    std::sort(sets.begin(), sets.end());
    return sets;
}

} // namespace oracle

namespace testkit {

using namespace irm;

/// Random walkers on integer lines, one per level. Each level's reaction
/// adds pushes to body positions and keeps even pushes for the next step.
/// The behavior checks that no influence of the current tick is visible.
struct ProbeLog {
    std::size_t same_step_sightings = 0;
};

inline ReactionResult walker_reaction(const ReactionInput& in)
{
    ReactionResult out{in.properties, {}};
    std::int64_t total = out.properties.count("total") ? out.properties.at("total").get<std::int64_t>() : 0;
    for (const auto& [id, i] : in.influences) {
        const auto v = i.payload.value("v", std::int64_t{0});
        total += v;
        const auto key = body_key(AgentId(i.payload.value("to", std::string())));
        if (auto it = out.properties.find(key); it != out.properties.end()) {
            auto& x = it->second["attributes"]["x"];
            x = x.get<std::int64_t>() + v;
        }
        if (v % 2 == 0 && i.producer.kind == ProducerKind::agent) out.persisted.insert(i);
    }
    out.properties["total"] = total;
    return out;
}

inline BehaviorRule walker_behavior(std::shared_ptr<ProbeLog> log)
{
    BehaviorRule b;
    b.perception = [log](const Percept& p, AgentContext& ctx) {
        Value seen = Value::array();
        for (const auto& l : p.observable()) {
            const auto& ls = p.level(l);
            for (const auto& [id, i] : ls.influences) {
                if (id.tick >= ctx.tick) ++log->same_step_sightings;
                seen.push_back(id.str());
            }
            seen.push_back(ls.properties.count("total") ? ls.properties.at("total") : Value(0));
        }
        return seen;
    };
    b.memorization = [](const Value& p, const Value& s, AgentContext&) {
        Value n = s.is_object() ? s : Value::object();
        n["last"] = p;
        n["steps"] = n.value("steps", 0) + 1;
        return n;
    };
    b.decision = [](const Value& s, AgentContext& ctx) {
        std::vector<InfluenceDraft> out;
        std::vector<LevelId> targets(ctx.levels.begin(), ctx.levels.end());
        const int count = static_cast<int>(ctx.rng() % 3);
        for (int i = 0; i < count; ++i) {
            const auto& t = targets[ctx.rng() % targets.size()];
            out.push_back({"push", t,
                           Value{{"to", ctx.id.name}, {"v", static_cast<std::int64_t>(ctx.rng() % 7) - 3},
                                 {"steps", s.value("steps", 0)}}});
        }
        return out;
    };
    return b;
}

struct RandomModel {
    Model model;
    SystemState state;
};

/// Levels L0..L(n-1) with random edges, walkers with bodies in random
/// levels. Agents influence only their own levels so every draft is legal.
inline RandomModel random_walkers(std::mt19937_64& rng, int levels, int agents, std::shared_ptr<ProbeLog> log)
{
    LevelGraphSpec g;
    std::vector<LevelId> ls;
    for (int i = 0; i < levels; ++i) ls.push_back(LevelId{"L" + std::to_string(i)});
    g.levels = {ls.begin(), ls.end()};
    std::bernoulli_distribution coin(0.4);
    for (const auto& a : ls)
        for (const auto& b : ls)
            if (a != b && coin(rng)) {
                g.influence_edges.push_back({a, b});
                g.perception_edges.push_back({a, b});
            }
    Model m{validate(g), {}, {}, {}, {}, {}, rng()};
    for (const auto& l : ls) {
        m.reactions[l] = walker_reaction;
        m.producible_kinds[l] = {"push"};
    }
    m.agent_types["walker"] = AgentType{"walker", {ls.begin(), ls.end()}, walker_behavior(log)};
    auto s = make_initial_state(m.graph);
    for (int a = 0; a < agents; ++a) {
        const AgentId id("w" + std::to_string(a));
        s = add_agent(s, AgentRecord{id, "walker", Value::object(), {}});
        std::set<LevelId> homes;
        homes.insert(ls[rng() % ls.size()]);
        if (coin(rng)) homes.insert(ls[rng() % ls.size()]);
        for (const auto& l : homes) {
            s = register_body(s, id, l, Body{l, Value{{"x", static_cast<std::int64_t>(rng() % 10)}}});
        }
    }
    return {std::move(m), std::move(s)};
}

inline std::vector<AgentId> shuffled_agents(const SystemState& s, std::mt19937_64& rng)
{
    std::vector<AgentId> order;
    for (const auto& [id, a] : s.agents) order.push_back(id);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

/// Reaction that only records a digest of what reached it.
inline ReactionResult tracer_reaction(const ReactionInput& in)
{
    std::string text;
    for (const auto& [id, i] : in.influences) text += to_json(i).dump();
    return ReactionResult{PropertyMap{{"trace", std::to_string(std::hash<std::string>{}(text))}}, {}};
}

struct FmsFixture {
    fms::WorldPtr world;
    Model model;
    SystemState state;
};

inline FmsFixture fms_fixture(const std::vector<std::string>& rows, std::vector<fms::ShopDecl> shops,
                              std::vector<fms::AgvDecl> agvs, std::vector<fms::TaskDecl> tasks,
                              fms::FmsParams params = {})
{
    fms::FmsConfig cfg;
    cfg.grid = fms::GridMap::from_rows(rows);
    cfg.shops = std::move(shops);
    cfg.agvs = std::move(agvs);
    cfg.tasks = std::move(tasks);
    cfg.params = params;
    auto world = std::make_shared<const fms::FmsWorld>(std::move(cfg));
    auto model = fms::make_fms_model(world, 0);
    auto state = fms::make_fms_state(model, *world);
    return {world, std::move(model), std::move(state)};
}

/// Rewrites sigma^floor through its typed view.
template <class F>
SystemState edit_floor(SystemState s, const fms::FmsWorld& world, F&& f)
{
    auto& props = s.per_level.at(world.levels().floor).properties;
    auto view = fms::FloorView::read(props);
    f(view);
    view.write(props);
    return s;
}

template <class F>
SystemState edit_tasks(SystemState s, const fms::FmsWorld& world, F&& f)
{
    auto& props = s.per_level.at(world.levels().tasks).properties;
    auto book = fms::TaskBook::read(props);
    f(book);
    book.write(props);
    return s;
}

/// Task record as the assignment level leaves it after matching.
inline fms::TaskRecord assigned_record(const fms::FmsWorld& world, const std::string& task, const std::string& agv)
{
    const auto& t = world.task(task);
    fms::TaskRecord r;
    r.source = t.source;
    r.destination = t.destination;
    r.state = fms::TaskState::assigned;
    r.agv = agv;
    r.release = t.release;
    r.history = {fms::TaskState::pending, fms::TaskState::assigned};
    return r;
}

inline fms::AgvBody agv_at(const SystemState& s, const fms::FmsWorld& world, const std::string& id)
{
    return fms::FloorView::read(s.level(world.levels().floor).properties).agvs.at(id);
}

inline std::vector<Influence> produced_by(const Production& p, const std::string& agent)
{
    std::vector<Influence> out;
    for (const auto& [l, set] : p.per_level)
        for (const auto& [id, i] : set)
            if (i.producer.kind == ProducerKind::agent && i.producer.id == agent) out.push_back(i);
    return out;
}

} // namespace testkit
