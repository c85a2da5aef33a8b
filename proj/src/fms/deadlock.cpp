#include "irm/fms/deadlock.hpp"

#include "irm/error.hpp"

#include <algorithm>
#include <functional>
#include <tuple>

namespace irm::fms {

namespace {

std::set<Cell> agv_cells_except(const FloorView& floor, const std::set<std::string>& skip)
{
    std::set<Cell> out;
    for (const auto& [id, b] : floor.agvs) {
        if (skip.count(id) == 0) out.insert(b.cell);
    }
    return out;
}

std::set<Cell> other_cells(const FloorView& floor, const std::string& self) { return agv_cells_except(floor, {self}); }

/// Cells lying on some walls-only shortest path from `from` to the shop.
std::set<Cell> shortest_path_cells(const FmsWorld& world, Cell from, const std::string& shop)
{
    std::set<Cell> out;
    const auto& grid = world.grid();
    const int total = world.distance_to_shop(shop, from);
    if (total == unreachable) return out;
    auto from_dist = bfs_distances(grid, from);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Cell c = grid.cell_at(i);
        const int a = from_dist[i];
        const int b = world.distance_to_shop(shop, c);
        if (a != unreachable && b != unreachable && a + b == total) out.insert(c);
    }
    return out;
}

Value floor_to_json(const FloorView& floor)
{
    Value agvs = Value::object();
    for (const auto& [id, b] : floor.agvs) agvs[id] = b.to_json();
    Value shops = Value::object();
    for (const auto& [id, s] : floor.shops) shops[id] = s.to_json();
    return Value{{"agvs", agvs}, {"shops", shops}};
}

FloorView floor_from_json(const Value& v)
{
    FloorView floor;
    for (const auto& [id, b] : v.at("agvs").items()) floor.agvs.emplace(id, AgvBody::from_json(b));
    for (const auto& [id, s] : v.at("shops").items()) floor.shops.emplace(id, ShopBody::from_json(s));
    return floor;
}

} // namespace

std::optional<Cell> preferred_step(const FmsWorld& world, Cell from, const std::string& shop)
{
    const int here = world.distance_to_shop(shop, from);
    if (here == unreachable || here == 0) return std::nullopt;
    for (const auto& n : world.grid().free_neighbors(from)) {
        if (world.distance_to_shop(shop, n) == here - 1) return n;
    }
    return std::nullopt;
}

WaitAnalysis analyze_waits(const FmsWorld& world, const FloorView& floor)
{
    WaitAnalysis out;
    const int reach = world.params().repulse_amplitude;
    std::map<std::string, std::vector<int>> repulsion;
    for (const auto& [id, b] : floor.agvs) {
        if (b.repulsing) repulsion.emplace(id, bfs_distances(world.grid(), b.cell, {}, reach));
    }

    for (const auto& [id, b] : floor.agvs) {
        if (b.idle() || !b.goal || b.moved) continue;
        auto step = preferred_step(world, b.cell, *b.goal);
        if (!step) continue;
        for (const auto& [other, o] : floor.agvs) {
            if (other == id) continue;
            bool waits = o.cell == *step;
            if (!waits) {
                auto r = repulsion.find(other);
                if (r != repulsion.end()) {
                    const int d = r->second[world.grid().index(*step)];
                    waits = d != unreachable && d < reach;
                }
            }
            if (waits) out.edges[id].insert(other);
        }
    }

    for (const auto& [start, _] : out.edges) {
        std::set<std::string> seen;
        std::vector<std::string> stack(out.edges[start].begin(), out.edges[start].end());
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            if (cur == start) {
                out.cycle_members.insert(start);
                break;
            }
            if (!seen.insert(cur).second) continue;
            if (auto e = out.edges.find(cur); e != out.edges.end()) stack.insert(stack.end(), e->second.begin(), e->second.end());
        }
    }

    const auto k = static_cast<std::size_t>(world.params().progress_window);
    for (const auto& [id, b] : floor.agvs) {
        if (b.idle() || b.window.size() < k) continue;
        if (std::all_of(b.window.end() - static_cast<std::ptrdiff_t>(k), b.window.end(), [&](Cell c) { return c == b.window.back(); })) {
            out.stalled.insert(id);
        }
    }

    std::set<std::string> candidates = out.cycle_members;
    candidates.insert(out.stalled.begin(), out.stalled.end());
    std::set<std::string> placed;
    for (const auto& seed : candidates) {
        if (placed.count(seed) != 0) continue;
        std::set<std::string> group;
        std::vector<std::string> stack{seed};
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            if (!group.insert(cur).second) continue;
            for (const auto& other : candidates) {
                if (group.count(other) != 0) continue;
                auto a = out.edges.find(cur);
                auto b = out.edges.find(other);
                if ((a != out.edges.end() && a->second.count(other) != 0) || (b != out.edges.end() && b->second.count(cur) != 0)) {
                    stack.push_back(other);
                }
            }
        }
        placed.insert(group.begin(), group.end());
        out.groups.push_back(std::move(group));
    }
    std::sort(out.groups.begin(), out.groups.end());
    return out;
}

NaturalRule deadlock_detector_natural(WorldPtr world)
{
    return [world](const Percept& percept, EnvironmentContext&) {
        const auto& lv = world->levels();
        auto floor = FloorView::read(percept.level(lv.floor).properties);
        auto waits = analyze_waits(*world, floor);
        std::vector<InfluenceDraft> out;
        for (const auto& g : waits.groups) {
            bool cycle = std::any_of(g.begin(), g.end(), [&](const auto& m) { return waits.cycle_members.count(m) != 0; });
            out.push_back({kinds::deadlock_emergence, lv.control, Value{{"trapped", g}, {"cycle", cycle}}});
        }
        return out;
    };
}

bool member_free(const FmsWorld& world, const FloorView& floor, const std::string& member)
{
    const auto& b = floor.agvs.at(member);
    if (!b.goal) return true;
    std::vector<Cell> repulsors;
    std::set<Cell> occupied;
    for (const auto& [id, o] : floor.agvs) {
        if (id == member) continue;
        occupied.insert(o.cell);
        if (!o.idle() && o.goal) repulsors.push_back(o.cell);
    }
    auto shop = floor.shops.find(*b.goal);
    const bool emitting = shop != floor.shops.end() && shop->second.emitting;
    std::vector<Cell> cells{b.cell};
    for (const auto& n : world.grid().free_neighbors(b.cell)) cells.push_back(n);
    auto probes = sense_field(world, b.goal, emitting, repulsors, cells);
    for (std::size_t i = 1; i < probes.size(); ++i) {
        if (probes[i].potential > probes[0].potential && occupied.count(probes[i].cell) == 0) return true;
    }
    return false;
}

std::map<std::string, Cell> released_moves(const FmsWorld& world, const FloorView& floor, const std::set<std::string>& members)
{
    std::map<std::string, MoveRequest> requests;
    for (const auto& [id, b] : floor.agvs) {
        requests[id] = MoveRequest{b.cell, b.cell};
        if (members.count(id) == 0 || !b.goal) continue;
        std::vector<Cell> repulsors;
        for (const auto& [other, o] : floor.agvs) {
            if (other != id && !o.idle() && o.goal) repulsors.push_back(o.cell);
        }
        auto shop = floor.shops.find(*b.goal);
        const bool emitting = shop != floor.shops.end() && shop->second.emitting;
        std::vector<Cell> cells{b.cell};
        for (const auto& n : world.grid().free_neighbors(b.cell)) cells.push_back(n);
        auto probes = sense_field(world, b.goal, emitting, repulsors, cells);
        const int current = probes.front().potential;
        probes.erase(probes.begin());
        if (auto i = ascend(probes, current)) requests[id].to = probes[*i].cell;
    }
    return resolve_moves(requests);
}

SolverAction plan_resolution(const FmsWorld& world, const FloorView& floor, const std::set<std::string>& trapped,
                             const std::optional<std::string>& yielder, const std::optional<Cell>& refuge)
{
    std::vector<std::string> members;
    for (const auto& m : trapped) {
        if (floor.agvs.count(m) != 0) members.push_back(m);
    }
    std::map<std::string, bool> free;
    for (const auto& m : members) free[m] = member_free(world, floor, m);
    const auto released = released_moves(world, floor, {members.begin(), members.end()});
    if (std::all_of(members.begin(), members.end(), [&](const auto& m) {
            const auto& b = floor.agvs.at(m);
            return !b.goal || released.at(m) != b.cell;
        })) {
        return {SolverAction::Kind::resolve, {}, {}, yielder, refuge};
    }
    const auto& grid = world.grid();

    std::optional<std::string> parked;
    if (yielder && refuge && floor.agvs.count(*yielder) != 0) {
        const Cell at = floor.agvs.at(*yielder).cell;
        if (at == *refuge) {
            parked = yielder;
        }
        else {
            auto path = shortest_path(grid, at, *refuge, other_cells(floor, *yielder));
            if (path && !path->empty()) return {SolverAction::Kind::force, *yielder, path->front(), yielder, refuge};
        }
    }

    // Members that can reach their goal around every other AGV, stuck ones
    // before free ones, the parked yielder last.
    std::optional<std::tuple<bool, bool, std::string, Cell>> best;
    for (const auto& m : members) {
        const auto& b = floor.agvs.at(m);
        if (!b.goal) continue;
        auto path = shortest_path(grid, b.cell, world.shop(*b.goal).cell, other_cells(floor, m));
        if (!path || path->empty()) continue;
        auto key = std::make_tuple(free[m], parked == m, m, path->front());
        if (!best || key < *best) best = key;
    }
    if (best) {
        const bool keep = parked && std::get<2>(*best) != *parked;
        return {SolverAction::Kind::force, std::get<2>(*best), std::get<3>(*best), keep ? yielder : std::nullopt,
                keep ? refuge : std::nullopt};
    }

    // Pick a member and a refuge off every other member's shortest paths.
    std::optional<std::tuple<int, std::string, Cell>> choice;
    for (const auto& y : members) {
        if (parked == y) continue;
        std::set<Cell> avoid;
        for (const auto& m : members) {
            if (m == y) continue;
            const auto& b = floor.agvs.at(m);
            avoid.insert(b.cell);
            if (b.goal) {
                auto cells = shortest_path_cells(world, b.cell, *b.goal);
                avoid.insert(cells.begin(), cells.end());
            }
        }
        auto others = other_cells(floor, y);
        auto dist = bfs_distances(grid, floor.agvs.at(y).cell, others);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Cell c = grid.cell_at(i);
            if (dist[i] == unreachable || dist[i] == 0 || avoid.count(c) != 0 || world.is_shop_cell(c)) continue;
            auto key = std::make_tuple(dist[i], y, c);
            if (!choice || key < *choice) choice = key;
        }
    }
    if (choice) {
        const auto& [d, y, c] = *choice;
        auto others = other_cells(floor, y);
        auto path = shortest_path(grid, floor.agvs.at(y).cell, c, others);
        return {SolverAction::Kind::force, y, path->front(), y, c};
    }
    return {SolverAction::Kind::no_escape, {}, {}, yielder, refuge};
}

BehaviorRule deadlock_solver_behavior(WorldPtr world)
{
    BehaviorRule rule;
    rule.perception = [world](const Percept& percept, AgentContext& ctx) {
        const auto& lv = world->levels();
        const auto& control = percept.level(lv.control).properties;
        auto own = control.find(body_key(ctx.id));
        Value trapped = own != control.end() ? own->second.at("attributes").value("trapped", Value::array()) : Value::array();
        auto floor = FloorView::read(percept.level(lv.floor).properties);
        return Value{{"trapped", trapped}, {"floor", floor_to_json(floor)}};
    };
    rule.memorization = [world](const Value& p, const Value& s, AgentContext&) {
        std::optional<std::string> yielder;
        std::optional<Cell> refuge;
        if (s.is_object() && s.contains("yielder") && !s.at("yielder").is_null()) {
            yielder = s.at("yielder").get<std::string>();
            refuge = cell_from_json(s.at("refuge"));
        }
        auto trapped = p.at("trapped").get<std::set<std::string>>();
        auto action = plan_resolution(*world, floor_from_json(p.at("floor")), trapped, yielder, refuge);
        static constexpr const char* names[] = {"resolve", "force", "no-escape"};
        Value next{{"trapped", trapped},
                   {"action", names[static_cast<int>(action.kind)]},
                   {"yielder", action.yielder ? Value(*action.yielder) : Value(nullptr)},
                   {"refuge", action.refuge ? to_json(*action.refuge) : Value(nullptr)}};
        if (action.kind == SolverAction::Kind::force) {
            next["agent"] = action.agent;
            next["to"] = to_json(action.to);
        }
        return next;
    };
    rule.decision = [world](const Value& s, AgentContext& ctx) {
        const auto& lv = world->levels();
        const auto action = s.at("action").get<std::string>();
        std::vector<InfluenceDraft> out;
        if (action == "resolve") {
            out.push_back({kinds::deadlock_resolved, lv.control, Value{{"macro", ctx.id.name}, {"trapped", s.at("trapped")}}});
            return out;
        }
        if (!world->params().control) return out;
        for (const auto& m : s.at("trapped")) {
            const auto member = m.get<std::string>();
            InfluenceSelector moves{kinds::move, ProducerRef::agent(member), Value::object()};
            InfluenceSelector repulsion{kinds::emit_repulsion, ProducerRef::agent(member), Value::object()};
            out.push_back({kinds::inhibit_move, lv.floor, constraint_payload(moves, Value{{"macro", ctx.id.name}})});
            out.push_back({kinds::inhibit_repulsion, lv.floor, constraint_payload(repulsion, Value{{"macro", ctx.id.name}})});
        }
        if (action == "force") {
            out.push_back({kinds::forced_move, lv.floor, Value{{"agent", s.at("agent")}, {"to", s.at("to")}, {"macro", ctx.id.name}}});
        }
        else {
            out.push_back({kinds::no_escape, lv.control, Value{{"macro", ctx.id.name}, {"trapped", s.at("trapped")}}});
        }
        return out;
    };
    return rule;
}

ControlBook ControlBook::read(const PropertyMap& properties)
{
    ControlBook book;
    auto get = [&](const char* key) {
        auto it = properties.find(key);
        return it == properties.end() ? std::int64_t{0} : it->second.get<std::int64_t>();
    };
    book.spawned = get("spawned");
    book.merged = get("merged");
    book.resolved = get("resolved");
    if (auto it = properties.find("no_escape"); it != properties.end()) book.no_escape = it->second.get<std::set<std::string>>();
    for (const auto& [key, entry] : properties) {
        auto owner = body_owner(key);
        if (owner && entry.value("type", "") == types::deadlock_solver) {
            book.active[owner->name] = entry.at("attributes").value("trapped", std::set<std::string>{});
        }
    }
    return book;
}

ReactionRule control_reaction(WorldPtr world)
{
    return [world](const ReactionInput& in) {
        auto book = ControlBook::read(in.properties);
        PropertyMap props = in.properties;

        std::vector<const Influence*> emergences;
        for (const auto& [id, i] : in.influences) {
            if (i.kind == kinds::deadlock_resolved && i.producer.kind == ProducerKind::agent) {
                if (book.active.erase(i.producer.id) != 0) {
                    props = dissolve_macro_agent(std::move(props), AgentId(i.producer.id));
                    ++book.resolved;
                }
            }
            else if (i.kind == kinds::no_escape) {
                book.no_escape.insert(i.payload.value("macro", i.producer.id));
            }
            else if (i.kind == kinds::deadlock_emergence) {
                emergences.push_back(&i);
            }
        }

        std::map<AgentId, std::set<std::string>> existing;
        for (const auto& [id, t] : book.active) existing.emplace(AgentId(id), t);
        std::vector<std::set<std::string>> emergent;
        for (const auto* e : emergences) emergent.push_back(trapped_members(e->payload));

        for (const auto& g : group_trapped_sets(existing, emergent)) {
            if (g.keeper) {
                for (const auto& a : g.absorbed) {
                    props = dissolve_macro_agent(std::move(props), a);
                    ++book.merged;
                }
                props[body_key(*g.keeper)]["attributes"]["trapped"] = g.members;
                continue;
            }
            ++book.spawned;
            const AgentId id("deadlock-" + std::to_string(book.spawned));
            const auto& first = *emergences.at(g.emergences.front());
            props = spawn_macro_agent(std::move(props), id, types::deadlock_solver, first);
            auto& entry = props[body_key(id)];
            entry["attributes"]["trapped"] = g.members;
            entry["init"] = Value::object();
        }

        props["spawned"] = book.spawned;
        props["merged"] = book.merged;
        props["resolved"] = book.resolved;
        props["no_escape"] = book.no_escape;
        return ReactionResult{std::move(props), {}};
    };
}

} // namespace irm::fms
