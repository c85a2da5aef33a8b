#include "irm/fms/floor.hpp"

#include "irm/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

namespace irm::fms {

namespace {

Value opt_json(const std::optional<std::string>& s) { return s ? Value(*s) : Value(nullptr); }

std::optional<std::string> opt_string(const Value& v, const char* key)
{
    if (!v.contains(key) || v.at(key).is_null()) return std::nullopt;
    return v.at(key).get<std::string>();
}

int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

void erase_value(std::vector<std::string>& v, const std::string& s) { v.erase(std::remove(v.begin(), v.end(), s), v.end()); }

void push_unique(std::vector<std::string>& v, const std::string& s)
{
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

} // namespace

Value AgvBody::to_json() const
{
    Value w = Value::array();
    for (const auto& c : window) w.push_back(fms::to_json(c));
    return Value{{"cell", fms::to_json(cell)}, {"carrying", opt_json(carrying)}, {"assigned", opt_json(assigned)},
                 {"goal", opt_json(goal)},     {"repulsing", repulsing},         {"moved", moved},
                 {"window", w},                {"events", events}};
}

AgvBody AgvBody::from_json(const Value& v)
{
    AgvBody b;
    b.cell = cell_from_json(v.at("cell"));
    b.carrying = opt_string(v, "carrying");
    b.assigned = opt_string(v, "assigned");
    b.goal = opt_string(v, "goal");
    b.repulsing = v.value("repulsing", false);
    b.moved = v.value("moved", false);
    if (v.contains("window")) {
        for (const auto& c : v.at("window")) b.window.push_back(cell_from_json(c));
    }
    b.events = v.value("events", Value::array());
    return b;
}

Value ShopBody::to_json() const
{
    return Value{{"cell", fms::to_json(cell)}, {"pending", pending}, {"emitting", emitting}};
}

ShopBody ShopBody::from_json(const Value& v)
{
    ShopBody s;
    s.cell = cell_from_json(v.at("cell"));
    s.pending = v.value("pending", std::vector<std::string>{});
    s.emitting = v.value("emitting", false);
    return s;
}

FloorView FloorView::read(const PropertyMap& properties)
{
    FloorView view;
    for (const auto& [key, entry] : properties) {
        auto owner = body_owner(key);
        if (!owner) continue;
        const auto type = entry.value("type", std::string());
        const auto& attrs = entry.at("attributes");
        if (type == types::agv) {
            view.agvs.emplace(owner->name, AgvBody::from_json(attrs));
        }
        else if (type == types::shop) {
            view.shops.emplace(owner->name, ShopBody::from_json(attrs));
        }
    }
    if (auto it = properties.find("task_progress"); it != properties.end()) {
        view.progress = it->second.get<std::map<std::string, std::string>>();
    }
    return view;
}

void FloorView::write(PropertyMap& properties) const
{
    auto put = [&](const std::string& id, const std::string& type, Value attrs) {
        auto& entry = properties[body_key(AgentId(id))];
        if (entry.is_null()) {
            entry = body_entry(AgentId(id), type, attrs);
        }
        else {
            entry["attributes"] = std::move(attrs);
        }
    };
    for (const auto& [id, b] : agvs) put(id, types::agv, b.to_json());
    for (const auto& [id, s] : shops) put(id, types::shop, s.to_json());
    properties["task_progress"] = Value(progress);
}

std::vector<FieldProbe> sense_field(const FmsWorld& world, const std::optional<std::string>& goal, bool goal_emitting,
                                    const std::vector<Cell>& repulsors, const std::vector<Cell>& cells)
{
    const int attract = world.params().attract_amplitude;
    const int repulse = world.params().repulse_amplitude;
    std::vector<FieldProbe> out;
    out.reserve(cells.size());
    for (const auto& c : cells) {
        int p = 0;
        if (goal && goal_emitting) {
            p += decay(attract, world.distance_to_shop(*goal, c));
        }
        out.push_back({c, p});
    }
    for (const auto& r : repulsors) {
        bool near = std::any_of(cells.begin(), cells.end(), [&](Cell c) { return manhattan(r, c) < repulse; });
        if (!near) continue;
        auto dist = bfs_distances(world.grid(), r, {}, repulse);
        for (auto& probe : out) {
            probe.potential -= decay(repulse, dist[world.grid().index(probe.cell)]);
        }
    }
    return out;
}

std::optional<std::size_t> ascend(const std::vector<FieldProbe>& neighbors, int current)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        if (neighbors[i].potential <= current) continue;
        if (!best || neighbors[i].potential > neighbors[*best].potential ||
            (neighbors[i].potential == neighbors[*best].potential && neighbors[i].cell < neighbors[*best].cell)) {
            best = i;
        }
    }
    return best;
}

std::map<std::string, Cell> resolve_moves(const std::map<std::string, MoveRequest>& requests)
{
    std::map<Cell, std::string> occupant;
    for (const auto& [id, r] : requests) occupant[r.from] = id;

    // Contested cells go to the smallest id (map iteration is ascending).
    std::set<std::string> moving;
    std::map<Cell, std::string> winner;
    for (const auto& [id, r] : requests) {
        if (r.to == r.from) continue;
        if (winner.emplace(r.to, id).second) moving.insert(id);
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = moving.begin(); it != moving.end();) {
            const auto& to = requests.at(*it).to;
            auto occ = occupant.find(to);
            if (occ != occupant.end() && moving.count(occ->second) == 0) {
                it = moving.erase(it);
                changed = true;
            }
            else {
                ++it;
            }
        }
        // Chains that loop back (swaps, rotations) cannot all move at once.
        for (const auto& start : moving) {
            std::vector<std::string> chain{start};
            std::string cur = start;
            bool cycle = false;
            for (std::size_t guard = 0; guard <= moving.size(); ++guard) {
                auto occ = occupant.find(requests.at(cur).to);
                if (occ == occupant.end() || moving.count(occ->second) == 0) break;
                if (occ->second == start) {
                    cycle = true;
                    break;
                }
                cur = occ->second;
                chain.push_back(cur);
            }
            if (cycle) {
                for (const auto& id : chain) moving.erase(id);
                changed = true;
                break;
            }
        }
    }

    std::map<std::string, Cell> out;
    for (const auto& [id, r] : requests) {
        out[id] = moving.count(id) != 0 ? r.to : r.from;
    }
    return out;
}

BehaviorRule agv_behavior(WorldPtr world)
{
    BehaviorRule rule;
    rule.perception = [world](const Percept& percept, AgentContext& ctx) {
        const auto& lv = world->levels();
        auto floor = FloorView::read(percept.level(lv.floor).properties);
        auto self_it = floor.agvs.find(ctx.id.name);
        if (self_it == floor.agvs.end()) {
            throw Error(ErrorCode::MissingBody, "agv '" + ctx.id.name + "' has no floor body");
        }
        const auto& self = self_it->second;

        std::optional<std::string> task;
        std::optional<std::string> goal;
        if (self.carrying) {
            task = self.carrying;
            goal = world->task(*task).destination;
        }
        else if (percept.can_observe(lv.tasks)) {
            const auto& props = percept.level(lv.tasks).properties;
            auto book = props.find("tasks");
            std::int64_t best_arrival = -1;
            if (book != props.end()) {
                for (const auto& [id, rec] : book->second.items()) {
                    if (rec.value("agv", Value()) != Value(ctx.id.name) || rec.value("state", "") != "assigned") continue;
                    if (floor.progress.count(id) != 0) continue;
                    auto arrival = rec.value("arrival", std::int64_t{0});
                    if (best_arrival < 0 || arrival < best_arrival) {
                        best_arrival = arrival;
                        task = id;
                    }
                }
            }
            if (task) goal = world->task(*task).source;
        }
        bool emitting = false;
        if (goal) {
            auto shop = floor.shops.find(*goal);
            emitting = shop != floor.shops.end() && shop->second.emitting;
        }
        std::vector<Cell> repulsors;
        for (const auto& [id, b] : floor.agvs) {
            if (id != ctx.id.name && b.repulsing) repulsors.push_back(b.cell);
        }
        std::vector<Cell> cells{self.cell};
        for (const auto& n : world->grid().free_neighbors(self.cell)) cells.push_back(n);
        Value probes = Value::array();
        for (const auto& p : sense_field(*world, goal, emitting, repulsors, cells)) {
            probes.push_back(Value::array({p.cell.x, p.cell.y, p.potential}));
        }
        return Value{{"cell", to_json(self.cell)},
                     {"task", task ? Value(*task) : Value(nullptr)},
                     {"goal", goal ? Value(*goal) : Value(nullptr)},
                     {"probes", probes},
                     {"events", self.events}};
    };
    rule.memorization = [](const Value& p, const Value& s, AgentContext&) {
        Value next = p;
        auto delivered = s.is_object() ? s.value("delivered", std::int64_t{0}) : std::int64_t{0};
        for (const auto& e : p.at("events")) {
            if (e.value("status", "") == "delivered") ++delivered;
        }
        next["delivered"] = delivered;
        return next;
    };
    rule.decision = [world](const Value& s, AgentContext& ctx) {
        const auto& lv = world->levels();
        std::vector<FieldProbe> neighbors;
        const auto& probes = s.at("probes");
        const int current = probes.at(0).at(2).get<int>();
        for (std::size_t i = 1; i < probes.size(); ++i) {
            neighbors.push_back({Cell{probes[i][0].get<int>(), probes[i][1].get<int>()}, probes[i][2].get<int>()});
        }
        auto choice = ascend(neighbors, current);
        if (choice && world->params().jitter) {
            std::vector<std::size_t> ties;
            for (std::size_t i = 0; i < neighbors.size(); ++i) {
                if (neighbors[i].potential == neighbors[*choice].potential) ties.push_back(i);
            }
            choice = ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(ctx.rng)];
        }
        const Cell from = cell_from_json(s.at("cell"));
        const Cell to = choice ? neighbors[*choice].cell : from;
        std::vector<InfluenceDraft> out;
        out.push_back({kinds::move, lv.floor,
                       Value{{"agent", ctx.id.name}, {"from", to_json(from)}, {"to", to_json(to)},
                             {"goal", s.at("goal")}, {"task", s.at("task")}}});
        if (!s.at("goal").is_null()) {
            out.push_back({kinds::emit_repulsion, lv.floor, Value{{"agent", ctx.id.name}}});
        }
        else {
            out.push_back({kinds::can_serve, lv.tasks, Value{{"agent", ctx.id.name}, {"cell", to_json(from)}}});
        }
        for (const auto& e : s.at("events")) {
            out.push_back({kinds::task_status, lv.tasks,
                           Value{{"agent", ctx.id.name}, {"task", e.at("task")}, {"status", e.at("status")}, {"tick", e.at("tick")}}});
        }
        return out;
    };
    return rule;
}

BehaviorRule shop_behavior(WorldPtr world)
{
    BehaviorRule rule;
    rule.perception = [](const Percept& percept, AgentContext&) { return Value{{"tick", percept.time()}}; };
    rule.memorization = [world](const Value& p, const Value& s, AgentContext& ctx) {
        std::set<std::string> announced;
        if (s.is_object() && s.contains("announced")) announced = s.at("announced").get<std::set<std::string>>();
        const auto tick = p.at("tick").get<Tick>();
        std::vector<std::string> fresh;
        for (const auto& t : world->config().tasks) {
            if (t.source == ctx.id.name && t.release <= tick && announced.insert(t.id).second) fresh.push_back(t.id);
        }
        return Value{{"announced", announced}, {"announce", fresh}};
    };
    rule.decision = [world](const Value& s, AgentContext& ctx) {
        std::vector<InfluenceDraft> out;
        for (const auto& id : s.at("announce")) {
            const auto& t = world->task(id.get<std::string>());
            out.push_back({kinds::need_transport, world->levels().tasks,
                           Value{{"task", t.id}, {"shop", ctx.id.name}, {"source", t.source}, {"destination", t.destination},
                                 {"release", t.release}}});
        }
        return out;
    };
    return rule;
}

ReactionRule floor_reaction(WorldPtr world)
{
    return [world](const ReactionInput& in) {
        auto view = FloorView::read(in.properties);
        const auto& grid = world->grid();
        const auto window = static_cast<std::size_t>(world->params().progress_window);

        std::map<std::string, const Influence*> moves;
        std::map<std::string, Cell> forced;
        std::set<std::string> repulsing;
        for (const auto& [id, i] : in.influences) {
            if (i.kind == kinds::move && i.producer.kind == ProducerKind::agent) {
                moves[i.producer.id] = &i;
            }
            else if (i.kind == kinds::forced_move) {
                auto agent = i.payload.value("agent", std::string());
                if (view.agvs.count(agent) != 0 && forced.count(agent) == 0) forced[agent] = cell_from_json(i.payload.at("to"));
            }
            else if (i.kind == kinds::emit_repulsion && i.producer.kind == ProducerKind::agent) {
                repulsing.insert(i.producer.id);
            }
        }

        std::map<std::string, MoveRequest> requests;
        for (auto& [id, agv] : view.agvs) {
            Cell to = agv.cell;
            if (auto m = moves.find(id); m != moves.end()) {
                const auto& payload = m->second->payload;
                to = cell_from_json(payload.at("to"));
                agv.assigned = opt_string(payload, "task");
                agv.goal = opt_string(payload, "goal");
                if (agv.carrying) agv.assigned = agv.carrying;
            }
            if (auto f = forced.find(id); f != forced.end()) to = f->second;
            auto nb = grid.free_neighbors(agv.cell);
            if (to != agv.cell && std::find(nb.begin(), nb.end(), to) == nb.end()) to = agv.cell;
            requests[id] = MoveRequest{agv.cell, to};
        }
        auto resolved = resolve_moves(requests);

        for (auto& [id, agv] : view.agvs) {
            const Cell next = resolved.at(id);
            agv.moved = next != agv.cell;
            agv.cell = next;
            agv.window.push_back(next);
            if (agv.window.size() > window) agv.window.erase(agv.window.begin(), agv.window.end() - static_cast<std::ptrdiff_t>(window));
            agv.repulsing = repulsing.count(id) != 0;
            agv.events = Value::array();
            if (agv.assigned && !agv.carrying && view.progress.count(*agv.assigned) == 0 && world->has_task(*agv.assigned)) {
                const auto& t = world->task(*agv.assigned);
                if (agv.goal == t.source) push_unique(view.shops.at(t.source).pending, t.id);
            }
        }

        for (auto& [id, agv] : view.agvs) {
            if (agv.carrying) {
                const auto& t = world->task(*agv.carrying);
                if (agv.cell == world->shop(t.destination).cell) {
                    view.progress[t.id] = "delivered";
                    erase_value(view.shops.at(t.destination).pending, t.id);
                    agv.events.push_back(Value{{"task", t.id}, {"status", "delivered"}, {"tick", in.tick}});
                    agv.carrying.reset();
                    agv.assigned.reset();
                    agv.goal.reset();
                }
            }
            else if (agv.assigned && world->has_task(*agv.assigned) && view.progress.count(*agv.assigned) == 0) {
                const auto& t = world->task(*agv.assigned);
                if (agv.cell == world->shop(t.source).cell) {
                    view.progress[t.id] = "picked";
                    erase_value(view.shops.at(t.source).pending, t.id);
                    push_unique(view.shops.at(t.destination).pending, t.id);
                    agv.events.push_back(Value{{"task", t.id}, {"status", "picked"}, {"tick", in.tick}});
                    agv.carrying = t.id;
                    agv.goal = t.destination;
                }
            }
        }
        for (auto& [id, shop] : view.shops) shop.emitting = !shop.pending.empty();

        ReactionResult out{in.properties, {}};
        view.write(out.properties);
        return out;
    };
}

} // namespace irm::fms
