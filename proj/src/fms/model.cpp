#include "irm/fms/model.hpp"

#include "irm/error.hpp"

#include <functional>
#include <map>

namespace irm::fms {

namespace {

template <class Rule>
using Factory = std::function<Rule(const WorldPtr&)>;

const std::map<std::string, Factory<ReactionRule>>& reactions()
{
    static const std::map<std::string, Factory<ReactionRule>> table{
        {"fms-floor", [](const WorldPtr& w) { return floor_reaction(w); }},
        {"fms-task-assignment", [](const WorldPtr& w) { return task_assignment_reaction(w); }},
        {"fms-deadlock-control", [](const WorldPtr& w) { return control_reaction(w); }},
        {"identity", [](const WorldPtr&) { return ReactionRule(identity_reaction); }},
    };
    return table;
}

BehaviorRule idle_behavior()
{
    BehaviorRule rule;
    rule.perception = [](const Percept&, AgentContext&) { return Value(); };
    rule.memorization = [](const Value&, const Value& s, AgentContext&) { return s; };
    rule.decision = [](const Value&, AgentContext&) { return std::vector<InfluenceDraft>{}; };
    return rule;
}

const std::map<std::string, Factory<BehaviorRule>>& behaviors()
{
    static const std::map<std::string, Factory<BehaviorRule>> table{
        {"fms-agv", [](const WorldPtr& w) { return agv_behavior(w); }},
        {"fms-shop", [](const WorldPtr& w) { return shop_behavior(w); }},
        {"fms-deadlock-solver", [](const WorldPtr& w) { return deadlock_solver_behavior(w); }},
        {"idle", [](const WorldPtr&) { return idle_behavior(); }},
    };
    return table;
}

const std::map<std::string, Factory<NaturalRule>>& naturals()
{
    static const std::map<std::string, Factory<NaturalRule>> table{
        {"fms-deadlock-detector", [](const WorldPtr& w) { return deadlock_detector_natural(w); }},
        {"fms-dispatcher", [](const WorldPtr& w) { return dispatcher_natural(w); }},
    };
    return table;
}

template <class Rule>
std::optional<Rule> lookup(const std::map<std::string, Factory<Rule>>& table, const std::string& name, const WorldPtr& w)
{
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second(w);
}

template <class Map>
std::vector<std::string> names_of(const Map& table)
{
    std::vector<std::string> out;
    for (const auto& [k, v] : table) out.push_back(k);
    return out;
}

std::size_t delivered_count(const SystemState& state, const FmsWorld& world)
{
    std::size_t n = 0;
    auto it = state.per_level.find(world.levels().floor);
    if (it == state.per_level.end()) return 0;
    if (auto p = it->second.properties.find("task_progress"); p != it->second.properties.end()) {
        for (const auto& [task, status] : p->second.items()) {
            if (status == "delivered") ++n;
        }
    }
    return n;
}

ControlBook control_book(const SystemState& state, const FmsWorld& world)
{
    auto it = state.per_level.find(world.levels().control);
    return it == state.per_level.end() ? ControlBook{} : ControlBook::read(it->second.properties);
}

} // namespace

std::optional<ReactionRule> reaction_policy(const std::string& name, const WorldPtr& world) { return lookup(reactions(), name, world); }
std::optional<BehaviorRule> behavior_policy(const std::string& name, const WorldPtr& world) { return lookup(behaviors(), name, world); }
std::optional<NaturalRule> natural_policy(const std::string& name, const WorldPtr& world) { return lookup(naturals(), name, world); }
std::vector<std::string> reaction_policy_names() { return names_of(reactions()); }
std::vector<std::string> behavior_policy_names() { return names_of(behaviors()); }
std::vector<std::string> natural_policy_names() { return names_of(naturals()); }

Model make_fms_model(const WorldPtr& world, std::uint64_t seed)
{
    const auto& lv = world->levels();
    LevelGraphSpec g;
    g.levels = {lv.floor, lv.tasks, lv.control};
    g.influence_edges = {{lv.floor, lv.tasks}, {lv.tasks, lv.floor}, {lv.floor, lv.control}, {lv.control, lv.floor}};
    g.perception_edges = g.influence_edges;

    Model m{validate(g), {}, {}, {}, {}, {}, seed};
    m.reactions[lv.floor] = floor_reaction(world);
    m.reactions[lv.tasks] = task_assignment_reaction(world);
    m.reactions[lv.control] = control_reaction(world);
    m.agent_types[types::agv] = AgentType{types::agv, {lv.floor}, agv_behavior(world)};
    m.agent_types[types::shop] = AgentType{types::shop, {lv.floor}, shop_behavior(world)};
    m.agent_types[types::deadlock_solver] = AgentType{types::deadlock_solver, {lv.control}, deadlock_solver_behavior(world)};
    m.environments.push_back({EnvironmentRecord{"deadlock-detector", {lv.floor}, "fms-deadlock-detector"}, deadlock_detector_natural(world)});
    m.environments.push_back({EnvironmentRecord{"dispatcher", {lv.tasks}, "fms-dispatcher"}, dispatcher_natural(world)});
    m.producible_kinds[lv.floor] = {kinds::move, kinds::forced_move, kinds::emit_repulsion, kinds::inhibit_move, kinds::inhibit_repulsion};
    m.producible_kinds[lv.tasks] = {kinds::need_transport, kinds::can_serve, kinds::task_status};
    m.producible_kinds[lv.control] = {kinds::deadlock_emergence, kinds::deadlock_resolved, kinds::no_escape};
    m.hierarchy.couplings = {{lv.floor, lv.control}, {lv.floor, lv.tasks}};
    m.hierarchy.emergences = {{kinds::deadlock_emergence, lv.control, "deadlock-detector"}};
    m.hierarchy.constraints = {{kinds::inhibit_move, lv.floor, kinds::move, {types::deadlock_solver, "dispatcher"}},
                               {kinds::inhibit_repulsion, lv.floor, kinds::emit_repulsion, {types::deadlock_solver}}};
    return m;
}

SystemState make_fms_state(const Model& model, const FmsWorld& world)
{
    const auto& lv = world.levels();
    SystemState s = make_initial_state(model.graph);
    FloorView floor;
    for (const auto& shop : world.config().shops) floor.shops[shop.id] = ShopBody{shop.cell, {}, false};
    for (const auto& agv : world.config().agvs) {
        AgvBody b;
        b.cell = agv.cell;
        floor.agvs[agv.id] = b;
    }
    auto& props = s.per_level.at(lv.floor).properties;
    floor.write(props);
    for (auto& [key, entry] : props) {
        if (body_owner(key)) entry["init"] = Value::object();
    }
    if (s.per_level.count(lv.tasks) != 0) TaskBook{}.write(s.per_level.at(lv.tasks).properties);
    if (s.per_level.count(lv.control) != 0) {
        auto& c = s.per_level.at(lv.control).properties;
        c["spawned"] = 0;
        c["merged"] = 0;
        c["resolved"] = 0;
        c["no_escape"] = Value::array();
    }
    return reconcile_agents(std::move(s), {});
}

Value fms_metrics(const FmsWorld& world, const TickView& view)
{
    const auto& lv = world.levels();
    auto floor = FloorView::read(view.state.level(lv.floor).properties);
    auto book = control_book(view.state, world);
    std::size_t constraints = 0;
    for (const auto& [l, set] : view.report.produced) {
        for (const auto& [id, i] : set) {
            if (i.cls == InfluenceClass::constraint) ++constraints;
        }
    }
    std::size_t idle = 0;
    Value deliveries = Value::array();
    for (const auto& [id, b] : floor.agvs) {
        if (b.idle()) ++idle;
        for (const auto& e : b.events) {
            if (e.value("status", "") == "delivered") deliveries.push_back(Value{{"task", e.at("task")}, {"tick", e.at("tick")}});
        }
    }
    const double ratio = floor.agvs.empty() ? 0.0 : static_cast<double>(idle) / static_cast<double>(floor.agvs.size());
    return Value{{"tick", view.state.time},
                 {"tasks_delivered", delivered_count(view.state, world)},
                 {"deadlocks_detected", book.detected()},
                 {"deadlocks_resolved", book.resolved},
                 {"active_constraints", constraints},
                 {"agv_idle_ratio", ratio},
                 {"deliveries", deliveries}};
}

std::vector<std::string> safety_violations(const FmsWorld& world, const SystemState& state)
{
    std::vector<std::string> out;
    const auto& lv = world.levels();
    auto floor = FloorView::read(state.level(lv.floor).properties);
    std::map<Cell, std::string> seen;
    for (const auto& [id, b] : floor.agvs) {
        if (!world.grid().is_free(b.cell)) out.push_back("agv '" + id + "' on blocked cell " + to_string(b.cell));
        auto [it, fresh] = seen.emplace(b.cell, id);
        if (!fresh) out.push_back("agvs '" + it->second + "' and '" + id + "' share cell " + to_string(b.cell));
        if (b.carrying && b.assigned != b.carrying) out.push_back("agv '" + id + "' carries a task it is not assigned");
    }
    if (state.per_level.count(lv.tasks) != 0) {
        auto book = TaskBook::read(state.level(lv.tasks).properties);
        for (const auto& [id, rec] : book.tasks) {
            bool prefix = !rec.history.empty() && rec.history.back() == rec.state;
            for (std::size_t i = 0; i < rec.history.size(); ++i) {
                if (rec.history[i] != static_cast<TaskState>(i)) prefix = false;
            }
            if (!prefix) out.push_back("task '" + id + "' state history is not monotone");
        }
    }
    return out;
}

NamedObserver metrics_observer(const WorldPtr& world)
{
    return {"metrics", [world](const TickView& v) -> std::optional<Value> { return fms_metrics(*world, v); }};
}

NamedObserver safety_observer(const WorldPtr& world)
{
    return {"safety", [world](const TickView& v) -> std::optional<Value> {
                auto problems = safety_violations(*world, v.state);
                if (problems.empty()) return std::nullopt;
                return Value{{"violations", problems}};
            }};
}

TerminationPredicate all_delivered(const WorldPtr& world)
{
    return {"all-delivered", [world](const SystemState& s) {
                return delivered_count(s, *world) == world->config().tasks.size() && control_book(s, *world).active.empty();
            }};
}

std::optional<TerminationPredicate> termination_policy(const std::string& name, const WorldPtr& world)
{
    if (name == "all-delivered") return all_delivered(world);
    return std::nullopt;
}

Value FmsSummary::to_json() const
{
    return Value{{"tasks_total", tasks_total},
                 {"tasks_delivered", tasks_delivered},
                 {"deadlocks_detected", deadlocks_detected},
                 {"deadlocks_resolved", deadlocks_resolved},
                 {"mean_task_latency_ticks", mean_task_latency_ticks ? Value(*mean_task_latency_ticks) : Value(nullptr)},
                 {"agv_idle_ratio", agv_idle_ratio},
                 {"no_escape", no_escape},
                 {"safety_violations", safety_violations}};
}

FmsSummary summarize(const FmsWorld& world, const RunResult& result)
{
    FmsSummary s;
    s.tasks_total = world.config().tasks.size();
    s.tasks_delivered = delivered_count(result.final_state, world);
    auto book = control_book(result.final_state, world);
    s.deadlocks_detected = book.detected();
    s.deadlocks_resolved = book.resolved;
    s.no_escape.assign(book.no_escape.begin(), book.no_escape.end());

    double idle = 0.0;
    std::size_t rows = 0;
    double latency = 0.0;
    std::size_t delivered = 0;
    for (const auto& r : result.records) {
        if (r.observer == "safety") {
            s.safety_violations += r.values.at("violations").size();
            continue;
        }
        if (r.observer != "metrics") continue;
        idle += r.values.at("agv_idle_ratio").get<double>();
        ++rows;
        for (const auto& d : r.values.at("deliveries")) {
            const auto& task = world.task(d.at("task").get<std::string>());
            latency += static_cast<double>(d.at("tick").get<Tick>() + 1 - task.release);
            ++delivered;
        }
    }
    if (rows != 0) s.agv_idle_ratio = idle / static_cast<double>(rows);
    if (delivered != 0) s.mean_task_latency_ticks = latency / static_cast<double>(delivered);
    return s;
}

} // namespace irm::fms
