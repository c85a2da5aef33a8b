#include "irm/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace irm {

namespace {

std::string join_messages(const std::vector<Problem>& problems)
{
    std::string out;
    for (const auto& p : problems) {
        if (!out.empty()) out += "; ";
        out += std::string(to_string(p.code)) + ": " + p.message;
    }
    return out;
}

class Reader {
public:
    std::vector<Problem> problems;

    void fail(const std::string& where, const std::string& msg) { problems.push_back({ErrorCode::ValidationError, where + ": " + msg}); }

    template <class T>
    bool get(const Value& obj, const char* key, const std::string& where, T& out, bool required = false)
    {
        if (!obj.is_object() || !obj.contains(key)) {
            if (required) fail(where, std::string("missing field '") + key + "'");
            return false;
        }
        try {
            out = obj.at(key).get<T>();
            return true;
        }
        catch (const nlohmann::json::exception&) {
            fail(where + "." + key, "unexpected value " + obj.at(key).dump());
            return false;
        }
    }

    bool cell(const Value& obj, const char* key, const std::string& where, fms::Cell& out)
    {
        if (!obj.is_object() || !obj.contains(key)) {
            fail(where, std::string("missing field '") + key + "'");
            return false;
        }
        const auto& v = obj.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
            fail(where + "." + key, "a cell is written [x, y]");
            return false;
        }
        out = fms::cell_from_json(v);
        return true;
    }

    /// Elements of an array field as objects, with their location.
    std::vector<std::pair<std::string, const Value*>> items(const Value& obj, const char* key, const std::string& where)
    {
        std::vector<std::pair<std::string, const Value*>> out;
        if (!obj.is_object() || !obj.contains(key)) return out;
        const auto& arr = obj.at(key);
        if (!arr.is_array()) {
            fail(where + "." + key, "expected a list");
            return out;
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto loc = where + "." + key + "[" + std::to_string(i) + "]";
            if (!arr[i].is_object()) {
                fail(loc, "expected an object");
                continue;
            }
            out.emplace_back(loc, &arr[i]);
        }
        return out;
    }

    void unknown_keys(const Value& obj, const std::string& where, std::initializer_list<const char*> known)
    {
        if (!obj.is_object()) return;
        for (const auto& [k, v] : obj.items()) {
            bool ok = false;
            for (const auto* n : known) ok = ok || k == n;
            if (!ok) fail(where, "unknown field '" + k + "'");
        }
    }

    void edges(const Value& doc, const char* key, std::vector<std::pair<std::string, std::string>>& out)
    {
        if (!doc.contains(key)) return;
        const auto& arr = doc.at(key);
        if (!arr.is_array()) {
            fail(key, "expected a list of [from, to] pairs");
            return;
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& e = arr[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
                fail(std::string(key) + "[" + std::to_string(i) + "]", "expected [from, to]");
                continue;
            }
            out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
    }
};

Value edges_json(const std::vector<std::pair<std::string, std::string>>& edges)
{
    Value out = Value::array();
    for (const auto& [a, b] : edges) out.push_back(Value::array({a, b}));
    return out;
}

LevelSet to_levels(const std::vector<std::string>& names)
{
    LevelSet out;
    for (const auto& n : names) out.insert(LevelId{n});
    return out;
}

std::vector<fms::AgvDecl> place_agvs(const FmsSection& f, const fms::GridMap& grid, std::vector<Problem>* problems)
{
    if (!f.agv_count) return f.agvs;
    std::set<fms::Cell> shops;
    for (const auto& s : f.shops) shops.insert(s.cell);
    std::vector<fms::AgvDecl> out;
    for (int y = 0; y < grid.height() && static_cast<int>(out.size()) < *f.agv_count; ++y) {
        for (int x = 0; x < grid.width() && static_cast<int>(out.size()) < *f.agv_count; ++x) {
            fms::Cell c{x, y};
            if (grid.is_free(c) && shops.count(c) == 0) out.push_back({"a" + std::to_string(out.size() + 1), c});
        }
    }
    if (static_cast<int>(out.size()) < *f.agv_count && problems != nullptr) {
        problems->push_back({ErrorCode::ValidationError, "fms.agvs: only " + std::to_string(out.size()) +
                                                             " free cells for " + std::to_string(*f.agv_count) + " AGVs"});
    }
    return out;
}

/// World for the FMS section, or nullptr with problems recorded.
fms::WorldPtr make_world(const ScenarioSpec& spec, std::vector<Problem>& problems)
{
    if (!spec.fms) return nullptr;
    const auto& f = *spec.fms;
    std::optional<fms::GridMap> grid;
    try {
        grid = fms::GridMap::from_rows(f.grid);
    }
    catch (const Error& e) {
        problems.push_back({ErrorCode::ValidationError, std::string("fms.grid: ") + e.what()});
        return nullptr;
    }
    fms::FmsConfig config{*grid, f.shops, place_agvs(f, *grid, &problems), f.tasks_list, {}, {}};
    config.params = {f.attract_amplitude, f.repulse_amplitude, f.progress_window, f.jitter, spec.control};
    config.levels = {LevelId{f.floor}, LevelId{f.tasks}, LevelId{f.control}};
    auto found = fms::check_config(config);
    for (const auto& p : found) problems.push_back({ErrorCode::ValidationError, "fms: " + p});
    if (!found.empty()) return nullptr;
    return std::make_shared<const fms::FmsWorld>(std::move(config));
}

Model assemble(const ScenarioSpec& spec, const ValidatedLevelGraph& graph, const fms::WorldPtr& world)
{
    Model m{graph, {}, {}, {}, {}, {}, spec.run.seed};
    for (const auto& l : spec.levels) {
        auto rule = fms::reaction_policy(l.reaction, world);
        m.reactions[LevelId{l.name}] = rule ? *rule : ReactionRule(identity_reaction);
        m.producible_kinds[LevelId{l.name}] = {l.kinds.begin(), l.kinds.end()};
    }
    for (const auto& t : spec.agent_types) {
        auto rule = fms::behavior_policy(t.behavior, world);
        m.agent_types[t.type] = AgentType{t.type, to_levels(t.levels), rule ? *rule : *fms::behavior_policy("idle", world)};
    }
    for (const auto& e : spec.environments) {
        auto rule = fms::natural_policy(e.natural, world);
        NaturalRule natural = rule ? *rule : NaturalRule([](const Percept&, EnvironmentContext&) { return std::vector<InfluenceDraft>{}; });
        m.environments.push_back({EnvironmentRecord{e.id, to_levels(e.levels), e.natural}, std::move(natural)});
    }
    for (const auto& c : spec.hierarchy.couplings) m.hierarchy.couplings.push_back({LevelId{c.micro}, LevelId{c.macro}});
    for (const auto& e : spec.hierarchy.emergence_kinds) m.hierarchy.emergences.push_back({e.kind, LevelId{e.macro}, e.detector});
    for (const auto& c : spec.hierarchy.constraint_kinds) {
        m.hierarchy.constraints.push_back({c.kind, LevelId{c.micro}, c.inhibits, c.producers});
    }
    return m;
}

LevelGraphSpec graph_spec(const ScenarioSpec& spec)
{
    LevelGraphSpec g;
    for (const auto& l : spec.levels) g.levels.insert(LevelId{l.name});
    for (const auto& [a, b] : spec.influence_edges) g.influence_edges.push_back({LevelId{a}, LevelId{b}});
    for (const auto& [a, b] : spec.perception_edges) g.perception_edges.push_back({LevelId{a}, LevelId{b}});
    return g;
}

bool is_fms_policy(const std::string& name) { return name.rfind("fms-", 0) == 0; }

} // namespace

ScenarioError::ScenarioError(ErrorCode code, std::vector<Problem> problems)
    : Error(code, join_messages(problems)), problems_(std::move(problems))
{
}

Value parse_scenario_document(std::string_view text)
{
    try {
        return Value::parse(text);
    }
    catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            }
            else {
                ++column;
            }
        }
        throw ScenarioError(ErrorCode::ParseError,
                            {{ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                                         ": malformed JSON (" + e.what() + ")"}});
    }
}

Value read_scenario_document(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError(ErrorCode::ParseError, {{ErrorCode::ParseError, "cannot read '" + path.string() + "'"}});
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_document(buf.str());
}

Value apply_overrides(Value& document, const std::vector<std::string>& overrides)
{
    Value applied = Value::object();
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ScenarioError(ErrorCode::ValidationError, {{ErrorCode::ValidationError, "override '" + o + "' is not key=value"}});
        }
        const auto key = o.substr(0, eq);
        const auto raw = o.substr(eq + 1);
        Value value = Value::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;

        Value* node = &document;
        std::stringstream parts(key);
        std::string part;
        std::vector<std::string> path;
        while (std::getline(parts, part, '.')) path.push_back(part);
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (!node->is_object()) {
                throw ScenarioError(ErrorCode::ValidationError,
                                    {{ErrorCode::ValidationError, "override '" + key + "' crosses a non-object field"}});
            }
            node = &(*node)[path[i]];
        }
        *node = value;
        applied[key] = value;
    }
    return applied;
}

std::pair<ScenarioSpec, std::vector<Problem>> scenario_from_json(const Value& doc)
{
    Reader r;
    ScenarioSpec s;
    if (!doc.is_object()) {
        r.fail("scenario", "expected an object");
        return {s, r.problems};
    }
    r.unknown_keys(doc, "scenario",
                   {"name", "levels", "influence_edges", "perception_edges", "environments", "agent_types", "hierarchy", "fms",
                    "control", "run"});
    r.get(doc, "name", "scenario", s.name);
    if (!doc.contains("levels")) r.fail("scenario", "missing field 'levels'");
    for (const auto& [loc, v] : r.items(doc, "levels", "scenario")) {
        LevelDecl l;
        r.get(*v, "name", loc, l.name, true);
        r.get(*v, "reaction", loc, l.reaction);
        r.get(*v, "kinds", loc, l.kinds);
        s.levels.push_back(std::move(l));
    }
    r.edges(doc, "influence_edges", s.influence_edges);
    r.edges(doc, "perception_edges", s.perception_edges);
    for (const auto& [loc, v] : r.items(doc, "environments", "scenario")) {
        EnvironmentDecl e;
        r.get(*v, "id", loc, e.id, true);
        r.get(*v, "levels", loc, e.levels, true);
        r.get(*v, "natural", loc, e.natural, true);
        s.environments.push_back(std::move(e));
    }
    for (const auto& [loc, v] : r.items(doc, "agent_types", "scenario")) {
        AgentTypeDecl t;
        r.get(*v, "type", loc, t.type, true);
        r.get(*v, "behavior", loc, t.behavior, true);
        r.get(*v, "levels", loc, t.levels, true);
        s.agent_types.push_back(std::move(t));
    }
    if (doc.contains("hierarchy")) {
        const auto& h = doc.at("hierarchy");
        r.unknown_keys(h, "hierarchy", {"couplings", "emergence_kinds", "constraint_kinds"});
        for (const auto& [loc, v] : r.items(h, "couplings", "hierarchy")) {
            CouplingDecl c;
            r.get(*v, "micro", loc, c.micro, true);
            r.get(*v, "macro", loc, c.macro, true);
            s.hierarchy.couplings.push_back(std::move(c));
        }
        for (const auto& [loc, v] : r.items(h, "emergence_kinds", "hierarchy")) {
            EmergenceDecl e;
            r.get(*v, "kind", loc, e.kind, true);
            r.get(*v, "macro", loc, e.macro, true);
            r.get(*v, "detector", loc, e.detector, true);
            s.hierarchy.emergence_kinds.push_back(std::move(e));
        }
        for (const auto& [loc, v] : r.items(h, "constraint_kinds", "hierarchy")) {
            ConstraintDecl c;
            r.get(*v, "kind", loc, c.kind, true);
            r.get(*v, "micro", loc, c.micro, true);
            r.get(*v, "inhibits", loc, c.inhibits, true);
            r.get(*v, "producers", loc, c.producers, true);
            s.hierarchy.constraint_kinds.push_back(std::move(c));
        }
    }
    if (doc.contains("fms")) {
        const auto& v = doc.at("fms");
        FmsSection f;
        r.unknown_keys(v, "fms",
                       {"levels", "grid", "shops", "agvs", "tasks", "attract_amplitude", "repulse_amplitude", "progress_window",
                        "jitter"});
        if (v.contains("levels")) {
            const auto& roles = v.at("levels");
            r.unknown_keys(roles, "fms.levels", {"floor", "tasks", "control"});
            r.get(roles, "floor", "fms.levels", f.floor);
            r.get(roles, "tasks", "fms.levels", f.tasks);
            r.get(roles, "control", "fms.levels", f.control);
        }
        r.get(v, "grid", "fms", f.grid, true);
        for (const auto& [loc, x] : r.items(v, "shops", "fms")) {
            fms::ShopDecl shop;
            r.get(*x, "id", loc, shop.id, true);
            r.cell(*x, "cell", loc, shop.cell);
            f.shops.push_back(std::move(shop));
        }
        if (v.contains("agvs") && v.at("agvs").is_object()) {
            int count = 0;
            if (r.get(v.at("agvs"), "count", "fms.agvs", count, true)) f.agv_count = count;
        }
        else {
            for (const auto& [loc, x] : r.items(v, "agvs", "fms")) {
                fms::AgvDecl agv;
                r.get(*x, "id", loc, agv.id, true);
                r.cell(*x, "cell", loc, agv.cell);
                f.agvs.push_back(std::move(agv));
            }
        }
        for (const auto& [loc, x] : r.items(v, "tasks", "fms")) {
            fms::TaskDecl t;
            r.get(*x, "id", loc, t.id, true);
            r.get(*x, "source", loc, t.source, true);
            r.get(*x, "destination", loc, t.destination, true);
            r.get(*x, "release", loc, t.release);
            f.tasks_list.push_back(std::move(t));
        }
        r.get(v, "attract_amplitude", "fms", f.attract_amplitude);
        r.get(v, "repulse_amplitude", "fms", f.repulse_amplitude);
        r.get(v, "progress_window", "fms", f.progress_window);
        r.get(v, "jitter", "fms", f.jitter);
        s.fms = std::move(f);
    }
    r.get(doc, "control", "scenario", s.control);
    if (doc.contains("run")) {
        const auto& v = doc.at("run");
        r.unknown_keys(v, "run", {"ticks", "seed", "termination"});
        r.get(v, "ticks", "run", s.run.ticks);
        r.get(v, "seed", "run", s.run.seed);
        r.get(v, "termination", "run", s.run.termination);
    }
    return {s, r.problems};
}

Value scenario_to_json(const ScenarioSpec& s)
{
    Value doc;
    doc["name"] = s.name;
    doc["levels"] = Value::array();
    for (const auto& l : s.levels) doc["levels"].push_back(Value{{"name", l.name}, {"reaction", l.reaction}, {"kinds", l.kinds}});
    doc["influence_edges"] = edges_json(s.influence_edges);
    doc["perception_edges"] = edges_json(s.perception_edges);
    doc["environments"] = Value::array();
    for (const auto& e : s.environments) {
        doc["environments"].push_back(Value{{"id", e.id}, {"levels", e.levels}, {"natural", e.natural}});
    }
    doc["agent_types"] = Value::array();
    for (const auto& t : s.agent_types) {
        doc["agent_types"].push_back(Value{{"type", t.type}, {"behavior", t.behavior}, {"levels", t.levels}});
    }
    Value h{{"couplings", Value::array()}, {"emergence_kinds", Value::array()}, {"constraint_kinds", Value::array()}};
    for (const auto& c : s.hierarchy.couplings) h["couplings"].push_back(Value{{"micro", c.micro}, {"macro", c.macro}});
    for (const auto& e : s.hierarchy.emergence_kinds) {
        h["emergence_kinds"].push_back(Value{{"kind", e.kind}, {"macro", e.macro}, {"detector", e.detector}});
    }
    for (const auto& c : s.hierarchy.constraint_kinds) {
        h["constraint_kinds"].push_back(
            Value{{"kind", c.kind}, {"micro", c.micro}, {"inhibits", c.inhibits}, {"producers", c.producers}});
    }
    doc["hierarchy"] = h;
    if (s.fms) {
        const auto& f = *s.fms;
        Value v;
        v["levels"] = Value{{"floor", f.floor}, {"tasks", f.tasks}, {"control", f.control}};
        v["grid"] = f.grid;
        v["shops"] = Value::array();
        for (const auto& shop : f.shops) v["shops"].push_back(Value{{"id", shop.id}, {"cell", fms::to_json(shop.cell)}});
        if (f.agv_count) {
            v["agvs"] = Value{{"count", *f.agv_count}};
        }
        else {
            v["agvs"] = Value::array();
            for (const auto& a : f.agvs) v["agvs"].push_back(Value{{"id", a.id}, {"cell", fms::to_json(a.cell)}});
        }
        v["tasks"] = Value::array();
        for (const auto& t : f.tasks_list) {
            v["tasks"].push_back(Value{{"id", t.id}, {"source", t.source}, {"destination", t.destination}, {"release", t.release}});
        }
        v["attract_amplitude"] = f.attract_amplitude;
        v["repulse_amplitude"] = f.repulse_amplitude;
        v["progress_window"] = f.progress_window;
        v["jitter"] = f.jitter;
        doc["fms"] = v;
    }
    doc["control"] = s.control;
    doc["run"] = Value{{"ticks", s.run.ticks}, {"seed", s.run.seed}, {"termination", s.run.termination}};
    return doc;
}

std::vector<Problem> validate_scenario(const ScenarioSpec& spec)
{
    std::vector<Problem> out;
    auto report = [&](ErrorCode code, std::string msg) { out.push_back({code, std::move(msg)}); };

    std::set<std::string> levels;
    if (spec.levels.empty()) report(ErrorCode::EmptyLevelSet, "the scenario declares no level");
    for (const auto& l : spec.levels) {
        if (l.name.empty()) report(ErrorCode::UnknownLevel, "a level has an empty name");
        else if (!levels.insert(l.name).second) report(ErrorCode::ValidationError, "level '" + l.name + "' is declared twice");
        if (!fms::reaction_policy(l.reaction, nullptr)) {
            report(ErrorCode::ValidationError, "level '" + l.name + "' uses unknown reaction '" + l.reaction + "'");
        }
        else if (is_fms_policy(l.reaction) && !spec.fms) {
            report(ErrorCode::ValidationError, "reaction '" + l.reaction + "' needs an fms section");
        }
    }
    bool graph_ok = !spec.levels.empty() && levels.size() == spec.levels.size();
    auto check_edges = [&](const auto& edges, const char* what) {
        for (const auto& [a, b] : edges) {
            for (const auto& end : {a, b}) {
                if (levels.count(end) == 0) {
                    report(ErrorCode::UnknownLevelEndpoint, std::string(what) + " edge " + a + "->" + b + " names unknown level '" + end + "'");
                    graph_ok = false;
                }
            }
        }
    };
    check_edges(spec.influence_edges, "influence");
    check_edges(spec.perception_edges, "perception");

    for (const auto& e : spec.environments) {
        if (!fms::natural_policy(e.natural, nullptr)) {
            report(ErrorCode::ValidationError, "environment '" + e.id + "' uses unknown natural rule '" + e.natural + "'");
        }
    }
    std::set<std::string> types;
    for (const auto& t : spec.agent_types) {
        if (!types.insert(t.type).second) report(ErrorCode::ValidationError, "agent type '" + t.type + "' is declared twice");
        if (!fms::behavior_policy(t.behavior, nullptr)) {
            report(ErrorCode::ValidationError, "agent type '" + t.type + "' uses unknown behavior '" + t.behavior + "'");
        }
    }

    fms::WorldPtr world;
    if (spec.fms) {
        const auto& f = *spec.fms;
        for (const auto& role : {f.floor, f.tasks, f.control}) {
            if (levels.count(role) == 0) report(ErrorCode::UnknownLevel, "fms.levels names unknown level '" + role + "'");
        }
        for (const auto& needed : {fms::types::agv, fms::types::shop}) {
            if (types.count(needed) == 0) report(ErrorCode::ValidationError, "fms needs agent type '" + needed + "'");
        }
        world = make_world(spec, out);
    }

    if (graph_ok) {
        auto graph = validate(graph_spec(spec));
        auto model = assemble(spec, graph, world);
        for (auto& v : validate_model(model)) out.push_back(std::move(v));
    }
    if (spec.run.ticks < 1) report(ErrorCode::ValidationError, "run.ticks must be at least 1");
    if (spec.run.termination != "none" && spec.run.termination != "all-delivered") {
        report(ErrorCode::ValidationError, "unknown termination predicate '" + spec.run.termination + "'");
    }
    if (spec.run.termination == "all-delivered" && !spec.fms) {
        report(ErrorCode::ValidationError, "termination 'all-delivered' needs an fms section");
    }
    return out;
}

ScenarioSpec parse_scenario(const Value& document)
{
    auto [spec, problems] = scenario_from_json(document);
    if (problems.empty()) problems = validate_scenario(spec);
    if (!problems.empty()) throw ScenarioError(ErrorCode::ValidationError, std::move(problems));
    return spec;
}

ScenarioSpec parse_scenario(const std::filesystem::path& path) { return parse_scenario(read_scenario_document(path)); }

BuiltScenario build_scenario(const ScenarioSpec& spec)
{
    std::vector<Problem> problems;
    auto world = make_world(spec, problems);
    if (!problems.empty()) throw ScenarioError(ErrorCode::ValidationError, std::move(problems));
    BuiltScenario b{world, assemble(spec, validate(graph_spec(spec)), world), {}, {}, spec.run.ticks};
    b.initial = world ? fms::make_fms_state(b.model, *world) : make_initial_state(b.model.graph);
    if (world) {
        b.options.observers = {fms::metrics_observer(world), fms::safety_observer(world)};
        if (auto t = fms::termination_policy(spec.run.termination, world)) b.options.termination.push_back(*t);
    }
    return b;
}

} // namespace irm
