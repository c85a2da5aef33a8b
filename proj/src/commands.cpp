#include "irm/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <tuple>

namespace irm {

namespace {

std::string format_ratio(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string metrics_csv(const std::vector<MetricRecord>& records)
{
    std::string out;
    for (std::size_t i = 0; i < fms::metric_columns.size(); ++i) {
        out += (i == 0 ? "" : ",") + fms::metric_columns[i];
    }
    out += "\n";
    for (const auto& r : records) {
        if (r.observer != "metrics") continue;
        const auto& v = r.values;
        out += std::to_string(v.at("tick").get<Tick>()) + "," + std::to_string(v.at("tasks_delivered").get<std::int64_t>()) + "," +
               std::to_string(v.at("deadlocks_detected").get<std::int64_t>()) + "," +
               std::to_string(v.at("deadlocks_resolved").get<std::int64_t>()) + "," +
               std::to_string(v.at("active_constraints").get<std::int64_t>()) + "," +
               format_ratio(v.at("agv_idle_ratio").get<double>()) + "\n";
    }
    return out;
}

struct TraceRow {
    Tick tick;
    std::string level;
    std::string id;
    std::string event;
    Value payload;
};

/// Observer collecting trace rows: produced influences, inhibitions and
/// agent appearance/disappearance between consecutive states.
NamedObserver trace_observer(std::shared_ptr<std::vector<TraceRow>> rows, const SystemState& initial)
{
    auto previous = std::make_shared<std::map<AgentId, AgentRecord>>(initial.agents);
    return {"trace", [rows, previous](const TickView& v) -> std::optional<Value> {
                const Tick tick = v.report.tick;
                for (const auto& [level, set] : v.report.produced) {
                    for (const auto& [id, i] : set) rows->push_back({tick, level.name, id.str(), "influence", to_json(i)});
                }
                for (const auto& [level, log] : v.report.inhibitions) {
                    for (const auto& rec : log) {
                        Value ids = Value::array();
                        for (const auto& i : rec.inhibited) ids.push_back(i.str());
                        rows->push_back({tick, level.name, rec.constraint.str(), "inhibition",
                                         Value{{"constraint", rec.constraint.str()}, {"inhibited", ids}}});
                    }
                }
                auto lifecycle = [&](const AgentRecord& a, const char* event) {
                    const std::string level = a.bodies.empty() ? std::string() : a.bodies.begin()->first.name;
                    Value bodies = Value::object();
                    for (const auto& [l, b] : a.bodies) bodies[l.name] = b.attributes;
                    rows->push_back({tick, level, ProducerRef::agent(a.id.name).key(), event,
                                     Value{{"agent", a.id.name}, {"type", a.type}, {"bodies", bodies}}});
                };
                for (const auto& [id, a] : v.state.agents) {
                    if (previous->count(id) == 0) lifecycle(a, "spawn");
                }
                for (const auto& [id, a] : *previous) {
                    if (v.state.agents.count(id) == 0) lifecycle(a, "dissolve");
                }
                *previous = v.state.agents;
                return std::nullopt;
            }};
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ValidationError, "cannot write '" + path.string() + "'");
    out << content;
}

void print_problems(std::ostream& err, const std::vector<Problem>& problems)
{
    for (const auto& p : problems) err << to_string(p.code) << ": " << p.message << "\n";
}

} // namespace

RunArtifacts execute_scenario(const ScenarioSpec& spec, const Value& overrides, bool with_trace)
{
    auto built = build_scenario(spec);
    auto rows = std::make_shared<std::vector<TraceRow>>();
    if (with_trace) built.options.observers.push_back(trace_observer(rows, built.initial));

    auto result = run(built.model, built.initial, built.ticks, built.options);

    RunArtifacts a;
    a.metrics_csv = metrics_csv(result.records);
    a.stop_reason = result.stop_reason;
    auto summary = built.world ? fms::summarize(*built.world, result) : fms::FmsSummary{};
    a.summary = summary.to_json();
    a.summary["scenario"] = spec.name;
    a.summary["stop_reason"] = result.stop_reason;
    a.summary["ticks_run"] = result.ticks_run;
    a.summary["seed"] = spec.run.seed;
    a.summary["control"] = spec.control;
    a.summary["overrides"] = overrides;
    if (summary.safety_violations != 0) a.exit_code = exit_code::contract_violation;
    else if (!summary.no_escape.empty()) a.exit_code = exit_code::no_escape;

    std::stable_sort(rows->begin(), rows->end(), [](const TraceRow& x, const TraceRow& y) {
        return std::tie(x.tick, x.level, x.id, x.event) < std::tie(y.tick, y.level, y.id, y.event);
    });
    for (const auto& r : *rows) {
        a.trace.push_back(Value{{"tick", r.tick}, {"level", r.level}, {"event", r.event}, {"payload", r.payload}}.dump());
    }
    return a;
}

std::pair<ScenarioSpec, Value> load_scenario(const RunRequest& request)
{
    auto doc = read_scenario_document(request.scenario);
    auto overrides = request.overrides;
    if (request.ticks) overrides.push_back("run.ticks=" + std::to_string(*request.ticks));
    if (request.seed) overrides.push_back("run.seed=" + std::to_string(*request.seed));
    if (request.control) overrides.push_back(std::string("control=") + (*request.control ? "true" : "false"));
    auto applied = apply_overrides(doc, overrides);
    return {parse_scenario(doc), applied};
}

int cmd_run(const RunRequest& request, std::ostream& out, std::ostream& err)
{
    try {
        auto [spec, overrides] = load_scenario(request);
        auto a = execute_scenario(spec, overrides, request.trace_out.has_value());
        if (request.metrics_out) write_file(*request.metrics_out, a.metrics_csv);
        if (request.trace_out) {
            std::string text;
            for (const auto& line : a.trace) text += line + "\n";
            write_file(*request.trace_out, text);
        }
        out << a.summary.dump(2) << "\n";
        if (a.exit_code == exit_code::no_escape) {
            err << "NoEscapePath: trapped set enclosed for " << a.summary.at("no_escape").dump() << "\n";
        }
        return a.exit_code;
    }
    catch (const ScenarioError& e) {
        print_problems(err, e.problems());
        return exit_code::invalid_scenario;
    }
    catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code::contract_violation;
    }
}

std::string compare_verdict(const Value& off, const Value& on)
{
    const auto total = on.at("tasks_total").get<std::int64_t>();
    if (!on.at("no_escape").empty()) return "NoEscapePath under control=on: trapped set cannot be unwound";
    const auto off_detected = off.at("deadlocks_detected").get<std::int64_t>();
    const auto on_detected = on.at("deadlocks_detected").get<std::int64_t>();
    const bool on_done = on.at("tasks_delivered").get<std::int64_t>() == total;
    if (off_detected == 0 && on_detected == 0) return "no deadlock in either mode";
    if (on_done && on.at("deadlocks_resolved").get<std::int64_t>() == on_detected) {
        return "control resolves deadlock; all tasks delivered";
    }
    return "deadlock persists under control";
}

int cmd_compare(const RunRequest& request, std::ostream& out, std::ostream& err)
{
    try {
        RunRequest base = request;
        base.control = false;
        auto [off_spec, off_over] = load_scenario(base);
        base.control = true;
        auto [on_spec, on_over] = load_scenario(base);
        auto off = execute_scenario(off_spec, off_over, false);
        auto on = execute_scenario(on_spec, on_over, false);

        const char* rows[] = {"tasks_total",        "tasks_delivered",         "deadlocks_detected", "deadlocks_resolved",
                              "mean_task_latency_ticks", "agv_idle_ratio", "ticks_run",          "stop_reason"};
        char line[160];
        std::snprintf(line, sizeof line, "%-24s %18s %18s\n", "metric", "control=off", "control=on");
        out << line;
        for (const auto* key : rows) {
            auto cell = [&](const Value& s) {
                const auto& v = s.at(key);
                if (v.is_number_float()) return format_ratio(v.get<double>());
                return v.is_string() ? v.get<std::string>() : v.dump();
            };
            std::snprintf(line, sizeof line, "%-24s %18s %18s\n", key, cell(off.summary).c_str(), cell(on.summary).c_str());
            out << line;
        }
        const auto verdict = compare_verdict(off.summary, on.summary);
        out << "verdict: " << verdict << "\n";
        if (off.exit_code == exit_code::contract_violation || on.exit_code == exit_code::contract_violation) {
            return exit_code::contract_violation;
        }
        return on.exit_code == exit_code::no_escape ? exit_code::no_escape : exit_code::ok;
    }
    catch (const ScenarioError& e) {
        print_problems(err, e.problems());
        return exit_code::invalid_scenario;
    }
    catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code::contract_violation;
    }
}

int cmd_validate(const std::filesystem::path& path, std::ostream& out, std::ostream& err)
{
    try {
        auto spec = parse_scenario(path);
        out << "valid: " << (spec.name.empty() ? path.string() : spec.name) << "\n";
        return exit_code::ok;
    }
    catch (const ScenarioError& e) {
        print_problems(err, e.problems());
        return exit_code::invalid_scenario;
    }
}

} // namespace irm
