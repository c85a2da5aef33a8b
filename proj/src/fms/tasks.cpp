#include "irm/fms/tasks.hpp"

#include "irm/error.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace irm::fms {

namespace {

constexpr std::string_view state_names[] = {"pending", "assigned", "picked", "delivered"};

} // namespace

std::string_view to_string(TaskState s) { return state_names[static_cast<int>(s)]; }

std::optional<TaskState> parse_task_state(std::string_view s)
{
    for (int i = 0; i < 4; ++i) {
        if (state_names[i] == s) return static_cast<TaskState>(i);
    }
    return std::nullopt;
}

Value TaskRecord::to_json() const
{
    Value h = Value::array();
    for (auto s : history) h.push_back(std::string(fms::to_string(s)));
    return Value{{"source", source},   {"destination", destination},
                 {"state", std::string(fms::to_string(state))},
                 {"agv", agv ? Value(*agv) : Value(nullptr)},
                 {"release", release}, {"arrival", arrival},
                 {"history", h},       {"stamps", stamps}};
}

TaskRecord TaskRecord::from_json(const Value& v)
{
    TaskRecord r;
    r.source = v.at("source").get<std::string>();
    r.destination = v.at("destination").get<std::string>();
    r.state = parse_task_state(v.at("state").get<std::string>()).value();
    if (v.contains("agv") && !v.at("agv").is_null()) r.agv = v.at("agv").get<std::string>();
    r.release = v.value("release", Tick{0});
    r.arrival = v.value("arrival", std::int64_t{0});
    for (const auto& s : v.value("history", Value::array())) r.history.push_back(parse_task_state(s.get<std::string>()).value());
    r.stamps = v.value("stamps", std::map<std::string, Tick>{});
    return r;
}

TaskBook TaskBook::read(const PropertyMap& properties)
{
    TaskBook book;
    if (auto it = properties.find("tasks"); it != properties.end()) {
        for (const auto& [id, rec] : it->second.items()) book.tasks.emplace(id, TaskRecord::from_json(rec));
    }
    if (auto it = properties.find("next_arrival"); it != properties.end()) book.next_arrival = it->second.get<std::int64_t>();
    if (auto it = properties.find("last_assignments"); it != properties.end()) {
        for (const auto& a : it->second) {
            book.last_assignments.push_back(
                {a.at("task").get<std::string>(), a.at("agv").get<std::string>(), a.at("candidates").get<std::vector<std::string>>()});
        }
    }
    return book;
}

void TaskBook::write(PropertyMap& properties) const
{
    Value t = Value::object();
    for (const auto& [id, rec] : tasks) t[id] = rec.to_json();
    properties["tasks"] = t;
    properties["next_arrival"] = next_arrival;
    Value a = Value::array();
    for (const auto& x : last_assignments) a.push_back(Value{{"task", x.task}, {"agv", x.agv}, {"candidates", x.candidates}});
    properties["last_assignments"] = a;
}

std::optional<std::string> TaskBook::held_by(const std::string& agv) const
{
    for (const auto& [id, rec] : tasks) {
        if (rec.agv == agv && (rec.state == TaskState::assigned || rec.state == TaskState::picked)) return id;
    }
    return std::nullopt;
}

std::vector<Assignment> assign_tasks(const FmsWorld& world, const TaskBook& book, const std::vector<ServiceOffer>& offers)
{
    std::vector<std::pair<std::int64_t, std::string>> order;
    for (const auto& [id, rec] : book.tasks) {
        if (rec.state == TaskState::pending) order.emplace_back(rec.arrival, id);
    }
    std::sort(order.begin(), order.end());

    std::map<std::string, Cell> free;
    for (const auto& o : offers) {
        if (!book.held_by(o.agv)) free.emplace(o.agv, o.cell);
    }

    std::vector<Assignment> out;
    for (const auto& [arrival, task] : order) {
        const auto& source = book.tasks.at(task).source;
        std::optional<std::pair<int, std::string>> best;
        for (const auto& [agv, cell] : free) {
            int d = world.distance_to_shop(source, cell);
            if (d == unreachable) continue;
            if (!best || d < best->first) best = std::make_pair(d, agv);
        }
        if (!best) continue;
        std::vector<std::string> candidates;
        for (const auto& [agv, cell] : free) candidates.push_back(agv);
        out.push_back({task, best->second, std::move(candidates)});
        free.erase(best->second);
    }
    return out;
}

ReactionRule task_assignment_reaction(WorldPtr world)
{
    return [world](const ReactionInput& in) {
        auto book = TaskBook::read(in.properties);

        std::vector<std::tuple<Tick, std::string, const Influence*>> needs;
        std::vector<const Influence*> statuses;
        std::vector<ServiceOffer> offers;
        for (const auto& [id, i] : in.influences) {
            if (i.kind == kinds::need_transport) {
                needs.emplace_back(i.payload.value("release", Tick{0}), i.payload.at("task").get<std::string>(), &i);
            }
            else if (i.kind == kinds::task_status) {
                statuses.push_back(&i);
            }
            else if (i.kind == kinds::can_serve && i.producer.kind == ProducerKind::agent) {
                offers.push_back({i.producer.id, cell_from_json(i.payload.at("cell"))});
            }
        }

        std::sort(needs.begin(), needs.end(),
                  [](const auto& a, const auto& b) { return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b)); });
        for (const auto& [release, task, i] : needs) {
            if (book.tasks.count(task) != 0) continue;
            TaskRecord rec;
            rec.source = i->payload.at("source").get<std::string>();
            rec.destination = i->payload.at("destination").get<std::string>();
            rec.release = release;
            rec.arrival = book.next_arrival++;
            rec.history = {TaskState::pending};
            rec.stamps["pending"] = in.tick;
            book.tasks.emplace(task, std::move(rec));
        }

        for (const auto* i : statuses) {
            auto it = book.tasks.find(i->payload.at("task").get<std::string>());
            auto next = parse_task_state(i->payload.value("status", ""));
            if (it == book.tasks.end() || !next) continue;
            auto& rec = it->second;
            // Walk forward through skipped states so the history stays a prefix of the full order.
            while (rec.state < *next) {
                rec.state = static_cast<TaskState>(static_cast<int>(rec.state) + 1);
                rec.history.push_back(rec.state);
                rec.stamps[std::string(to_string(rec.state))] = i->payload.value("tick", in.tick);
            }
        }

        book.last_assignments = assign_tasks(*world, book, offers);
        for (const auto& a : book.last_assignments) {
            auto& rec = book.tasks.at(a.task);
            rec.state = TaskState::assigned;
            rec.agv = a.agv;
            rec.history.push_back(TaskState::assigned);
            rec.stamps["assigned"] = in.tick;
        }

        ReactionResult out{in.properties, {}};
        book.write(out.properties);
        return out;
    };
}

NaturalRule dispatcher_natural(WorldPtr world)
{
    return [world](const Percept& percept, EnvironmentContext&) {
        const auto& lv = world->levels();
        auto book = TaskBook::read(percept.level(lv.tasks).properties);
        std::set<std::string> selected;
        for (const auto& a : book.last_assignments) selected.insert(a.agv);
        std::vector<InfluenceDraft> out;
        for (const auto& a : book.last_assignments) {
            for (const auto& c : a.candidates) {
                if (selected.count(c) != 0) continue;
                InfluenceSelector sel{kinds::move, ProducerRef::agent(c), Value{{"task", a.task}}};
                out.push_back({kinds::inhibit_move, lv.floor, constraint_payload(sel, Value{{"task", a.task}, {"selected", a.agv}})});
            }
        }
        return out;
    };
}

} // namespace irm::fms
