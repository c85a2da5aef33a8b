#pragma once

#include "irm/engine.hpp"
#include "irm/fms/world.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace irm::fms {

enum class TaskState { pending, assigned, picked, delivered };

std::string_view to_string(TaskState s);
std::optional<TaskState> parse_task_state(std::string_view s);

/// One entry of the task book kept in sigma^tasks under "tasks".
struct TaskRecord {
    std::string source;
    std::string destination;
    TaskState state = TaskState::pending;
    std::optional<std::string> agv;
    Tick release = 0;
    /// Position in the arrival order of need-transport influences.
    std::int64_t arrival = 0;
    std::vector<TaskState> history;
    std::map<std::string, Tick> stamps;

    Value to_json() const;
    static TaskRecord from_json(const Value& v);
    bool operator==(const TaskRecord&) const = default;
};

struct Assignment {
    std::string task;
    std::string agv;
    /// Offering AGVs still unmatched when the task was considered.
    std::vector<std::string> candidates;

    bool operator==(const Assignment&) const = default;
};

struct TaskBook {
    std::map<std::string, TaskRecord> tasks;
    std::int64_t next_arrival = 0;
    std::vector<Assignment> last_assignments;

    static TaskBook read(const PropertyMap& properties);
    void write(PropertyMap& properties) const;

    /// Task held (assigned or picked) by the AGV, if any.
    std::optional<std::string> held_by(const std::string& agv) const;
};

struct ServiceOffer {
    std::string agv;
    Cell cell;
};

/// Greedy matching: pending tasks in arrival order, each to the nearest
/// offering AGV by walls-only BFS distance to the source shop (ties to the
/// smallest id). Unreachable AGVs are skipped; unmatched tasks stay pending.
std::vector<Assignment> assign_tasks(const FmsWorld& world, const TaskBook& book, const std::vector<ServiceOffer>& offers);

ReactionRule task_assignment_reaction(WorldPtr world);

/// Environment of the task level that turns the last assignments into
/// inhibit-move constraints on candidates left without any task.
NaturalRule dispatcher_natural(WorldPtr world);

} // namespace irm::fms
