#pragma once

#include "irm/engine.hpp"
#include "irm/fms/floor.hpp"
#include "irm/fms/world.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace irm::fms {

/// Next cell on a walls-only shortest path to the shop (ties to the
/// smallest cell). nullopt when already there or unreachable.
std::optional<Cell> preferred_step(const FmsWorld& world, Cell from, const std::string& shop);

struct WaitAnalysis {
    /// a -> {b}: a is blocked and waits on b.
    std::map<std::string, std::set<std::string>> edges;
    /// AGVs on some wait cycle.
    std::set<std::string> cycle_members;
    /// Assigned AGVs whose whole progress window is one cell.
    std::set<std::string> stalled;
    /// Weakly connected groups of cycle members and stalled AGVs, sorted.
    std::vector<std::set<std::string>> groups;
};

/// Wait-for analysis of a floor snapshot. Only assigned AGVs that did not
/// move have outgoing edges: a waits on b when b occupies a's preferred step
/// or b emits repulsion reaching that step.
WaitAnalysis analyze_waits(const FmsWorld& world, const FloorView& floor);

NaturalRule deadlock_detector_natural(WorldPtr world);

/// What a deadlock solver decides for one tick.
struct SolverAction {
    enum class Kind { resolve, force, no_escape } kind = Kind::force;
    std::string agent;
    Cell to;
    /// Current yield plan, carried in the solver's internal state.
    std::optional<std::string> yielder;
    std::optional<Cell> refuge;
};

/// Whether the member would make progress on its own: it has no goal, or
/// the field with every other assigned AGV repulsing offers a strictly
/// ascending unoccupied neighbor.
bool member_free(const FmsWorld& world, const FloorView& floor, const std::string& member);

/// One simulated tick in which the members follow the field again, every
/// other assigned AGV repulses and non-members stay. Resulting cells.
std::map<std::string, Cell> released_moves(const FmsWorld& world, const FloorView& floor, const std::set<std::string>& members);

/// Resolved once every member with a goal would move when released;
/// otherwise one forced move: continue the yield plan, advance a member
/// that can reach its goal around the other AGVs, or send a member to a
/// refuge off the others' shortest paths. No refuge means no escape.
SolverAction plan_resolution(const FmsWorld& world, const FloorView& floor, const std::set<std::string>& trapped,
                             const std::optional<std::string>& yielder, const std::optional<Cell>& refuge);

BehaviorRule deadlock_solver_behavior(WorldPtr world);

/// Counters kept in sigma^control.
struct ControlBook {
    std::int64_t spawned = 0;
    std::int64_t merged = 0;
    std::int64_t resolved = 0;
    /// Macro agents that reported an enclosed trapped set.
    std::set<std::string> no_escape;
    /// Live deadlock-solver agents and their trapped sets.
    std::map<std::string, std::set<std::string>> active;

    static ControlBook read(const PropertyMap& properties);

    std::int64_t detected() const { return spawned - merged; }
};

ReactionRule control_reaction(WorldPtr world);

} // namespace irm::fms
