#pragma once

#include "irm/engine.hpp"
#include "irm/fms/deadlock.hpp"
#include "irm/fms/floor.hpp"
#include "irm/fms/tasks.hpp"
#include "irm/fms/world.hpp"

#include <optional>
#include <string>
#include <vector>

namespace irm::fms {

// Named policies a scenario can select per level, agent type and environment.
std::optional<ReactionRule> reaction_policy(const std::string& name, const WorldPtr& world);
std::optional<BehaviorRule> behavior_policy(const std::string& name, const WorldPtr& world);
std::optional<NaturalRule> natural_policy(const std::string& name, const WorldPtr& world);
std::vector<std::string> reaction_policy_names();
std::vector<std::string> behavior_policy_names();
std::vector<std::string> natural_policy_names();

/// The three-level shop floor model: floor, task assignment and deadlock
/// solving levels, with their kinds, couplings and policies.
Model make_fms_model(const WorldPtr& world, std::uint64_t seed = 0);

/// Tick-0 state: shop and AGV bodies in sigma^floor, empty task book and
/// control counters.
SystemState make_fms_state(const Model& model, const FmsWorld& world);

/// One metrics row: tick, tasks_delivered, deadlocks_detected,
/// deadlocks_resolved, active_constraints, agv_idle_ratio, plus the
/// deliveries completed in the step.
Value fms_metrics(const FmsWorld& world, const TickView& view);

inline const std::vector<std::string> metric_columns = {"tick",           "tasks_delivered",    "deadlocks_detected",
                                                       "deadlocks_resolved", "active_constraints", "agv_idle_ratio"};

/// Cell capacity, blocked cells and task-state monotonicity.
std::vector<std::string> safety_violations(const FmsWorld& world, const SystemState& state);

NamedObserver metrics_observer(const WorldPtr& world);
NamedObserver safety_observer(const WorldPtr& world);

/// Fires once every task is delivered and no deadlock solver is alive.
TerminationPredicate all_delivered(const WorldPtr& world);
std::optional<TerminationPredicate> termination_policy(const std::string& name, const WorldPtr& world);

struct FmsSummary {
    std::size_t tasks_total = 0;
    std::size_t tasks_delivered = 0;
    std::int64_t deadlocks_detected = 0;
    std::int64_t deadlocks_resolved = 0;
    /// Mean of delivery tick minus release over delivered tasks; null when none.
    std::optional<double> mean_task_latency_ticks;
    double agv_idle_ratio = 0.0;
    std::vector<std::string> no_escape;
    std::size_t safety_violations = 0;

    Value to_json() const;
};

FmsSummary summarize(const FmsWorld& world, const RunResult& result);

} // namespace irm::fms
