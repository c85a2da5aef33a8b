#pragma once

#include "irm/hierarchy.hpp"
#include "irm/influence.hpp"
#include "irm/level_graph.hpp"
#include "irm/state.hpp"

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace irm {

/// An influence as emitted by a rule, before the engine stamps identity,
/// producer and class onto it.
struct InfluenceDraft {
    std::string kind;
    LevelId target;
    Value payload = Value::object();
};

struct AgentContext {
    AgentId id;
    std::string type;
    Tick tick = 0;
    LevelSet levels;
    std::mt19937_64 rng;
};

struct EnvironmentContext {
    std::string id;
    Tick tick = 0;
    LevelSet levels;
    std::mt19937_64 rng;
};

/// Behavior_a split into perception, memorization and decision, invoked in
/// that order exactly once per agent per step.
struct BehaviorRule {
    std::function<Value(const Percept&, AgentContext&)> perception;
    std::function<Value(const Value& percept, const Value& internal_state, AgentContext&)> memorization;
    std::function<std::vector<InfluenceDraft>(const Value& internal_state, AgentContext&)> decision;
};

using NaturalRule = std::function<std::vector<InfluenceDraft>(const Percept&, EnvironmentContext&)>;

struct ReactionInput {
    LevelId level;
    Tick tick = 0;
    const PropertyMap& properties;
    /// gamma^l' after constraint filtering.
    const InfluenceSet& influences;
    const std::vector<InhibitionRecord>& inhibitions;
};

struct ReactionResult {
    PropertyMap properties;
    /// Becomes gamma^l(t+1). Every entry must target the reacting level.
    InfluenceSet persisted;
};

using ReactionRule = std::function<ReactionResult(const ReactionInput&)>;

/// Default reaction: sigma unchanged, nothing persists.
ReactionResult identity_reaction(const ReactionInput& in);

struct AgentType {
    std::string name;
    /// Levels agents of this type hold bodies in. Used for static checks.
    LevelSet home_levels;
    BehaviorRule behavior;
};

struct Environment {
    EnvironmentRecord record;
    NaturalRule natural;
};

struct Model {
    ValidatedLevelGraph graph;
    std::map<std::string, AgentType> agent_types;
    std::vector<Environment> environments;
    std::map<LevelId, ReactionRule> reactions;
    KindTable producible_kinds;
    HierarchySpec hierarchy;
    std::uint64_t seed = 0;

    std::vector<ProducerDecl> producer_decls() const;
};

/// Static validity: graph validated, one reaction per level, kind tables and
/// producers reference known levels, hierarchy discipline holds.
std::vector<HierarchyViolation> validate_model(const Model& model);

enum class Execution { serial, parallel };

struct StepOptions {
    Execution execution = Execution::parallel;
    /// Phase-1 evaluation order; defaults to ascending agent id.
    std::optional<std::vector<AgentId>> agent_order;
    /// Reaction order; defaults to ascending level name.
    std::optional<std::vector<LevelId>> level_order;
};

struct Production {
    /// gamma^l'(t) per level, including carried-over gamma^l(t).
    std::map<LevelId, InfluenceSet> per_level;
    /// s_a(t+dt) from memorization.
    std::map<AgentId, Value> internal_states;

    bool operator==(const Production&) const = default;
};

Production produce_influences(const Model& model, const SystemState& snapshot, const StepOptions& options = {});

/// Single-threaded reference for produce_influences.
inline Production produce_influences_serial(const Model& model, const SystemState& snapshot)
{
    return produce_influences(model, snapshot, StepOptions{Execution::serial, std::nullopt, std::nullopt});
}

struct StepReport {
    /// Tick of the snapshot the step started from.
    Tick tick = 0;
    std::map<LevelId, InfluenceSet> produced;
    std::map<LevelId, std::vector<InhibitionRecord>> inhibitions;
};

struct StepResult {
    SystemState state;
    StepReport report;
};

StepResult react(const Model& model, const SystemState& snapshot, const Production& produced,
                 const StepOptions& options = {});

StepResult step_with_report(const Model& model, const SystemState& state, const StepOptions& options = {});

inline SystemState step(const Model& model, const SystemState& state, const StepOptions& options = {})
{
    return step_with_report(model, state, options).state;
}

/// What an observer sees after each step.
struct TickView {
    const SystemState& state;
    const StepReport& report;
};

/// Read-only hook; a returned value is stored as that tick's metric record.
using ObserverHook = std::function<std::optional<Value>(const TickView&)>;

struct NamedObserver {
    std::string name;
    ObserverHook hook;
};

struct TerminationPredicate {
    std::string name;
    std::function<bool(const SystemState&)> fires;
};

struct MetricRecord {
    Tick tick = 0;
    std::string observer;
    Value values;

    bool operator==(const MetricRecord&) const = default;
};

struct RunResult {
    SystemState final_state;
    std::vector<MetricRecord> records;
    Tick ticks_run = 0;
    std::string stop_reason;
};

struct RunOptions {
    std::vector<NamedObserver> observers;
    std::vector<TerminationPredicate> termination;
    StepOptions step;
};

/// Steps up to `ticks` times (ticks >= 1), stopping early when a
/// termination predicate fires on the new state.
RunResult run(const Model& model, const SystemState& initial, Tick ticks, const RunOptions& options = {});

} // namespace irm
