#pragma once

#include "irm/influence.hpp"
#include "irm/level_graph.hpp"

#include <map>
#include <optional>
#include <string>

namespace irm {

struct AgentId {
    std::string name;

    AgentId() = default;
    AgentId(std::string n) : name(std::move(n)) {}
    AgentId(const char* n) : name(n) {}

    auto operator<=>(const AgentId&) const = default;
};

using PropertyMap = std::map<std::string, Value>;

/// The manifestation of an agent in one level. Stored inside that level's
/// property map, which is what makes the agent a member of the level.
struct Body {
    LevelId level;
    Value attributes = Value::object();

    bool operator==(const Body&) const = default;
};

struct AgentRecord {
    AgentId id;
    std::string type;
    Value internal_state;
    std::map<LevelId, Body> bodies;

    bool operator==(const AgentRecord&) const = default;
};

struct EnvironmentRecord {
    std::string id;
    LevelSet member_levels;
    std::string natural;

    bool operator==(const EnvironmentRecord&) const = default;
};

/// delta^l = <sigma^l, gamma^l>.
struct LevelState {
    LevelId level;
    PropertyMap properties;
    InfluenceSet influences;

    bool operator==(const LevelState&) const = default;
};

/// delta(t). Value type: every operation below returns a new state.
struct SystemState {
    Tick time = 0;
    std::map<LevelId, LevelState> per_level;
    std::map<AgentId, AgentRecord> agents;

    const LevelState& level(const LevelId& l) const;
    const AgentRecord& agent(const AgentId& a) const;

    bool operator==(const SystemState&) const = default;
};

/// Empty state at tick 0 with one LevelState per level of the graph.
SystemState make_initial_state(const ValidatedLevelGraph& graph);

// Body entries live in sigma^l under "body/<agent id>" and hold
// {"agent", "type", "attributes"}.
std::string body_key(const AgentId& a);
std::optional<AgentId> body_owner(const std::string& property_key);
Value body_entry(const AgentId& a, const std::string& type, const Value& attributes);

/// Levels l such that the agent has a body for l and that body is
/// registered in sigma^l.
LevelSet member_levels(const SystemState& state, const AgentId& a);

SystemState add_agent(const SystemState& state, AgentRecord agent);
SystemState register_body(const SystemState& state, const AgentId& a, const LevelId& l, Body body);
SystemState remove_body(const SystemState& state, const AgentId& a, const LevelId& l);

/// Rebuilds agent records from the body entries found in each level's
/// property map. Unknown owners become new agents (type and initial internal
/// state read from the entry); agents that had bodies and lost all of them
/// are retired. Internal state of surviving agents is kept.
SystemState reconcile_agents(SystemState state, const std::map<AgentId, AgentRecord>& previous);

/// Read-only view of the levels an agent or environment may perceive.
class Percept {
public:
    Percept(const SystemState& snapshot, LevelSet observable)
        : snapshot_(&snapshot), observable_(std::move(observable))
    {
    }

    Tick time() const { return snapshot_->time; }
    const LevelSet& observable() const { return observable_; }
    bool can_observe(const LevelId& l) const { return observable_.count(l) != 0; }

    /// Throws ContractViolation(IllegalPerception) outside N_P^+.
    const LevelState& level(const LevelId& l) const;

private:
    const SystemState* snapshot_;
    LevelSet observable_;
};

} // namespace irm
