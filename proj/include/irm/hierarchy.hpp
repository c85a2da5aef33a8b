#pragma once

#include "irm/error.hpp"
#include "irm/influence.hpp"
#include "irm/state.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace irm {

/// Gamma^l: kinds producible into each level.
using KindTable = std::map<LevelId, std::set<std::string>>;

/// Two hierarchically coupled levels. Requires both (micro, macro) and
/// (macro, micro) in E_I.
struct HierarchicalCoupling {
    LevelId micro;
    LevelId macro;

    auto operator<=>(const HierarchicalCoupling&) const = default;
};

/// Declarative description of the influences a constraint inhibits.
/// Only ordinary influences are ever matched.
struct InfluenceSelector {
    std::string match_kind;
    std::optional<ProducerRef> match_producer;
    /// Top-level payload fields that must compare equal.
    Value match_payload = Value::object();

    bool matches(const Influence& i) const;

    Value to_json() const;
    static std::optional<InfluenceSelector> from_json(const Value& v);

    bool operator==(const InfluenceSelector&) const = default;
};

/// Payload of a constraint influence: {"selector": {...}, ...}.
Value constraint_payload(const InfluenceSelector& selector, Value extra = Value::object());

struct EmergenceKindDecl {
    std::string kind;
    LevelId macro;
    /// Environment id or agent type permitted to produce the kind.
    std::string detector;
};

struct ConstraintKindDecl {
    std::string kind;
    LevelId micro;
    /// The ordinary kind this constraint inhibits.
    std::string inhibits;
    /// Agent types or environment ids permitted to produce the constraint.
    std::vector<std::string> producers;
};

struct HierarchySpec {
    std::vector<HierarchicalCoupling> couplings;
    std::vector<EmergenceKindDecl> emergences;
    std::vector<ConstraintKindDecl> constraints;

    const EmergenceKindDecl* emergence(const std::string& kind) const;
    const ConstraintKindDecl* constraint(const std::string& kind) const;
    const HierarchicalCoupling* coupling(const LevelId& micro, const LevelId& macro) const;
};

/// A potential influence producer: an agent type (by home levels) or an
/// environment (by member levels).
struct ProducerDecl {
    std::string name;
    LevelSet levels;
};

struct HierarchyViolation {
    ErrorCode code;
    std::string message;
};

/// Static discipline check run before any step. Returns every violation.
std::vector<HierarchyViolation> check_hierarchy(const ValidatedLevelGraph& graph, const KindTable& kinds,
                                                const HierarchySpec& spec,
                                                const std::vector<ProducerDecl>& producers);

/// Runtime check of one emergence influence. `producer` names the agent type
/// or environment id that produced it, with its current levels.
std::optional<HierarchyViolation> check_emergence_legality(const KindTable& kinds, const HierarchySpec& spec,
                                                           const HierarchicalCoupling& coupling,
                                                           const Influence& influence,
                                                           const ProducerDecl& producer);

/// Runtime check of one constraint influence.
std::optional<HierarchyViolation> check_constraint_legality(const KindTable& kinds, const HierarchySpec& spec,
                                                            const Influence& influence,
                                                            const ProducerDecl& producer);

struct InhibitionRecord {
    InfluenceId constraint;
    std::vector<InfluenceId> inhibited;

    bool operator==(const InhibitionRecord&) const = default;
};

struct ConstraintOutcome {
    InfluenceSet filtered;
    std::vector<InhibitionRecord> log;
};

/// Removes every ordinary influence matched by a constraint of the set, then
/// removes the constraints themselves. Constraints that match nothing are
/// logged with an empty inhibited list.
ConstraintOutcome apply_constraints(const InfluenceSet& produced);

/// Trapped member list carried by an emergence payload ("trapped": [...]).
std::set<std::string> trapped_members(const Value& payload);

/// Attributes of a macro-agent body spawned from an emergence.
Value macro_body_attributes(const Influence& emergence);

/// Adds the macro agent's body entry to sigma^M. Used from the macro level's
/// reaction; the engine turns the entry into an agent record.
PropertyMap spawn_macro_agent(PropertyMap macro_properties, const AgentId& id, const std::string& type,
                              const Influence& emergence);
PropertyMap dissolve_macro_agent(PropertyMap macro_properties, const AgentId& id);

/// State-level variants. Throw Error(UnknownCoupling) when the coupling is
/// not present in the graph.
SystemState spawn_macro_agent(const SystemState& state, const ValidatedLevelGraph& graph,
                              const HierarchicalCoupling& coupling, const Influence& emergence, const AgentId& id,
                              const std::string& type);
SystemState dissolve_macro_agent(const SystemState& state, const ValidatedLevelGraph& graph,
                                 const HierarchicalCoupling& coupling, const AgentId& id);

/// One connected component of the "shares a trapped member" relation over
/// existing macro agents and new emergences.
struct TrappedGroup {
    std::set<std::string> members;
    /// Lowest-id existing macro agent in the component, if any.
    std::optional<AgentId> keeper;
    /// Other existing macro agents folded into the keeper.
    std::vector<AgentId> absorbed;
    /// Indices into the emergence list.
    std::vector<std::size_t> emergences;
};

std::vector<TrappedGroup> group_trapped_sets(const std::map<AgentId, std::set<std::string>>& existing,
                                             const std::vector<std::set<std::string>>& emergent);

} // namespace irm
