#pragma once

#include "irm/engine.hpp"
#include "irm/error.hpp"
#include "irm/fms/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace irm {

struct LevelDecl {
    std::string name;
    std::string reaction = "identity";
    std::vector<std::string> kinds;
    bool operator==(const LevelDecl&) const = default;
};

struct EnvironmentDecl {
    std::string id;
    std::vector<std::string> levels;
    std::string natural;
    bool operator==(const EnvironmentDecl&) const = default;
};

struct AgentTypeDecl {
    std::string type;
    std::string behavior;
    std::vector<std::string> levels;
    bool operator==(const AgentTypeDecl&) const = default;
};

struct CouplingDecl {
    std::string micro;
    std::string macro;
    bool operator==(const CouplingDecl&) const = default;
};

struct EmergenceDecl {
    std::string kind;
    std::string macro;
    std::string detector;
    bool operator==(const EmergenceDecl&) const = default;
};

struct ConstraintDecl {
    std::string kind;
    std::string micro;
    std::string inhibits;
    std::vector<std::string> producers;
    bool operator==(const ConstraintDecl&) const = default;
};

struct HierarchyDecl {
    std::vector<CouplingDecl> couplings;
    std::vector<EmergenceDecl> emergence_kinds;
    std::vector<ConstraintDecl> constraint_kinds;
    bool operator==(const HierarchyDecl&) const = default;
};

struct FmsSection {
    std::string floor = "floor";
    std::string tasks = "tasks";
    std::string control = "control";
    std::vector<std::string> grid;
    std::vector<fms::ShopDecl> shops;
    /// Explicit placements, or a count placed on the first free non-shop
    /// cells in row-major order.
    std::vector<fms::AgvDecl> agvs;
    std::optional<int> agv_count;
    std::vector<fms::TaskDecl> tasks_list;
    int attract_amplitude = 16;
    int repulse_amplitude = 4;
    int progress_window = 6;
    bool jitter = false;
    bool operator==(const FmsSection&) const = default;
};

struct RunSection {
    Tick ticks = 500;
    std::uint64_t seed = 0;
    std::string termination = "all-delivered";
    bool operator==(const RunSection&) const = default;
};

struct ScenarioSpec {
    std::string name;
    std::vector<LevelDecl> levels;
    std::vector<std::pair<std::string, std::string>> influence_edges;
    std::vector<std::pair<std::string, std::string>> perception_edges;
    std::vector<EnvironmentDecl> environments;
    std::vector<AgentTypeDecl> agent_types;
    HierarchyDecl hierarchy;
    std::optional<FmsSection> fms;
    bool control = false;
    RunSection run;
    bool operator==(const ScenarioSpec&) const = default;
};

using Problem = HierarchyViolation;

/// Parse or validation failure carrying every problem found.
class ScenarioError : public Error {
public:
    ScenarioError(ErrorCode code, std::vector<Problem> problems);
    const std::vector<Problem>& problems() const { return problems_; }

private:
    std::vector<Problem> problems_;
};

/// Parses JSON text. Throws ScenarioError(ParseError) with line and column
/// on malformed syntax.
Value parse_scenario_document(std::string_view text);
Value read_scenario_document(const std::filesystem::path& path);

/// Sets dotted paths from "key=value" strings; the value is read as JSON
/// when it parses, as a plain string otherwise. Returns the applied
/// overrides as an object.
Value apply_overrides(Value& document, const std::vector<std::string>& overrides);

/// Typed spec from a document plus every structural problem found.
std::pair<ScenarioSpec, std::vector<Problem>> scenario_from_json(const Value& document);
Value scenario_to_json(const ScenarioSpec& spec);

/// Referential integrity, policy names, FMS placement and the static
/// hierarchy discipline.
std::vector<Problem> validate_scenario(const ScenarioSpec& spec);

/// Document to fully validated spec; throws ScenarioError(ValidationError).
ScenarioSpec parse_scenario(const Value& document);
ScenarioSpec parse_scenario(const std::filesystem::path& path);

struct BuiltScenario {
    fms::WorldPtr world;
    Model model;
    SystemState initial;
    RunOptions options;
    Tick ticks = 0;
};

/// Model, initial state and run options. Expects a validated spec.
BuiltScenario build_scenario(const ScenarioSpec& spec);

} // namespace irm
