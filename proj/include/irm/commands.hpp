#pragma once

#include "irm/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace irm {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int contract_violation = 1;
inline constexpr int no_escape = 2;
inline constexpr int invalid_scenario = 3;
} // namespace exit_code

/// Command-line settings shared by run and compare. Flags become overrides
/// ("run.ticks", "run.seed", "control") applied after the --override list.
struct RunRequest {
    std::filesystem::path scenario;
    std::vector<std::string> overrides;
    std::optional<Tick> ticks;
    std::optional<std::uint64_t> seed;
    std::optional<bool> control;
    std::optional<std::filesystem::path> metrics_out;
    std::optional<std::filesystem::path> trace_out;
};

struct RunArtifacts {
    /// Header plus one row per tick.
    std::string metrics_csv;
    /// One JSON record per line, ordered by (tick, level, id).
    std::vector<std::string> trace;
    Value summary;
    std::string stop_reason;
    int exit_code = exit_code::ok;
};

/// Runs a validated spec. `overrides` is recorded in the summary.
RunArtifacts execute_scenario(const ScenarioSpec& spec, const Value& overrides, bool with_trace);

/// Loads the scenario and applies the request's overrides.
std::pair<ScenarioSpec, Value> load_scenario(const RunRequest& request);

int cmd_run(const RunRequest& request, std::ostream& out, std::ostream& err);
int cmd_compare(const RunRequest& request, std::ostream& out, std::ostream& err);
int cmd_validate(const std::filesystem::path& path, std::ostream& out, std::ostream& err);

/// Verdict line of the off/on comparison.
std::string compare_verdict(const Value& off, const Value& on);

} // namespace irm
