// irmsim: run, compare and validate multi-level shop floor scenarios.

#include "irm/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_run_flags(CLI::App* cmd, irm::RunRequest& req)
{
    cmd->add_option("--scenario", req.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--ticks", req.ticks, "Tick budget")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", req.seed, "Run seed");
    cmd->add_option("--override", req.overrides, "Scenario override key=value (dotted path)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-level influence/reaction simulator"};
    app.require_subcommand(1);

    irm::RunRequest run_req;
    std::string run_control;
    auto* run = app.add_subcommand("run", "Run a scenario and write metrics, trace and summary");
    add_run_flags(run, run_req);
    run->add_option("--control", run_control, "Deadlock-solving level acts on the floor")->check(CLI::IsMember({"on", "off"}));
    run->add_option("--metrics-out", run_req.metrics_out, "Metrics CSV path");
    run->add_option("--trace-out", run_req.trace_out, "Trace path (one JSON record per line); enables tracing");

    irm::RunRequest cmp_req;
    auto* compare = app.add_subcommand("compare", "Run with control off and on under the same seed");
    add_run_flags(compare, cmp_req);

    std::filesystem::path validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and statically check a scenario");
    validate->add_option("--scenario", validate_path, "Scenario file (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    if (!run_control.empty()) run_req.control = run_control == "on";

    if (run->parsed()) return irm::cmd_run(run_req, std::cout, std::cerr);
    if (compare->parsed()) return irm::cmd_compare(cmp_req, std::cout, std::cerr);
    return irm::cmd_validate(validate_path, std::cout, std::cerr);
}
