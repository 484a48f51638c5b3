#pragma once
/// Command implementations behind the bdfp executable. Each returns the
/// process exit code and writes its files under the configured output directory.
#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "bdfp/cli/config.hpp"

namespace bdfp::cli {

struct CommandOptions {
    bool quiet = false;
};

/// Writes equilibrium.csv and equilibrium.json; prints rho_s, theta_eq and the admissibility report.
int cmd_equilibrium(const ScenarioConfig& cfg, std::ostream& out, const CommandOptions& opts = {});

/// Writes series.csv, final_state.csv and run.json.
int cmd_run(const ScenarioConfig& cfg, std::ostream& out, const CommandOptions& opts = {});

/// Analyzes a series file; writes report.json next to the other outputs.
nlohmann::json analyze_series(const ScenarioConfig& cfg, const std::filesystem::path& series_file);
int cmd_analyze(const ScenarioConfig& cfg, const std::filesystem::path& series_file, std::ostream& out,
                const CommandOptions& opts = {});

/// Runs the `sweep` block: one run per value, concurrently, each in its own subdirectory.
int cmd_sweep(const ScenarioConfig& cfg, std::ostream& out, const CommandOptions& opts = {});

/// Short type name of a simulator exception ("PositivityLoss", ...).
std::string error_kind(const std::exception& e);

}  // namespace bdfp::cli
