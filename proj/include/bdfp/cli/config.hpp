#pragma once
/// Scenario configuration for the command-line front end. The on-disk
/// format is JSON; docs/config.md lists every key.
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bdfp/becker_doring.hpp"
#include "bdfp/dynamics.hpp"
#include "bdfp/potentials.hpp"

namespace bdfp::cli {

struct PowerLawBlock {
    double kappa = 1.0, alpha = 0.0, gamma = 0.5;
    bool coarsening = false;  ///< V = (1+x)^(1-gamma), W = 1+x
};
struct TableBlock {
    std::filesystem::path path;
};
using CoefficientBlock = std::variant<PowerLawBlock, TableBlock, BDRates>;

struct ModelBlock {
    double eps = 1.0 / 64.0;
    std::size_t sites = 512;
    WeightMode mode = WeightMode::family;
    std::optional<double> rho;
    std::optional<double> rho_factor;  ///< rho = factor * rho_s
    bool unit_diffusion = false;
};

struct IntegrationBlock {
    StepScheme scheme;
    double T = 1.0;
    std::size_t cadence = 100;
};

struct InitialBlock {
    enum class Preset { equilibrium_at_theta, scaled_equilibrium, gaussian_bump, monomers, file };
    Preset preset = Preset::scaled_equilibrium;
    std::optional<double> theta0;
    double scale = 1.0;
    double center = 1.0, width = 0.5, amplitude = 0.1;
    double noise = 0.0;  ///< relative multiplicative noise drawn from the seed
    std::filesystem::path path;
};

struct AnalysisBlock {
    double moment_p = 1.0;
    std::vector<DecayForm> fits = {DecayForm::exponential, DecayForm::algebraic};
    bool lyapunov = true, pinsker = true, moments = true;
};

struct ScenarioConfig {
    CoefficientBlock coefficients;
    ModelBlock model;
    IntegrationBlock integration;
    InitialBlock initial;
    AnalysisBlock analysis;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    nlohmann::json raw;  ///< the parsed document, kept for sweeps and reports
    std::filesystem::path base_dir;  ///< relative paths resolve against this

    bool becker_doring() const { return std::holds_alternative<BDRates>(coefficients); }
};

/// Validates and converts; throws ConfigError naming the offending key.
ScenarioConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& file);

/// Coefficient spec of a continuum configuration (after the optional unit-diffusion transform).
CoefficientSpec make_spec(const ScenarioConfig& cfg);

/// Resolved problem: model, total mass, critical mass.
struct Problem {
    FamilyModel model;
    double rho = 0.0;
    double rho_s = 0.0;
    std::optional<CoefficientSpec> spec;  ///< absent for Becker-Doring
};
Problem make_problem(const ScenarioConfig& cfg);

/// Initial state of the configured preset.
ClusterState make_initial_state(const ScenarioConfig& cfg, const Problem& problem);

}  // namespace bdfp::cli
