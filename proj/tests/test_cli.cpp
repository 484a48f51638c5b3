#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bdfp/cli/commands.hpp"
#include "bdfp/cli/config.hpp"
#include "bdfp/errors.hpp"
#include "bdfp/series.hpp"

using namespace bdfp;
using namespace bdfp::cli;
using nlohmann::json;

namespace {
namespace fs = std::filesystem;

json small_scenario(const fs::path& out) {
    json doc = json::parse(R"({
      "coefficients": {"family": "coarsening", "alpha": 1.0, "gamma": 0.3333333333333333},
      "model": {"epsilon": 0.125, "sites": 48, "rho_factor": 0.5},
      "integration": {"scheme": "explicit", "T": 2.0, "dt": "cfl", "cadence": 20},
      "initial": {"preset": "gaussian-bump", "center": 2.0, "width": 0.5, "amplitude": 0.05, "noise": 0.2},
      "analysis": {"fit": "both", "checks": ["lyapunov", "pinsker", "moments"]},
      "seed": 17
    })");
    doc["output"] = {{"dir", out.string()}};
    return doc;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("bdfp_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error(json doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}
}  // namespace

TEST_CASE("config: defaults and presets") {
    const auto cfg = parse_config(small_scenario("/tmp/x"));
    CHECK(cfg.model.eps == 0.125);
    CHECK(cfg.model.sites == 48);
    CHECK(cfg.model.rho_factor.value() == 0.5);
    CHECK(cfg.integration.scheme.policy == StepScheme::DtPolicy::cfl);
    CHECK(cfg.seed == 17);
    CHECK(cfg.analysis.fits.size() == 2);
    const auto bd = parse_config(json::parse(R"({"coefficients": {"family": "becker-doring", "alpha": 0.3, "gamma": 0.3},
                                                "model": {"rho": 1.0, "sites": 32}})"));
    CHECK(bd.becker_doring());
    CHECK(bd.model.eps == 1.0);
}

TEST_CASE("config: errors name the key") {
    auto doc = small_scenario("/tmp/x");
    doc["model"]["bogus"] = 1;
    CHECK(config_error(doc).find("Config: model.bogus: unknown key") == 0);
    doc = small_scenario("/tmp/x");
    doc["model"]["rho"] = 0.3;
    CHECK(config_error(doc).find("exactly one of") != std::string::npos);
    doc = small_scenario("/tmp/x");
    doc["integration"]["dt"] = "fast";
    CHECK(config_error(doc).find("Config: integration.dt") == 0);
    doc = small_scenario("/tmp/x");
    doc["coefficients"]["family"] = "spline";
    CHECK(config_error(doc).find("Config: coefficients.family") == 0);
    doc = small_scenario("/tmp/x");
    doc["model"]["epsilon"] = -1.0;
    CHECK_FALSE(config_error(doc).empty());
    doc = json::parse(R"({"coefficients": {"family": "becker-doring", "alpha": 0.3, "gamma": 0.3},
                          "model": {"rho": 1.0, "epsilon": 0.5}})");
    CHECK(config_error(doc).find("epsilon") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("series csv round trip") {
    RunSeries s;
    for (int i = 0; i < 5; ++i) {
        RunRecord r;
        r.t = 0.1 * i;
        r.theta = -0.3 + 1e-17 * i;
        r.G = 1.0 / 3.0 + i;
        r.F = 1e-310 * i;  // denormals survive
        r.D = 2.0;
        r.w_mass = 0.7;
        r.wp_moment = 0.8;
        r.edge_mass = 1e-9;
        s.records.push_back(r);
    }
    std::stringstream ss;
    write_series_csv(ss, s);
    CHECK(ss.str().rfind("t,theta,G,F_rho,D,W_mass,Wp_moment,edge_mass\n", 0) == 0);
    const auto back = read_series_csv(ss);
    REQUIRE(back.records.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(back.records[i].t == s.records[i].t);
        CHECK(back.records[i].theta == s.records[i].theta);
        CHECK(back.records[i].G == s.records[i].G);
        CHECK(back.records[i].F == s.records[i].F);
    }
    RunSeries bd;
    bd.kind = RunSeries::Kind::becker_doring;
    bd.records.push_back(RunRecord{});
    std::stringstream sb;
    write_series_csv(sb, bd);
    CHECK(sb.str().rfind("t,c1,", 0) == 0);
    CHECK(read_series_csv(sb).kind == RunSeries::Kind::becker_doring);
}

TEST_CASE("equilibrium, run and analyze write their files") {
    const auto dir = scratch("pipeline");
    const auto cfg = parse_config(small_scenario(dir));
    std::ostringstream out;
    CHECK(cmd_equilibrium(cfg, out) == 0);
    CHECK(out.str().find("rho_s = ") != std::string::npos);
    CHECK(fs::exists(dir / "equilibrium.csv"));
    const auto eq = json::parse(slurp(dir / "equilibrium.json"));
    CHECK(eq["theta_eq"].get<double>() < 0.0);
    CHECK(cmd_run(cfg, out, {true}) == 0);
    CHECK(fs::exists(dir / "series.csv"));
    CHECK(fs::exists(dir / "final_state.csv"));
    const auto run = json::parse(slurp(dir / "run.json"));
    CHECK(run["max_constraint_residual"].get<double>() <= 1e-10);
    CHECK(cmd_analyze(cfg, dir / "series.csv", out, {true}) == 0);
    const auto report = json::parse(slurp(dir / "report.json"));
    CHECK(report["lyapunov"]["passed"].get<bool>());
    CHECK(report["pinsker"]["satisfied"].get<bool>());
    CHECK(report["fits"].size() == 2);
    CHECK(report["moments"]["growth_flag"].get<bool>() == false);
}

TEST_CASE("runs are deterministic for a fixed seed and change with the seed") {
    const auto a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
    std::ostringstream out;
    auto cfg = parse_config(small_scenario(a));
    cmd_run(cfg, out, {true});
    cfg.output_dir = b;
    cmd_run(cfg, out, {true});
    cfg.output_dir = c;
    cfg.seed = 18;
    cmd_run(cfg, out, {true});
    CHECK(slurp(a / "series.csv") == slurp(b / "series.csv"));
    CHECK(slurp(a / "series.csv") != slurp(c / "series.csv"));
}

TEST_CASE("Becker-Doring scenario through the commands") {
    const auto dir = scratch("bd");
    auto doc = json::parse(R"({"coefficients": {"family": "becker-doring", "alpha": 0.3333333333333333, "gamma": 0.3333333333333333},
                              "model": {"rho_factor": 0.5, "sites": 32},
                              "integration": {"T": 2.0, "cadence": 50},
                              "initial": {"preset": "monomers"},
                              "analysis": {"fit": "none", "checks": ["lyapunov", "moments"]}})");
    doc["output"] = {{"dir", dir.string()}};
    const auto cfg = parse_config(doc);
    std::ostringstream out;
    CHECK(cmd_run(cfg, out, {true}) == 0);
    CHECK(slurp(dir / "series.csv").rfind("t,c1,", 0) == 0);
    CHECK(cmd_analyze(cfg, dir / "series.csv", out, {true}) == 0);
    CHECK(json::parse(slurp(dir / "report.json"))["lyapunov"]["passed"].get<bool>());
}

TEST_CASE("sweep writes one directory per value") {
    const auto dir = scratch("sweep");
    auto doc = small_scenario(dir);
    doc["integration"]["T"] = 0.5;
    doc["sweep"] = {{"parameter", "model.rho_factor"}, {"values", {0.3, 0.6}}};
    const auto cfg = parse_config(doc);
    std::ostringstream out;
    CHECK(cmd_sweep(cfg, out, {true}) == 0);
    CHECK(fs::exists(dir / "sweep_0" / "series.csv"));
    CHECK(fs::exists(dir / "sweep_1" / "series.csv"));
    CHECK(slurp(dir / "sweep_0" / "series.csv") != slurp(dir / "sweep_1" / "series.csv"));
}

TEST_CASE("error kinds") {
    CHECK(error_kind(ConfigError("Config: x")) == "ConfigError");
    CHECK(error_kind(PositivityLoss("Dynamics: x")) == "PositivityLoss");
    CHECK(error_kind(std::runtime_error("x")) == "Error");
}
