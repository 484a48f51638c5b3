/// Command-line front end: equilibrium, run, analyze and sweep.
#include <CLI11.hpp>

#include <iostream>

#include "bdfp/cli/commands.hpp"
#include "bdfp/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Simulator for the discrete Fokker-Planck / Becker-Doring family"};
    app.require_subcommand(1);
    std::string config_path, out_dir, series_path;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    app.add_option("--config", config_path, "scenario configuration (JSON)")->required();
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_option("--seed", seed, "random seed (overrides seed)");
    app.add_flag("--quiet", quiet, "suppress console output");
    auto* eq = app.add_subcommand("equilibrium", "write equilibrium profile, rho_s and theta_eq");
    auto* run = app.add_subcommand("run", "integrate the scenario and write series.csv");
    auto* analyze = app.add_subcommand("analyze", "check a series file and write report.json");
    analyze->add_option("--series", series_path, "series file (default <out>/series.csv)");
    auto* sweep = app.add_subcommand("sweep", "run the sweep block concurrently");
    app.fallthrough();

    CLI11_PARSE(app, argc, argv);
    try {
        auto cfg = bdfp::cli::load_config(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed) cfg.seed = *seed;
        const bdfp::cli::CommandOptions opts{quiet};
        if (eq->parsed()) return bdfp::cli::cmd_equilibrium(cfg, std::cout, opts);
        if (run->parsed()) return bdfp::cli::cmd_run(cfg, std::cout, opts);
        if (analyze->parsed())
            return bdfp::cli::cmd_analyze(cfg, series_path.empty() ? cfg.output_dir / "series.csv" : std::filesystem::path(series_path),
                                          std::cout, opts);
        if (sweep->parsed()) return bdfp::cli::cmd_sweep(cfg, std::cout, opts);
    } catch (const std::exception& e) {
        std::cerr << "error [" << bdfp::cli::error_kind(e) << "] " << e.what() << '\n';
        return 2;
    }
    return 1;
}
