#include "bdfp/cli/commands.hpp"

#include "bdfp/errors.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>

namespace bdfp::cli {

using nlohmann::json;

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw ConfigError("Config: cannot write " + (dir / name).string());
    return os;
}

void write_json(const std::filesystem::path& dir, const std::string& name, const json& doc) {
    auto os = open_output(dir, name);
    os << doc.dump(2) << '\n';
}

json condition_json(const AdmissibilityReport& r) {
    json j;
    j["admissible"] = r.admissible;
    for (const auto& c : r.conditions)
        j["conditions"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"x", c.worst_x}});
    if (r.certified_window) j["certified_window"] = {r.certified_window->first, r.certified_window->second};
    return j;
}

void print_report(std::ostream& out, const std::string& title, const AdmissibilityReport& r) {
    out << title << ": " << (r.admissible ? "admissible" : "NOT admissible") << '\n';
    for (const auto& c : r.conditions)
        out << "  [" << (c.passed ? "pass" : "FAIL") << "] " << c.name << (c.detail.empty() ? "" : "  " + c.detail) << '\n';
}

json fit_json(const DecayFit& f) {
    return {{"form", to_string(f.form)}, {"C", f.C},           {"lambda", f.lambda}, {"k", f.k},
            {"lambda_ci", f.lambda_ci}, {"k_ci", f.k_ci},  {"r2", f.r2},         {"t_begin", f.t_begin},
            {"t_end", f.t_end},         {"points", f.points}};
}

ClusterState read_state_csv(const std::filesystem::path& file, const FamilyModel& model) {
    std::ifstream in(file);
    if (!in) throw ConfigError("Config: cannot open " + file.string());
    ClusterState s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# theta = ", 0) == 0) s.theta = std::strtod(line.c_str() + 10, nullptr);
        else if (line.rfind("# t = ", 0) == 0) s.t = std::strtod(line.c_str() + 6, nullptr);
        else if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
        else {
            const auto comma = line.find(',');
            s.c.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
        }
    }
    if (s.c.size() != model.a.size()) throw ConfigError("Config: state file does not match the model grid");
    s.rho = model.conservation.rho;
    return s;
}

}  // namespace

std::string error_kind(const std::exception& e) {
#define BDFP_KIND(T) \
    if (dynamic_cast<const T*>(&e)) return #T;
    BDFP_KIND(EvaluationFailure)
    BDFP_KIND(InversionFailure)
    BDFP_KIND(DivergentIntegral)
    BDFP_KIND(BracketFailure)
    BDFP_KIND(PositivityViolation)
    BDFP_KIND(PositivityLoss)
    BDFP_KIND(MassDrift)
    BDFP_KIND(DivergentSum)
    BDFP_KIND(InvalidTheta)
    BDFP_KIND(InsufficientData)
    BDFP_KIND(NonPositiveEnergy)
    BDFP_KIND(ConfigError)
#undef BDFP_KIND
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "InvalidArgument";
    return "Error";
}

int cmd_equilibrium(const ScenarioConfig& cfg, std::ostream& out, const CommandOptions& opts) {
    const Problem p = make_problem(cfg);
    const auto eq = constrained_equilibrium(p.model);
    json report;
    report["rho"] = p.rho;
    report["rho_s"] = p.rho_s;
    report["theta_grid"] = eq.theta;
    const bool super = p.rho >= p.rho_s;
    out << std::setprecision(12);
    std::vector<double> reference;
    if (p.spec) {
        const auto cd = rho_s(*p.spec);
        const double th = cd.theta_eq(p.rho);
        report["theta_eq"] = th;
        report["rho_s_error"] = cd.error_estimate();
        reference = continuum_equilibrium(*p.spec, th, p.model.eps, p.model.sites()).c;
        const auto grid = uniform_grid(p.model.x(p.model.sites()), p.model.sites());
        const auto verified = verify_assumptions(*p.spec, grid, 0.1);
        report["assumptions"] = condition_json(verified);
        if (const auto* pl = std::get_if<PowerLawBlock>(&cfg.coefficients)) {
            const double gamma_v = pl->coarsening ? 1.0 - pl->gamma : pl->gamma;
            const auto exact = check_admissibility(pl->coarsening ? 1.0 : pl->kappa, pl->alpha, gamma_v);
            report["exponents"] = condition_json(exact);
            if (!opts.quiet) print_report(out, "exponent ranges", exact);
        }
        if (!opts.quiet) {
            out << "rho_s = " << p.rho_s << "\nrho = " << p.rho << "\ntheta_eq(rho) = " << th
                << "\ntheta on the grid = " << eq.theta << '\n';
            print_report(out, "grid assumption checks (delta = 0.1)", verified);
        }
    } else {
        const auto& rates = std::get<BDRates>(cfg.coefficients);
        report["theta_eq"] = super ? 0.0 : eq.theta;
        report["c1_grid"] = rates.z_s + eq.theta;
        if (!opts.quiet)
            out << "rho_s = " << p.rho_s << "\nrho = " << p.rho << "\nc1 on the truncated grid = " << rates.z_s + eq.theta
                << '\n';
    }
    if (super) {
        report["warning"] = "supercritical: theta_eq = 0; the truncated grid equilibrium stores the excess at the edge";
        if (!opts.quiet) out << "warning: rho >= rho_s (supercritical), theta_eq = 0\n";
    }
    {
        auto os = open_output(cfg.output_dir, "equilibrium.csv");
        write_profile_csv(os, eq.profile, reference);
    }
    write_json(cfg.output_dir, "equilibrium.json", report);
    return 0;
}

int cmd_run(const ScenarioConfig& cfg, std::ostream& out, const CommandOptions& opts) {
    const Problem p = make_problem(cfg);
    const ClusterState init = make_initial_state(cfg, p);
    RunSeries series;
    ClusterState final_state;
    if (const auto* rates = std::get_if<BDRates>(&cfg.coefficients)) {
        BDState bd{init.c, p.rho, 0.0};
        bd.c[0] = rates->z_s + init.theta;
        const auto r = bd_run(*rates, bd, cfg.integration.T, cfg.integration.cadence, cfg.integration.scheme.safety,
                              cfg.analysis.moment_p);
        series = r.series;
        final_state = to_family_state(*rates, r.final_state);
    } else {
        auto r = run(p.model, init, cfg.integration.T, cfg.integration.cadence, cfg.integration.scheme,
                     RunOptions{.moment_p = cfg.analysis.moment_p, .monitor_lyapunov = false, .on_record = {}});
        series = std::move(r.series);
        final_state = std::move(r.final_state);
    }
    {
        auto os = open_output(cfg.output_dir, "series.csv");
        write_series_csv(os, series);
    }
    {
        auto os = open_output(cfg.output_dir, "final_state.csv");
        write_state_csv(os, p.model, final_state);
    }
    double worst = 0.0;
    for (const auto& rec : series.records) worst = std::max(worst, std::abs(rec.residual));
    json summary{{"rho", p.rho},       {"rho_s", p.rho_s},           {"theta_grid", series.theta_eq},
                 {"steps", series.steps}, {"records", series.records.size()}, {"max_constraint_residual", worst}};
    write_json(cfg.output_dir, "run.json", summary);
    if (!opts.quiet)
        out << "run: " << series.steps << " steps, " << series.records.size() << " records -> "
            << (cfg.output_dir / "series.csv").string() << '\n';
    return 0;
}

json analyze_series(const ScenarioConfig& cfg, const std::filesystem::path& series_file) {
    std::ifstream in(series_file);
    if (!in) throw ConfigError("Config: cannot open " + series_file.string());
    RunSeries series = read_series_csv(in);
    series.moment_p = cfg.analysis.moment_p;
    json report;
    report["records"] = series.records.size();
    if (cfg.analysis.lyapunov) {
        const auto l = lyapunov_check(series);
        report["lyapunov"] = {{"max_G_increase", l.max_G_increase}, {"max_F_increase", l.max_F_increase}, {"passed", l.passed}};
    }
    for (DecayForm form : cfg.analysis.fits) {
        try {
            report["fits"].push_back(fit_json(fit_decay(series, form)));
        } catch (const Error& e) {
            report["fits"].push_back({{"form", to_string(form)}, {"error", error_kind(e) + ": " + e.what()}});
        }
    }
    if (cfg.analysis.moments) {
        const auto m = moment_bound_check(series);
        report["moments"] = {{"p", series.moment_p},           {"initial", m.initial},
                             {"sup", m.sup},                   {"ratio_to_initial", m.ratio_to_initial},
                             {"ratio_to_initial_plus_one", m.ratio_to_initial_plus_one},
                             {"growth_flag", m.growth_flag}};
        if (m.caveat) report["moments"]["caveat"] = *m.caveat;
    }
    if (cfg.analysis.pinsker) {
        const auto state_file = series_file.parent_path() / "final_state.csv";
        if (!std::filesystem::exists(state_file)) {
            report["pinsker"] = {{"skipped", "no final_state.csv next to the series"}};
        } else {
            const Problem p = make_problem(cfg);
            const ClusterState s = read_state_csv(state_file, p.model);
            const auto eq = constrained_equilibrium(p.model);
            const bool full = eq.theta < 0.0;
            const auto r = pinsker_check(p.model, s, eq.theta, full ? PinskerMode::full_line : PinskerMode::truncated);
            report["pinsker"] = {{"theta_ref", eq.theta}, {"mode", full ? "full-line" : "truncated"},
                                 {"lhs", r.lhs},          {"rhs", r.rhs},
                                 {"satisfied", r.satisfied}};
        }
    }
    return report;
}

int cmd_analyze(const ScenarioConfig& cfg, const std::filesystem::path& series_file, std::ostream& out,
                const CommandOptions& opts) {
    const json report = analyze_series(cfg, series_file);
    write_json(cfg.output_dir, "report.json", report);
    if (!opts.quiet) {
        out << std::setprecision(6);
        out << "records: " << report["records"].get<std::size_t>() << '\n';
        if (report.contains("lyapunov"))
            out << "lyapunov: " << (report["lyapunov"]["passed"].get<bool>() ? "pass" : "FAIL")
                << "  max dG = " << report["lyapunov"]["max_G_increase"].get<double>() << '\n';
        if (report.contains("fits"))
            for (const auto& f : report["fits"]) {
                if (f.contains("error"))
                    out << "fit " << f["form"].get<std::string>() << ": " << f["error"].get<std::string>() << '\n';
                else
                    out << "fit " << f["form"].get<std::string>() << ": lambda = " << f["lambda"].get<double>()
                        << " k = " << f["k"].get<double>() << " R2 = " << f["r2"].get<double>() << '\n';
            }
        if (report.contains("moments"))
            out << "moments: sup/initial = " << report["moments"]["ratio_to_initial"].get<double>()
                << (report["moments"]["growth_flag"].get<bool>() ? "  growth flagged" : "") << '\n';
        if (report.contains("pinsker") && report["pinsker"].contains("satisfied"))
            out << "pinsker: " << (report["pinsker"]["satisfied"].get<bool>() ? "pass" : "FAIL") << '\n';
    }
    return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, std::ostream& out, const CommandOptions& opts) {
    if (!cfg.raw.contains("sweep")) throw ConfigError("Config: sweep: block is missing");
    const json& sw = cfg.raw["sweep"];
    if (!sw.contains("parameter") || !sw["parameter"].is_string() || !sw.contains("values") || !sw["values"].is_array())
        throw ConfigError("Config: sweep: needs 'parameter' (dotted key) and 'values' (array)");
    std::string pointer = "/" + sw["parameter"].get<std::string>();
    for (char& ch : pointer)
        if (ch == '.') ch = '/';
    std::vector<ScenarioConfig> runs;
    for (std::size_t i = 0; i < sw["values"].size(); ++i) {
        json doc = cfg.raw;
        doc.erase("sweep");
        doc[json::json_pointer(pointer)] = sw["values"][i];
        if (doc["model"].contains("rho") && pointer == "/model/rho_factor") doc["model"].erase("rho");
        if (doc["model"].contains("rho_factor") && pointer == "/model/rho") doc["model"].erase("rho_factor");
        ScenarioConfig c = parse_config(doc, cfg.base_dir);
        c.seed = cfg.seed;
        c.output_dir = cfg.output_dir / ("sweep_" + std::to_string(i));
        runs.push_back(std::move(c));
    }
    std::vector<std::future<std::string>> jobs;
    for (const auto& c : runs)
        jobs.push_back(std::async(std::launch::async, [&c]() {
            std::ostringstream sink;
            cmd_run(c, sink, CommandOptions{true});
            return c.output_dir.string();
        }));
    for (auto& j : jobs) {
        const auto dir = j.get();
        if (!opts.quiet) out << "sweep: wrote " << dir << '\n';
    }
    return 0;
}

}  // namespace bdfp::cli
