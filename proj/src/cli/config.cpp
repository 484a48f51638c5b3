#include "bdfp/cli/config.hpp"

#include "bdfp/errors.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace bdfp::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError("Config: " + key + ": " + what);
}

double number(const json& obj, const std::string& block, const std::string& key, std::optional<double> fallback = {}) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail(block + "." + key, "required number is missing");
    }
    if (!obj[key].is_number()) fail(block + "." + key, "expected a number");
    const double v = obj[key].get<double>();
    if (!std::isfinite(v)) fail(block + "." + key, "must be finite");
    return v;
}

std::string text(const json& obj, const std::string& block, const std::string& key, std::optional<std::string> fallback = {}) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail(block + "." + key, "required string is missing");
    }
    if (!obj[key].is_string()) fail(block + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

const json& block(const json& doc, const std::string& key, bool required) {
    static const json empty = json::object();
    if (!doc.contains(key)) {
        if (required) fail(key, "required block is missing");
        return empty;
    }
    if (!doc[key].is_object()) fail(key, "expected an object");
    return doc[key];
}

void reject_unknown(const json& obj, const std::string& name, std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) fail(name + "." + it.key(), "unknown key");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

/// Reads named numeric columns from a CSV with a header row.
std::vector<std::vector<double>> read_columns(const std::filesystem::path& file, const std::vector<std::string>& names) {
    std::ifstream in(file);
    if (!in) throw ConfigError("Config: cannot open " + file.string());
    std::string line;
    while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
    }
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    std::vector<std::size_t> index;
    for (const auto& n : names) {
        const auto it = std::find(header.begin(), header.end(), n);
        if (it == header.end()) throw ConfigError("Config: " + file.string() + " lacks column " + n);
        index.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    std::vector<std::vector<double>> cols(names.size());
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (index[k] >= row.size()) throw ConfigError("Config: short row in " + file.string());
            cols[k].push_back(row[index[k]]);
        }
    }
    return cols;
}

}  // namespace

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) fail("<root>", "expected an object");
    reject_unknown(doc, "<root>", {"coefficients", "model", "integration", "initial", "analysis", "output", "seed", "sweep"});
    ScenarioConfig cfg;
    cfg.raw = doc;
    cfg.base_dir = base_dir;

    const json& co = block(doc, "coefficients", true);
    const std::string family = text(co, "coefficients", "family");
    if (family == "power-law" || family == "coarsening") {
        reject_unknown(co, "coefficients", {"family", "kappa", "alpha", "gamma"});
        PowerLawBlock p;
        p.coarsening = family == "coarsening";
        p.kappa = p.coarsening ? 1.0 : number(co, "coefficients", "kappa");
        p.alpha = number(co, "coefficients", "alpha");
        p.gamma = number(co, "coefficients", "gamma");
        cfg.coefficients = p;
    } else if (family == "table") {
        reject_unknown(co, "coefficients", {"family", "table"});
        cfg.coefficients = TableBlock{resolve(base_dir, text(co, "coefficients", "table"))};
    } else if (family == "becker-doring") {
        reject_unknown(co, "coefficients", {"family", "a1", "alpha", "gamma", "q", "z_s"});
        BDRates r;
        r.a1 = number(co, "coefficients", "a1", 1.0);
        r.alpha = number(co, "coefficients", "alpha");
        r.gamma = number(co, "coefficients", "gamma");
        r.q = number(co, "coefficients", "q", 1.0);
        r.z_s = number(co, "coefficients", "z_s", 1.0);
        try {
            r.validate();
        } catch (const std::invalid_argument& e) {
            fail("coefficients", e.what());
        }
        cfg.coefficients = r;
    } else {
        fail("coefficients.family", "unknown family '" + family + "' (power-law, coarsening, table, becker-doring)");
    }

    const json& mo = block(doc, "model", true);
    reject_unknown(mo, "model", {"epsilon", "sites", "conservation", "rho", "rho_factor", "unit_diffusion"});
    cfg.model.eps = number(mo, "model", "epsilon", cfg.becker_doring() ? 1.0 : 1.0 / 64.0);
    if (!(cfg.model.eps > 0.0)) fail("model.epsilon", "must be positive");
    if (cfg.becker_doring() && cfg.model.eps != 1.0) fail("model.epsilon", "Becker-Doring rates need epsilon = 1");
    const double sites = number(mo, "model", "sites", 512.0);
    if (sites < 2.0 || sites != std::floor(sites)) fail("model.sites", "must be an integer >= 2");
    cfg.model.sites = static_cast<std::size_t>(sites);
    const std::string mode = text(mo, "model", "conservation", "family");
    if (mode == "family")
        cfg.model.mode = WeightMode::family;
    else if (mode == "continuum")
        cfg.model.mode = WeightMode::continuum;
    else
        fail("model.conservation", "expected 'family' or 'continuum'");
    if (mo.contains("rho")) cfg.model.rho = number(mo, "model", "rho");
    if (mo.contains("rho_factor")) cfg.model.rho_factor = number(mo, "model", "rho_factor");
    if (cfg.model.rho.has_value() == cfg.model.rho_factor.has_value())
        fail("model", "exactly one of 'rho' and 'rho_factor' is required");
    if (mo.contains("unit_diffusion")) {
        if (!mo["unit_diffusion"].is_boolean()) fail("model.unit_diffusion", "expected a boolean");
        cfg.model.unit_diffusion = mo["unit_diffusion"].get<bool>();
    }
    if (cfg.becker_doring() && cfg.model.mode == WeightMode::continuum)
        fail("model.conservation", "Becker-Doring rates need family weights");

    const json& in = block(doc, "integration", false);
    reject_unknown(in, "integration", {"scheme", "T", "dt", "safety", "cadence"});
    const std::string scheme = text(in, "integration", "scheme", "explicit");
    if (scheme == "explicit")
        cfg.integration.scheme.kind = StepScheme::Kind::explicit_euler;
    else if (scheme == "semi-implicit")
        cfg.integration.scheme.kind = StepScheme::Kind::semi_implicit;
    else
        fail("integration.scheme", "expected 'explicit' or 'semi-implicit'");
    cfg.integration.T = number(in, "integration", "T", 1.0);
    if (!(cfg.integration.T >= 0.0)) fail("integration.T", "must be >= 0");
    if (in.contains("dt") && in["dt"].is_number()) {
        cfg.integration.scheme.policy = StepScheme::DtPolicy::fixed;
        cfg.integration.scheme.dt = in["dt"].get<double>();
        if (!(cfg.integration.scheme.dt > 0.0)) fail("integration.dt", "must be positive");
    } else if (in.contains("dt") && text(in, "integration", "dt") != "cfl") {
        fail("integration.dt", "expected a number or 'cfl'");
    }
    cfg.integration.scheme.safety = number(in, "integration", "safety", 0.9);
    if (!(cfg.integration.scheme.safety > 0.0 && cfg.integration.scheme.safety <= 1.0))
        fail("integration.safety", "must lie in (0, 1]");
    const double cadence = number(in, "integration", "cadence", 100.0);
    if (cadence < 1.0 || cadence != std::floor(cadence)) fail("integration.cadence", "must be a positive integer");
    cfg.integration.cadence = static_cast<std::size_t>(cadence);

    const json& ini = block(doc, "initial", false);
    reject_unknown(ini, "initial", {"preset", "theta0", "scale", "center", "width", "amplitude", "noise", "path"});
    const std::string preset = text(ini, "initial", "preset", "scaled-equilibrium");
    using P = InitialBlock::Preset;
    if (preset == "equilibrium-at-theta")
        cfg.initial.preset = P::equilibrium_at_theta;
    else if (preset == "scaled-equilibrium")
        cfg.initial.preset = P::scaled_equilibrium;
    else if (preset == "gaussian-bump")
        cfg.initial.preset = P::gaussian_bump;
    else if (preset == "monomers")
        cfg.initial.preset = P::monomers;
    else if (preset == "file")
        cfg.initial.preset = P::file;
    else
        fail("initial.preset", "unknown preset '" + preset + "'");
    if (cfg.initial.preset == P::monomers && !cfg.becker_doring())
        fail("initial.preset", "'monomers' needs Becker-Doring rates");
    if (ini.contains("theta0")) cfg.initial.theta0 = number(ini, "initial", "theta0");
    cfg.initial.scale = number(ini, "initial", "scale", 1.0);
    if (!(cfg.initial.scale > 0.0)) fail("initial.scale", "must be positive");
    cfg.initial.center = number(ini, "initial", "center", 1.0);
    cfg.initial.width = number(ini, "initial", "width", 0.5);
    cfg.initial.amplitude = number(ini, "initial", "amplitude", 0.1);
    cfg.initial.noise = number(ini, "initial", "noise", 0.0);
    if (!(cfg.initial.noise >= 0.0 && cfg.initial.noise < 1.0)) fail("initial.noise", "must lie in [0, 1)");
    if (cfg.initial.preset == P::file) cfg.initial.path = resolve(base_dir, text(ini, "initial", "path"));

    const json& an = block(doc, "analysis", false);
    reject_unknown(an, "analysis", {"moment_p", "fit", "checks"});
    cfg.analysis.moment_p = number(an, "analysis", "moment_p", 1.0);
    if (!(cfg.analysis.moment_p >= 1.0)) fail("analysis.moment_p", "must be >= 1");
    const std::string fit = text(an, "analysis", "fit", "both");
    if (fit == "exponential")
        cfg.analysis.fits = {DecayForm::exponential};
    else if (fit == "algebraic")
        cfg.analysis.fits = {DecayForm::algebraic};
    else if (fit == "both")
        cfg.analysis.fits = {DecayForm::exponential, DecayForm::algebraic};
    else if (fit == "none")
        cfg.analysis.fits.clear();
    else
        fail("analysis.fit", "expected exponential, algebraic, both or none");
    if (an.contains("checks")) {
        if (!an["checks"].is_array()) fail("analysis.checks", "expected an array");
        cfg.analysis.lyapunov = cfg.analysis.pinsker = cfg.analysis.moments = false;
        for (const auto& c : an["checks"]) {
            const std::string name = c.is_string() ? c.get<std::string>() : "";
            if (name == "lyapunov")
                cfg.analysis.lyapunov = true;
            else if (name == "pinsker")
                cfg.analysis.pinsker = true;
            else if (name == "moments")
                cfg.analysis.moments = true;
            else
                fail("analysis.checks", "unknown check '" + name + "'");
        }
    }

    const json& out = block(doc, "output", false);
    reject_unknown(out, "output", {"dir"});
    cfg.output_dir = resolve(base_dir, text(out, "output", "dir", "out"));
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("Config: cannot open " + file.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("Config: malformed document: ") + e.what());
    }
    return parse_config(doc, file.parent_path());
}

CoefficientSpec make_spec(const ScenarioConfig& cfg) {
    CoefficientSpec spec = std::visit(
        [](const auto& b) -> CoefficientSpec {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, PowerLawBlock>) {
                return b.coarsening ? CoefficientSpec::coarsening(b.alpha, b.gamma)
                                    : CoefficientSpec::power_law(b.kappa, b.alpha, b.gamma);
            } else if constexpr (std::is_same_v<T, TableBlock>) {
                auto cols = read_columns(b.path, {"x", "a", "V", "W"});
                return CoefficientSpec::tabulated(std::move(cols[0]), std::move(cols[1]), std::move(cols[2]),
                                                  std::move(cols[3]));
            } else {
                throw ConfigError("Config: Becker-Doring rates have no continuum coefficient spec");
            }
        },
        cfg.coefficients);
    return cfg.model.unit_diffusion ? transform_unit_diffusion(spec) : spec;
}

Problem make_problem(const ScenarioConfig& cfg) {
    Problem p;
    if (const auto* rates = std::get_if<BDRates>(&cfg.coefficients)) {
        p.rho_s = bd_rho_s(*rates);
        p.rho = cfg.model.rho ? *cfg.model.rho : *cfg.model.rho_factor * p.rho_s;
        p.model = map_to_family(*rates, p.rho, cfg.model.sites);
        return p;
    }
    p.spec = make_spec(cfg);
    p.rho_s = rho_s(*p.spec).rho_s();
    p.rho = cfg.model.rho ? *cfg.model.rho : *cfg.model.rho_factor * p.rho_s;
    p.model = make_family_model(*p.spec, cfg.model.eps, cfg.model.sites, p.rho, cfg.model.mode);
    return p;
}

ClusterState make_initial_state(const ScenarioConfig& cfg, const Problem& problem) {
    const FamilyModel& model = problem.model;
    const std::size_t n = model.sites();
    std::vector<double> c(n + 1, 0.0);
    using P = InitialBlock::Preset;
    const InitialBlock& ini = cfg.initial;
    switch (ini.preset) {
        case P::equilibrium_at_theta:
        case P::scaled_equilibrium: {
            const double theta0 = ini.theta0 ? *ini.theta0 : constrained_equilibrium(model).theta;
            c = reference_equilibrium(model, theta0).c;
            const double s = ini.preset == P::scaled_equilibrium ? ini.scale : 1.0;
            for (double& v : c) v *= s;
            break;
        }
        case P::gaussian_bump: {
            c = reference_equilibrium(model, constrained_equilibrium(model).theta).c;
            for (std::size_t i = 1; i <= n; ++i) {
                const double d = (model.x(i) - ini.center) / ini.width;
                c[i] += ini.amplitude * std::exp(-0.5 * d * d);
            }
            break;
        }
        case P::monomers:
            break;
        case P::file: {
            auto cols = read_columns(ini.path, {"c"});
            if (cols[0].size() != n + 1)
                throw ConfigError("Config: initial file has " + std::to_string(cols[0].size()) + " rows, expected " +
                                  std::to_string(n + 1));
            c = std::move(cols[0]);
            break;
        }
    }
    if (ini.noise > 0.0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (std::size_t i = 1; i <= n; ++i) c[i] *= 1.0 + ini.noise * u(rng);
    }
    return make_state(model, std::move(c));
}

}  // namespace bdfp::cli
