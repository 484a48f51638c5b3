#include "bdfp/potentials.hpp"

#include "bdfp/errors.hpp"
#include "bdfp/interpolation.hpp"
#include "bdfp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bdfp {

namespace {

Profile power_profile(double exponent) {
    return [exponent](double x) {
        const double u = 1.0 + x;
        const double v = std::pow(u, exponent);
        return Jet{v, exponent * v / u, exponent * (exponent - 1.0) * v / (u * u)};
    };
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

bool finite_jet(const Jet& j) {
    return std::isfinite(j.value) && std::isfinite(j.d1) && std::isfinite(j.d2);
}

/// True when the tail of `values` does not outgrow its head.
bool bounded_on_grid(std::span<const double> values, double delta) {
    const std::size_t n = values.size();
    if (n < 8) return true;
    const std::size_t cut = (3 * n) / 4;
    const double head = *std::max_element(values.begin(), values.begin() + static_cast<long>(cut));
    const double tail = *std::max_element(values.begin() + static_cast<long>(cut), values.end());
    return tail <= (1.0 + delta) * head;
}

}  // namespace

CoefficientSpec CoefficientSpec::power_law(double kappa, double alpha, double gamma) {
    CoefficientSpec s(Family::power_law, power_profile(alpha), power_profile(gamma), power_profile(kappa),
                      "power-law");
    s.exponents_ = PowerLawExponents{kappa, alpha, gamma};
    return s;
}

CoefficientSpec CoefficientSpec::coarsening(double alpha, double gamma) {
    return power_law(1.0, alpha, 1.0 - gamma);
}

CoefficientSpec CoefficientSpec::tabulated(std::vector<double> x, std::vector<double> a,
                                           std::vector<double> V, std::vector<double> W) {
    if (x.empty() || x.front() != 0.0)
        throw std::invalid_argument("CoefficientSpec: table must start at x = 0");
    auto ia = std::make_shared<const MonotoneCubic>(x, std::move(a));
    auto iv = std::make_shared<const MonotoneCubic>(x, std::move(V));
    auto iw = std::make_shared<const MonotoneCubic>(std::move(x), std::move(W));
    return CoefficientSpec(
        Family::tabulated, [ia](double t) { return (*ia)(t); }, [iv](double t) { return (*iv)(t); },
        [iw](double t) { return (*iw)(t); }, "tabulated");
}

CoefficientSpec CoefficientSpec::custom(Profile a, Profile V, Profile W, std::string label) {
    if (!a || !V || !W) throw std::invalid_argument("CoefficientSpec: empty evaluator");
    return CoefficientSpec(Family::custom, std::move(a), std::move(V), std::move(W), std::move(label));
}

double CoefficientSpec::equilibrium_density(double x, double theta) const {
    return std::exp(-V(x).value + theta * W(x).value) / a(x).value;
}

const Condition* AdmissibilityReport::find(std::string_view name) const {
    for (const auto& c : conditions)
        if (c.name == name) return &c;
    return nullptr;
}

AdmissibilityReport check_admissibility(double kappa, double alpha, double gamma) {
    AdmissibilityReport r;
    auto add = [&r](std::string name, bool ok, std::string detail) {
        r.conditions.push_back({std::move(name), ok, std::move(detail), 0.0});
        r.admissible = r.admissible && ok;
    };
    const bool finite = std::isfinite(kappa) && std::isfinite(alpha) && std::isfinite(gamma);
    add("finite exponents", finite, finite ? "" : "non-finite exponent");
    add("kappa > 0", kappa > 0.0, "kappa = " + fmt(kappa));
    add("kappa <= 2", kappa <= 2.0, "kappa = " + fmt(kappa));
    const double alpha_lo = std::max(2.0 - 2.0 * kappa, 0.0);
    add("alpha >= max(2-2kappa, 0)", alpha >= alpha_lo,
        "alpha = " + fmt(alpha) + ", bound " + fmt(alpha_lo));
    add("alpha <= 2-kappa", alpha <= 2.0 - kappa, "alpha = " + fmt(alpha) + ", bound " + fmt(2.0 - kappa));
    add("gamma > 0", gamma > 0.0, "gamma = " + fmt(gamma));
    const double gamma_hi = std::min(2.0 - alpha, kappa);
    add("gamma < min(2-alpha, kappa)", gamma < gamma_hi,
        "gamma = " + fmt(gamma) + ", bound " + fmt(gamma_hi));
    return r;
}

std::vector<double> uniform_grid(double x_end, std::size_t intervals) {
    if (intervals == 0 || !(x_end > 0.0)) throw std::invalid_argument("uniform_grid: empty grid");
    std::vector<double> g(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i)
        g[i] = x_end * static_cast<double>(i) / static_cast<double>(intervals);
    return g;
}

AdmissibilityReport verify_assumptions(const CoefficientSpec& spec, std::span<const double> grid,
                                       double delta) {
    if (grid.empty()) throw std::invalid_argument("verify_assumptions: empty grid");
    if (!(delta > 0.0)) throw std::invalid_argument("verify_assumptions: delta must be positive");
    const std::size_t n = grid.size();
    std::vector<Jet> a(n), v(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = spec.a(grid[i]);
        v[i] = spec.V(grid[i]);
        w[i] = spec.W(grid[i]);
        if (!finite_jet(a[i]) || !finite_jet(v[i]) || !finite_jet(w[i]))
            throw EvaluationFailure("Potentials: non-finite coefficient at x = " + fmt(grid[i]));
    }

    AdmissibilityReport r;
    auto add = [&r](std::string name, bool ok, std::string detail, double x) {
        r.conditions.push_back({std::move(name), ok, std::move(detail), x});
        r.admissible = r.admissible && ok;
    };

    // (a) second-order growth combination
    std::vector<double> combo(n);
    for (std::size_t i = 0; i < n; ++i)
        combo[i] = (std::abs(v[i].d2) + std::abs(w[i].d2)) * a[i].value +
                   (std::abs(v[i].d1) + std::abs(w[i].d1)) * std::abs(a[i].d1) + std::abs(a[i].d2);
    {
        const auto it = std::max_element(combo.begin(), combo.end());
        r.bound_constant = *it;
        add("(a) bounded coefficients", bounded_on_grid(combo, delta), "sup = " + fmt(*it),
            grid[static_cast<std::size_t>(it - combo.begin())]);
    }

    // (b) W increasing, W(0) > 0, a bounded below
    {
        bool ok = w[0].value > 0.0;
        double worst = grid[0];
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (w[i].d1 <= 0.0 || (i > 0 && w[i].value <= w[i - 1].value)) {
                ok = false;
                worst = grid[i];
            }
        }
        add("(b) W increasing", ok, ok ? "" : "W not increasing or W(0) <= 0", worst);
        std::size_t imin = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (a[i].value < a[imin].value) imin = i;
        add("(b) a bounded below", a[imin].value > 0.0, "inf a = " + fmt(a[imin].value), grid[imin]);
    }

    // (c) tail conditions beyond x_delta
    {
        auto holds = [&](std::size_t i) {
            const double la1 = a[i].d1 / a[i].value;
            const double la2 = a[i].d2 / a[i].value - la1 * la1;
            const double wp = w[i].d1;
            const bool first = std::abs(v[i].d1) + std::abs(la1) <= delta * wp;
            const bool second = std::abs(v[i].d2) + std::abs(la2) + std::abs(w[i].d2) <= delta * wp * wp;
            return first && second;
        };
        std::size_t start = n;
        while (start > 0 && holds(start - 1)) --start;
        if (start == n) {
            add("(c) tail conditions", false, "fails at the grid end", grid[n - 1]);
        } else {
            r.certified_window = std::make_pair(grid[start], grid[n - 1]);
            add("(c) tail conditions", true,
                "certified on [" + fmt(grid[start]) + ", " + fmt(grid[n - 1]) + "]", grid[start]);
        }
    }

    // (d) c0 <= a W'^2 <= C0 W
    {
        std::vector<double> low(n), high(n);
        for (std::size_t i = 0; i < n; ++i) {
            low[i] = a[i].value * w[i].d1 * w[i].d1;
            high[i] = low[i] / w[i].value;
        }
        const auto lo = std::min_element(low.begin(), low.end());
        const auto hi = std::max_element(high.begin(), high.end());
        r.lower_constant = *lo;
        r.upper_constant = *hi;
        add("(d) lower bound on a W'^2", *lo > 0.0, "inf = " + fmt(*lo),
            grid[static_cast<std::size_t>(lo - low.begin())]);
        add("(d) upper bound on a W'^2 / W", std::isfinite(*hi) && bounded_on_grid(high, delta),
            "sup = " + fmt(*hi), grid[static_cast<std::size_t>(hi - high.begin())]);
    }

    // (e) integrability of W a^{-1} e^{-V}
    try {
        const auto cd = rho_s(spec);
        add("(e) integrability", true, "rho_s = " + fmt(cd.rho_s()), 0.0);
    } catch (const DivergentIntegral& e) {
        add("(e) integrability", false, e.what(), grid[n - 1]);
    }
    return r;
}

double equilibrium_w_mass(const CoefficientSpec& spec, double theta) {
    if (theta > 0.0) throw InvalidTheta("Potentials: equilibrium W-mass needs theta <= 0");
    const auto f = [&spec, theta](double x) {
        const double w = spec.W(x).value;
        const double e = -spec.V(x).value + theta * w;
        return e < -745.0 ? 0.0 : w * std::exp(e) / spec.a(x).value;
    };
    return integrate_half_line(f).value;
}

CriticalData rho_s(const CoefficientSpec& spec) {
    const auto f = [&spec](double x) {
        const double e = -spec.V(x).value;
        return e < -745.0 ? 0.0 : spec.W(x).value * std::exp(e) / spec.a(x).value;
    };
    const auto q = integrate_half_line(f);
    return CriticalData(spec, q.value, q.error);
}

double CriticalData::theta_eq(double rho) const {
    if (!std::isfinite(rho)) throw std::invalid_argument("Potentials: rho must be finite");
    if (rho >= rho_s_) return 0.0;
    const auto residual = [&](double th) { return th + equilibrium_w_mass(spec_, th) - rho; };
    double lo = theta_min_, hi = 0.0;
    double rlo = residual(lo);
    if (rlo > 0.0)
        throw BracketFailure("Potentials: no theta in [" + fmt(theta_min_) + ", 0] for rho = " + fmt(rho));
    double mid = 0.5 * (lo + hi), rmid = 0.0;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        rmid = residual(mid);
        if (rmid == 0.0) break;
        if (rmid < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)))
            break;
    }
    if (std::abs(rmid) > 1e-10)
        throw BracketFailure("Potentials: bisection stalled with residual " + fmt(rmid));
    return mid;
}

double theta_eq(const CoefficientSpec& spec, double rho, double theta_min) {
    const auto cd = rho_s(spec);
    return CriticalData(spec, cd.rho_s(), cd.error_estimate(), theta_min).theta_eq(rho);
}

UnitDiffusionMap::UnitDiffusionMap(const CoefficientSpec& spec, double x_max) {
    inv_sqrt_a_ = [spec](double x) {
        const double a = spec.a(x).value;
        if (!(a > 0.0) || !std::isfinite(a))
            throw InversionFailure("Potentials: a(x) must be positive for the change of variables");
        return 1.0 / std::sqrt(a);
    };
    x_.push_back(0.0);
    z_.push_back(0.0);
    while (x_.back() < x_max) {
        const double x0 = x_.back();
        const double x1 = std::min(x_max, x0 + 0.02 * (1.0 + x0));
        z_.push_back(z_.back() + gauss_legendre(inv_sqrt_a_, x0, x1));
        x_.push_back(x1);
        if (!(z_.back() > z_[z_.size() - 2]))
            throw InversionFailure("Potentials: z(x) is not strictly increasing");
    }
}

double UnitDiffusionMap::z_of_x(double x) const {
    if (x < 0.0 || x > x_.back()) throw InversionFailure("Potentials: x outside the tabulated range");
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k = it == x_.end() ? x_.size() - 2 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return z_[k] + gauss_legendre(inv_sqrt_a_, x_[k], x);
}

double UnitDiffusionMap::x_of_z(double z) const {
    if (z < 0.0 || z > z_.back()) throw InversionFailure("Potentials: z outside the tabulated range");
    const auto it = std::upper_bound(z_.begin(), z_.end(), z);
    const std::size_t k = it == z_.end() ? z_.size() - 2 : static_cast<std::size_t>(it - z_.begin()) - 1;
    double lo = x_[k], hi = x_[k + 1];
    if (z == z_[k]) return lo;
    double x = lo + (hi - lo) * (z - z_[k]) / (z_[k + 1] - z_[k]);
    for (int it2 = 0; it2 < 100; ++it2) {
        const double f = z_[k] + gauss_legendre(inv_sqrt_a_, x_[k], x) - z;
        if (f == 0.0) return x;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        double next = x - f / inv_sqrt_a_(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x))
            return next;
        x = next;
    }
    throw InversionFailure("Potentials: inversion of z(x) did not converge");
}

UnitDiffusionTransform make_unit_diffusion(const CoefficientSpec& spec) {
    auto map = std::make_shared<const UnitDiffusionMap>(spec);
    Profile a = [](double) { return Jet{1.0, 0.0, 0.0}; };
    Profile V = [spec, map](double z) {
        const double x = map->x_of_z(z);
        const Jet A = spec.a(x), P = spec.V(x);
        const double s = std::sqrt(A.value);
        return Jet{P.value + 0.5 * std::log(A.value), P.d1 * s + A.d1 / (2.0 * s),
                   P.d2 * A.value + 0.5 * P.d1 * A.d1 + 0.5 * A.d2 - A.d1 * A.d1 / (4.0 * A.value)};
    };
    Profile W = [spec, map](double z) {
        const double x = map->x_of_z(z);
        const Jet A = spec.a(x), E = spec.W(x);
        return Jet{E.value, E.d1 * std::sqrt(A.value), E.d2 * A.value + 0.5 * E.d1 * A.d1};
    };
    return {CoefficientSpec::custom(std::move(a), std::move(V), std::move(W), spec.label() + " (unit diffusion)"),
            std::move(map)};
}

CoefficientSpec transform_unit_diffusion(const CoefficientSpec& spec) { return make_unit_diffusion(spec).spec; }

}  // namespace bdfp
