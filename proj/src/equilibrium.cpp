#include "bdfp/equilibrium.hpp"

#include "bdfp/errors.hpp"
#include "bdfp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace bdfp {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

void check_positivity(const FamilyModel& model, double theta) {
    for (std::size_t i = 0; i < model.a.size(); ++i) {
        if (!(model.factor(i, theta) > 0.0)) {
            std::ostringstream os;
            os << "Equilibrium: positivity factor 1 + eps(theta Lambda - Gamma) <= 0 at site " << i
               << " (x = " << model.x(i) << ", theta = " << theta << ")";
            throw PositivityViolation(os.str());
        }
    }
    if (model.boundary.kind == BoundaryLaw::Kind::monomer && !(model.boundary.z_s + theta > 0.0))
        throw PositivityViolation("Equilibrium: monomer boundary value z_s + theta <= 0");
}

/// Constraint residual and its theta-derivative in one pass.
std::pair<double, double> residual_and_slope(const FamilyModel& model, std::span<const double> c,
                                             double theta) {
    const Conservation& law = model.conservation;
    const std::size_t n = model.sites();
    if (law.mode == WeightMode::continuum) {
        CompensatedSum s;
        for (std::size_t i = 1; i <= n; ++i) s.add(model.eps * model.w[i] * c[i]);
        return {theta + s.value() - law.rho, 1.0};
    }
    double weight = model.boundary.dlog(theta);
    double dweight = model.boundary.d2log(theta);
    const double eps = model.eps;
    CompensatedSum s;
    double ds = 0.0;  // the slope only steers Newton, plain summation is enough
    for (std::size_t i = 1; i <= n; ++i) {
        const double f = model.factor(i - 1, theta);
        const double g = model.lambda[i - 1] / f;
        weight += eps * g;
        dweight -= eps * eps * g * g;
        s.add(eps * weight * c[i]);
        ds += eps * dweight * c[i];
    }
    return {s.value() - law.dH(theta), ds - law.d2H(theta)};
}

double initial_guess(const FamilyModel& model, std::span<const double> c) {
    CompensatedSum s;
    for (std::size_t i = 1; i <= model.sites(); ++i) s.add(model.eps * model.w[i] * c[i]);
    double guess = model.conservation.rho - s.value();
    if (model.conservation.law == Conservation::Law::becker_doring) guess -= model.conservation.z_s;
    return guess;
}

}  // namespace

double BoundaryLaw::value(double theta) const {
    if (kind == Kind::monomer) return z_s + theta;
    return std::exp(-v0 + theta * w0) / a0;
}

double BoundaryLaw::dlog(double theta) const {
    if (kind == Kind::monomer) return 1.0 / (z_s + theta);
    return w0;
}

double BoundaryLaw::d2log(double theta) const {
    if (kind == Kind::monomer) return -1.0 / ((z_s + theta) * (z_s + theta));
    return 0.0;
}

double Conservation::H(double theta) const {
    if (law == Law::becker_doring) return rho * std::log(z_s + theta) - theta;
    return rho * theta - 0.5 * theta * theta;
}

double Conservation::dH(double theta) const {
    if (law == Law::becker_doring) return rho / (z_s + theta) - 1.0;
    return rho - theta;
}

double Conservation::d2H(double theta) const {
    if (law == Law::becker_doring) return -rho / ((z_s + theta) * (z_s + theta));
    return -1.0;
}

void FamilyModel::validate() const {
    if (!(eps > 0.0)) throw std::invalid_argument("FamilyModel: eps must be positive");
    if (a.size() < 3) throw std::invalid_argument("FamilyModel: need at least two interior sites");
    const std::size_t n = a.size();
    if (lambda.size() != n || gamma.size() != n || w.size() != n || v.size() != n)
        throw std::invalid_argument("FamilyModel: sample arrays differ in length");
    if (!log_a.empty() && log_a.size() != n) throw std::invalid_argument("FamilyModel: log_a cache has the wrong length");
    for (double ai : a)
        if (!(ai > 0.0)) throw std::invalid_argument("FamilyModel: a_eps must be positive");
    if (conservation.mode == WeightMode::continuum && conservation.law == Conservation::Law::becker_doring)
        throw std::invalid_argument("FamilyModel: continuum weights need the Fokker-Planck law");
}

FamilyModel make_family_model(const CoefficientSpec& spec, double eps, std::size_t sites, double rho,
                              WeightMode mode) {
    FamilyModel m;
    m.eps = eps;
    const std::size_t n = sites + 1;
    m.a.resize(n);
    m.lambda.resize(n);
    m.gamma.resize(n);
    m.w.resize(n);
    m.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = eps * static_cast<double>(i);
        const Jet a = spec.a(x), V = spec.V(x), W = spec.W(x);
        m.a[i] = a.value;
        m.lambda[i] = W.d1;
        m.gamma[i] = V.d1;
        m.w[i] = W.value;
        m.v[i] = V.value;
        if (!std::isfinite(a.value) || !std::isfinite(V.d1) || !std::isfinite(W.d1))
            throw EvaluationFailure("Equilibrium: non-finite coefficient at x = " + fmt(x));
    }
    m.log_a.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.log_a[i] = std::log(m.a[i]);
    m.boundary = BoundaryLaw::exponential(m.a[0], m.v[0], m.w[0]);
    m.conservation = Conservation{Conservation::Law::fokker_planck, mode, rho, 0.0};
    m.validate();
    return m;
}

EquilibriumProfile continuum_equilibrium(const CoefficientSpec& spec, double theta, double eps,
                                         std::size_t sites) {
    EquilibriumProfile p{EquilibriumProfile::Kind::continuum, eps, theta, std::vector<double>(sites + 1)};
    for (std::size_t i = 0; i <= sites; ++i)
        p.c[i] = spec.equilibrium_density(eps * static_cast<double>(i), theta);
    return p;
}

EquilibriumProfile discrete_equilibrium(const FamilyModel& model, double theta, double boundary_value) {
    check_positivity(model, theta);
    if (!(boundary_value > 0.0))
        throw PositivityViolation("Equilibrium: boundary value must be positive");
    const std::size_t n = model.sites();
    EquilibriumProfile p{EquilibriumProfile::Kind::discrete_family, model.eps, theta,
                         std::vector<double>(n + 1)};
    CompensatedSum log_c;
    log_c.add(std::log(model.a[0]) + std::log(boundary_value));
    p.c[0] = boundary_value;
    for (std::size_t i = 1; i <= n; ++i) {
        log_c.add(std::log(model.factor(i - 1, theta)));
        p.c[i] = std::exp(log_c.value() - std::log(model.a[i]));
    }
    return p;
}

EquilibriumProfile discrete_equilibrium(const FamilyModel& model, double theta) {
    if (model.boundary.kind == BoundaryLaw::Kind::monomer && !(model.boundary.z_s + theta > 0.0))
        throw PositivityViolation("Equilibrium: monomer boundary value z_s + theta <= 0");
    return discrete_equilibrium(model, theta, model.boundary.value(theta));
}

std::vector<double> W_eps(const FamilyModel& model, double theta) {
    check_positivity(model, theta);
    const std::size_t n = model.sites();
    std::vector<double> out(n + 1);
    CompensatedSum s;
    s.add(model.boundary.dlog(theta));
    out[0] = s.value();
    for (std::size_t i = 1; i <= n; ++i) {
        s.add(model.eps * model.lambda[i - 1] / model.factor(i - 1, theta));
        out[i] = s.value();
    }
    return out;
}

std::pair<double, double> admissible_theta_range(const FamilyModel& model) {
    double lo = -50.0, hi = 50.0;
    for (std::size_t i = 0; i < model.a.size(); ++i) {
        const double l = model.lambda[i];
        const double edge = (model.gamma[i] - 1.0 / model.eps) / l;
        if (l > 0.0)
            lo = std::max(lo, edge);
        else if (l < 0.0)
            hi = std::min(hi, edge);
    }
    if (model.boundary.kind == BoundaryLaw::Kind::monomer) lo = std::max(lo, -model.boundary.z_s);
    const double pad = 1e-12;
    return {lo + pad * (1.0 + std::abs(lo)), hi - pad * (1.0 + std::abs(hi))};
}

double constraint_residual(const FamilyModel& model, std::span<const double> c, double theta) {
    return residual_and_slope(model, c, theta).first;
}

ThetaSolution solve_theta_detailed(const FamilyModel& model, std::span<const double> c,
                                   std::optional<double> hint) {
    if (c.size() != model.a.size())
        throw std::invalid_argument("Equilibrium: state size does not match the model");
    ThetaSolution sol;
    if (model.conservation.mode == WeightMode::continuum) {
        CompensatedSum s;
        for (std::size_t i = 1; i <= model.sites(); ++i) s.add(model.eps * model.w[i] * c[i]);
        sol.theta = model.conservation.rho - s.value();
        sol.residual = constraint_residual(model, c, sol.theta);
        return sol;
    }

    const auto [lo0, hi0] = admissible_theta_range(model);
    auto clamp = [&](double t) { return std::clamp(t, lo0, hi0); };
    double theta = clamp(hint ? *hint : initial_guess(model, c));
    auto [f, df] = residual_and_slope(model, c, theta);
    const double tol = 1e-13;
    const double converged = 1e-15 * (1.0 + std::abs(model.conservation.dH(theta)));
    for (int it = 0; it < 60 && std::abs(f) > converged; ++it) {
        sol.iterations = it + 1;
        double step = df != 0.0 ? -f / df : 0.0;
        if (!std::isfinite(step) || step == 0.0) break;
        double next = theta + step;
        std::pair<double, double> rn{std::numeric_limits<double>::infinity(), 0.0};
        for (int h = 0; h < 60; ++h) {
            if (next > lo0 && next < hi0) {
                rn = residual_and_slope(model, c, next);
                if (std::abs(rn.first) < std::abs(f)) break;
            }
            step *= 0.5;
            next = theta + step;
        }
        if (!(std::abs(rn.first) < std::abs(f))) break;
        theta = next;
        f = rn.first;
        df = rn.second;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(theta)) && std::abs(f) <= tol) break;
    }

    if (!(std::abs(f) <= tol)) {
        // bisection on the admissible bracket
        sol.used_bisection = true;
        double lo = lo0, hi = hi0;
        double flo = constraint_residual(model, c, lo), fhi = constraint_residual(model, c, hi);
        if (flo > fhi) sol.non_monotone = true;
        if (!(flo <= 0.0 && fhi >= 0.0) && !(flo >= 0.0 && fhi <= 0.0))
            throw BracketFailure("Equilibrium: no sign change of the constraint on [" + fmt(lo) + ", " +
                                 fmt(hi) + "]");
        const bool increasing = flo <= 0.0;
        for (int it = 0; it < 400; ++it) {
            theta = 0.5 * (lo + hi);
            f = constraint_residual(model, c, theta);
            if (f == 0.0) break;
            if ((f < 0.0) == increasing)
                lo = theta;
            else
                hi = theta;
            if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(theta)))
                break;
        }
    }
    sol.theta = theta;
    sol.residual = f;
    if (!(std::abs(f) <= 1e-12))
        throw BracketFailure("Equilibrium: constraint residual " + fmt(f) + " above tolerance");
    return sol;
}

double solve_theta(const FamilyModel& model, std::span<const double> c, std::optional<double> hint) {
    return solve_theta_detailed(model, c, hint).theta;
}

EquilibriumProfile reference_equilibrium(const FamilyModel& model, double theta) {
    if (model.conservation.mode == WeightMode::family) return discrete_equilibrium(model, theta);
    EquilibriumProfile p{EquilibriumProfile::Kind::continuum, model.eps, theta,
                         std::vector<double>(model.a.size())};
    for (std::size_t i = 0; i < p.c.size(); ++i)
        p.c[i] = std::exp(-model.v[i] + theta * model.w[i]) / model.a[i];
    return p;
}

ConstrainedEquilibrium constrained_equilibrium(const FamilyModel& model) {
    auto residual = [&](double theta) {
        const auto p = reference_equilibrium(model, theta);
        for (double ci : p.c)
            if (!std::isfinite(ci)) return std::numeric_limits<double>::infinity();
        return constraint_residual(model, p.c, theta);
    };
    const auto [lo0, hi0] = admissible_theta_range(model);
    double lo = lo0;
    if (residual(lo) > 0.0) throw BracketFailure("Equilibrium: constrained equilibrium below the theta range");
    double hi = std::min(hi0, 0.0);
    double width = 0.125;
    while (residual(hi) < 0.0) {
        lo = hi;
        if (hi >= hi0) throw BracketFailure("Equilibrium: constrained equilibrium above the theta range");
        hi = std::min(hi0, hi + width);
        width *= 2.0;
    }
    double theta = hi;
    for (int it = 0; it < 400; ++it) {
        theta = 0.5 * (lo + hi);
        const double f = residual(theta);
        if (f == 0.0) break;
        if (f < 0.0)
            lo = theta;
        else
            hi = theta;
        if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(theta))) break;
    }
    // polish on the flat residual
    theta = std::abs(residual(lo)) < std::abs(residual(hi)) ? lo : hi;
    return {theta, reference_equilibrium(model, theta)};
}

void write_profile_csv(std::ostream& os, const EquilibriumProfile& profile, std::span<const double> c_eq) {
    const auto old = os.precision(17);
    os << "# theta = " << profile.theta << "\n";
    os << "x,c,c_eq\n";
    for (std::size_t i = 0; i < profile.c.size(); ++i) {
        const double ref = c_eq.empty() ? profile.c[i] : c_eq[i];
        os << profile.eps * static_cast<double>(i) << ',' << profile.c[i] << ',' << ref << '\n';
    }
    os.precision(old);
}

}  // namespace bdfp
