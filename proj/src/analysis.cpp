#include "bdfp/analysis.hpp"

#include "bdfp/errors.hpp"
#include "bdfp/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bdfp {

double relative_entropy(std::span<const double> c, std::span<const double> ref, double eps) {
    CompensatedSum s;
    for (std::size_t i = 1; i < c.size(); ++i) s.add(eps * entropy_density(c[i], ref[i]));
    return s.value();
}

double free_energy(const FamilyModel& model, const ClusterState& state) {
    const std::size_t n = model.sites();
    const double eps = model.eps;
    CompensatedSum s;
    if (model.conservation.mode == WeightMode::continuum) {
        for (std::size_t i = 1; i <= n; ++i) {
            const double c = state.c[i];
            s.add(eps * (xlogx(c) - c));
            s.add(eps * (model.v[i] + std::log(model.a[i])) * c);
        }
        s.add(0.5 * state.theta * state.theta);
        return s.value();
    }
    // log c_eq accumulated site by site, as in discrete_equilibrium
    const double theta = state.theta;
    if (!(model.boundary.value(theta) > 0.0))
        throw PositivityViolation("Analysis: boundary value must be positive");
    const bool cached = model.log_a.size() == model.a.size();
    auto log_a = [&](std::size_t i) { return cached ? model.log_a[i] : std::log(model.a[i]); };
    double log_flux = log_a(0) + std::log(model.boundary.value(theta));  // log(a_i c_eq,i)
    for (std::size_t i = 1; i <= n; ++i) {
        const double f = model.factor(i - 1, theta);
        if (!(f > 0.0)) throw PositivityViolation("Analysis: positivity factor <= 0 at site " + std::to_string(i - 1));
        log_flux += std::log(f);
        const double c = state.c[i];
        if (c > 0.0) s.add(eps * c * (std::log(c) - (log_flux - log_a(i)) - 1.0));
    }
    s.add(model.conservation.H(theta));
    return s.value();
}

double dissipation(const FamilyModel& model, const ClusterState& state) {
    const auto eq = discrete_equilibrium(model, state.theta);
    const std::size_t n = model.sites();
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) {
        const double r0 = state.c[i] / eq.c[i];
        const double r1 = state.c[i + 1] / eq.c[i + 1];
        if (r0 <= 0.0 || r1 <= 0.0 || r0 == r1) continue;
        const double k = model.a[i + 1] * eq.c[i + 1];
        s.add(k * (r1 - r0) * (std::log(r1) - std::log(r0)) / model.eps);
    }
    return s.value();
}

double weighted_moment(const FamilyModel& model, std::span<const double> c, double p) {
    CompensatedSum s;
    for (std::size_t i = 1; i < c.size(); ++i) s.add(model.eps * std::pow(model.w[i], p) * c[i]);
    return s.value();
}

double edge_mass(const FamilyModel& model, std::span<const double> c) {
    const std::size_t n = model.sites();
    const std::size_t width = std::max<std::size_t>(1, (n + 19) / 20);
    CompensatedSum s;
    for (std::size_t i = n - width + 1; i <= n; ++i) s.add(model.eps * model.w[i] * c[i]);
    return s.value();
}

EnergyRecord energy_record(const FamilyModel& model, const ClusterState& state,
                           const ConstrainedEquilibrium& eq) {
    EnergyRecord r;
    r.theta = state.theta;
    r.t = state.t;
    r.G = free_energy(model, state);
    ClusterState at_eq{eq.profile.c, eq.theta, state.rho, 0.0};
    r.F = r.G - free_energy(model, at_eq);
    r.H = relative_entropy(state.c, eq.profile.c, model.eps);
    r.D = dissipation(model, state);
    return r;
}

PinskerResult pinsker_check(const FamilyModel& model, const ClusterState& state, double theta_ref,
                            PinskerMode mode) {
    if (mode == PinskerMode::full_line && !(theta_ref < 0.0))
        throw InvalidTheta("Analysis: the full-line Pinsker bound needs theta_ref < 0");
    const double eta = mode == PinskerMode::full_line ? -theta_ref : 1.0;
    const auto ref = reference_equilibrium(model, theta_ref);
    PinskerResult r;
    CompensatedSum lhs, cst;
    for (std::size_t i = 1; i <= model.sites(); ++i) {
        lhs.add(model.eps * model.w[i] * std::abs(state.c[i] - ref.c[i]));
        cst.add(model.eps * std::exp(eta * model.w[i]) * ref.c[i]);
    }
    r.lhs = lhs.value();
    r.constant = cst.value();
    r.H = std::max(0.0, relative_entropy(state.c, ref.c, model.eps));  // roundoff can dip below zero
    r.rhs = (2.0 / eta) * std::max(r.H, std::sqrt(r.constant * r.H));
    r.satisfied = r.lhs <= r.rhs * (1.0 + 1e-12) + 1e-15;
    return r;
}

CorollaryResult corollary_bound_check(const FamilyModel& model, const ClusterState& state,
                                      const ConstrainedEquilibrium& eq) {
    if (!(eq.theta < 0.0)) throw InvalidTheta("Analysis: the corollary bound needs theta_eq < 0");
    const auto rec = energy_record(model, state, eq);
    CompensatedSum l1, cst;
    for (std::size_t i = 1; i <= model.sites(); ++i) {
        l1.add(model.eps * model.w[i] * std::abs(state.c[i] - eq.profile.c[i]));
        cst.add(model.eps * std::exp(-eq.theta * model.w[i]) * eq.profile.c[i]);
    }
    CorollaryResult r;
    const double dtheta = state.theta - eq.theta;
    r.lhs = l1.value() * l1.value() + dtheta * dtheta;
    const double F = std::max(rec.F, 0.0);
    r.rhs = (1.0 + 4.0 * std::max(F, cst.value()) / (eq.theta * eq.theta)) * F;
    r.satisfied = r.lhs <= r.rhs * (1.0 + 1e-9) + 1e-14;
    return r;
}

OmegaCheck omega_weight_check(const CoefficientSpec& spec, std::span<const double> grid, double beta) {
    OmegaCheck r;
    std::vector<double> omega(grid.size()), w(grid.size());
    r.c0 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Jet a = spec.a(grid[i]), W = spec.W(grid[i]);
        w[i] = W.value;
        omega[i] = W.value / (a.value * W.d1 * W.d1);
        r.c0 = std::min(r.c0, a.value * W.d1 * W.d1 / std::pow(W.value, 1.0 - beta));
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
        r.max_ratio = std::max(r.max_ratio, omega[i] * r.c0 / std::pow(w[i], beta));
    r.satisfied = r.c0 > 0.0 && r.max_ratio <= 1.0 + 1e-12;
    return r;
}

LsiProfile lsi_profile(const Density& nu, const Density& mu, double x_end, std::size_t intervals) {
    if (intervals < 2 || !(x_end > 0.0)) throw std::invalid_argument("Analysis: LSI grid too small");
    const double h = x_end / static_cast<double>(intervals);
    LsiProfile p;
    p.x.resize(intervals + 1);
    p.B.resize(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j) p.x[j] = h * static_cast<double>(j);

    std::vector<double> tail(intervals + 1), inv(intervals + 1, 0.0);
    const Density shifted = [&](double s) { return nu(x_end + s); };
    CompensatedSum t;
    t.add(integrate_half_line(shifted).value);
    tail[intervals] = t.value();
    for (std::size_t j = intervals; j-- > 0;) {
        t.add(gauss_legendre(nu, p.x[j], p.x[j + 1]));
        tail[j] = t.value();
    }
    const RealFunction inv_mu = [&](double y) { return 1.0 / mu(y); };
    CompensatedSum acc;
    for (std::size_t j = 1; j <= intervals; ++j) {
        acc.add(gauss_legendre(inv_mu, p.x[j - 1], p.x[j]));
        inv[j] = acc.value();
    }
    const double e2 = std::exp(2.0);
    for (std::size_t j = 0; j <= intervals; ++j) {
        const double T = tail[j];
        p.B[j] = T > 0.0 ? T * std::log1p(e2 / T) * inv[j] : 0.0;
        if (p.B[j] > p.sup) {
            p.sup = p.B[j];
            p.argmax = p.x[j];
        }
    }
    return p;
}

LsiResult lsi_constant(const Density& nu, const Density& mu, double x_end, std::size_t intervals) {
    LsiResult r;
    bool increasing = true;
    for (std::size_t level = 0; level < 3; ++level) {
        auto p = lsi_profile(nu, mu, x_end, intervals << level);
        r.sup_by_level[level] = p.sup;
        const std::size_t n = p.B.size();
        increasing = increasing && p.B[n - 1] > p.B[n - 2];
        if (level == 2) r.profile = std::move(p);
    }
    const double lo = *std::min_element(r.sup_by_level.begin(), r.sup_by_level.end());
    const double hi = *std::max_element(r.sup_by_level.begin(), r.sup_by_level.end());
    r.grid_stable = hi <= 1.01 * lo;
    r.diverging = increasing;
    // slope over the last decade
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t j = 0; j < r.profile.x.size(); ++j) {
        const double x = r.profile.x[j];
        if (x < x_end / 10.0) continue;
        sx += x;
        sy += r.profile.B[j];
        sxx += x * x;
        sxy += x * r.profile.B[j];
        m += 1;
    }
    r.tail_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return r;
}

LsiMeasures lsi_gaussian_preset() {
    const Density d = [](double x) { return std::exp(-x * x); };
    return {d, d};
}

LsiMeasures lsi_exponential_preset() {
    const Density d = [](double x) { return std::exp(-x); };
    return {d, d};
}

LsiMeasures lsi_model_preset(const CoefficientSpec& spec, double theta) {
    if (!(theta < 0.0)) throw InvalidTheta("Analysis: the model LSI measures need theta < 0");
    const auto inv_omega = [spec](double x) {
        const Jet a = spec.a(x), W = spec.W(x);
        return a.value * W.d1 * W.d1 / W.value;
    };
    const double Z = integrate_half_line([&](double x) {
                         return spec.equilibrium_density(x, theta) * inv_omega(x);
                     }).value;
    LsiMeasures m;
    m.nu = [spec, theta, Z, inv_omega](double x) {
        return spec.equilibrium_density(x, theta) * inv_omega(x) / Z;
    };
    m.mu = [spec, theta, Z](double x) { return spec.a(x).value * spec.equilibrium_density(x, theta) / Z; };
    return m;
}

MomentReport moment_bound_check(const RunSeries& series) {
    MomentReport r;
    if (series.records.empty()) return r;
    r.initial = series.records.front().wp_moment;
    for (const auto& rec : series.records) r.sup = std::max(r.sup, rec.wp_moment);
    r.ratio_to_initial = r.initial > 0.0 ? r.sup / r.initial : 0.0;
    r.ratio_to_initial_plus_one = r.sup / (r.initial + 1.0);
    const std::size_t n = series.records.size();
    if (n >= 4) {
        bool monotone = true;
        for (std::size_t i = n / 2 + 1; i < n; ++i)
            monotone = monotone && series.records[i].wp_moment > series.records[i - 1].wp_moment;
        r.growth_flag = monotone;
    }
    const auto& last = series.records.back();
    if (last.edge_mass > 1e-3 * std::max(last.w_mass, 1e-300))
        r.caveat = "mass accumulates at the truncation edge; moments of escaping mass are not resolved";
    return r;
}

LyapunovReport lyapunov_check(const RunSeries& series, double tolerance) {
    LyapunovReport r;
    for (std::size_t i = 1; i < series.records.size(); ++i) {
        r.max_G_increase = std::max(r.max_G_increase, series.records[i].G - series.records[i - 1].G);
        r.max_F_increase = std::max(r.max_F_increase, series.records[i].F - series.records[i - 1].F);
    }
    r.passed = r.max_G_increase <= tolerance && r.max_F_increase <= tolerance;
    return r;
}

std::string to_string(DecayForm form) { return form == DecayForm::exponential ? "exponential" : "algebraic"; }

namespace {

constexpr double z95 = 1.959963984540054;

double r_squared(std::span<const double> y, double ss_res) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - mean) * (v - mean);
    if (ss_tot <= 0.0) return ss_res <= 0.0 ? 1.0 : 0.0;
    return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

struct Line {
    double intercept, slope, ss_res, slope_se;
};

Line linear_fit(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Line l{};
    l.slope = sxx > 0 ? sxy / sxx : 0.0;
    l.intercept = my - l.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - l.intercept - l.slope * x[i];
        l.ss_res += e * e;
    }
    l.slope_se = (n > 2 && sxx > 0) ? std::sqrt(l.ss_res / (n - 2) / sxx) : 0.0;
    return l;
}

/// Residuals y + k log(C + lambda t) for parameters (log C, log lambda, log k).
double algebraic_ss(std::span<const double> t, std::span<const double> y, const Eigen::Vector3d& p) {
    const double C = std::exp(p[0]), lam = std::exp(p[1]), k = std::exp(p[2]);
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = y[i] + k * std::log(C + lam * t[i]);
        ss += e * e;
    }
    return std::isfinite(ss) ? ss : std::numeric_limits<double>::infinity();
}

DecayFit fit_algebraic(std::span<const double> t, std::span<const double> y, std::span<const double> F) {
    // profile over k: F^{-1/k} = C + lambda t is linear
    Eigen::Vector3d best(0.0, 0.0, 0.0);
    double best_ss = std::numeric_limits<double>::infinity();
    std::vector<double> z(t.size());
    for (int j = 0; j <= 120; ++j) {
        const double k = std::pow(10.0, -1.0 + 4.0 * j / 120.0);
        for (std::size_t i = 0; i < t.size(); ++i) z[i] = std::pow(F[i], -1.0 / k);
        const Line l = linear_fit(t, z);
        if (!(l.slope > 0.0) || !(l.intercept > 0.0)) continue;
        const Eigen::Vector3d p(std::log(l.intercept), std::log(l.slope), std::log(k));
        const double ss = algebraic_ss(t, y, p);
        if (ss < best_ss) {
            best_ss = ss;
            best = p;
        }
    }
    if (!std::isfinite(best_ss)) best = Eigen::Vector3d(0.0, 0.0, 0.0), best_ss = algebraic_ss(t, y, best);

    // Levenberg-Marquardt in log parameters (keeps C, lambda, k positive)
    Eigen::Vector3d p = best;
    double ss = best_ss, damping = 1e-3;
    Eigen::Matrix3d JtJ = Eigen::Matrix3d::Zero();
    for (int it = 0; it < 500; ++it) {
        const double C = std::exp(p[0]), lam = std::exp(p[1]), k = std::exp(p[2]);
        JtJ.setZero();
        Eigen::Vector3d Jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double u = C + lam * t[i];
            const double e = y[i] + k * std::log(u);
            const Eigen::Vector3d g(k * C / u, k * lam * t[i] / u, k * std::log(u));
            JtJ += g * g.transpose();
            Jtr += g * e;
        }
        bool improved = false;
        for (int tries = 0; tries < 30 && !improved; ++tries) {
            Eigen::Matrix3d A = JtJ;
            for (int d = 0; d < 3; ++d) A(d, d) *= 1.0 + damping;
            const Eigen::Vector3d step = A.ldlt().solve(-Jtr);
            const Eigen::Vector3d trial = p + step;
            const double ts = algebraic_ss(t, y, trial);
            if (ts < ss) {
                const double gain = ss - ts;
                p = trial;
                ss = ts;
                damping = std::max(damping / 3.0, 1e-12);
                improved = true;
                if (gain <= 1e-15 * (ss + 1e-300)) it = 1 << 20;
            } else {
                damping *= 4.0;
            }
        }
        if (!improved) break;
    }
    DecayFit fit;
    fit.form = DecayForm::algebraic;
    fit.C = std::exp(p[0]);
    fit.lambda = std::exp(p[1]);
    fit.k = std::exp(p[2]);
    fit.r2 = r_squared(y, ss);
    const double n = static_cast<double>(t.size());
    if (n > 3) {
        const Eigen::Matrix3d cov = JtJ.inverse() * (ss / (n - 3));
        if (cov.allFinite()) {
            fit.lambda_ci = z95 * fit.lambda * std::sqrt(std::max(cov(1, 1), 0.0));
            fit.k_ci = z95 * fit.k * std::sqrt(std::max(cov(2, 2), 0.0));
        }
    }
    return fit;
}

}  // namespace

DecayFit fit_decay(std::span<const double> t, std::span<const double> F, DecayForm form) {
    if (t.size() != F.size()) throw std::invalid_argument("Analysis: time and energy columns differ in length");
    const std::size_t skip = t.size() / 5;
    std::vector<double> tw, Fw, yw;
    for (std::size_t i = skip; i < t.size(); ++i) {
        if (F[i] < -1e-13)
            throw NonPositiveEnergy("Analysis: negative normalized free energy at t = " + std::to_string(t[i]));
        if (F[i] < 1e-13) continue;
        tw.push_back(t[i]);
        Fw.push_back(F[i]);
        yw.push_back(std::log(F[i]));
    }
    if (tw.size() < 20)
        throw InsufficientData("Analysis: " + std::to_string(tw.size()) +
                               " usable records in the fit window, need 20");
    DecayFit fit;
    if (form == DecayForm::exponential) {
        const Line l = linear_fit(tw, yw);
        fit.form = form;
        fit.C = std::exp(l.intercept);
        fit.lambda = -l.slope;
        fit.lambda_ci = z95 * l.slope_se;
        fit.r2 = r_squared(yw, l.ss_res);
    } else {
        fit = fit_algebraic(tw, yw, Fw);
    }
    fit.t_begin = tw.front();
    fit.t_end = tw.back();
    fit.points = tw.size();
    return fit;
}

DecayFit fit_decay(const RunSeries& series, DecayForm form) {
    std::vector<double> t, F;
    for (const auto& r : series.records) {
        t.push_back(r.t);
        F.push_back(r.F);
    }
    return fit_decay(t, F, form);
}

}  // namespace bdfp
