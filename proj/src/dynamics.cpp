#include "bdfp/dynamics.hpp"

#include "bdfp/errors.hpp"
#include "bdfp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace bdfp {

namespace {

std::string at_time(const std::string& what, double t) {
    std::ostringstream os;
    os.precision(10);
    os << what << " (t = " << t << ")";
    return os.str();
}

template <class E>
[[noreturn]] void rethrow_at(const E& e, double t) {
    throw E(at_time(e.what(), t));
}

}  // namespace

void StepScheme::validate() const {
    if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("StepScheme: safety must lie in (0, 1]");
    if (policy == DtPolicy::fixed && !(dt > 0.0)) throw std::invalid_argument("StepScheme: fixed dt must be positive");
}

FluxForms flux(const FamilyModel& model, const ClusterState& state, std::size_t edge,
               std::span<const double> c_eq) {
    const std::size_t i = edge;
    const double eps = model.eps;
    const double f = model.factor(i, state.theta);
    FluxForms out;
    const double out_rate = model.a[i] * f * state.c[i];
    const double in_rate = model.a[i + 1] * state.c[i + 1];
    out.direct = (out_rate - in_rate) / eps;
    out.scale = (std::abs(out_rate) + std::abs(in_rate)) / eps;
    const double k = model.a[i] * f * c_eq[i];
    const double r0 = state.c[i] / c_eq[i];
    const double r1 = state.c[i + 1] / c_eq[i + 1];
    out.ratio = -k * (r1 - r0) / eps;
    if (r0 > 0.0 && r1 > 0.0)
        out.log_mean = -k * logarithmic_mean(r0, r1) * (std::log(r1) - std::log(r0)) / eps;
    else
        out.log_mean = 0.0;
    return out;
}

FluxForms flux(const FamilyModel& model, const ClusterState& state, std::size_t edge) {
    const auto eq = discrete_equilibrium(model, state.theta);
    return flux(model, state, edge, eq.c);
}

std::vector<double> fluxes(const FamilyModel& model, const ClusterState& state) {
    const std::size_t n = model.sites();
    std::vector<double> J(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        J[i] = (model.a[i] * model.factor(i, state.theta) * state.c[i] - model.a[i + 1] * state.c[i + 1]) /
               model.eps;
    return J;
}

double cfl_dt(const FamilyModel& model, const ClusterState& state, double safety) {
    double peak = 0.0;
    for (std::size_t i = 0; i < model.a.size(); ++i)
        peak = std::max(peak, model.a[i] * (1.0 + model.eps * std::abs(state.theta * model.lambda[i] - model.gamma[i])));
    return safety * model.eps * model.eps / (2.0 * peak);
}

double scheme_dt(const FamilyModel& model, const ClusterState& state, const StepScheme& scheme) {
    if (scheme.policy == StepScheme::DtPolicy::fixed) return scheme.dt;
    if (scheme.kind == StepScheme::Kind::explicit_euler) return cfl_dt(model, state, scheme.safety);
    // drift-only bound for the semi-implicit scheme
    double peak = 0.0;
    for (std::size_t i = 0; i < model.a.size(); ++i)
        peak = std::max(peak, model.a[i] * std::abs(state.theta * model.lambda[i] - model.gamma[i]));
    return peak > 0.0 ? scheme.safety * model.eps / peak : scheme.safety * model.eps;
}

ClusterState make_state(const FamilyModel& model, std::vector<double> c, double t) {
    if (c.size() != model.a.size()) throw std::invalid_argument("Dynamics: state size does not match the model");
    for (std::size_t i = 1; i < c.size(); ++i)
        if (!(c[i] >= 0.0)) throw PositivityLoss("Dynamics: negative or non-finite initial density");
    ClusterState s;
    s.theta = solve_theta(model, c);
    c[0] = model.boundary.value(s.theta);
    s.c = std::move(c);
    s.rho = model.conservation.rho;
    s.t = t;
    return s;
}

ClusterState step(const FamilyModel& model, const ClusterState& state, double dt, const StepScheme& scheme) {
    const std::size_t n = model.sites();
    const double eps = model.eps;
    const double theta = state.theta;
    ClusterState next;
    next.rho = state.rho;
    next.c.assign(n + 1, 0.0);
    std::vector<double> c = state.c;
    c[0] = model.boundary.value(theta);

    if (scheme.kind == StepScheme::Kind::explicit_euler) {
        double left = 0.0;  // J(x - eps)
        for (std::size_t i = 0; i < n; ++i) {
            const double J = (model.a[i] * model.factor(i, theta) * c[i] - model.a[i + 1] * c[i + 1]) / eps;
            if (i > 0) next.c[i] = c[i] + dt * (left - J) / eps;
            left = J;
        }
        next.c[n] = c[n] + dt * left / eps;
    } else {
        // (I - dt L) c' = c + dt (drift divergence), L the second difference of a c
        const double mu = dt / (eps * eps);
        std::vector<double> lower(n + 1), diag(n + 1), upper(n + 1), rhs(n + 1);
        std::vector<double> drift(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) drift[i] = model.a[i] * (theta * model.lambda[i] - model.gamma[i]) * c[i];
        for (std::size_t i = 1; i <= n; ++i) {
            rhs[i] = c[i] + dt * (drift[i - 1] - drift[i]) / eps;
            lower[i] = -mu * model.a[i - 1];
            diag[i] = 1.0 + mu * model.a[i] * (i < n ? 2.0 : 1.0);
            upper[i] = i < n ? -mu * model.a[i + 1] : 0.0;
        }
        rhs[1] -= lower[1] * c[0];
        // Thomas algorithm
        for (std::size_t i = 2; i <= n; ++i) {
            const double m = lower[i] / diag[i - 1];
            diag[i] -= m * upper[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        next.c[n] = rhs[n] / diag[n];
        for (std::size_t i = n - 1; i >= 1; --i) next.c[i] = (rhs[i] - upper[i] * next.c[i + 1]) / diag[i];
    }

    for (std::size_t i = 1; i <= n; ++i) {
        if (!(next.c[i] >= 0.0)) {
            std::ostringstream os;
            os << "Dynamics: density became negative at site " << i << " (dt = " << dt << ")";
            throw PositivityLoss(os.str());
        }
    }
    next.theta = solve_theta(model, next.c, theta);
    next.c[0] = model.boundary.value(next.theta);
    next.t = state.t + dt;
    return next;
}

RunRecord make_record(const FamilyModel& model, const ClusterState& state, const ConstrainedEquilibrium& eq,
                      double moment_p) {
    const auto e = energy_record(model, state, eq);
    RunRecord r;
    r.t = state.t;
    r.theta = state.theta;
    r.G = e.G;
    r.F = e.F;
    r.D = e.D;
    r.w_mass = weighted_moment(model, state.c, 1.0);
    r.wp_moment = weighted_moment(model, state.c, moment_p);
    r.edge_mass = edge_mass(model, state.c);
    r.residual = constraint_residual(model, state.c, state.theta);
    return r;
}

RunResult run(const FamilyModel& model, const ClusterState& initial, double T, std::size_t cadence,
              const StepScheme& scheme, const RunOptions& options) {
    scheme.validate();
    if (!(T >= 0.0)) throw std::invalid_argument("Dynamics: horizon must be nonnegative");
    if (cadence == 0) throw std::invalid_argument("Dynamics: cadence must be positive");
    const auto eq = constrained_equilibrium(model);
    RunResult out;
    out.series.moment_p = options.moment_p;
    out.series.theta_eq = eq.theta;
    ClusterState state = initial;
    auto emit = [&] {
        out.series.records.push_back(make_record(model, state, eq, options.moment_p));
        if (options.on_record) options.on_record(state, out.series.records.back());
    };
    emit();
    double G_prev = options.monitor_lyapunov ? out.series.records.back().G : 0.0;
    const double t_end = initial.t + T;
    std::size_t steps = 0;
    while (t_end - state.t > 1e-12 * std::max(1.0, t_end)) {
        double dt = std::min(scheme_dt(model, state, scheme), t_end - state.t);
        try {
            state = step(model, state, dt, scheme);
        } catch (const PositivityLoss& e) {
            rethrow_at(e, state.t);
        } catch (const PositivityViolation& e) {
            rethrow_at(e, state.t);
        } catch (const BracketFailure& e) {
            rethrow_at(e, state.t);
        }
        ++steps;
        if (options.monitor_lyapunov) {
            const double G = free_energy(model, state);
            out.series.max_step_increase = std::max(out.series.max_step_increase, G - G_prev);
            G_prev = G;
        }
        const bool last = !(t_end - state.t > 1e-12 * std::max(1.0, t_end));
        if (steps % cadence == 0 || last) emit();
    }
    out.series.steps = steps;
    out.final_state = std::move(state);
    return out;
}

void write_state_csv(std::ostream& os, const FamilyModel& model, const ClusterState& state) {
    const auto ref = reference_equilibrium(model, state.theta);
    const auto old = os.precision(17);
    os << "# theta = " << state.theta << "\n# t = " << state.t << "\n";
    os << "x,c,c_eq\n";
    for (std::size_t i = 0; i < state.c.size(); ++i) os << model.x(i) << ',' << state.c[i] << ',' << ref.c[i] << '\n';
    os.precision(old);
}

}  // namespace bdfp
