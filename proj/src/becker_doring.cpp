#include "bdfp/becker_doring.hpp"

#include "bdfp/analysis.hpp"
#include "bdfp/errors.hpp"
#include "bdfp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bdfp {

double BDRates::a(std::size_t l) const { return a1 * std::pow(static_cast<double>(l), alpha); }

double BDRates::b(std::size_t l) const {
    return a(l) * (z_s + q * std::pow(static_cast<double>(l), -gamma));
}

void BDRates::validate() const {
    if (!(a1 > 0.0 && q > 0.0 && z_s > 0.0)) throw std::invalid_argument("BDRates: a1, q, z_s must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("BDRates: alpha must lie in [0, 1]");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("BDRates: gamma must lie in (0, 1)");
}

double BDState::mass() const {
    CompensatedSum s;
    for (std::size_t i = 0; i < c.size(); ++i) s.add(static_cast<double>(i + 1) * c[i]);
    return s.value();
}

double bd_Q(const BDRates& rates, std::size_t l) {
    if (l < 1) throw std::invalid_argument("BeckerDoring: cluster index starts at 1");
    CompensatedSum s;
    for (std::size_t r = 1; r < l; ++r) s.add(std::log(rates.a(r)) - std::log(rates.b(r + 1)));
    return std::exp(s.value());
}

std::vector<double> bd_Q_table(const BDRates& rates, std::size_t L) {
    std::vector<double> Q(L);
    CompensatedSum s;
    for (std::size_t l = 1; l <= L; ++l) {
        Q[l - 1] = std::exp(s.value());
        s.add(std::log(rates.a(l)) - std::log(rates.b(l + 1)));
    }
    return Q;
}

double bd_rho_s(const BDRates& rates) {
    rates.validate();
    constexpr std::size_t max_terms = 100'000'000;
    CompensatedSum total, log_q;
    const double log_z = std::log(rates.z_s);
    int quiet = 0;
    for (std::size_t l = 1; l <= max_terms; ++l) {
        const double term = static_cast<double>(l) * std::exp(log_q.value() + static_cast<double>(l) * log_z);
        total.add(term);
        log_q.add(std::log(rates.a(l)) - std::log(rates.b(l + 1)));
        quiet = term <= 1e-14 * total.value() ? quiet + 1 : 0;
        if (quiet >= 50) return total.value();
    }
    throw DivergentSum("BeckerDoring: critical-mass series does not converge");
}

std::vector<double> bd_fluxes(const BDRates& rates, const BDState& state) {
    const std::size_t L = state.size();
    std::vector<double> J(L, 0.0);
    const double c1 = state.c[0];
    for (std::size_t l = 1; l < L; ++l) J[l - 1] = rates.a(l) * c1 * state.c[l - 1] - rates.b(l + 1) * state.c[l];
    return J;
}

double bd_stable_dt(const BDRates& rates, const BDState& state, double safety) {
    const std::size_t L = state.size();
    const double c1 = state.c[0];
    double peak = 0.0, monomer = 2.0 * rates.a(1) * c1;
    for (std::size_t l = 2; l <= L; ++l) {
        peak = std::max(peak, rates.a(l) * c1 + rates.b(l));
        monomer += rates.a(l) * state.c[l - 1];
    }
    return safety / std::max(peak, monomer);
}

BDState bd_step(const BDRates& rates, const BDState& state, double dt) {
    const std::size_t L = state.size();
    if (L < 2) throw std::invalid_argument("BeckerDoring: need at least two cluster sizes");
    const auto J = bd_fluxes(rates, state);
    BDState next{std::vector<double>(L), state.rho, state.t + dt};
    CompensatedSum sum_j;
    for (double j : J) sum_j.add(j);
    next.c[0] = state.c[0] + dt * (-J[0] - sum_j.value());
    for (std::size_t l = 2; l <= L; ++l) next.c[l - 1] = state.c[l - 1] + dt * (J[l - 2] - J[l - 1]);
    for (std::size_t i = 0; i < L; ++i) {
        if (!(next.c[i] >= 0.0)) {
            std::ostringstream os;
            os << "BeckerDoring: density c_" << i + 1 << " became negative (dt = " << dt << ")";
            throw PositivityLoss(os.str());
        }
    }
    const double m0 = state.mass(), m1 = next.mass();
    if (std::abs(m1 - m0) > 1e-10 * std::max(1.0, std::abs(m0)))
        throw MassDrift("BeckerDoring: mass changed by " + std::to_string(m1 - m0));
    return next;
}

double bd_free_energy(const BDState& state, const BDRates& rates) {
    const auto Q = bd_Q_table(rates, state.size());
    CompensatedSum s;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double c = state.c[i];
        if (c > 0.0) s.add(c * (std::log(c) - std::log(Q[i]) - 1.0));
    }
    return s.value();
}

BDState bd_equilibrium(const BDRates& rates, double rho, std::size_t L) {
    const auto Q = bd_Q_table(rates, L);
    auto state_at = [&](double log_z) {
        BDState s{std::vector<double>(L), rho, 0.0};
        for (std::size_t i = 0; i < L; ++i) s.c[i] = Q[i] * std::exp(static_cast<double>(i + 1) * log_z);
        return s;
    };
    double lo = std::log(1e-300) / 2.0, hi = std::log(rates.z_s);
    while (state_at(hi).mass() < rho) hi += 1.0;
    for (int it = 0; it < 400 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (state_at(mid).mass() < rho ? lo : hi) = mid;
    }
    return state_at(0.5 * (lo + hi));
}

FamilyModel map_to_family(const BDRates& rates, double rho, std::size_t L) {
    rates.validate();
    if (L < 3) throw std::invalid_argument("BeckerDoring: truncation needs L >= 3");
    FamilyModel m;
    m.eps = 1.0;
    m.a.resize(L);
    m.lambda.resize(L);
    m.gamma.resize(L);
    m.w.resize(L);
    m.v.assign(L, 0.0);
    for (std::size_t x = 0; x < L; ++x) {
        const double al = rates.a(x + 1), bl = rates.b(x + 1);
        m.a[x] = bl;
        m.lambda[x] = al / bl;
        m.gamma[x] = 1.0 - rates.z_s * al / bl;
        m.w[x] = static_cast<double>(x + 1);
    }
    m.log_a.resize(L);
    for (std::size_t x = 0; x < L; ++x) m.log_a[x] = std::log(m.a[x]);
    m.boundary = BoundaryLaw::monomer(rates.z_s);
    m.conservation = Conservation{Conservation::Law::becker_doring, WeightMode::family, rho, rates.z_s};
    m.validate();
    return m;
}

ClusterState to_family_state(const BDRates& rates, const BDState& state) {
    ClusterState s;
    s.c = state.c;
    s.theta = state.c[0] - rates.z_s;
    s.rho = state.rho;
    s.t = state.t;
    return s;
}

namespace {

RunRecord bd_record(const BDRates& rates, const FamilyModel& model, const BDState& state, double G_eq,
                    double moment_p) {
    RunRecord r;
    r.t = state.t;
    r.theta = state.c[0];
    r.G = bd_free_energy(state, rates);
    r.F = r.G - G_eq;
    const auto fs = to_family_state(rates, state);
    r.D = dissipation(model, fs);
    // moments over every cluster size, monomers included
    CompensatedSum mass, moment;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double l = static_cast<double>(i + 1);
        mass.add(l * state.c[i]);
        moment.add(std::pow(l, moment_p) * state.c[i]);
    }
    r.w_mass = mass.value();
    r.wp_moment = moment.value();
    r.edge_mass = edge_mass(model, fs.c);
    r.residual = state.mass() - state.rho;
    return r;
}

}  // namespace

BDRunResult bd_run(const BDRates& rates, const BDState& initial, double T, std::size_t cadence, double safety,
                   double moment_p) {
    if (cadence == 0) throw std::invalid_argument("BeckerDoring: cadence must be positive");
    const auto model = map_to_family(rates, initial.rho, initial.size());
    const auto eq = bd_equilibrium(rates, initial.rho, initial.size());
    const double G_eq = bd_free_energy(eq, rates);
    BDRunResult out;
    out.series.kind = RunSeries::Kind::becker_doring;
    out.series.moment_p = moment_p;
    out.series.theta_eq = eq.c[0] - rates.z_s;
    BDState state = initial;
    out.series.records.push_back(bd_record(rates, model, state, G_eq, moment_p));
    const double t_end = initial.t + T;
    std::size_t steps = 0;
    while (t_end - state.t > 1e-12 * std::max(1.0, t_end)) {
        const double dt = std::min(bd_stable_dt(rates, state, safety), t_end - state.t);
        state = bd_step(rates, state, dt);
        ++steps;
        const bool last = !(t_end - state.t > 1e-12 * std::max(1.0, t_end));
        if (steps % cadence == 0 || last) out.series.records.push_back(bd_record(rates, model, state, G_eq, moment_p));
    }
    out.series.steps = steps;
    out.final_state = std::move(state);
    return out;
}

}  // namespace bdfp
