#pragma once
/// Direct Becker-Doring solver with power-law rates, partition
/// coefficients, critical mass and Lyapunov function, plus the mapping of
/// the rates onto the eps = 1 member of the discrete family.
#include <cstddef>
#include <vector>

#include "bdfp/equilibrium.hpp"
#include "bdfp/series.hpp"
#include "bdfp/state.hpp"

namespace bdfp {

/// a_l = a1 l^alpha, b_l = a_l (z_s + q l^{-gamma}).
struct BDRates {
    double a1 = 1.0;
    double alpha = 1.0 / 3.0;
    double gamma = 1.0 / 3.0;
    double q = 1.0;
    double z_s = 1.0;

    double a(std::size_t l) const;
    double b(std::size_t l) const;
    void validate() const;
};

/// Densities c_l for l = 1..L stored at index l-1.
struct BDState {
    std::vector<double> c;
    double rho = 0.0;
    double t = 0.0;

    std::size_t size() const { return c.size(); }
    double mass() const;
};

/// Q_l = prod_{r<l} a_r / b_{r+1}, Q_1 = 1.
double bd_Q(const BDRates& rates, std::size_t l);
/// Q_1..Q_L at indices 0..L-1.
std::vector<double> bd_Q_table(const BDRates& rates, std::size_t L);

/// sum_l l Q_l z_s^l. Throws DivergentSum when the tail never becomes negligible.
double bd_rho_s(const BDRates& rates);

/// Fluxes J_1..J_L (J_L = 0) at indices 0..L-1.
std::vector<double> bd_fluxes(const BDRates& rates, const BDState& state);

/// Largest step keeping every density nonnegative, times `safety`.
double bd_stable_dt(const BDRates& rates, const BDState& state, double safety = 0.9);

/// Forward-Euler step of the full system including the monomer equation.
/// Throws PositivityLoss or MassDrift.
BDState bd_step(const BDRates& rates, const BDState& state, double dt);

/// sum c_l (log(c_l / Q_l) - 1).
double bd_free_energy(const BDState& state, const BDRates& rates);

/// Equilibrium c_l = Q_l z^l of the truncated system with mass rho.
BDState bd_equilibrium(const BDRates& rates, double rho, std::size_t L);

/// eps = 1 family model with L-1 interior sites (site x holds c_{x+1}).
FamilyModel map_to_family(const BDRates& rates, double rho, std::size_t L = 512);

/// Family state of a Becker-Doring state (theta = c_1 - z_s).
ClusterState to_family_state(const BDRates& rates, const BDState& state);

/// Integrates bd_step to time T; records use the c1 column.
struct BDRunResult {
    RunSeries series;
    BDState final_state;
};
BDRunResult bd_run(const BDRates& rates, const BDState& initial, double T, std::size_t cadence,
                   double safety = 0.9, double moment_p = 1.0);

}  // namespace bdfp
