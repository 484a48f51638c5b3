#pragma once
/// Thermodynamic functionals of grid states and numerical checks of the
/// decay estimates: free energy, dissipation, Pinsker-type bounds, the
/// log-Sobolev constant B, moment propagation and decay-rate fits.
#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdfp/equilibrium.hpp"
#include "bdfp/series.hpp"
#include "bdfp/state.hpp"

namespace bdfp {

/// eps sum_{i>=1} ref Psi(c/ref).
double relative_entropy(std::span<const double> c, std::span<const double> ref, double eps);

/// Family mode: eps sum (c log(c/c_eq) - c) + H(theta) with c_eq the discrete
/// equilibrium at the state's theta. Continuum mode:
/// eps sum (c log c - c) + eps sum (V + log a) c + theta^2/2.
double free_energy(const FamilyModel& model, const ClusterState& state);

/// eps sum k c_hat (D_eps log(c/c_eq))^2 over the edges 0..N-1, ghost included.
double dissipation(const FamilyModel& model, const ClusterState& state);

/// eps sum W^p c over the interior sites.
double weighted_moment(const FamilyModel& model, std::span<const double> c, double p);

/// eps sum W c over the last 5% of the sites.
double edge_mass(const FamilyModel& model, std::span<const double> c);

struct EnergyRecord {
    double G = 0.0;
    double F = 0.0;  ///< G - G(constrained equilibrium)
    double H = 0.0;  ///< relative entropy against the equilibrium profile
    double D = 0.0;
    double theta = 0.0;
    double t = 0.0;
};

/// Energy functionals of `state` measured against the constrained equilibrium.
EnergyRecord energy_record(const FamilyModel& model, const ClusterState& state,
                           const ConstrainedEquilibrium& eq);

struct PinskerResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double H = 0.0;
    double constant = 0.0;  ///< eps sum e^{eta W} c_ref
    bool satisfied = true;
};

enum class PinskerMode {
    full_line,  ///< eta = |theta_ref|, needs theta_ref < 0
    truncated   ///< eta = 1 on the grid, any theta_ref
};

/// Weighted Pinsker inequality against the reference profile at theta_ref.
/// Throws InvalidTheta when theta_ref >= 0 in full-line mode.
PinskerResult pinsker_check(const FamilyModel& model, const ClusterState& state, double theta_ref,
                            PinskerMode mode = PinskerMode::full_line);

struct CorollaryResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = true;
};

/// (eps sum W|c - c*|)^2 + (theta - theta*)^2 <= (1 + 4 max(F, C)/theta*^2) F.
CorollaryResult corollary_bound_check(const FamilyModel& model, const ClusterState& state,
                                      const ConstrainedEquilibrium& eq);

struct OmegaCheck {
    double c0 = 0.0;             ///< inf a W'^2 / W^{1-beta}
    double max_ratio = 0.0;      ///< sup omega c0 / W^beta, at most 1
    bool satisfied = true;
};

/// omega = W/(a W'^2) <= W^beta / c0 on the sample points.
OmegaCheck omega_weight_check(const CoefficientSpec& spec, std::span<const double> grid, double beta);

using Density = std::function<double(double)>;

struct LsiProfile {
    std::vector<double> x;
    std::vector<double> B;
    double sup = 0.0;
    double argmax = 0.0;
};

struct LsiResult {
    LsiProfile profile;               ///< finest level
    std::array<double, 3> sup_by_level{};  ///< grid spacings h, h/2, h/4
    bool grid_stable = false;         ///< sups agree within 1%
    bool diverging = false;           ///< B still increasing at the grid end on every level
    double tail_slope = 0.0;          ///< least-squares slope of B over [x_end/10, x_end]
    double lower_bound() const { return profile.sup / 4.0; }  ///< implied interval for the optimal constant
    double upper_bound() const { return profile.sup; }
};

/// B(x) = nu([x,inf)) log(1 + e^2/nu([x,inf))) int_0^x dy/mu on a uniform grid.
LsiProfile lsi_profile(const Density& nu, const Density& mu, double x_end, std::size_t intervals);
LsiResult lsi_constant(const Density& nu, const Density& mu, double x_end, std::size_t intervals);

struct LsiMeasures {
    Density nu;
    Density mu;
};
LsiMeasures lsi_gaussian_preset();
LsiMeasures lsi_exponential_preset();
/// nu = c_eq/(omega Z), mu = a c_eq/Z with Z = int c_eq/omega; needs theta < 0.
LsiMeasures lsi_model_preset(const CoefficientSpec& spec, double theta);

struct MomentReport {
    double initial = 0.0;
    double sup = 0.0;
    double ratio_to_initial = 0.0;
    double ratio_to_initial_plus_one = 0.0;
    bool growth_flag = false;
    std::optional<std::string> caveat;
};

MomentReport moment_bound_check(const RunSeries& series);

struct LyapunovReport {
    double max_G_increase = 0.0;
    double max_F_increase = 0.0;
    bool passed = true;
};

/// Record-to-record monotonicity of G and F within `tolerance`.
LyapunovReport lyapunov_check(const RunSeries& series, double tolerance = 1e-12);

enum class DecayForm { exponential, algebraic };

struct DecayFit {
    DecayForm form = DecayForm::exponential;
    double C = 0.0;       ///< amplitude (exponential) or offset (algebraic)
    double lambda = 0.0;
    double k = 0.0;       ///< algebraic exponent
    double lambda_ci = 0.0;  ///< 95% half-width
    double k_ci = 0.0;
    double r2 = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of log F: C e^{-lambda t} or (C + lambda t)^{-k}.
/// Window: drop the first 20% of records and records with F < 1e-13.
DecayFit fit_decay(std::span<const double> t, std::span<const double> F, DecayForm form);
DecayFit fit_decay(const RunSeries& series, DecayForm form);

std::string to_string(DecayForm form);

}  // namespace bdfp
