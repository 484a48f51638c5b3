#pragma once
/// Grid models of the discrete family, equilibrium profiles, the
/// theta-derivative weights and the conservation-constraint solver.
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdfp/potentials.hpp"

namespace bdfp {

/// Dirichlet value of the density at the left boundary site.
struct BoundaryLaw {
    enum class Kind { exponential, monomer };
    Kind kind = Kind::exponential;
    double a0 = 1.0;   ///< exponential: a(0)
    double v0 = 0.0;   ///< exponential: V(0)
    double w0 = 1.0;   ///< exponential: W(0)
    double z_s = 1.0;  ///< monomer: saturation density

    static BoundaryLaw exponential(double a0, double v0, double w0) { return {Kind::exponential, a0, v0, w0, 0.0}; }
    static BoundaryLaw monomer(double z_s) { return {Kind::monomer, 1.0, 0.0, 0.0, z_s}; }

    double value(double theta) const;
    /// d/dtheta log value and its derivative.
    double dlog(double theta) const;
    double d2log(double theta) const;
};

/// How theta is tied to the state.
enum class WeightMode {
    continuum,  ///< theta = rho - eps sum W c (closed form, sampled W)
    family      ///< eps sum W_eps(x,theta) c = H'(theta), solved by Newton
};

/// Conservation law H with its derivatives.
struct Conservation {
    enum class Law { fokker_planck, becker_doring };
    Law law = Law::fokker_planck;
    WeightMode mode = WeightMode::family;
    double rho = 0.0;
    double z_s = 1.0;  ///< becker_doring only

    double H(double theta) const;
    double dH(double theta) const;
    double d2H(double theta) const;
};

/// Grid instance of the discrete family. Arrays are indexed by site
/// i = 0..N at x = i eps; site 0 is the boundary.
struct FamilyModel {
    double eps = 1.0;
    std::vector<double> a;       ///< diffusion samples a_eps
    std::vector<double> lambda;  ///< theta-coupling samples
    std::vector<double> gamma;   ///< potential-slope samples
    std::vector<double> w;       ///< W(x_i), used for moments and the continuum constraint
    std::vector<double> v;       ///< V(x_i), used by the continuum free energy
    std::vector<double> log_a;   ///< optional cache of log a; empty means computed on demand
    BoundaryLaw boundary;
    Conservation conservation;

    std::size_t sites() const { return a.size() - 1; }
    double x(std::size_t i) const { return eps * static_cast<double>(i); }
    /// 1 + eps (theta lambda - gamma) at site i.
    double factor(std::size_t i, double theta) const { return 1.0 + eps * (theta * lambda[i] - gamma[i]); }
    /// Throws std::invalid_argument when the invariants fail.
    void validate() const;
};

/// Default interpolation: a_eps = a, lambda = W', gamma = V', exponential boundary,
/// Fokker-Planck conservation with mass rho.
FamilyModel make_family_model(const CoefficientSpec& spec, double eps, std::size_t sites, double rho,
                              WeightMode mode = WeightMode::family);

struct EquilibriumProfile {
    enum class Kind { continuum, discrete_family };
    Kind kind = Kind::discrete_family;
    double eps = 1.0;
    double theta = 0.0;
    std::vector<double> c;  ///< sites 0..N

    std::size_t sites() const { return c.size() - 1; }
};

/// a^{-1} exp(-V + theta W) sampled at i eps, i = 0..N.
EquilibriumProfile continuum_equilibrium(const CoefficientSpec& spec, double theta, double eps,
                                         std::size_t sites);

/// Product formula, accumulated in log space. Throws PositivityViolation.
EquilibriumProfile discrete_equilibrium(const FamilyModel& model, double theta, double boundary_value);
/// Same with the boundary value taken from the model's boundary law.
EquilibriumProfile discrete_equilibrium(const FamilyModel& model, double theta);

/// W_eps(x_i, theta) for i = 0..N.
std::vector<double> W_eps(const FamilyModel& model, double theta);

/// Lowest and highest theta keeping every positivity factor (and the
/// monomer boundary) positive, clipped to [-50, 50].
std::pair<double, double> admissible_theta_range(const FamilyModel& model);

struct ThetaSolution {
    double theta = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool used_bisection = false;
    bool non_monotone = false;  ///< residual map found non-monotone on the bracket
};

/// Residual of the conservation constraint at (c, theta); c holds sites 0..N
/// and site 0 is ignored.
double constraint_residual(const FamilyModel& model, std::span<const double> c, double theta);

ThetaSolution solve_theta_detailed(const FamilyModel& model, std::span<const double> c,
                                   std::optional<double> hint = std::nullopt);
double solve_theta(const FamilyModel& model, std::span<const double> c,
                   std::optional<double> hint = std::nullopt);

/// Constrained equilibrium of the model: theta* with its reference profile.
/// Family mode: discrete profile with eps sum W_eps c = H'. Continuum mode:
/// sampled continuum profile with theta + eps sum W c = rho.
struct ConstrainedEquilibrium {
    double theta = 0.0;
    EquilibriumProfile profile;
};
ConstrainedEquilibrium constrained_equilibrium(const FamilyModel& model);

/// Reference profile used by the energy functionals at a given theta.
EquilibriumProfile reference_equilibrium(const FamilyModel& model, double theta);

/// CSV with columns x, c, c_eq and a "# theta = ..." header comment.
void write_profile_csv(std::ostream& os, const EquilibriumProfile& profile,
                       std::span<const double> c_eq = {});

}  // namespace bdfp
