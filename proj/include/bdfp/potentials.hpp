#pragma once
/// Coefficient functions a (diffusion), V (potential) and W (bulk energy)
/// of the half-line model, their admissibility checks, the critical mass
/// and the equilibrium order parameter, and the unit-diffusion change of
/// variables.
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bdfp {

/// Value with first and second derivative.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

using Profile = std::function<Jet(double)>;

struct PowerLawExponents {
    double kappa = 1.0;  ///< W = (1+x)^kappa
    double alpha = 0.0;  ///< a = (1+x)^alpha
    double gamma = 0.5;  ///< V = (1+x)^gamma
};

/// The triple (a, V, W). Immutable; evaluators are pure and thread safe.
class CoefficientSpec {
public:
    enum class Family { power_law, tabulated, custom };

    /// a = (1+x)^alpha, V = (1+x)^gamma, W = (1+x)^kappa.
    static CoefficientSpec power_law(double kappa, double alpha, double gamma);
    /// Coarsening normalization: a = (1+x)^alpha, V = (1+x)^(1-gamma), W = 1+x.
    static CoefficientSpec coarsening(double alpha, double gamma);
    /// Columns interpolated by monotone cubics; linear extension past the last knot.
    static CoefficientSpec tabulated(std::vector<double> x, std::vector<double> a,
                                     std::vector<double> V, std::vector<double> W);
    static CoefficientSpec custom(Profile a, Profile V, Profile W, std::string label = "custom");

    Jet a(double x) const { return a_(x); }
    Jet V(double x) const { return v_(x); }
    Jet W(double x) const { return w_(x); }

    Family family() const { return family_; }
    const std::optional<PowerLawExponents>& exponents() const { return exponents_; }
    const std::string& label() const { return label_; }

    /// Equilibrium density a^{-1} exp(-V + theta W).
    double equilibrium_density(double x, double theta) const;

private:
    CoefficientSpec(Family f, Profile a, Profile V, Profile W, std::string label)
        : family_(f), a_(std::move(a)), v_(std::move(V)), w_(std::move(W)), label_(std::move(label)) {}

    Family family_;
    Profile a_, v_, w_;
    std::optional<PowerLawExponents> exponents_;
    std::string label_;
};

struct Condition {
    std::string name;
    bool passed = true;
    std::string detail;
    double worst_x = 0.0;  ///< sample point where the condition is tightest or fails
};

/// Per-condition verdicts. `admissible` is the conjunction of all flags.
struct AdmissibilityReport {
    bool admissible = true;
    std::vector<Condition> conditions;
    /// Window [x_delta, grid end] on which the tail conditions are certified.
    std::optional<std::pair<double, double>> certified_window;
    double bound_constant = 0.0;  ///< sup of the second-derivative combination
    double lower_constant = 0.0;  ///< inf of a W'^2
    double upper_constant = 0.0;  ///< sup of a W'^2 / W

    const Condition* find(std::string_view name) const;
};

/// Exact exponent-range verdict for the power-law family.
AdmissibilityReport check_admissibility(double kappa, double alpha, double gamma);

/// Numerical check of conditions (a)-(e) on the sample points `grid`.
AdmissibilityReport verify_assumptions(const CoefficientSpec& spec, std::span<const double> grid,
                                       double delta);

/// Uniform sample points 0, h, ..., x_end.
std::vector<double> uniform_grid(double x_end, std::size_t intervals);

/// int W c_theta^eq dx over [0, inf); requires theta <= 0.
double equilibrium_w_mass(const CoefficientSpec& spec, double theta);

/// Critical mass and the equilibrium order parameter map.
class CriticalData {
public:
    CriticalData(CoefficientSpec spec, double rho_s, double error, double theta_min = -50.0)
        : spec_(std::move(spec)), rho_s_(rho_s), error_(error), theta_min_(theta_min) {}

    double rho_s() const { return rho_s_; }
    double error_estimate() const { return error_; }
    /// theta_eq(rho): 0 for rho >= rho_s, else the root of theta + int W c_theta^eq = rho.
    double theta_eq(double rho) const;

private:
    CoefficientSpec spec_;
    double rho_s_;
    double error_;
    double theta_min_;
};

CriticalData rho_s(const CoefficientSpec& spec);
double theta_eq(const CoefficientSpec& spec, double rho, double theta_min = -50.0);

/// z(x) = int_0^x a^{-1/2} and its inverse.
class UnitDiffusionMap {
public:
    explicit UnitDiffusionMap(const CoefficientSpec& spec, double x_max = 1e8);
    double z_of_x(double x) const;
    double x_of_z(double z) const;
    double z_max() const { return z_.back(); }

private:
    std::function<double(double)> inv_sqrt_a_;
    std::vector<double> x_, z_;
};

struct UnitDiffusionTransform {
    CoefficientSpec spec;
    std::shared_ptr<const UnitDiffusionMap> map;
};

/// Spec in the variable z with a == 1, V~ = V + 1/2 log a, W~ = W, all at x(z).
UnitDiffusionTransform make_unit_diffusion(const CoefficientSpec& spec);
CoefficientSpec transform_unit_diffusion(const CoefficientSpec& spec);

}  // namespace bdfp
