#pragma once
/// Time stepping of the grid density in flux form, coupled to the
/// conservation constraint and the Dirichlet boundary law.
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>

#include "bdfp/analysis.hpp"
#include "bdfp/equilibrium.hpp"
#include "bdfp/series.hpp"
#include "bdfp/state.hpp"

namespace bdfp {

struct StepScheme {
    enum class Kind { explicit_euler, semi_implicit };
    enum class DtPolicy { fixed, cfl };
    Kind kind = Kind::explicit_euler;
    DtPolicy policy = DtPolicy::cfl;
    double dt = 0.0;      ///< used by the fixed policy
    double safety = 0.9;  ///< in (0, 1]

    void validate() const;
};

/// The three equivalent edge fluxes between sites i and i+1.
struct FluxForms {
    double direct = 0.0;    ///< (a f c(x) - a c(x+eps)) / eps
    double ratio = 0.0;     ///< -k D_eps (c / c_eq)
    double log_mean = 0.0;  ///< -k c_hat D_eps log(c / c_eq)
    double scale = 0.0;     ///< (|a f c(x)| + |a c(x+eps)|) / eps
};

FluxForms flux(const FamilyModel& model, const ClusterState& state, std::size_t edge,
               std::span<const double> c_eq);
FluxForms flux(const FamilyModel& model, const ClusterState& state, std::size_t edge);

/// Direct-form fluxes on edges 0..N; the last entry is the zero edge flux.
std::vector<double> fluxes(const FamilyModel& model, const ClusterState& state);

/// Positivity-preserving explicit bound safety * eps^2 / (2 max a (1 + eps |theta Lambda - Gamma|)).
double cfl_dt(const FamilyModel& model, const ClusterState& state, double safety = 1.0);

/// Step size the scheme would use from `state`.
double scheme_dt(const FamilyModel& model, const ClusterState& state, const StepScheme& scheme);

/// Builds a constrained state from interior densities (c[0] is overwritten):
/// solves theta and fills the ghost from the boundary law.
ClusterState make_state(const FamilyModel& model, std::vector<double> c, double t = 0.0);

/// One step: ghost from the boundary law at theta_n, flux update with zero
/// flux at the right edge, theta re-solved from the constraint.
ClusterState step(const FamilyModel& model, const ClusterState& state, double dt, const StepScheme& scheme);

struct RunOptions {
    double moment_p = 1.0;
    bool monitor_lyapunov = false;  ///< track the largest per-step increase of G
    /// Called with the state behind every emitted record.
    std::function<void(const ClusterState&, const RunRecord&)> on_record;
};

struct RunResult {
    RunSeries series;
    ClusterState final_state;
};

RunRecord make_record(const FamilyModel& model, const ClusterState& state, const ConstrainedEquilibrium& eq,
                      double moment_p);

/// Integrates to time T, recording every `cadence` steps and at the end.
RunResult run(const FamilyModel& model, const ClusterState& initial, double T, std::size_t cadence,
              const StepScheme& scheme, const RunOptions& options = {});

/// CSV with columns x, c, c_eq (reference profile at the state's theta).
void write_state_csv(std::ostream& os, const FamilyModel& model, const ClusterState& state);

}  // namespace bdfp
