#pragma once
/// Time-indexed run records and their CSV form.
#include <iosfwd>
#include <string>
#include <vector>

namespace bdfp {

struct RunRecord {
    double t = 0.0;
    double theta = 0.0;   ///< order parameter; for Becker-Doring series the monomer density c1
    double G = 0.0;
    double F = 0.0;       ///< G minus its constrained minimum
    double D = 0.0;
    double w_mass = 0.0;
    double wp_moment = 0.0;
    double edge_mass = 0.0;
    double residual = 0.0;  ///< constraint residual (kept in memory only)
};

struct RunSeries {
    enum class Kind { family, becker_doring };
    Kind kind = Kind::family;
    double moment_p = 1.0;
    double theta_eq = 0.0;       ///< constrained equilibrium of the model
    double max_step_increase = 0.0;  ///< largest per-step increase of G (when monitored)
    std::size_t steps = 0;
    std::vector<RunRecord> records;
};

/// Columns t, theta (or c1), G, F_rho, D, W_mass, Wp_moment, edge_mass; 17 significant digits.
void write_series_csv(std::ostream& os, const RunSeries& series);
/// Inverse of write_series_csv; the in-memory residual is left at 0.
RunSeries read_series_csv(std::istream& is);

}  // namespace bdfp
