#pragma once
/// Grid densities together with the order parameter.
#include <vector>

namespace bdfp {

/// Densities at sites 0..N (site 0 is the boundary ghost), the order
/// parameter theta, the total mass rho and the time t.
struct ClusterState {
    std::vector<double> c;
    double theta = 0.0;
    double rho = 0.0;
    double t = 0.0;
};

}  // namespace bdfp
