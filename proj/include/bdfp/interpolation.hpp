#pragma once
/// Monotone piecewise-cubic Hermite interpolation (Fritsch-Carlson slopes).
#include <vector>

#include "bdfp/potentials.hpp"

namespace bdfp {

class MonotoneCubic {
public:
    MonotoneCubic() = default;
    /// Knots must be strictly increasing, at least two of them.
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    /// Value and first two derivatives. Outside the knot range the end
    /// segment's tangent line is used.
    Jet operator()(double x) const;

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

private:
    std::vector<double> x_, y_, slope_;
};

}  // namespace bdfp
