#include "bdfp/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdfp {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("MonotoneCubic: need at least two knots of matching size");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw std::invalid_argument("MonotoneCubic: knots must be strictly increasing");

    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    slope_.assign(n, 0.0);
    slope_[0] = delta[0];
    slope_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            slope_[i] = 0.0;
            continue;
        }
        // weighted harmonic mean
        const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
        const double w0 = 2 * h1 + h0, w1 = h1 + 2 * h0;
        slope_[i] = (w0 + w1) / (w0 / delta[i - 1] + w1 / delta[i]);
    }
}

Jet MonotoneCubic::operator()(double x) const {
    if (x <= x_.front()) return {y_.front() + slope_.front() * (x - x_.front()), slope_.front(), 0.0};
    if (x >= x_.back()) return {y_.back() + slope_.back() * (x - x_.back()), slope_.back(), 0.0};
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double y0 = y_[i], y1 = y_[i + 1], m0 = slope_[i] * h, m1 = slope_[i + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    const double v = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
                     (t3 - t2) * m1;
    const double d = (6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 +
                     (3 * t2 - 2 * t) * m1;
    const double dd = (12 * t - 6) * y0 + (6 * t - 4) * m0 + (-12 * t + 6) * y1 + (6 * t - 2) * m1;
    return {v, d / h, dd / (h * h)};
}

}  // namespace bdfp
