#include "bdfp/numerics.hpp"

#include "bdfp/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <sstream>

namespace bdfp {

double compensated_sum(std::span<const double> values) noexcept {
    CompensatedSum s;
    for (double v : values) s.add(v);
    return s.value();
}

double logarithmic_mean(double a, double b) noexcept {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    if (a == b) return a;
    const double u = a / b - 1.0;
    if (std::abs(u) < 1e-4) {
        // u / log(1+u) series
        return b * (1.0 + u * (0.5 + u * (-1.0 / 12.0 + u * (1.0 / 24.0 - u * 19.0 / 720.0))));
    }
    return (a - b) / (std::log(a) - std::log(b));
}

double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

double entropy_density(double f, double g) noexcept {
    if (f <= 0.0) return g;
    const double r = f / g - 1.0;
    if (std::abs(r) < 1e-2) {
        // g sum_{k>=2} (-r)^k / (k (k-1)), avoids the cancellation near f = g
        double term = r * r, s = 0.0;
        for (int k = 2; k < 12; ++k) {
            s += term / (k * (k - 1));
            term *= -r;
        }
        return g * s;
    }
    return f * std::log(f / g) - f + g;
}

QuadratureResult integrate_interval(const RealFunction& f, double a, double b, double rel_tol) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    const double v = gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel_tol, &err);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "Quadrature: non-finite integral on [" << a << ", " << b << "]";
        throw EvaluationFailure(os.str());
    }
    return {v, err};
}

double gauss_legendre(const RealFunction& f, double a, double b) {
    static constexpr std::array<double, 5> nodes = {
        0.1488743389816312108848260, 0.4333953941292471907992659, 0.6794095682990244062343274,
        0.8650633666889845107320967, 0.9739065285171717200779640};
    static constexpr std::array<double, 5> weights = {
        0.2955242247147528701738930, 0.2692667193099963550912269, 0.2190863625159820439955349,
        0.1494513491505805931457763, 0.0666713443086881375935688};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        s += weights[i] * (f(mid - half * nodes[i]) + f(mid + half * nodes[i]));
    return s * half;
}

QuadratureResult integrate_half_line(const RealFunction& f, double from) {
    constexpr int max_panels = 80;
    constexpr double tiny = 1e-14;
    CompensatedSum total;
    double err = 0.0;
    double x = from;
    int quiet = 0;
    for (int k = 0; k < max_panels; ++k) {
        const double width = std::max(1.0, x - from);
        const double next = x + width;
        const auto panel = integrate_interval(f, x, next, 1e-13);
        total.add(panel.value);
        err += panel.error;
        x = next;
        const double run = std::abs(total.value());
        if (std::abs(panel.value) <= tiny * run)
            ++quiet;
        else
            quiet = 0;
        if (quiet >= 3) {
            // local exponential rate r = -(log f)' at the cut, tail ~ f(x)/r
            const double fx = f(x);
            double tail = 0.0;
            if (fx > 0.0) {
                const double h = 1e-3 * std::max(1.0, x);
                const double fh = f(x + h);
                const double rate = fh > 0.0 ? (std::log(fx) - std::log(fh)) / h : 0.0;
                tail = rate > 0.0 ? fx / rate : fx * width;
            }
            if (!std::isfinite(tail)) tail = 0.0;
            total.add(tail);
            err += std::abs(tail);
            return {total.value(), err};
        }
    }
    std::ostringstream os;
    os << "Quadrature: integrand tail does not decay on [" << from << ", " << x << ")";
    throw DivergentIntegral(os.str());
}

}  // namespace bdfp
