#pragma once
/// Small numerical helpers shared by the modules: compensated summation,
/// the logarithmic mean, entropy kernels and quadrature on [a,b] and [0,inf).
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>

namespace bdfp {

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values) noexcept;

/// Logarithmic mean (a-b)/(log a - log b); equals a when a == b, 0 when either is 0.
double logarithmic_mean(double a, double b) noexcept;

/// x log x with the limit value 0 at x = 0.
double xlogx(double x) noexcept;

/// Relative entropy density g * Psi(f/g), Psi(r) = r log r - r + 1.
double entropy_density(double f, double g) noexcept;

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

using RealFunction = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on a finite interval.
QuadratureResult integrate_interval(const RealFunction& f, double a, double b,
                                    double rel_tol = 1e-13);

/// Fixed 10-point Gauss-Legendre rule on [a,b]; exact for polynomials of degree 19.
double gauss_legendre(const RealFunction& f, double a, double b);

/// Integral over [0, inf) of a nonnegative integrand that eventually decays
/// exponentially. Geometrically growing panels; stops once three consecutive
/// panels contribute less than 1e-14 of the running total, then adds an
/// exponential tail estimate. Throws DivergentIntegral if the tail never
/// becomes negligible, EvaluationFailure on non-finite integrand values.
QuadratureResult integrate_half_line(const RealFunction& f, double from = 0.0);

}  // namespace bdfp
