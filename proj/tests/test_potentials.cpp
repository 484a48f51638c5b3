#include <doctest.h>

#include <cmath>

#include "bdfp/errors.hpp"
#include "bdfp/potentials.hpp"

using namespace bdfp;

namespace {
constexpr double third = 1.0 / 3.0;
}

TEST_CASE("power-law profiles and derivatives") {
    const auto s = CoefficientSpec::power_law(2.0, 0.5, 1.0);
    const auto W = s.W(3.0);
    CHECK(W.value == doctest::Approx(16.0));
    CHECK(W.d1 == doctest::Approx(8.0));
    CHECK(W.d2 == doctest::Approx(2.0));
    CHECK(s.a(3.0).value == doctest::Approx(2.0));
    CHECK(s.V(3.0).d1 == doctest::Approx(1.0));
    const auto c = CoefficientSpec::coarsening(1.0, third);
    CHECK(c.V(7.0).value == doctest::Approx(4.0));
    CHECK(c.W(7.0).value == doctest::Approx(8.0));
    CHECK(c.equilibrium_density(7.0, -0.5) == doctest::Approx(std::exp(-4.0 - 4.0) / 8.0));
}

TEST_CASE("admissibility of power-law exponents") {
    CHECK(check_admissibility(2.0, 0.0, 1.0).admissible);
    CHECK(check_admissibility(1.0, 1.0, 2.0 / 3.0).admissible);
    CHECK(check_admissibility(1.0, third, 2.0 / 3.0).admissible);
    const auto too_wide = check_admissibility(1.0, 1.5, 0.3);
    CHECK_FALSE(too_wide.admissible);
    REQUIRE(too_wide.find("alpha <= 2-kappa") != nullptr);
    CHECK_FALSE(too_wide.find("alpha <= 2-kappa")->passed);
    CHECK_FALSE(check_admissibility(3.0, 0.0, 1.0).find("kappa <= 2")->passed);
    CHECK_FALSE(check_admissibility(1.0, 0.0, 1.0).find("gamma < min(2-alpha, kappa)")->passed);
    CHECK_FALSE(check_admissibility(0.5, 0.5, 0.2).find("alpha >= max(2-2kappa, 0)")->passed);
    CHECK_FALSE(check_admissibility(std::nan(""), 0.0, 1.0).admissible);
}

TEST_CASE("critical mass: closed form 15/(2e) and coarsening fixture") {
    const auto closed = rho_s(CoefficientSpec::power_law(1.0, 0.0, 2.0 / 3.0));
    CHECK(std::abs(closed.rho_s() - 15.0 / (2.0 * std::exp(1.0))) <= 1e-8);
    CHECK(closed.error_estimate() < 1e-8 * closed.rho_s());
    // high-precision quadrature of int exp(-(1+x)^(2/3)) dx
    CHECK(rho_s(CoefficientSpec::coarsening(1.0, third)).rho_s() ==
          doctest::Approx(0.76092335071765996).epsilon(1e-10));
}

TEST_CASE("theta_eq fixtures from an independent high-precision root") {
    const auto closed = rho_s(CoefficientSpec::power_law(1.0, 0.0, 2.0 / 3.0));
    CHECK(closed.theta_eq(1.0) == doctest::Approx(-0.17650609823718090).epsilon(1e-9));
    const auto s1 = rho_s(CoefficientSpec::coarsening(1.0, third));
    CHECK(s1.theta_eq(0.5 * s1.rho_s()) == doctest::Approx(-0.12741953644427936).epsilon(1e-9));
    CHECK(s1.theta_eq(2.0 * s1.rho_s()) == 0.0);
    CHECK(theta_eq(CoefficientSpec::coarsening(1.0, third), 0.5 * s1.rho_s()) ==
          doctest::Approx(-0.12741953644427936).epsilon(1e-9));
}

TEST_CASE("theta_eq is increasing and satisfies its constraint") {
    const auto spec = CoefficientSpec::coarsening(third, third);
    const auto cd = rho_s(spec);
    double prev = -1e300;
    for (int k = 1; k < 30; ++k) {
        const double rho = cd.rho_s() * k / 30.0;
        const double th = cd.theta_eq(rho);
        CHECK(th > prev);
        CHECK(th < 0.0);
        CHECK(th + equilibrium_w_mass(spec, th) == doctest::Approx(rho).epsilon(1e-9));
        prev = th;
    }
}

TEST_CASE("divergent W e^{-V} is reported") {
    const Profile one = [](double) { return Jet{1.0, 0.0, 0.0}; };
    const Profile zero = [](double) { return Jet{0.0, 0.0, 0.0}; };
    const Profile lin = [](double x) { return Jet{1.0 + x, 1.0, 0.0}; };
    const auto flat = CoefficientSpec::custom(one, zero, lin);
    CHECK_THROWS_AS(rho_s(flat), DivergentIntegral);
    const auto report = verify_assumptions(flat, uniform_grid(20.0, 200), 0.1);
    CHECK_FALSE(report.find("(e) integrability")->passed);
}

TEST_CASE("grid verification of the assumptions") {
    const auto good = verify_assumptions(CoefficientSpec::power_law(2.0, 0.0, 1.0), uniform_grid(200.0, 2000), 0.1);
    CHECK(good.find("(b) W increasing")->passed);
    CHECK(good.find("(d) lower bound on a W'^2")->passed);
    CHECK(good.find("(e) integrability")->passed);
    CHECK(good.find("(c) tail conditions")->passed);
    REQUIRE(good.certified_window.has_value());
    CHECK(good.certified_window->second == doctest::Approx(200.0));
    // V' / W' = 1 / (2 (1+x)) <= 0.1 from x = 4 on
    CHECK(good.certified_window->first == doctest::Approx(4.0).epsilon(0.05));
    const Profile one = [](double) { return Jet{1.0, 0.0, 0.0}; };
    const Profile dec = [](double x) { return Jet{2.0 - x / 100.0, -0.01, 0.0}; };
    const Profile v = [](double x) { return Jet{x, 1.0, 0.0}; };
    const auto bad = verify_assumptions(CoefficientSpec::custom(one, v, dec), uniform_grid(50.0, 100), 0.1);
    CHECK_FALSE(bad.find("(b) W increasing")->passed);
    CHECK_FALSE(bad.admissible);
}

TEST_CASE("tabulated coefficients reproduce the sampled power law") {
    std::vector<double> x, a, V, W;
    for (int i = 0; i <= 400; ++i) {
        const double t = 0.05 * i;
        x.push_back(t);
        a.push_back(1.0 + t);
        V.push_back(std::pow(1.0 + t, 2.0 / 3.0));
        W.push_back(1.0 + t);
    }
    const auto table = CoefficientSpec::tabulated(x, a, V, W);
    const auto exact = CoefficientSpec::coarsening(1.0, third);
    for (double t : {0.013, 1.7, 9.99}) {
        CHECK(table.V(t).value == doctest::Approx(exact.V(t).value).epsilon(1e-4));
        CHECK(table.W(t).d1 == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(CoefficientSpec::tabulated({0.5, 1.0}, {1, 1}, {1, 1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("unit-diffusion map: a = (1+x)^2 gives z = log(1+x)") {
    const auto spec = CoefficientSpec::power_law(1.0, 2.0, 0.5);
    const UnitDiffusionMap map(spec, 1e4);
    for (double x : {0.0, 0.3, 2.0, 50.0, 900.0}) {
        CHECK(map.z_of_x(x) == doctest::Approx(std::log1p(x)).epsilon(1e-10));
        CHECK(map.x_of_z(map.z_of_x(x)) == doctest::Approx(x).epsilon(1e-10));
    }
    CHECK_THROWS_AS(map.x_of_z(-1.0), InversionFailure);
    CHECK_THROWS_AS(map.x_of_z(map.z_max() + 1.0), InversionFailure);
}

TEST_CASE("unit-diffusion transform: identity for a = 1 and exact derivative identities") {
    const auto flat = CoefficientSpec::power_law(1.0, 0.0, 2.0 / 3.0);
    const auto same = transform_unit_diffusion(flat);
    for (double x : {0.0, 1.0, 7.5}) {
        CHECK(same.V(x).value == doctest::Approx(flat.V(x).value).epsilon(1e-10));
        CHECK(same.W(x).d2 == doctest::Approx(flat.W(x).d2).epsilon(1e-10));
        CHECK(same.a(x).value == 1.0);
    }
    const auto spec = CoefficientSpec::power_law(2.0, 0.5, 1.0);
    const auto t = make_unit_diffusion(spec);
    for (double x : {0.2, 3.0, 40.0}) {
        const double z = t.map->z_of_x(x);
        const auto a = spec.a(x), V = spec.V(x), W = spec.W(x);
        const auto Vt = t.spec.V(z), Wt = t.spec.W(z);
        const double sa = std::sqrt(a.value);
        CHECK(Vt.d1 == doctest::Approx(V.d1 * sa + a.d1 / (2 * sa)).epsilon(1e-9));
        CHECK(Vt.d2 == doctest::Approx(V.d2 * a.value + 0.5 * V.d1 * a.d1 + 0.5 * a.d2 -
                                       a.d1 * a.d1 / (4 * a.value))
                           .epsilon(1e-9));
        CHECK(Wt.d1 == doctest::Approx(W.d1 * sa).epsilon(1e-9));
        CHECK(Wt.d2 == doctest::Approx(W.d2 * a.value + 0.5 * W.d1 * a.d1).epsilon(1e-9));
        CHECK(Wt.value == doctest::Approx(W.value).epsilon(1e-12));
    }
}

TEST_CASE("critical mass is invariant under the change of variables") {
    for (double alpha : {third, 1.0}) {
        const auto spec = CoefficientSpec::coarsening(alpha, third);
        const double direct = rho_s(spec).rho_s();
        const double mapped = rho_s(transform_unit_diffusion(spec)).rho_s();
        CHECK(mapped == doctest::Approx(direct).epsilon(1e-8));
    }
}
