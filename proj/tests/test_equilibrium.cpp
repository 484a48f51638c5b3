#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bdfp/becker_doring.hpp"
#include "bdfp/equilibrium.hpp"
#include "bdfp/errors.hpp"

using namespace bdfp;

namespace {
constexpr double third = 1.0 / 3.0;

FamilyModel s1_model(std::size_t sites = 256, double eps = 1.0 / 32, WeightMode mode = WeightMode::family) {
    const auto spec = CoefficientSpec::coarsening(1.0, third);
    return make_family_model(spec, eps, sites, 0.4, mode);
}
}  // namespace

TEST_CASE("boundary laws") {
    const auto e = BoundaryLaw::exponential(2.0, 1.0, 1.5);
    CHECK(e.value(0.4) == doctest::Approx(std::exp(-1.0 + 0.6) / 2.0));
    CHECK(e.dlog(0.4) == 1.5);
    CHECK(e.d2log(0.4) == 0.0);
    const auto m = BoundaryLaw::monomer(1.0);
    CHECK(m.value(-0.25) == 0.75);
    CHECK(m.dlog(-0.5) == doctest::Approx(2.0));
    CHECK(m.d2log(-0.5) == doctest::Approx(-4.0));
}

TEST_CASE("conservation laws H and derivatives") {
    const Conservation fp{Conservation::Law::fokker_planck, WeightMode::family, 2.0, 1.0};
    CHECK(fp.H(0.5) == doctest::Approx(2.0 * 0.5 - 0.125));
    CHECK(fp.dH(0.5) == doctest::Approx(1.5));
    CHECK(fp.d2H(0.5) == -1.0);
    const Conservation bd{Conservation::Law::becker_doring, WeightMode::family, 2.0, 1.0};
    CHECK(bd.H(0.5) == doctest::Approx(2.0 * std::log(1.5) - 0.5));
    CHECK(bd.dH(0.5) == doctest::Approx(2.0 / 1.5 - 1.0));
}

TEST_CASE("detailed balance holds at every edge of a discrete equilibrium") {
    const auto model = s1_model();
    for (double theta : {-1.0, -0.2, 0.0, 0.3}) {
        const auto p = discrete_equilibrium(model, theta);
        CHECK(p.c[0] == doctest::Approx(model.boundary.value(theta)));
        for (std::size_t i = 0; i < model.sites(); ++i) {
            const double lhs = model.a[i + 1] * p.c[i + 1];
            const double rhs = model.a[i] * model.factor(i, theta) * p.c[i];
            CHECK(std::abs(lhs - rhs) <= 1e-13 * rhs);
        }
    }
}

TEST_CASE("discrete equilibrium approaches the continuum profile at first order in eps") {
    const auto spec = CoefficientSpec::coarsening(1.0, third);
    std::vector<double> errs;
    for (double eps : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const auto sites = static_cast<std::size_t>(4.0 / eps);
        const auto model = make_family_model(spec, eps, sites, 0.4);
        const auto d = discrete_equilibrium(model, -0.3);
        const auto c = continuum_equilibrium(spec, -0.3, eps, sites);
        errs.push_back(std::abs(d.c.back() - c.c.back()) / c.c.back());
    }
    CHECK(errs[0] / errs[1] == doctest::Approx(2.0).epsilon(0.15));
    CHECK(errs[1] / errs[2] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("positivity violation names the site") {
    const auto model = s1_model(64, 0.5);
    try {
        discrete_equilibrium(model, -10.0);
        FAIL("expected PositivityViolation");
    } catch (const PositivityViolation& e) {
        CHECK(std::string(e.what()).find("site") != std::string::npos);
        CHECK(std::string(e.what()).rfind("Equilibrium:", 0) == 0);
    }
}

TEST_CASE("W_eps: exponential law sums to W for the default interpolation as eps -> 0") {
    const auto model = s1_model(256, 1.0 / 64);
    const auto W = W_eps(model, -0.2);
    CHECK(W[0] == doctest::Approx(1.0));
    CHECK(W[256] == doctest::Approx(model.w[256]).epsilon(0.01));
    for (std::size_t i = 1; i < W.size(); ++i) CHECK(W[i] > W[i - 1]);
}

TEST_CASE("W_eps: Becker-Doring closed form l / c1") {
    const BDRates rates;
    const auto model = map_to_family(rates, 2.0, 40);
    for (double theta : {-0.5, 0.0, 0.7}) {
        const auto W = W_eps(model, theta);
        for (std::size_t x = 0; x < W.size(); ++x)
            CHECK(W[x] == doctest::Approx(static_cast<double>(x + 1) / (rates.z_s + theta)).epsilon(1e-13));
    }
}

TEST_CASE("solve_theta: family and continuum modes satisfy the constraint") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto mode : {WeightMode::family, WeightMode::continuum}) {
        const auto model = s1_model(128, 1.0 / 32, mode);
        const auto base = discrete_equilibrium(model, -0.3).c;
        for (int trial = 0; trial < 50; ++trial) {
            auto c = base;
            for (double& ci : c) ci *= u(rng);
            const auto sol = solve_theta_detailed(model, c, std::nullopt);
            CHECK(std::abs(sol.residual) <= 1e-12);
            CHECK(std::abs(constraint_residual(model, c, sol.theta)) <= 1e-12);
        }
    }
}

TEST_CASE("solve_theta: Becker-Doring law recovers c1 from a consistent state") {
    const BDRates rates;
    const auto eq = bd_equilibrium(rates, 1.5, 30);
    const auto model = map_to_family(rates, 1.5, 30);
    CHECK(solve_theta(model, eq.c) == doctest::Approx(eq.c[0] - rates.z_s).epsilon(1e-10));
}

TEST_CASE("constrained equilibrium is idempotent") {
    for (auto mode : {WeightMode::family, WeightMode::continuum}) {
        const auto model = s1_model(256, 1.0 / 32, mode);
        const auto eq = constrained_equilibrium(model);
        CHECK(std::abs(constraint_residual(model, eq.profile.c, eq.theta)) <= 1e-12);
        CHECK(solve_theta(model, eq.profile.c) == doctest::Approx(eq.theta).epsilon(1e-12));
        const auto again = reference_equilibrium(model, solve_theta(model, eq.profile.c));
        for (std::size_t i = 0; i < again.c.size(); ++i)
            CHECK(again.c[i] == doctest::Approx(eq.profile.c[i]).epsilon(1e-10));
    }
}

TEST_CASE("constrained theta increases with the mass") {
    const auto spec = CoefficientSpec::coarsening(1.0, third);
    double prev = -1e300;
    for (double rho : {0.1, 0.3, 0.5, 0.7, 1.0, 1.5}) {
        const auto eq = constrained_equilibrium(make_family_model(spec, 1.0 / 32, 256, rho));
        CHECK(eq.theta > prev);
        prev = eq.theta;
    }
}

TEST_CASE("admissible theta range keeps factors positive") {
    const auto model = s1_model(64, 0.5);
    const auto [lo, hi] = admissible_theta_range(model);
    CHECK(lo < hi);
    for (std::size_t i = 0; i < model.a.size(); ++i) CHECK(model.factor(i, lo) > 0.0);
    const BDRates rates;
    CHECK(admissible_theta_range(map_to_family(rates, 1.0, 16)).first > -rates.z_s);
}

TEST_CASE("invalid models are rejected") {
    auto model = s1_model(16);
    model.lambda.pop_back();
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);
    auto bad = s1_model(16);
    bad.conservation.law = Conservation::Law::becker_doring;
    bad.conservation.mode = WeightMode::continuum;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("profile csv has a header and one row per site") {
    const auto model = s1_model(8, 0.5);
    const auto p = discrete_equilibrium(model, -0.5);
    std::ostringstream os;
    write_profile_csv(os, p, p.c);
    const std::string text = os.str();
    CHECK(text.rfind("# theta = ", 0) == 0);
    CHECK(text.find("x,c,c_eq") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2 + 9);
}
