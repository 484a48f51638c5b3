#include <doctest.h>

#include <cmath>
#include <random>

#include "bdfp/analysis.hpp"
#include "bdfp/dynamics.hpp"
#include "bdfp/errors.hpp"

using namespace bdfp;

namespace {
constexpr double third = 1.0 / 3.0;

FamilyModel model_for(double alpha, WeightMode mode = WeightMode::family, double rho = 0.35) {
    return make_family_model(CoefficientSpec::coarsening(alpha, third), 1.0 / 16, 128, rho, mode);
}

ClusterState random_state(const FamilyModel& model, std::mt19937_64& rng, double spread) {
    std::uniform_real_distribution<double> u(-spread, spread);
    auto c = constrained_equilibrium(model).profile.c;
    for (double& ci : c) ci *= std::exp(u(rng));
    return make_state(model, c);
}

RunSeries series_from(const std::vector<double>& t, const std::vector<double>& F) {
    RunSeries s;
    for (std::size_t i = 0; i < t.size(); ++i) {
        RunRecord r;
        r.t = t[i];
        r.F = F[i];
        r.G = F[i];
        s.records.push_back(r);
    }
    return s;
}
}  // namespace

TEST_CASE("exponential fit recovers e^{-2t}") {
    std::vector<double> t, F;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(0.05 * i);
        F.push_back(3.0 * std::exp(-2.0 * t.back()));
    }
    const auto fit = fit_decay(t, F, DecayForm::exponential);
    CHECK(fit.lambda == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.C == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.t_begin == doctest::Approx(1.0));
    CHECK(fit.points == 81);
}

TEST_CASE("algebraic fit recovers (1+t)^{-3}") {
    std::vector<double> t, F;
    for (int i = 0; i <= 200; ++i) {
        t.push_back(0.25 * i);
        F.push_back(std::pow(1.0 + t.back(), -3.0));
    }
    const auto alg = fit_decay(t, F, DecayForm::algebraic);
    CHECK(alg.k == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(alg.C == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(alg.lambda == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(alg.r2 > 0.999999);
    const auto ex = fit_decay(t, F, DecayForm::exponential);
    CHECK(ex.r2 < alg.r2);
    CHECK(to_string(DecayForm::algebraic) == "algebraic");
}

TEST_CASE("fit errors") {
    std::vector<double> t(10), F(10, 1.0);
    for (int i = 0; i < 10; ++i) t[i] = i;
    CHECK_THROWS_AS(fit_decay(t, F, DecayForm::exponential), InsufficientData);
    std::vector<double> t2(40), F2(40, 1.0);
    for (int i = 0; i < 40; ++i) t2[i] = i;
    F2[30] = -1e-6;
    CHECK_THROWS_AS(fit_decay(t2, F2, DecayForm::exponential), NonPositiveEnergy);
    // values below the floor are dropped, not rejected
    F2[30] = -1e-15;
    CHECK(fit_decay(t2, F2, DecayForm::exponential).points == 31);
}

TEST_CASE("Lyapunov and moment checks on synthetic series") {
    auto s = series_from({0, 1, 2, 3}, {3, 2, 1, 0.5});
    CHECK(lyapunov_check(s).passed);
    s.records[2].G = 2.5;
    const auto bad = lyapunov_check(s);
    CHECK_FALSE(bad.passed);
    CHECK(bad.max_G_increase == doctest::Approx(0.5));
    RunSeries m;
    for (int i = 0; i < 10; ++i) {
        RunRecord r;
        r.wp_moment = 1.0 + i;
        r.w_mass = 1.0;
        m.records.push_back(r);
    }
    const auto grow = moment_bound_check(m);
    CHECK(grow.growth_flag);
    CHECK(grow.ratio_to_initial == doctest::Approx(10.0));
    CHECK_FALSE(grow.caveat.has_value());
    m.records.back().edge_mass = 0.5;
    CHECK(moment_bound_check(m).caveat.has_value());
}

TEST_CASE("relative entropy, moments and edge mass") {
    const auto model = model_for(1.0);
    const auto eq = constrained_equilibrium(model);
    CHECK(relative_entropy(eq.profile.c, eq.profile.c, model.eps) == 0.0);
    auto c = eq.profile.c;
    for (double& ci : c) ci *= 2.0;
    double mass = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) mass += model.eps * eq.profile.c[i];
    CHECK(relative_entropy(c, eq.profile.c, model.eps) == doctest::Approx(mass * (2 * std::log(2.0) - 1)));
    double wm = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) wm += model.eps * model.w[i] * model.w[i] * c[i];
    CHECK(weighted_moment(model, c, 2.0) == doctest::Approx(wm).epsilon(1e-12));
    CHECK(edge_mass(model, c) > 0.0);
    CHECK(edge_mass(model, c) < weighted_moment(model, c, 1.0));
}

TEST_CASE("energy identity in continuum mode on random constrained states") {
    const auto model = model_for(1.0, WeightMode::continuum);
    const auto eq = constrained_equilibrium(model);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = random_state(model, rng, 0.7);
        const auto e = energy_record(model, s, eq);
        const double d = s.theta - eq.theta;
        CHECK(std::abs(e.F - e.H - 0.5 * d * d) <= 1e-12);
        CHECK(e.F >= 0.0);
    }
}

TEST_CASE("free energy is minimal at the constrained equilibrium") {
    for (auto mode : {WeightMode::family, WeightMode::continuum}) {
        const auto model = model_for(third, mode);
        const auto eq = constrained_equilibrium(model);
        std::mt19937_64 rng(2);
        for (int trial = 0; trial < 100; ++trial)
            CHECK(energy_record(model, random_state(model, rng, 0.5), eq).F >= -1e-14);
    }
}

TEST_CASE("Pinsker and corollary bounds hold on random states") {
    const auto model = model_for(1.0);
    const auto eq = constrained_equilibrium(model);
    REQUIRE(eq.theta < 0.0);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = random_state(model, rng, 1.0);
        CHECK(pinsker_check(model, s, eq.theta, PinskerMode::full_line).satisfied);
        CHECK(pinsker_check(model, s, eq.theta, PinskerMode::truncated).satisfied);
        CHECK(corollary_bound_check(model, s, eq).satisfied);
    }
    const auto at_eq = make_state(model, eq.profile.c);
    const auto p = pinsker_check(model, at_eq, eq.theta, PinskerMode::full_line);
    CHECK(p.lhs < 1e-12);
    CHECK(p.rhs < 1e-12);
    CHECK_THROWS_AS(pinsker_check(model, at_eq, 0.1, PinskerMode::full_line), InvalidTheta);
}

TEST_CASE("omega weight bound for power laws") {
    // omega = W/(a W'^2) = (1+x)^{1-alpha} for the coarsening family
    const auto grid = uniform_grid(50.0, 500);
    const auto ok = omega_weight_check(CoefficientSpec::coarsening(third, third), grid, 2.0 / 3.0);
    CHECK(ok.satisfied);
    CHECK(ok.max_ratio <= 1.0 + 1e-12);
    CHECK(ok.c0 == doctest::Approx(1.0).epsilon(1e-9));
    const auto exact = omega_weight_check(CoefficientSpec::coarsening(1.0, third), grid, 0.0);
    CHECK(exact.max_ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("LSI constant: Gaussian plateau, exponential divergence") {
    const auto g = lsi_gaussian_preset();
    const auto gauss = lsi_constant(g.nu, g.mu, 6.0, 600);
    CHECK(gauss.grid_stable);
    CHECK_FALSE(gauss.diverging);
    CHECK(std::isfinite(gauss.profile.sup));
    CHECK(gauss.lower_bound() == doctest::Approx(gauss.upper_bound() / 4));
    const auto e = lsi_exponential_preset();
    const auto expo = lsi_constant(e.nu, e.mu, 200.0, 2000);
    CHECK(expo.diverging);
    CHECK(expo.tail_slope == doctest::Approx(1.0).epsilon(0.05));
    // closed form for nu = mu = e^{-x}: B(x) = (1 - e^{-x}) log(1 + e^{2+x})
    const auto p = lsi_profile(e.nu, e.mu, 10.0, 1000);
    for (std::size_t i = 100; i < p.x.size(); i += 150) {
        const double x = p.x[i];
        CHECK(p.B[i] == doctest::Approx((1 - std::exp(-x)) * std::log(1 + std::exp(2 + x))).epsilon(1e-6));
    }
}

TEST_CASE("LSI model preset is finite for a subcritical theta") {
    const auto m = lsi_model_preset(CoefficientSpec::coarsening(1.0, third), -0.3);
    const auto r = lsi_constant(m.nu, m.mu, 40.0, 800);
    CHECK(std::isfinite(r.profile.sup));
    CHECK(r.profile.sup > 0.0);
    CHECK_THROWS_AS(lsi_model_preset(CoefficientSpec::coarsening(1.0, third), 0.0), InvalidTheta);
}
