#include "rflab/harness.hpp"

#include "rflab/error.hpp"
#include "rflab/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace rflab {
namespace {

ConformalTorus sinusoidal(int n, double amp = 0.1) {
    return ConformalTorus::from_function(n, n, 1.0, 1.0, [amp](double x, double y) {
        return amp * (std::sin(2 * std::numbers::pi * x) + 0.5 * std::cos(2 * std::numbers::pi * y));
    });
}

TEST(FitOrder, RecoversExactPowerLaw) {
    const OrderFit fit = fit_order({1e-1, 5e-2, 2.5e-2}, {3e-2, 7.5e-3, 1.875e-3});
    EXPECT_NEAR(fit.slope, 2.0, 1e-12);
    EXPECT_NEAR(fit.uncertainty, 0.0, 1e-10);
}

TEST(FitOrder, RejectsMismatchedLevels) {
    EXPECT_THROW(fit_order({1.0, 0.5}, {1.0}), InvalidArgument);
    EXPECT_THROW(fit_order({1.0}, {1.0}), InvalidArgument);
}

TEST(FirstVariation, FlatTorusWithConstantWeightVanishes) {
    const ConformalTorus flat = ConformalTorus::flat(16, 16, 1.0, 1.0);
    const CheckResult r = check_first_variation(flat, constant_field(flat, 0.0), 1.0);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.expected, 0.0);
    EXPECT_EQ(r.observed, 0.0);
}

TEST(FirstVariation, SphereDerivativeIsFour) {
    const RoundSphere s(2, 1.0);
    const CheckResult r = check_first_variation(s, ScalarField(1, std::log(4 * std::numbers::pi)), 1.0);
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_NEAR(r.expected, 4.0, 1e-12);
    EXPECT_NEAR(r.extra.at("fd_eps_0.00025"), 4.0, 1e-6);
    EXPECT_GE(r.extra.at("order"), 1.8);
}

TEST(FirstVariation, RandomTorusMeetsTolerance) {
    RandomStream rng(7, "first_variation_test");
    const ConformalTorus t = random_torus(32, 32, 1.0, 1.0, rng, 2, 0.2);
    const ScalarField f = random_smooth_field(t, rng, 2, 0.2);
    const CheckResult r = check_first_variation(t, f, 2.0);
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_LE(r.observed, 1e-4);
    EXPECT_GE(r.extra.at("order"), 1.8);
}

TEST(FirstVariation, RejectsNonDecreasingEps) {
    const RoundSphere s(2, 1.0);
    EXPECT_THROW(check_first_variation(s, ScalarField(1, 0.0), 1.0, {1e-3, 1e-3}), InvalidArgument);
}

TEST(DlambdaIdentity, FlatTorusIsTrivial) {
    const FlowState init{0.0, ConformalTorus::flat(8, 8, 1.0, 1.0), std::nullopt};
    const Trajectory traj = integrate(init, 10 * 5e-4, 5e-4, FlowKind::ricci);
    const CheckResult r = check_dlambda_identity(traj, 1.0);
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_LE(r.observed, 1e-6);
}

TEST(DlambdaIdentity, SphereRateMatchesClosedForm) {
    const FlowState init{0.0, RoundSphere(2, 1.0), std::nullopt};
    const double dt = 1e-4;
    const Trajectory traj = integrate(init, 2 * dt, dt, FlowKind::ricci);
    const CheckResult r = check_dlambda_identity(traj, 1.0);
    EXPECT_TRUE(r.passed) << r.details;
    // d/dt 2/(1-2t) = 4/(1-2t)^2 at t = dt.
    EXPECT_NEAR(r.extra.at("max_rhs"), 4.0 / std::pow(1.0 - 2 * dt, 2), 1e-10);
    EXPECT_LE(r.extra.at("relative_error"), 1e-6);
}

TEST(DlambdaIdentity, SinusoidalTorusUnderRescaledFlow) {
    const ConformalTorus g = sinusoidal(16);
    const FlowState init{0.0, g, std::nullopt};
    const double dt = 0.5 * cfl_bound(g);
    const Trajectory traj = integrate(init, 30 * dt, dt, FlowKind::rescaled, provider::Constant{-1.0});
    const CheckResult r = check_dlambda_identity(traj, 2.0);
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_LE(r.extra.at("relative_error"), 1e-3);
}

TEST(DlambdaIdentity, ConvergesUnderRefinement) {
    const ConformalTorus g = sinusoidal(8, 0.3);
    const FlowState init{0.0, g, std::nullopt};
    const double dt = 0.5 * cfl_bound(g);
    const CheckResult r =
        check_dlambda_convergence(init, 16 * dt, dt, FlowKind::rescaled, provider::Constant{-1.0}, 1.0, 3);
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_GE(r.extra.at("order"), 1.0);
}

TEST(Monotone, FlatTorusConstantSeriesPasses) {
    const FlowState init{0.0, ConformalTorus::flat(8, 8, 1.0, 1.0), std::nullopt};
    const Trajectory traj = integrate(init, 5e-3, 5e-4, FlowKind::ricci);
    const MonitorResult m = monitor(traj, 1.0, {.weights = false});
    const CheckResult r = check_monotone(m.get("M1"), {"Ricci flow", 1.0, true}, 1e-9,
                                         einstein_residual(traj.states.back().metric, 0.0));
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_EQ(r.extra.at("terminal_einstein_residual"), 0.0);
}

TEST(Monotone, SphereSeriesIsStrict) {
    const FlowState init{0.0, RoundSphere(2, 1.0), std::nullopt};
    const Trajectory traj = integrate(init, 0.2, 0.01, FlowKind::ricci);
    const MonitorResult m = monitor(traj, 1.0, {.weights = false});
    const CheckResult r = check_monotone(m.get("M1"), {"Ricci flow", 1.0, true});
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.extra.at("strict"), 1.0);
}

TEST(Monotone, DecreasingSeriesFailsAndUnmetHypothesisSkips) {
    const MonitorSeries down{"M1", 1.0, std::nullopt, std::nullopt, {1.0, 0.9, 0.8}};
    const CheckResult bad = check_monotone(down, {"s <= 0", -1.0, true});
    EXPECT_FALSE(bad.passed);
    EXPECT_FALSE(bad.skipped);
    const CheckResult skip = check_monotone(down, {"s <= 0", 0.5, false});
    EXPECT_TRUE(skip.skipped);
    EXPECT_EQ(skip.extra.at("hypothesis_measured"), 0.5);
}

TEST(Monotone, ToleratesSolverNoise) {
    const MonitorSeries noisy{"M1", 1.0, std::nullopt, std::nullopt, {1.0, 1.0 - 1e-9, 1.0}};
    EXPECT_TRUE(check_monotone(noisy, {"", 0.0, true}).passed);
}

TEST(Correspondence, FlatTorusIsExactHomothety) {
    const FlowState init{0.0, ConformalTorus::flat(8, 8, 1.0, 1.0), std::nullopt};
    const CheckResult r = check_correspondence(init, -1.0, 0.05, 5e-4, 1.0, 1e-8);
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_LE(r.observed, 1e-8);
    EXPECT_LE(r.extra.at("lambda_scaling_error"), 1e-8);
}

TEST(Correspondence, SphereMatchesWithinTolerance) {
    const FlowState init{0.0, RoundSphere(2, 1.0), std::nullopt};
    const CheckResult r = check_correspondence(init, -2.0, 0.3, 1e-3, 1.0);
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_LE(r.observed, 1e-6);
}

TEST(Correspondence, SinusoidalTorusWBarNondecreasing) {
    const ConformalTorus g = sinusoidal(16);
    const FlowState init{0.0, g, std::nullopt};
    const double dt = 0.5 * cfl_bound(g);
    const CheckResult r = check_correspondence(init, -1.0, 40 * dt, dt, 1.0);
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_GE(r.extra.at("w_bar_smallest_increment"), 0.0);
}

TEST(Correspondence, RejectsZeroS) {
    const FlowState init{0.0, RoundSphere(2, 1.0), std::nullopt};
    EXPECT_THROW(check_correspondence(init, 0.0, 0.1, 1e-2, 1.0), InvalidArgument);
}

TEST(Correspondence, ConvergesAtSecondOrder) {
    const ConformalTorus g = sinusoidal(8, 0.4);
    const FlowState init{0.0, g, std::nullopt};
    const double dt = 0.5 * cfl_bound(g);
    const CheckResult r = check_correspondence_convergence(init, -1.0, 32 * dt, dt, 3);
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_GE(r.extra.at("order"), 2.0);
}

TEST(GaussBonnet, HoldsAlongTorusFlow) {
    const ConformalTorus g = sinusoidal(16, 0.3);
    const Trajectory traj = integrate({0.0, g, std::nullopt}, 10 * 0.5 * cfl_bound(g), 0.5 * cfl_bound(g),
                                      FlowKind::ricci);
    const CheckResult r = check_gauss_bonnet(traj, "gb");
    EXPECT_TRUE(r.passed) << r.details;
    EXPECT_EQ(r.name, "gb");
}

TEST(RunSuite, FilterSelectsExactlyTheSphereOracles) {
    SuiteConfig c;
    c.checks = {"eigenvalue_law.sphere"};
    const RunReport rep = run_suite(c);
    ASSERT_EQ(rep.checks.size(), 3u);
    for (const auto& ch : rep.checks) {
        EXPECT_EQ(ch.name.rfind("eigenvalue_law.sphere.k", 0), 0u);
        EXPECT_TRUE(ch.passed) << ch.details;
    }
    EXPECT_TRUE(rep.passed);
}

TEST(RunSuite, CflViolationIsSurfacedAndFails) {
    SuiteConfig c;
    c.families = {"torus"};
    c.checks = {"dlambda.torus.k1.s0", "forms.F_k"};
    c.grid = 16;
    c.dt = 1.0;
    const RunReport rep = run_suite(c);
    EXPECT_FALSE(rep.passed);
    bool surfaced = false;
    for (const auto& ch : rep.checks)
        if (!ch.passed && ch.details.find("stability") != std::string::npos) surfaced = true;
    EXPECT_TRUE(surfaced);
}

TEST(RunSuite, IsDeterministic) {
    SuiteConfig c;
    c.steps = 20;
    c.checks = {"first_variation", "forms", "monotone.M1.ricci.torus"};
    const RunReport a = run_suite(c);
    const RunReport b = run_suite(c);
    ASSERT_EQ(a.checks.size(), b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
        EXPECT_EQ(a.checks[i].name, b.checks[i].name);
        EXPECT_EQ(std::isnan(a.checks[i].observed), std::isnan(b.checks[i].observed));
        if (!std::isnan(a.checks[i].observed)) EXPECT_EQ(a.checks[i].observed, b.checks[i].observed);
        EXPECT_EQ(a.checks[i].details, b.checks[i].details);
        EXPECT_EQ(a.checks[i].passed, b.checks[i].passed);
    }
    EXPECT_EQ(a.config_echo, b.config_echo);
}

TEST(RunSuite, OverallPassRequiresEveryCheck) {
    SuiteConfig c;
    c.families = {"torus", "cube"};
    c.checks = {"forms.F_k"};
    const RunReport rep = run_suite(c);
    EXPECT_FALSE(rep.passed);
}

}  // namespace
}  // namespace rflab
