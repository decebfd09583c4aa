#include "rflab/error.hpp"
#include "rflab/flow.hpp"
#include "rflab/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using namespace rflab;
constexpr double kPi = std::numbers::pi;

ConformalTorus sinusoidal_torus(int n, double amp) {
    return ConformalTorus::from_function(n, n, 1.0, 1.0, [amp](double x, double y) {
        return amp * std::sin(2 * kPi * x) + 0.5 * amp * std::cos(2 * kPi * y);
    });
}

const ScalarField& u_of(const FlowState& s) { return std::get<ConformalTorus>(s.metric).u(); }
double r2_of(const FlowState& s) { return std::get<RoundSphere>(s.metric).r2(); }

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

TEST(Flow, SProviders) {
    const FlowState flat{0.0, ConformalTorus::flat(16, 16), std::nullopt};
    EXPECT_EQ(s_value(provider::AverageScalar{}, flat), 0.0);
    const FlowState sphere{0.0, RoundSphere(2, 1.0), std::nullopt};
    EXPECT_DOUBLE_EQ(s_value(provider::AverageScalar{}, sphere), 2.0);
    EXPECT_DOUBLE_EQ(s_value(provider::Constant{-3.0}, sphere), -3.0);
    EXPECT_DOUBLE_EQ(s_value(provider::EigenNormalized{2.0}, sphere), 2.0);
    EXPECT_DOUBLE_EQ(s_value(provider::TestFunction{ScalarField(1, 0.7), 3.0}, sphere), 2.0);

    RandomStream rng(3, "providers");
    const ConformalTorus t = random_torus(24, 24, 1.0, 1.0, rng, 3, 0.5);
    const FlowState st{0.0, t, std::nullopt};
    const double avg = s_value(provider::AverageScalar{}, st);
    EXPECT_NEAR(s_value(provider::TestFunction{ScalarField(t.nodes(), 1.3), 2.0}, st), avg, 1e-12);
    // EigenNormalized equals the test-function quotient at phi = f_eig.
    const SpectralResult r = lowest_eigenpair(t, 2.0);
    const double eig = s_value(provider::EigenNormalized{2.0}, st, &r);
    EXPECT_DOUBLE_EQ(eig, r.lambda / 2.0);
    EXPECT_NEAR(s_value(provider::TestFunction{f_from_eigenfunction(r), 2.0}, st), eig, 1e-9 * (1 + std::abs(eig)));

    EXPECT_THROW(validate_provider(provider::Constant{std::nan("")}), InvalidArgument);
    ScalarField bad(4, 0.0);
    bad[1] = INFINITY;
    EXPECT_THROW(validate_provider(provider::TestFunction{bad, 1.0}), InvalidArgument);
}

TEST(Flow, RicciStepBasics) {
    const FlowState flat{0.0, ConformalTorus::flat(16, 16), std::nullopt};
    const double dt = 0.5 * cfl_bound(flat.metric);
    EXPECT_EQ(u_of(step_ricci(flat, dt)), u_of(flat));
    const FlowState sphere{0.0, RoundSphere(2, 1.0), std::nullopt};
    EXPECT_NEAR(r2_of(step_ricci(sphere, 0.1)), 0.8, 1e-15);
    EXPECT_THROW(step_ricci(FlowState{0.0, RoundSphere(2, 0.1), std::nullopt}, 0.1), BlowUp);
    EXPECT_THROW(step_ricci(flat, 2.0 * cfl_bound(flat.metric)), StabilityViolation);
}

TEST(Flow, MaxConformalFactorDecreasesUnderRicciFlow) {
    const FlowState init{0.0, sinusoidal_torus(32, 0.3), std::nullopt};
    const double dt = 0.5 * cfl_bound(init.metric);
    const Trajectory traj = integrate(init, 400 * dt, dt, FlowKind::ricci);
    ASSERT_EQ(traj.states.size(), 401u);
    for (std::size_t i = 1; i < traj.states.size(); ++i)
        EXPECT_LT(u_of(traj.states[i]).max_abs(), u_of(traj.states[i - 1]).max_abs()) << "step " << i;
}

TEST(Flow, RescaledStepOnFlatTorus) {
    const FlowState flat{0.0, ConformalTorus::flat(16, 16), std::nullopt};
    const double dt = 0.5 * cfl_bound(flat.metric);
    EXPECT_EQ(u_of(step_rescaled(flat, dt, provider::Constant{0.0})), u_of(flat));
    const FlowState next = step_rescaled(flat, dt, provider::Constant{-1.0});
    for (double v : u_of(next)) EXPECT_NEAR(v, -0.5 * dt, 1e-16);
    for (double r : scalar_curvature(next.metric)) EXPECT_EQ(r, 0.0);
}

TEST(Flow, NormalizedFlowPreservesVolumeAndFlattens) {
    RandomStream rng(5, "normalized");
    const FlowState init{0.0, random_torus(16, 16, 1.0, 1.0, rng, 2, 0.4), std::nullopt};
    const double dt = 0.5 * cfl_bound(init.metric);
    const double T = 1.0;
    const Trajectory traj = integrate(init, T, dt, FlowKind::normalized);
    ASSERT_FALSE(traj.truncated);
    const double v0 = volume(init.metric);
    for (const auto& st : traj.states) EXPECT_LE(std::abs(volume(st.metric) - v0) / v0, 1e-6);
    for (double s : traj.s_samples) EXPECT_LE(std::abs(s), 1e-8);
    EXPECT_LT(scalar_curvature(traj.states.back().metric).max_abs(), scalar_curvature(init.metric).max_abs());
}

TEST(Flow, IntegrateFlatAndSphere) {
    const FlowState flat{0.0, ConformalTorus::flat(8, 8), std::nullopt};
    const double dt = 0.5 * cfl_bound(flat.metric);
    const Trajectory tf = integrate(flat, 1.0, dt, FlowKind::ricci);
    EXPECT_EQ(tf.states.size(), static_cast<std::size_t>(std::ceil(1.0 / dt)) + 1);
    for (const auto& st : tf.states) EXPECT_EQ(u_of(st), u_of(flat));
    EXPECT_GE(tf.states.back().t, 1.0);

    const Trajectory ts = integrate(FlowState{0.0, RoundSphere(2, 1.0), std::nullopt}, 0.4, 0.01, FlowKind::ricci);
    ASSERT_EQ(ts.states.size(), 41u);
    EXPECT_NEAR(r2_of(ts.states.back()), 0.2, 1e-14);
    EXPECT_NEAR(ts.states.back().t, 0.4, 1e-15);
    for (std::size_t i = 1; i < ts.states.size(); ++i) EXPECT_GT(ts.states[i].t, ts.states[i - 1].t);
}

TEST(Flow, SphereBlowUpTruncatesTrajectory) {
    const Trajectory ts = integrate(FlowState{0.0, RoundSphere(2, 1.0), std::nullopt}, 0.7, 0.01, FlowKind::ricci);
    EXPECT_TRUE(ts.truncated);
    EXPECT_FALSE(ts.truncation_reason.empty());
    EXPECT_LT(ts.states.back().t, 0.5);
    EXPECT_GT(r2_of(ts.states.back()), 0.0);
}

TEST(Flow, RescaledSphereMatchesClosedForm) {
    for (double s : {-2.0, -1.0, 0.5, 3.0}) {
        const int n = 3;
        const double r20 = 1.5, a = 2 * s / n, b = 2.0 * (n - 1);
        const Trajectory t = integrate(FlowState{0.0, RoundSphere(n, r20), std::nullopt}, 0.3, 1e-3, FlowKind::rescaled,
                                       provider::Constant{s});
        for (const auto& st : t.states) {
            const double exact = b / a + (r20 - b / a) * std::exp(a * st.t);
            EXPECT_LE(std::abs(r2_of(st) - exact) / exact, 1e-8) << "s=" << s << " t=" << st.t;
        }
    }
    // Normalized flow on the sphere is stationary.
    const Trajectory norm = integrate(FlowState{0.0, RoundSphere(2, 2.0), std::nullopt}, 0.5, 0.01, FlowKind::normalized);
    EXPECT_NEAR(r2_of(norm.states.back()), 2.0, 1e-13);
}

TEST(Flow, TimeIntegratorConvergesAtFourthOrder) {
    // Coarse grid and a large amplitude keep the temporal error above rounding.
    const FlowState init{0.0, sinusoidal_torus(8, 0.5), std::nullopt};
    const double dt0 = cfl_bound(init.metric) * 0.9;
    const double T = 32 * dt0;
    const ScalarField ref = u_of(integrate(init, T, dt0 / 8, FlowKind::rescaled, provider::Constant{-1.0}).states.back());
    std::vector<double> hs, errs;
    for (int level = 0; level < 3; ++level) {
        const double dt = dt0 / (1 << level);
        const Trajectory t = integrate(init, T, dt, FlowKind::rescaled, provider::Constant{-1.0});
        hs.push_back(dt);
        errs.push_back(max_abs_diff(u_of(t.states.back()), ref));
    }
    EXPECT_GT(errs.back(), 1e-15);
    EXPECT_GE(oracle::loglog_slope(hs, errs), 2.0);
}

TEST(Flow, TrajectoriesAreBitwiseDeterministic) {
    const FlowState init{0.0, sinusoidal_torus(16, 0.3), std::nullopt};
    const double dt = 0.5 * cfl_bound(init.metric);
    const Trajectory a = integrate(init, 50 * dt, dt, FlowKind::rescaled, provider::EigenNormalized{2.0});
    const Trajectory b = integrate(init, 50 * dt, dt, FlowKind::rescaled, provider::EigenNormalized{2.0});
    ASSERT_EQ(a.states.size(), b.states.size());
    EXPECT_EQ(a.s_samples, b.s_samples);
    for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_EQ(u_of(a.states[i]), u_of(b.states[i]));
}

TEST(Flow, ConjugateSolveOnFlatTorusKeepsConstants) {
    const FlowState flat{0.0, ConformalTorus::flat(16, 16), std::nullopt};
    const double dt = 0.5 * cfl_bound(flat.metric);
    const Trajectory t = integrate(flat, 20 * dt, dt, FlowKind::ricci);
    const auto f = conjugate_f_solve(t, ScalarField(256, 0.7));
    ASSERT_EQ(f.size(), t.states.size());
    for (const auto& fi : f)
        for (double v : fi) EXPECT_NEAR(v, 0.7, 1e-14);
}

TEST(Flow, ConjugateSolveConservesWeightedMeasure) {
    RandomStream rng(13, "conjugate");
    const ConformalTorus t0 = random_torus(24, 24, 1.0, 1.0, rng, 3, 0.4);
    for (FlowKind kind : {FlowKind::ricci, FlowKind::rescaled}) {
        const FlowState init{0.0, t0, std::nullopt};
        const double dt = 0.5 * cfl_bound(init.metric);
        const Trajectory traj = integrate(init, 200 * dt, dt, kind, provider::Constant{-1.0});
        const ScalarField f_end = random_smooth_field(std::get<ConformalTorus>(traj.states.back().metric), rng, 3, 0.5);
        const auto f = conjugate_f_solve(traj, f_end);
        auto mass = [&](std::size_t i) {
            const ScalarField w = measure_weight(traj.states[i].metric);
            double m = 0.0;
            for (std::size_t j = 0; j < w.size(); ++j) m += std::exp(-f[i][j]) * w[j];
            return m;
        };
        const double m_end = mass(traj.states.size() - 1);
        for (std::size_t i = 0; i < traj.states.size(); ++i) EXPECT_LE(std::abs(mass(i) - m_end) / m_end, 1e-6);
    }
}

TEST(Flow, ConjugateSolveOnSphereMatchesQuadrature) {
    const Trajectory ricci = integrate(FlowState{0.0, RoundSphere(2, 1.0), std::nullopt}, 0.4, 1e-3, FlowKind::ricci);
    const auto f = conjugate_f_solve(ricci, ScalarField(1, 0.25));
    const double r2_end = r2_of(ricci.states.back());
    for (std::size_t i = 0; i < f.size(); ++i) {
        // f(t) = f(T) + int_t^T R = f(T) + (n/2) ln(r2(t) / r2(T)).
        const double exact = 0.25 + std::log(r2_of(ricci.states[i]) / r2_end);
        EXPECT_NEAR(f[i][0], exact, 1e-8);
    }

    const double s = -1.0, n = 2.0;
    const Trajectory resc = integrate(FlowState{0.0, RoundSphere(2, 1.0), std::nullopt}, 0.3, 1e-3, FlowKind::rescaled,
                                      provider::Constant{s});
    const auto g = conjugate_f_solve(resc, ScalarField(1, 0.0));
    // r2 = b/a + (r2_0 - b/a) e^{at} with a = 2s/n, b = 2(n-1); R = n(n-1)/r2.
    const double a = 2 * s / n, b = 2 * (n - 1), c = 1.0 - b / a;
    auto int_r = [&](double t) {
        // Antiderivative of n(n-1) / (b/a + c e^{at}).
        const double p = b / a;
        return n * (n - 1) / p * (t - std::log(p + c * std::exp(a * t)) / a);
    };
    const double t_end = resc.states.back().t;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double ti = resc.states[i].t;
        const double exact = (int_r(t_end) - int_r(ti)) - s * (t_end - ti);
        EXPECT_NEAR(g[i][0], exact, 1e-8) << "t=" << ti;
    }
}

TEST(Flow, ConjugateSolveRejectsBadInput) {
    const Trajectory t = integrate(FlowState{0.0, RoundSphere(2, 1.0), std::nullopt}, 0.1, 0.01, FlowKind::ricci);
    EXPECT_THROW(conjugate_f_solve(t, ScalarField(1, NAN)), InvalidArgument);
    EXPECT_THROW(conjugate_f_solve(t, ScalarField(3, 0.0)), InvalidMetric);
}

}  // namespace
