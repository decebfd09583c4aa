#include "rflab/error.hpp"
#include "rflab/functionals.hpp"
#include "rflab/random.hpp"
#include "rflab/rescale.hpp"

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

// Shifts f so that int e^{-f} dmu = 1.
ScalarField unit_mass(const Metric& g, ScalarField f) {
    f += std::log(weighted_mass(g, f));
    return f;
}

TEST(Functionals, FkClosedForms) {
    const Metric flat = ConformalTorus::flat(16, 16);
    EXPECT_EQ(F_k(flat, constant_field(flat, 0.0), 2.0), 0.0);
    const Metric s = RoundSphere(2, 1.0);
    EXPECT_NEAR(F_k(s, constant_field(s, std::log(4 * kPi)), 3.0), 6.0, 1e-13);
}

TEST(Functionals, FkFormsAgreeOnRandomInputs) {
    RandomStream rng(3, "fk-forms");
    for (int trial = 0; trial < 10; ++trial) {
        const ConformalTorus t = random_torus(64, 64, 1.0, 1.0, rng, 3, 0.5);
        const ScalarField f = random_smooth_field(t, rng, 3, 0.5);
        const double k = rng.uniform(1.0, 5.0);
        const FkForms forms = F_k_forms(t, f, k);
        EXPECT_LE(std::abs(forms.gradient_form - forms.laplacian_form), 1e-9 * std::abs(forms.gradient_form));
        EXPECT_NO_THROW(F_k(t, f, k));
    }
}

TEST(Functionals, FkDetectsInconsistentForms) {
    // A single-node spike is not resolved; the two forms then differ.
    ConformalTorus t = ConformalTorus::flat(8, 8);
    ScalarField f(64, 0.0);
    f[9] = 3.0;
    EXPECT_THROW(F_k(t, f, 1.0), FormMismatch);
}

TEST(Functionals, WkExamplesAndRegrouping) {
    const Metric flat = ConformalTorus::flat(16, 16);
    EXPECT_NEAR(w_k(flat, constant_field(flat, 0.0), 2.0, 1.0), 2.0, 1e-14);
    const Metric s = RoundSphere(2, 1.0);
    EXPECT_NEAR(w_k(s, constant_field(s, std::log(4 * kPi)), 1.0, 1.0), 3.0, 1e-13);
    EXPECT_THROW(w_k(s, constant_field(s, 0.0), -1.0, 1.0), InvalidArgument);

    RandomStream rng(5, "wk");
    for (int trial = 0; trial < 5; ++trial) {
        const ConformalTorus t = random_torus(32, 32, 1.0, 1.0, rng, 3, 0.5);
        const ScalarField f = random_smooth_field(t, rng, 3, 0.5);
        const double tau = rng.uniform(0.2, 5.0), k = rng.uniform(1.0, 5.0);
        const double w = w_k(t, f, tau, k);
        const double regrouped = tau * tau * (F_k_forms(t, f, k).laplacian_form + k * 2 / (2 * tau) * weighted_mass(t, f));
        EXPECT_LE(std::abs(w - regrouped), 1e-12 * (1.0 + std::abs(w)));
    }
}

TEST(Functionals, WBarExamples) {
    EXPECT_DOUBLE_EQ(w_bar_k(1.5, -2.0, 0.0, 3.0, 2), 1.5 + 6.0);
    EXPECT_DOUBLE_EQ(w_bar_k(1.5, 0.0, 7.0, 3.0, 2), 1.5);
    EXPECT_DOUBLE_EQ(w_bar_k(-2.0, -1.0, 1.0, 2.0, 2), 0.0);
}

TEST(Functionals, FirstVariationRhs) {
    const Metric flat = ConformalTorus::flat(16, 16);
    EXPECT_EQ(rhs_f_variation(flat, constant_field(flat, 0.3), 3.0), 0.0);
    for (int n : {2, 3, 4}) {
        for (double k : {1.0, 2.0, 5.0}) {
            const double r2 = 1.7;
            const RoundSphere sp(n, r2);
            const Metric g = sp;
            const ScalarField f = constant_field(g, std::log(sp.volume()));
            const double expected = 2 * k * n * (n - 1.0) * (n - 1.0) / (r2 * r2);
            EXPECT_NEAR(rhs_f_variation(g, f, k), expected, 1e-12 * expected);
        }
    }
    RandomStream rng(7, "rhs-f");
    for (int trial = 0; trial < 5; ++trial) {
        const ConformalTorus t = random_torus(24, 24, 1.0, 1.0, rng, 3, 0.5);
        EXPECT_GE(rhs_f_variation(t, random_smooth_field(t, rng, 3, 1.0), rng.uniform(1.0, 5.0)), 0.0);
    }
}

TEST(Functionals, RescaledFormsAgree) {
    const Metric flat = ConformalTorus::flat(16, 16);
    const RescaledFForms flat_forms = rhs_rescaled_F(flat, constant_field(flat, 0.0), 1.0, -1.0);
    // Hand reduction: form_A = 0; form_B = -2ks^2/n + 2 (s/n)^2 n = -1 + 1 = 0.
    EXPECT_NEAR(flat_forms.form_A, 0.0, 1e-15);
    EXPECT_NEAR(flat_forms.form_B, 0.0, 1e-14);

    RandomStream rng(9, "rescaled-forms");
    for (int trial = 0; trial < 10; ++trial) {
        const ConformalTorus t = random_torus(48, 48, 1.0, 1.0, rng, 3, 0.5);
        const ScalarField f = unit_mass(t, random_smooth_field(t, rng, 3, 0.5));
        const double k = rng.uniform(1.0, 5.0), s = rng.uniform(-5.0, 2.0);
        const RescaledFForms forms = rhs_rescaled_F(t, f, k, s);
        EXPECT_LE(std::abs(forms.form_A - forms.form_B), 1e-9 * (1.0 + std::abs(forms.form_A)));
        const RescaledFForms zero = rhs_rescaled_F(t, f, k, 0.0);
        EXPECT_NEAR(zero.form_A, rhs_f_variation(t, f, k), 1e-12 * (1.0 + zero.form_A));
        EXPECT_NEAR(zero.form_B, rhs_f_variation(t, f, k), 1e-9 * (1.0 + zero.form_A));
    }
}

TEST(Functionals, LambdaRhs) {
    const Metric flat = ConformalTorus::flat(16, 16);
    EXPECT_NEAR(rhs_lambda(flat, lowest_eigenpair(flat, 2.0), 2.0, 0.0), 0.0, 1e-12);
    const Metric s = RoundSphere(2, 1.0);
    EXPECT_NEAR(rhs_lambda(s, lowest_eigenpair(s, 1.0), 1.0, 0.0), 4.0, 1e-13);
    // d/dt 2/(1-2t) at t = 0.
    const double h = 1e-4;
    const double fd = (2 / (1 - 2 * h) - 2 / (1 + 2 * h)) / (2 * h);
    EXPECT_NEAR(fd, 4.0, 1e-6);

    // s <= 0 with lambda <= k s keeps the right-hand side nonnegative.
    const ConformalTorus t = sinusoidal_torus(32, 0.2);
    const SpectralResult r = lowest_eigenpair(t, 2.0);
    const double s_eig = r.lambda / 2.0;
    ASSERT_LE(s_eig, 0.0);
    EXPECT_GE(rhs_lambda(t, r, 2.0, s_eig), 0.0);
}

TEST(Functionals, Residuals) {
    for (int n : {2, 3, 5}) {
        const RoundSphere sp(n, 2.3);
        EXPECT_LE(std::abs(einstein_residual(sp, sp.scalar_curvature())), 1e-14);
    }
    const Metric flat = ConformalTorus::flat(16, 16);
    EXPECT_EQ(einstein_residual(flat, 0.0), 0.0);
    EXPECT_EQ(soliton_residual(flat, constant_field(flat, 1.0), 0.0), 0.0);
    EXPECT_GT(einstein_residual(sinusoidal_torus(32, 0.1), 0.0), 0.0);
}

TEST(Functionals, EigenWeightRealizesLambda) {
    RandomStream rng(13, "variational");
    for (int trial = 0; trial < 3; ++trial) {
        const ConformalTorus t = random_torus(48, 48, 1.0, 1.0, rng, 3, 0.5);
        const double k = rng.uniform(1.0, 5.0);
        const SpectralResult r = lowest_eigenpair(t, k);
        const ScalarField f = f_from_eigenfunction(r);
        EXPECT_LE(std::abs(F_k(t, f, k) / weighted_mass(t, f) - r.lambda), 1e-8 * std::abs(r.lambda));
    }
}

TEST(Functionals, FkScalesUnderRescaling) {
    RandomStream rng(17, "fk-scale");
    const ConformalTorus t = random_torus(32, 32, 1.0, 1.0, rng, 3, 0.5);
    const ScalarField f = random_smooth_field(t, rng, 3, 0.5);
    const double base = F_k(t, f, 2.0);
    for (double phi : {0.5, 3.0}) {
        const auto [gb, fb] = to_rescaled(t, f, phi);
        EXPECT_LE(std::abs(phi * F_k(gb, *fb, 2.0) - base), 1e-10 * std::abs(base));
    }
}

TEST(Functionals, WVariationMatchesFiniteDifferenceAlongRicciFlow) {
    const FlowState init{0.0, sinusoidal_torus(32, 0.2), std::nullopt};
    const double dt = 0.5 * cfl_bound(init.metric);
    const Trajectory traj = integrate(init, 40 * dt, dt, FlowKind::ricci);
    RandomStream rng(19, "w-variation");
    const ScalarField f_end = random_smooth_field(std::get<ConformalTorus>(traj.states.back().metric), rng, 2, 0.3);
    const auto f = conjugate_f_solve(traj, f_end);
    const double tau0 = 0.7, k = 2.0;
    const std::size_t mid = 20;
    auto W = [&](std::size_t i) { return w_k(traj.states[i].metric, f[i], tau0 + traj.states[i].t, k); };
    const double fd = (W(mid + 1) - W(mid - 1)) / (2 * dt);
    const double rhs = rhs_w_variation(traj.states[mid].metric, f[mid], tau0 + traj.states[mid].t, k);
    EXPECT_LE(std::abs(fd - rhs), 1e-5 * std::abs(rhs));
}

TEST(Functionals, MonitorSeries) {
    const FlowState flat{0.0, ConformalTorus::flat(16, 16), std::nullopt};
    const double dt = 0.5 * cfl_bound(flat.metric);
    const MonitorResult mf = monitor(integrate(flat, 10 * dt, dt, FlowKind::ricci), 2.0);
    for (double v : mf.get("M1").values) EXPECT_NEAR(v, 0.0, 1e-12);
    for (double v : mf.get("M3").values) EXPECT_NEAR(v, 0.0, 1e-12);
    for (double v : mf.get("M4").values) EXPECT_NEAR(v, 0.0, 1e-12);
    const auto& m2 = mf.get("M2").values;
    for (std::size_t i = 1; i < m2.size(); ++i) EXPECT_GT(m2[i], m2[i - 1]);

    const Trajectory sphere = integrate(FlowState{0.0, RoundSphere(2, 1.0), std::nullopt}, 0.4, 0.01, FlowKind::ricci);
    const MonitorResult ms = monitor(sphere, 1.0);
    for (std::size_t i = 0; i < sphere.states.size(); ++i) {
        const double t = sphere.states[i].t;
        EXPECT_NEAR(ms.get("M1").values[i], 2 / (1 - 2 * t), 1e-10 * 2 / (1 - 2 * t));
        if (i > 0) EXPECT_GT(ms.get("M1").values[i], ms.get("M1").values[i - 1]);
    }

    const FlowState torus{0.0, sinusoidal_torus(24, 0.2), std::nullopt};
    const double dtt = 0.5 * cfl_bound(torus.metric);
    const Trajectory resc = integrate(torus, 100 * dtt, dtt, FlowKind::rescaled, provider::Constant{-1.0});
    const MonitorResult mr = monitor(resc, 2.0);
    EXPECT_DOUBLE_EQ(mr.tau0, 4.0);
    const auto& m3 = mr.get("M3").values;
    for (std::size_t i = 1; i < m3.size(); ++i)
        EXPECT_GE(m3[i] - m3[i - 1], -monotonicity_epsilon(m3[i], SolverOptions{}.tolerance));
    EXPECT_EQ(mr.get("F_k").values.size(), resc.states.size());
}

}  // namespace
