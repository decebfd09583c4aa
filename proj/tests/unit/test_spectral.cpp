#include "rflab/error.hpp"
#include "rflab/random.hpp"
#include "rflab/spectral.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using namespace rflab;
constexpr double kPi = std::numbers::pi;

ConformalTorus sinusoidal_torus(int n, double amp = 0.1) {
    return ConformalTorus::from_function(n, n, 1.0, 1.0, [amp](double x, double y) {
        return amp * std::sin(2 * kPi * x) + 0.5 * amp * std::cos(2 * kPi * y);
    });
}

double l2_norm_sq(const Metric& g, const ScalarField& u) { return integrate(g, hadamard(u, u)); }

TEST(Spectral, DenseOracleLaplacianMatchesFftLaplacian) {
    for (int n : {8, 9, 12, 15}) {
        RandomStream rng(17, "oracle-lap");
        const ConformalTorus t = random_torus(n, n + 1, 1.3, 0.8, rng, 3, 0.4);
        const Eigen::MatrixXd lap = oracle::dense_flat_laplacian(t);
        const ScalarField f = random_smooth_field(t, rng, 3, 1.0);
        const Eigen::VectorXd fv = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
        const Eigen::VectorXd dense = lap * fv;
        const auto fft = fourier::laplacian(t.grid(), f.view());
        for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(dense[static_cast<Eigen::Index>(i)], fft[i], 1e-9);
    }
}

TEST(Spectral, FlatTorusHasZeroEigenvalueAndConstantGroundState) {
    const Metric g = ConformalTorus::flat(16, 16, 2.0, 1.0);
    for (double k : {1.0, 2.5, 5.0}) {
        const SpectralResult r = lowest_eigenpair(g, k);
        EXPECT_NEAR(r.lambda, 0.0, 1e-12);
        for (double v : r.eigenfunction) EXPECT_NEAR(v, 1.0 / std::sqrt(volume(g)), 1e-10);
    }
}

TEST(Spectral, SphereGroundStateIsConstant) {
    const Metric g = RoundSphere(2, 1.0);
    const SpectralResult r = lowest_eigenpair(g, 2.0);
    EXPECT_DOUBLE_EQ(r.lambda, 4.0);
    EXPECT_NEAR(l2_norm_sq(g, r.eigenfunction), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(rayleigh_quotient(g, 1.0, constant_field(g, 3.0)), 2.0);
    EXPECT_NEAR(lambda_bar(g, 1.0), 8 * kPi, 1e-12);
    EXPECT_NEAR(lambda_bar(Metric(RoundSphere(2, 3.7)), 1.0), 8 * kPi, 1e-12);
}

TEST(Spectral, MatchesDenseEigensolveOnSinusoidalTorus) {
    const ConformalTorus t = sinusoidal_torus(32);
    for (double k : {1.0, 2.0}) {
        const SpectralResult r = lowest_eigenpair(t, k);
        const double dense = oracle::dense_lowest_eigenvalue(t, k);
        EXPECT_LE(std::abs(r.lambda - dense), 1e-8 * std::abs(dense)) << "k=" << k;
        EXPECT_LT(r.lambda, 0.0);
    }
}

TEST(Spectral, MatchesDenseEigensolveOnRandomMetrics) {
    RandomStream rng(23, "spectral-random");
    for (int trial = 0; trial < 5; ++trial) {
        const int nx = rng.uniform_int(8, 20), ny = rng.uniform_int(8, 20);
        const ConformalTorus t = random_torus(nx, ny, rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng, 3, 0.5);
        const double k = rng.uniform(1.0, 5.0);
        const SpectralResult r = lowest_eigenpair(t, k);
        const double dense = oracle::dense_lowest_eigenvalue(t, k);
        EXPECT_LE(std::abs(r.lambda - dense), 1e-8 * std::max(1.0, std::abs(dense))) << "trial " << trial;
    }
}

TEST(Spectral, EigenfunctionIsPositiveNormalizedAndConverged) {
    RandomStream rng(29, "eigenfunction");
    const Metric g = random_torus(24, 24, 1.0, 1.0, rng, 3, 0.5);
    const SpectralResult r = lowest_eigenpair(g, 2.0);
    EXPECT_GT(r.eigenfunction.min(), 0.0);
    EXPECT_NEAR(l2_norm_sq(g, r.eigenfunction), 1.0, 1e-10);
    EXPECT_LE(r.residual, SolverOptions{}.tolerance);
    EXPECT_NEAR(rayleigh_quotient(g, 2.0, r.eigenfunction), r.lambda, 1e-9 * (1.0 + std::abs(r.lambda)));
    // Pointwise eigen-equation.
    const ScalarField lu = apply_schrodinger(g, 2.0, r.eigenfunction);
    double err = 0.0;
    for (std::size_t i = 0; i < lu.size(); ++i) err = std::max(err, std::abs(lu[i] - r.lambda * r.eigenfunction[i]));
    EXPECT_LE(err, 1e-6 * (1.0 + std::abs(r.lambda)) * r.eigenfunction.max_abs());
}

TEST(Spectral, RayleighQuotientIsBoundedBelowByLambda) {
    RandomStream rng(31, "trial-fields");
    const ConformalTorus t = sinusoidal_torus(24, 0.3);
    const Metric g = t;
    const SpectralResult r = lowest_eigenpair(g, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        ScalarField u = random_smooth_field(t, rng, 4, 1.0);
        u += rng.uniform(-1.0, 1.5);
        EXPECT_GE(rayleigh_quotient(g, 3.0, u), r.lambda - 1e-9 * (1.0 + std::abs(r.lambda)));
    }
    const Metric flat = ConformalTorus::flat(16, 16);
    ScalarField pos = random_smooth_field(std::get<ConformalTorus>(flat), rng, 3, 0.5);
    pos += 1.0;
    EXPECT_GE(rayleigh_quotient(flat, 1.0, pos), 0.0);
    EXPECT_THROW(rayleigh_quotient(g, 1.0, constant_field(g, 0.0)), ZeroField);
}

TEST(Spectral, LambdaBarIsScaleInvariant) {
    RandomStream rng(37, "scale");
    const Metric g = random_torus(24, 24, 1.0, 1.5, rng, 3, 0.5);
    const double base = lambda_bar(g, 2.0);
    for (double c : {0.5, 2.0, 10.0}) {
        const Metric h = scaled(g, c);
        EXPECT_LE(std::abs(lambda_bar(h, 2.0) - base), 1e-9 * std::abs(base)) << "c=" << c;
        const double sphere = lambda_bar(Metric(RoundSphere(3, 2.0)), 2.0);
        EXPECT_LE(std::abs(lambda_bar(scaled(Metric(RoundSphere(3, 2.0)), c), 2.0) - sphere), 1e-12 * sphere);
    }
    EXPECT_EQ(lambda_bar(Metric(ConformalTorus::flat(16, 16)), 1.0), 0.0);
}

TEST(Spectral, SolveIsDeterministic) {
    const Metric g = sinusoidal_torus(24, 0.3);
    const SpectralResult a = lowest_eigenpair(g, 2.0), b = lowest_eigenpair(g, 2.0);
    EXPECT_EQ(a.lambda, b.lambda);
    EXPECT_EQ(a.eigenfunction, b.eigenfunction);
}

TEST(Spectral, ErrorsAreSignalled) {
    const Metric g = sinusoidal_torus(16, 0.3);
    EXPECT_THROW(lowest_eigenpair(g, 0.5), InvalidArgument);
    SolverOptions tight;
    tight.max_iterations = 1;
    tight.tolerance = 1e-14;
    EXPECT_THROW(lowest_eigenpair(g, 1.0, tight), SolverNoConvergence);
    SpectralResult bad = lowest_eigenpair(g, 1.0);
    bad.eigenfunction[5] = -1e-3;
    EXPECT_THROW(f_from_eigenfunction(bad), NonPositiveEigenfunction);
}

TEST(Spectral, EigenWeightRoundTrip) {
    RandomStream rng(41, "weight");
    const Metric g = random_torus(20, 20, 1.0, 1.0, rng, 3, 0.5);
    const SpectralResult r = lowest_eigenpair(g, 2.0);
    const ScalarField f = f_from_eigenfunction(r);
    double mass = 0.0;
    const ScalarField w = measure_weight(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_NEAR(std::exp(-0.5 * f[i]), r.eigenfunction[i], 1e-14 * r.eigenfunction[i] + 1e-300);
        mass += std::exp(-f[i]) * w[i];
    }
    EXPECT_NEAR(mass, 1.0, 1e-10);
    // Constant eigenfunction V^{-1/2} gives f = ln V.
    const Metric s = RoundSphere(2, 1.0);
    EXPECT_NEAR(f_from_eigenfunction(lowest_eigenpair(s, 1.0))[0], std::log(4 * kPi), 1e-14);
}

}  // namespace
