#include "rflab/spectral.hpp"

#include "overloaded.hpp"
#include "rflab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rflab {
namespace {

using Vec = Eigen::VectorXd;

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

// S = e^{-u} (-4 Lap0) e^{-u} + k R acting on y = B^{1/2} x (the hx hy factor
// cancels).
class SymmetrizedOperator {
public:
    SymmetrizedOperator(const ConformalTorus& torus, double k)
        : torus_(torus), potential_(torus.nodes()), emu_(torus.nodes()) {
        const ScalarField r = scalar_curvature(torus);
        for (std::size_t i = 0; i < torus.nodes(); ++i) {
            potential_[i] = k * r[i];
            emu_[i] = std::exp(-torus.u()[i]);
        }
        double mean_inv_conf = 0.0;
        for (std::size_t i = 0; i < torus.nodes(); ++i) mean_inv_conf += emu_[i] * emu_[i];
        mean_inv_conf /= static_cast<double>(torus.nodes());
        kinetic_scale_ = 4.0 * mean_inv_conf;
        const double lmax = std::max(torus.lx(), torus.ly());
        const double kmin = 2.0 * std::numbers::pi / lmax;
        shift_ = potential_.cwiseAbs().maxCoeff() + kinetic_scale_ * kmin * kmin;
    }

    Vec apply(const Vec& y) const {
        Vec z = emu_.cwiseProduct(y);
        const auto lap = fourier::laplacian(torus_.grid(), std::span<const double>(z.data(), z.size()));
        Vec out(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = -4.0 * emu_[i] * lap[i] + potential_[i] * y[i];
        return out;
    }

    // Constant-coefficient approximation (4 <e^{-2u}> |k|^2 + shift)^{-1}.
    Vec precondition(const Vec& r) const {
        const double a = kinetic_scale_, b = shift_;
        const auto out = fourier::apply_symbol(torus_.grid(), std::span<const double>(r.data(), r.size()),
                                               [a, b](double kx, double ky) { return 1.0 / (a * (kx * kx + ky * ky) + b); });
        return to_vec(out);
    }

private:
    const ConformalTorus& torus_;
    Vec potential_;
    Vec emu_;
    double kinetic_scale_ = 4.0;
    double shift_ = 1.0;
};

// Modified Gram-Schmidt with one reorthogonalization pass; columns whose norm
// collapses are dropped.
Eigen::MatrixXd orthonormalize(const std::vector<Vec>& columns) {
    std::vector<Vec> basis;
    for (const Vec& c : columns) {
        Vec v = c;
        const double n0 = v.norm();
        if (n0 == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& q : basis) v -= q.dot(v) * q;
        const double n1 = v.norm();
        if (n1 <= 1e-12 * n0) continue;
        basis.push_back(v / n1);
    }
    Eigen::MatrixXd q(columns.front().size(), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) q.col(static_cast<Eigen::Index>(j)) = basis[j];
    return q;
}

SpectralResult solve_torus(const ConformalTorus& torus, double k, const SolverOptions& options,
                           const std::optional<ScalarField>& guess) {
    const SymmetrizedOperator op(torus, k);
    const Eigen::Index n = static_cast<Eigen::Index>(torus.nodes());
    const double cell = torus.hx() * torus.hy();

    // y = e^{u} sqrt(cell) x
    Vec y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = guess ? (*guess)[static_cast<std::size_t>(i)] : 1.0;
        y[i] = std::exp(torus.u()[static_cast<std::size_t>(i)]) * std::sqrt(cell) * x;
    }
    if (y.norm() == 0.0) throw ZeroField("eigensolver initial guess is identically zero");
    y.normalize();
    Vec sy = op.apply(y);
    double lambda = y.dot(sy);
    Vec p;
    double residual = (sy - lambda * y).norm() / (1.0 + std::abs(lambda));
    int it = 0;
    for (; it < options.max_iterations && residual > options.tolerance; ++it) {
        const Vec r = sy - lambda * y;
        const Vec w = op.precondition(r);
        std::vector<Vec> cols{y, w};
        if (p.size() == n) cols.push_back(p);
        const Eigen::MatrixXd q = orthonormalize(cols);
        Eigen::MatrixXd sq(n, q.cols());
        for (Eigen::Index j = 0; j < q.cols(); ++j) sq.col(j) = op.apply(q.col(j));
        Eigen::MatrixXd h = q.transpose() * sq;
        h = 0.5 * (h + h.transpose()).eval();
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(h);
        const Vec c = ritz.eigenvectors().col(0);
        // The first basis column is y itself, so p collects the new directions.
        Vec cp = c;
        cp[0] = 0.0;
        p = q * cp;
        y = q * c;
        sy = sq * c;
        const double norm = y.norm();
        y /= norm;
        sy /= norm;
        lambda = y.dot(sy);
        residual = (sy - lambda * y).norm() / (1.0 + std::abs(lambda));
    }
    if (residual > options.tolerance)
        throw SolverNoConvergence("lowest_eigenpair: residual " + std::to_string(residual) + " above tolerance after " +
                                  std::to_string(it) + " iterations");

    // Final Rayleigh quotient from a fresh application.
    sy = op.apply(y);
    lambda = y.dot(sy);
    residual = (sy - lambda * y).norm() / (1.0 + std::abs(lambda));

    SpectralResult out;
    out.k = k;
    out.iterations = it;
    out.residual = residual;
    out.lambda = lambda;
    ScalarField x(static_cast<std::size_t>(n));
    double weighted_mean = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t s = static_cast<std::size_t>(i);
        x[s] = y[i] * std::exp(-torus.u()[s]) / std::sqrt(cell);
        weighted_mean += y[i] * std::exp(torus.u()[s]);
    }
    if (weighted_mean < 0.0) x *= -1.0;
    out.eigenfunction = std::move(x);
    return out;
}

}  // namespace

SpectralResult lowest_eigenpair(const Metric& g, double k, const SolverOptions& options,
                                const std::optional<ScalarField>& initial_guess) {
    if (!(k >= 1.0) || !std::isfinite(k)) throw InvalidArgument("lowest_eigenpair: k must be >= 1");
    if (initial_guess) require_field(g, *initial_guess, "lowest_eigenpair initial guess");
    return std::visit(Overloaded{[&](const ConformalTorus& t) { return solve_torus(t, k, options, initial_guess); },
                                 [&](const RoundSphere& s) {
                                     SpectralResult out;
                                     out.k = k;
                                     out.lambda = k * s.scalar_curvature();
                                     out.eigenfunction = ScalarField(1, 1.0 / std::sqrt(s.volume()));
                                     return out;
                                 }},
                      g);
}

ScalarField apply_schrodinger(const Metric& g, double k, const ScalarField& u) {
    ScalarField out = laplace_beltrami(g, u);
    out *= -4.0;
    const ScalarField r = scalar_curvature(g);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += k * r[i] * u[i];
    return out;
}

double rayleigh_quotient(const Metric& g, double k, const ScalarField& u) {
    require_field(g, u, "rayleigh_quotient");
    const ScalarField grad = gradient_norm_sq(g, u);
    const ScalarField r = scalar_curvature(g);
    const ScalarField w = measure_weight(g);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        num += (4.0 * grad[i] + k * r[i] * u[i] * u[i]) * w[i];
        den += u[i] * u[i] * w[i];
    }
    if (den == 0.0) throw ZeroField("rayleigh_quotient: field has zero L2 norm");
    return num / den;
}

double lambda_bar(const Metric& g, const SpectralResult& result) {
    return result.lambda * std::pow(volume(g), 2.0 / dimension(g));
}

double lambda_bar(const Metric& g, double k, const SolverOptions& options) {
    return lambda_bar(g, lowest_eigenpair(g, k, options));
}

ScalarField f_from_eigenfunction(const SpectralResult& result) {
    ScalarField f(result.eigenfunction.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = result.eigenfunction[i];
        if (!(v > 0.0))
            throw NonPositiveEigenfunction("eigenfunction value " + std::to_string(v) + " at node " + std::to_string(i));
        f[i] = -2.0 * std::log(v);
    }
    return f;
}

}  // namespace rflab
