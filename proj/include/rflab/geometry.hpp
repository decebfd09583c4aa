#pragma once

// Compact Riemannian metrics in two families and the differential geometry
// needed on them.
//
//   ConformalTorus: g = e^{2u} (dx^2 + dy^2) on [0, Lx) x [0, Ly), periodic.
//     R   = -2 e^{-2u} Lap0 u
//     Ric = (R / 2) g
//     Lap_g f = e^{-2u} Lap0 f
//     dmu = e^{2u} dx dy, integrals are node sums with weight e^{2u} hx hy.
//
//   RoundSphere: the round metric of squared radius r2 on S^n, handled in
//     closed form. Fields on it are constants (one node whose weight is V).

#include "rflab/fields.hpp"
#include "rflab/fourier.hpp"

#include <functional>
#include <variant>

namespace rflab {

class ConformalTorus {
public:
    static constexpr int kMinNodes = 8;

    /// Throws InvalidMetric when nx, ny < 8, lengths are not positive, or u has
    /// the wrong size or a non-finite entry.
    ConformalTorus(int nx, int ny, double lx, double ly, ScalarField u);

    static ConformalTorus flat(int nx, int ny, double lx = 1.0, double ly = 1.0);

    /// u sampled from a function of (x, y).
    static ConformalTorus from_function(int nx, int ny, double lx, double ly,
                                        const std::function<double(double, double)>& u);

    int nx() const { return grid_.nx; }
    int ny() const { return grid_.ny; }
    double lx() const { return grid_.lx; }
    double ly() const { return grid_.ly; }
    double hx() const { return grid_.hx(); }
    double hy() const { return grid_.hy(); }
    std::size_t nodes() const { return grid_.nodes(); }
    const fourier::PeriodicGrid& grid() const { return grid_; }
    const ScalarField& u() const { return u_; }

    double x(int i) const { return i * hx(); }
    double y(int j) const { return j * hy(); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * grid_.nx + i; }

    /// Same grid, new conformal factor.
    ConformalTorus with_u(ScalarField u) const;

    /// Samples a function of (x, y) on this grid.
    ScalarField sample(const std::function<double(double, double)>& fn) const;

private:
    fourier::PeriodicGrid grid_;
    ScalarField u_;
};

class RoundSphere {
public:
    /// Throws InvalidMetric unless n >= 2 and r2 > 0 (finite).
    RoundSphere(int n, double r2);

    int n() const { return n_; }
    double r2() const { return r2_; }

    double scalar_curvature() const { return n_ * (n_ - 1) / r2_; }
    /// Ric = ricci_coefficient() * g.
    double ricci_coefficient() const { return (n_ - 1) / r2_; }
    double volume() const;

private:
    int n_;
    double r2_;
};

using Metric = std::variant<ConformalTorus, RoundSphere>;

/// Volume of the unit n-sphere S^n.
double unit_sphere_volume(int n);

int dimension(const Metric& g);
std::size_t node_count(const Metric& g);
bool same_shape(const Metric& a, const Metric& b);

ScalarField constant_field(const Metric& g, double value);

ScalarField scalar_curvature(const Metric& g);
SymTensorField ricci(const Metric& g);

ScalarField laplace_beltrami(const Metric& g, const ScalarField& f);
ScalarField gradient_norm_sq(const Metric& g, const ScalarField& f);
/// Pointwise <grad f, grad h>_g.
ScalarField gradient_inner(const Metric& g, const ScalarField& f, const ScalarField& h);
/// Covariant Hessian nabla_i nabla_j f.
SymTensorField hessian(const Metric& g, const ScalarField& f);

/// Node weights of dmu; they sum to the volume.
ScalarField measure_weight(const Metric& g);
double volume(const Metric& g);
/// Integral of a field against dmu.
double integrate(const Metric& g, const ScalarField& f);

/// T + c g.
SymTensorField add_metric_multiple(const Metric& g, const SymTensorField& t, double c);
/// g^{ik} g^{jl} T_ij T_kl.
ScalarField tensor_norm_sq(const Metric& g, const SymTensorField& t);
/// g^{ij} T_ij.
ScalarField tensor_trace(const Metric& g, const SymTensorField& t);

/// The homothetic metric c g (c > 0).
Metric scaled(const Metric& g, double c);

/// Throws InvalidMetric if the field does not live on the metric's nodes or
/// has a non-finite entry.
void require_field(const Metric& g, const ScalarField& f, const char* what);

}  // namespace rflab
