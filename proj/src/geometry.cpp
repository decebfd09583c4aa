#include "rflab/geometry.hpp"

#include "rflab/error.hpp"
#include "overloaded.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rflab {
namespace {

ScalarField exp_scaled(const ScalarField& u, double factor) {
    ScalarField out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::exp(factor * u[i]);
    return out;
}

}  // namespace

ConformalTorus::ConformalTorus(int nx, int ny, double lx, double ly, ScalarField u)
    : grid_{nx, ny, lx, ly}, u_(std::move(u)) {
    if (nx < kMinNodes || ny < kMinNodes)
        throw InvalidMetric("torus grid needs nx, ny >= 8, got " + std::to_string(nx) + "x" + std::to_string(ny));
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw InvalidMetric("torus period lengths must be positive");
    if (u_.size() != grid_.nodes()) throw InvalidMetric("conformal factor size does not match grid");
    if (!u_.all_finite()) throw InvalidMetric("conformal factor has a non-finite entry");
}

ConformalTorus ConformalTorus::flat(int nx, int ny, double lx, double ly) {
    return ConformalTorus(nx, ny, lx, ly, ScalarField(static_cast<std::size_t>(nx) * ny, 0.0));
}

ConformalTorus ConformalTorus::from_function(int nx, int ny, double lx, double ly,
                                             const std::function<double(double, double)>& u) {
    ConformalTorus t = flat(nx, ny, lx, ly);
    return t.with_u(t.sample(u));
}

ConformalTorus ConformalTorus::with_u(ScalarField u) const {
    return ConformalTorus(grid_.nx, grid_.ny, grid_.lx, grid_.ly, std::move(u));
}

ScalarField ConformalTorus::sample(const std::function<double(double, double)>& fn) const {
    ScalarField out(nodes());
    for (int j = 0; j < ny(); ++j)
        for (int i = 0; i < nx(); ++i) out[index(i, j)] = fn(x(i), y(j));
    return out;
}

RoundSphere::RoundSphere(int n, double r2) : n_(n), r2_(r2) {
    if (n < 2) throw InvalidMetric("sphere dimension must be >= 2");
    if (!(r2 > 0.0) || !std::isfinite(r2)) throw InvalidMetric("sphere squared radius must be positive");
}

double RoundSphere::volume() const { return unit_sphere_volume(n_) * std::pow(r2_, 0.5 * n_); }

double unit_sphere_volume(int n) {
    const double half = 0.5 * (n + 1);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

int dimension(const Metric& g) {
    return std::visit(Overloaded{[](const ConformalTorus&) { return 2; },
                                 [](const RoundSphere& s) { return s.n(); }},
                      g);
}

std::size_t node_count(const Metric& g) {
    return std::visit(Overloaded{[](const ConformalTorus& t) { return t.nodes(); },
                                 [](const RoundSphere&) { return std::size_t{1}; }},
                      g);
}

bool same_shape(const Metric& a, const Metric& b) {
    if (a.index() != b.index()) return false;
    if (const auto* ta = std::get_if<ConformalTorus>(&a)) {
        const auto& tb = std::get<ConformalTorus>(b);
        return ta->nx() == tb.nx() && ta->ny() == tb.ny() && ta->lx() == tb.lx() && ta->ly() == tb.ly();
    }
    return std::get<RoundSphere>(a).n() == std::get<RoundSphere>(b).n();
}

ScalarField constant_field(const Metric& g, double value) { return ScalarField(node_count(g), value); }

void require_field(const Metric& g, const ScalarField& f, const char* what) {
    if (f.size() != node_count(g))
        throw InvalidMetric(std::string(what) + ": field size " + std::to_string(f.size()) +
                            " does not match metric nodes " + std::to_string(node_count(g)));
    if (!f.all_finite()) throw InvalidMetric(std::string(what) + ": field has a non-finite entry");
}

ScalarField scalar_curvature(const Metric& g) {
    return std::visit(Overloaded{[](const ConformalTorus& t) {
                                     const auto lap = fourier::laplacian(t.grid(), t.u().view());
                                     ScalarField r(t.nodes());
                                     for (std::size_t i = 0; i < r.size(); ++i)
                                         r[i] = -2.0 * std::exp(-2.0 * t.u()[i]) * lap[i];
                                     return r;
                                 },
                                 [](const RoundSphere& s) { return ScalarField(1, s.scalar_curvature()); }},
                      g);
}

SymTensorField ricci(const Metric& g) {
    return std::visit(Overloaded{[&](const ConformalTorus& t) {
                                     const ScalarField r = scalar_curvature(g);
                                     SymTensorField ric{ScalarField(t.nodes()), ScalarField(t.nodes(), 0.0),
                                                        ScalarField(t.nodes())};
                                     for (std::size_t i = 0; i < t.nodes(); ++i) {
                                         ric.xx[i] = 0.5 * r[i] * std::exp(2.0 * t.u()[i]);
                                         ric.yy[i] = ric.xx[i];
                                     }
                                     return ric;
                                 },
                                 [](const RoundSphere& s) {
                                     return SymTensorField{ScalarField(1, s.ricci_coefficient()), ScalarField(1, 0.0),
                                                           ScalarField(1, 0.0)};
                                 }},
                      g);
}

ScalarField laplace_beltrami(const Metric& g, const ScalarField& f) {
    require_field(g, f, "laplace_beltrami");
    return std::visit(Overloaded{[&](const ConformalTorus& t) {
                                     const auto lap = fourier::laplacian(t.grid(), f.view());
                                     ScalarField out(t.nodes());
                                     for (std::size_t i = 0; i < out.size(); ++i)
                                         out[i] = std::exp(-2.0 * t.u()[i]) * lap[i];
                                     return out;
                                 },
                                 [](const RoundSphere&) { return ScalarField(1, 0.0); }},
                      g);
}

ScalarField gradient_inner(const Metric& g, const ScalarField& f, const ScalarField& h) {
    require_field(g, f, "gradient_inner");
    require_field(g, h, "gradient_inner");
    return std::visit(Overloaded{[&](const ConformalTorus& t) {
                                     const fourier::DerivativeRequest req{.dx = true, .dy = true};
                                     const auto df = fourier::differentiate(t.grid(), f.view(), req);
                                     const auto dh = &f == &h ? df : fourier::differentiate(t.grid(), h.view(), req);
                                     ScalarField out(t.nodes());
                                     for (std::size_t i = 0; i < out.size(); ++i)
                                         out[i] = std::exp(-2.0 * t.u()[i]) * (df.dx[i] * dh.dx[i] + df.dy[i] * dh.dy[i]);
                                     return out;
                                 },
                                 [](const RoundSphere&) { return ScalarField(1, 0.0); }},
                      g);
}

ScalarField gradient_norm_sq(const Metric& g, const ScalarField& f) { return gradient_inner(g, f, f); }

SymTensorField hessian(const Metric& g, const ScalarField& f) {
    require_field(g, f, "hessian");
    return std::visit(
        Overloaded{[&](const ConformalTorus& t) {
                       // Christoffel symbols of e^{2u} delta:
                       //   Gamma^k_ij = delta_ik u_j + delta_jk u_i - delta_ij u_k
                       const auto df = fourier::differentiate(
                           t.grid(), f.view(), {.dx = true, .dy = true, .dxx = true, .dxy = true, .dyy = true});
                       const auto du = fourier::differentiate(t.grid(), t.u().view(), {.dx = true, .dy = true});
                       const std::size_t n = t.nodes();
                       SymTensorField h{ScalarField(n), ScalarField(n), ScalarField(n)};
                       for (std::size_t i = 0; i < n; ++i) {
                           const double ux = du.dx[i], uy = du.dy[i], fx = df.dx[i], fy = df.dy[i];
                           h.xx[i] = df.dxx[i] - ux * fx + uy * fy;
                           h.yy[i] = df.dyy[i] + ux * fx - uy * fy;
                           h.xy[i] = df.dxy[i] - (uy * fx + ux * fy);
                       }
                       return h;
                   },
                   [](const RoundSphere&) {
                       return SymTensorField{ScalarField(1, 0.0), ScalarField(1, 0.0), ScalarField(1, 0.0)};
                   }},
        g);
}

ScalarField measure_weight(const Metric& g) {
    return std::visit(Overloaded{[](const ConformalTorus& t) {
                                     ScalarField w = exp_scaled(t.u(), 2.0);
                                     w *= t.hx() * t.hy();
                                     return w;
                                 },
                                 [](const RoundSphere& s) { return ScalarField(1, s.volume()); }},
                      g);
}

double volume(const Metric& g) {
    double v = 0.0;
    for (double w : measure_weight(g)) v += w;
    return v;
}

double integrate(const Metric& g, const ScalarField& f) {
    if (f.size() != node_count(g)) throw InvalidMetric("integrate: field size does not match metric");
    const ScalarField w = measure_weight(g);
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * w[i];
    return sum;
}

SymTensorField add_metric_multiple(const Metric& g, const SymTensorField& t, double c) {
    return std::visit(Overloaded{[&](const ConformalTorus& tor) {
                                     SymTensorField out = t;
                                     for (std::size_t i = 0; i < tor.nodes(); ++i) {
                                         const double gi = c * std::exp(2.0 * tor.u()[i]);
                                         out.xx[i] += gi;
                                         out.yy[i] += gi;
                                     }
                                     return out;
                                 },
                                 [&](const RoundSphere&) {
                                     SymTensorField out = t;
                                     out.xx[0] += c;
                                     return out;
                                 }},
                      g);
}

ScalarField tensor_norm_sq(const Metric& g, const SymTensorField& t) {
    return std::visit(Overloaded{[&](const ConformalTorus& tor) {
                                     ScalarField out(tor.nodes());
                                     for (std::size_t i = 0; i < tor.nodes(); ++i) {
                                         const double inv = std::exp(-4.0 * tor.u()[i]);
                                         out[i] = inv * (t.xx[i] * t.xx[i] + 2.0 * t.xy[i] * t.xy[i] +
                                                         t.yy[i] * t.yy[i]);
                                     }
                                     return out;
                                 },
                                 [&](const RoundSphere& s) { return ScalarField(1, s.n() * t.xx[0] * t.xx[0]); }},
                      g);
}

ScalarField tensor_trace(const Metric& g, const SymTensorField& t) {
    return std::visit(Overloaded{[&](const ConformalTorus& tor) {
                                     ScalarField out(tor.nodes());
                                     for (std::size_t i = 0; i < tor.nodes(); ++i)
                                         out[i] = std::exp(-2.0 * tor.u()[i]) * (t.xx[i] + t.yy[i]);
                                     return out;
                                 },
                                 [&](const RoundSphere& s) { return ScalarField(1, s.n() * t.xx[0]); }},
                      g);
}

Metric scaled(const Metric& g, double c) {
    if (!(c > 0.0)) throw InvalidMetric("scale factor must be positive");
    return std::visit(Overloaded{[&](const ConformalTorus& t) -> Metric {
                                     ScalarField u = t.u();
                                     u += 0.5 * std::log(c);
                                     return t.with_u(std::move(u));
                                 },
                                 [&](const RoundSphere& s) -> Metric { return RoundSphere(s.n(), c * s.r2()); }},
                      g);
}

}  // namespace rflab
