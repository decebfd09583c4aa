#include "rflab/flow.hpp"

#include "overloaded.hpp"
#include "rflab/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace rflab {
namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void require_stable(const Metric& g, double dt, const FlowOptions& options) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive and finite");
    const double bound = cfl_bound(g, options);
    if (dt > bound * (1.0 + 1e-12))
        throw StabilityViolation("dt = " + fmt(dt) + " exceeds the stability bound " + fmt(bound));
}

void require_bounded(const Metric& g, const FlowOptions& options) {
    std::visit(Overloaded{[&](const ConformalTorus& t) {
                              const double m = t.u().all_finite() ? t.u().max_abs()
                                                                   : std::numeric_limits<double>::infinity();
                              if (!(m <= options.blowup_cap))
                                  throw BlowUp("max |u| = " + fmt(m) + " exceeds cap " + fmt(options.blowup_cap));
                          },
                          [](const RoundSphere&) {}},
               g);
}

// The metric with its state vector (u or r2) replaced. Sphere radii that are
// no longer positive raise BlowUp.
Metric with_state(const Metric& g, const ScalarField& x) {
    return std::visit(Overloaded{[&](const ConformalTorus& t) -> Metric {
                                     if (!x.all_finite()) throw BlowUp("conformal factor became non-finite");
                                     return t.with_u(x);
                                 },
                                 [&](const RoundSphere& s) -> Metric {
                                     if (!(x[0] > 0.0) || !std::isfinite(x[0]))
                                         throw BlowUp("sphere squared radius reached " + fmt(x[0]));
                                     return RoundSphere(s.n(), x[0]);
                                 }},
                      g);
}

ScalarField state_vector(const Metric& g) {
    return std::visit(Overloaded{[](const ConformalTorus& t) { return t.u(); },
                                 [](const RoundSphere& s) { return ScalarField(1, s.r2()); }},
                      g);
}

FlowState rk4_step(const FlowState& state, double dt, double s, const FlowOptions& options) {
    require_stable(state.metric, dt, options);
    const Metric& g = state.metric;
    const ScalarField x0 = state_vector(g);
    const ScalarField k1 = flow_velocity(g, s);
    const ScalarField k2 = flow_velocity(with_state(g, axpy(x0, 0.5 * dt, k1)), s);
    const ScalarField k3 = flow_velocity(with_state(g, axpy(x0, 0.5 * dt, k2)), s);
    const ScalarField k4 = flow_velocity(with_state(g, axpy(x0, dt, k3)), s);
    ScalarField x = x0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    FlowState out{state.t + dt, with_state(g, x), std::nullopt};
    require_bounded(out.metric, options);
    return out;
}

double test_function_quotient(const Metric& g, const ScalarField& phi, double k) {
    require_field(g, phi, "test function");
    const ScalarField r = scalar_curvature(g);
    const ScalarField grad = gradient_norm_sq(g, phi);
    const ScalarField w = measure_weight(g);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double e = std::exp(-phi[i]) * w[i];
        num += (k * r[i] + grad[i]) * e;
        den += e;
    }
    return num / (k * den);
}

}  // namespace

const char* to_string(FlowKind kind) {
    switch (kind) {
        case FlowKind::ricci: return "ricci";
        case FlowKind::rescaled: return "rescaled";
        case FlowKind::normalized: return "normalized";
    }
    return "unknown";
}

void validate_provider(const SProvider& provider) {
    std::visit(Overloaded{[](const provider::Constant& c) {
                              if (!std::isfinite(c.s0)) throw InvalidArgument("constant s must be finite");
                          },
                          [](const provider::AverageScalar&) {},
                          [](const provider::EigenNormalized& e) {
                              if (!(e.k >= 1.0) || !std::isfinite(e.k)) throw InvalidArgument("provider k must be >= 1");
                          },
                          [](const provider::TestFunction& tf) {
                              if (!tf.phi.all_finite()) throw InvalidArgument("test function must be finite");
                              if (!(tf.k >= 1.0) || !std::isfinite(tf.k)) throw InvalidArgument("provider k must be >= 1");
                          }},
               provider);
}

double s_value(const SProvider& provider, const FlowState& state, const SpectralResult* spectral,
               const SolverOptions& solver) {
    const Metric& g = state.metric;
    return std::visit(Overloaded{[](const provider::Constant& c) { return c.s0; },
                                 [&](const provider::AverageScalar&) { return integrate(g, scalar_curvature(g)) / volume(g); },
                                 [&](const provider::EigenNormalized& e) {
                                     if (spectral) return spectral->lambda / e.k;
                                     return lowest_eigenpair(g, e.k, solver).lambda / e.k;
                                 },
                                 [&](const provider::TestFunction& tf) { return test_function_quotient(g, tf.phi, tf.k); }},
                      provider);
}

double cfl_bound(const Metric& g, const FlowOptions& options) {
    return std::visit(Overloaded{[&](const ConformalTorus& t) {
                                     const double h = std::min(t.hx(), t.hy());
                                     return options.cfl_factor * h * h * std::exp(2.0 * t.u().min());
                                 },
                                 [](const RoundSphere&) { return std::numeric_limits<double>::infinity(); }},
                      g);
}

ScalarField flow_velocity(const Metric& g, double s) {
    return std::visit(Overloaded{[&](const ConformalTorus& t) {
                                     // (s - R) / 2 with R = -2 e^{-2u} Lap0 u.
                                     const auto lap = fourier::laplacian(t.grid(), t.u().view());
                                     ScalarField v(t.nodes());
                                     for (std::size_t i = 0; i < v.size(); ++i)
                                         v[i] = 0.5 * s + std::exp(-2.0 * t.u()[i]) * lap[i];
                                     return v;
                                 },
                                 [&](const RoundSphere& sp) {
                                     return ScalarField(1, -2.0 * (sp.n() - 1) + 2.0 * s / sp.n() * sp.r2());
                                 }},
                      g);
}

FlowState step_ricci(const FlowState& state, double dt, const FlowOptions& options) {
    if (const auto* sp = std::get_if<RoundSphere>(&state.metric)) {
        require_stable(state.metric, dt, options);
        const double r2 = sp->r2() - 2.0 * (sp->n() - 1) * dt;
        if (!(r2 > 0.0)) throw BlowUp("sphere squared radius reached " + fmt(r2));
        return FlowState{state.t + dt, RoundSphere(sp->n(), r2), std::nullopt};
    }
    return rk4_step(state, dt, 0.0, options);
}

FlowState step_rescaled(const FlowState& state, double dt, double s, const FlowOptions& options) {
    if (!std::isfinite(s)) throw InvalidArgument("normalization s must be finite");
    return rk4_step(state, dt, s, options);
}

FlowState step_rescaled(const FlowState& state, double dt, const SProvider& provider, const FlowOptions& options) {
    validate_provider(provider);
    return step_rescaled(state, dt, s_value(provider, state, nullptr, options.solver), options);
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t;
    t.reserve(states.size());
    for (const auto& s : states) t.push_back(s.t);
    return t;
}

Trajectory integrate(const FlowState& initial, double T, double dt, FlowKind kind, const SProvider& provider,
                     const FlowOptions& options) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("integration horizon T must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive and finite");
    const SProvider active = kind == FlowKind::normalized ? SProvider(provider::AverageScalar{}) : provider;
    validate_provider(active);
    require_bounded(initial.metric, options);

    // Tolerate T / dt landing a rounding error above an integer.
    const double ratio = T / dt;
    const double nearest = std::round(ratio);
    const long steps = std::abs(ratio - nearest) <= 1e-9 * nearest ? static_cast<long>(nearest)
                                                                    : static_cast<long>(std::ceil(ratio));

    Trajectory traj;
    traj.dt = dt;
    traj.kind = kind;
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.push_back(FlowState{initial.t, initial.metric, std::nullopt});

    std::optional<ScalarField> guess;
    auto sample_s = [&](const FlowState& st) -> double {
        if (kind == FlowKind::ricci) return 0.0;
        if (const auto* e = std::get_if<provider::EigenNormalized>(&active)) {
            const SpectralResult r = lowest_eigenpair(st.metric, e->k, options.solver, guess);
            if (std::holds_alternative<ConformalTorus>(st.metric)) guess = r.eigenfunction;
            return r.lambda / e->k;
        }
        return s_value(active, st, nullptr, options.solver);
    };

    for (long i = 0; i < steps; ++i) {
        const FlowState& cur = traj.states.back();
        const double s = sample_s(cur);
        traj.s_samples.push_back(s);
        try {
            FlowState next = kind == FlowKind::ricci ? step_ricci(cur, dt, options) : step_rescaled(cur, dt, s, options);
            next.t = initial.t + static_cast<double>(i + 1) * dt;
            traj.states.push_back(std::move(next));
        } catch (const BlowUp& e) {
            traj.truncated = true;
            traj.truncation_reason = "blow-up at t = " + fmt(cur.t) + ": " + e.what();
            break;
        }
    }
    // s at the last stored state (its step was never taken).
    traj.s_samples.push_back(sample_s(traj.states.back()));
    return traj;
}

Metric interpolate_metric(const Trajectory& trajectory, std::size_t i, double theta) {
    if (i + 1 >= trajectory.states.size()) throw InvalidArgument("interpolation interval out of range");
    const Metric& a = trajectory.states[i].metric;
    const Metric& b = trajectory.states[i + 1].metric;
    if (theta == 0.0) return a;
    if (theta == 1.0) return b;
    const double s = trajectory.rescaled() ? trajectory.s_samples[i] : 0.0;
    const double dt = trajectory.dt;
    const double t2 = theta * theta, t3 = t2 * theta;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const ScalarField xa = state_vector(a), xb = state_vector(b);
    const ScalarField va = flow_velocity(a, s), vb = flow_velocity(b, s);
    ScalarField x(xa.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = h00 * xa[j] + h10 * dt * va[j] + h01 * xb[j] + h11 * dt * vb[j];
    return with_state(a, x);
}

namespace {

// df/dt = -Lap f + |grad f|^2 - R + s
ScalarField conjugate_velocity(const Metric& g, const ScalarField& f, double s) {
    const ScalarField lap = laplace_beltrami(g, f);
    const ScalarField grad = gradient_norm_sq(g, f);
    const ScalarField r = scalar_curvature(g);
    ScalarField v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = -lap[i] + grad[i] - r[i] + s;
    return v;
}

}  // namespace

std::vector<ScalarField> conjugate_f_solve(const Trajectory& trajectory, const ScalarField& f_terminal,
                                           const FlowOptions& options) {
    if (trajectory.states.empty()) throw InvalidArgument("empty trajectory");
    if (!f_terminal.all_finite()) throw InvalidArgument("terminal weight must be finite");
    require_field(trajectory.states.back().metric, f_terminal, "conjugate_f_solve terminal weight");
    const std::size_t n = trajectory.states.size();
    std::vector<ScalarField> f(n);
    f[n - 1] = f_terminal;
    const double h = -trajectory.dt;
    for (std::size_t step = n - 1; step > 0; --step) {
        const std::size_t i = step - 1;
        const Metric& g1 = trajectory.states[step].metric;
        const Metric& g0 = trajectory.states[i].metric;
        require_stable(g1, trajectory.dt, options);
        require_stable(g0, trajectory.dt, options);
        const Metric gm = interpolate_metric(trajectory, i, 0.5);
        const double s = trajectory.rescaled() ? trajectory.s_samples[i] : 0.0;
        const ScalarField& y = f[step];
        const ScalarField k1 = conjugate_velocity(g1, y, s);
        const ScalarField k2 = conjugate_velocity(gm, axpy(y, 0.5 * h, k1), s);
        const ScalarField k3 = conjugate_velocity(gm, axpy(y, 0.5 * h, k2), s);
        const ScalarField k4 = conjugate_velocity(g0, axpy(y, h, k3), s);
        ScalarField next = y;
        for (std::size_t j = 0; j < next.size(); ++j) next[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        if (!next.all_finite()) throw BlowUp("conjugate weight became non-finite at t = " + fmt(trajectory.states[i].t));
        f[i] = std::move(next);
    }
    return f;
}

}  // namespace rflab
