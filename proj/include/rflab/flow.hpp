#pragma once

// Ricci flow and rescaled Ricci flow on the metric families, with pluggable
// normalization s(t), and the backward solve of the conjugate weight equation
//   df/dt = -Lap f + |grad f|^2 - R (+ s for rescaled flows).
//
// Conformal torus (2D):  Ricci     du/dt = e^{-2u} Lap0 u
//                        rescaled  du/dt = (s - R) / 2
// Round sphere:          Ricci     r2' = -2(n-1)            (exact)
//                        rescaled  r2' = -2(n-1) + (2s/n) r2 (RK4)

#include "rflab/fields.hpp"
#include "rflab/geometry.hpp"
#include "rflab/spectral.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rflab {

struct FlowState {
    double t = 0.0;
    Metric metric;
    std::optional<ScalarField> f;
};

namespace provider {

/// s(t) = s0.
struct Constant {
    double s0 = 0.0;
};
/// s(t) = int R dmu / V (Hamilton's normalization; preserves volume).
struct AverageScalar {};
/// s(t) = lambda_k / k.
struct EigenNormalized {
    double k = 1.0;
};
/// s(t) = int (k R + |grad phi|^2) e^{-phi} dmu / (k int e^{-phi} dmu) for a
/// fixed test function phi.
struct TestFunction {
    ScalarField phi;
    double k = 1.0;
};

}  // namespace provider

using SProvider = std::variant<provider::Constant, provider::AverageScalar, provider::EigenNormalized,
                               provider::TestFunction>;

enum class FlowKind { ricci, rescaled, normalized };

const char* to_string(FlowKind kind);

struct FlowOptions {
    /// BlowUp when max |u| exceeds this.
    double blowup_cap = 20.0;
    /// Stability contract dt <= cfl_factor * h^2 * min e^{2u}.
    double cfl_factor = 0.2 / 4.0;
    SolverOptions solver;
};

/// Throws InvalidArgument for a non-finite Constant or TestFunction, or k < 1.
void validate_provider(const SProvider& provider);

/// Evaluates s for the current state. For EigenNormalized a spectral result
/// for the state's metric may be supplied; otherwise one is computed.
double s_value(const SProvider& provider, const FlowState& state, const SpectralResult* spectral = nullptr,
               const SolverOptions& solver = {});

/// Largest admissible time step for a metric (infinity on the sphere).
double cfl_bound(const Metric& g, const FlowOptions& options = {});

/// Flow velocity with normalization s (s = 0 is Ricci flow): du/dt on the
/// torus, d(r2)/dt on the sphere.
ScalarField flow_velocity(const Metric& g, double s);

/// Throws StabilityViolation (dt above the CFL bound) or BlowUp.
FlowState step_ricci(const FlowState& state, double dt, const FlowOptions& options = {});
/// One RK4 step with s sampled at the step's start.
FlowState step_rescaled(const FlowState& state, double dt, const SProvider& provider,
                        const FlowOptions& options = {});
/// One RK4 step with a known s.
FlowState step_rescaled(const FlowState& state, double dt, double s, const FlowOptions& options = {});

struct Trajectory {
    std::vector<FlowState> states;
    /// s used on the step leaving each state (0 for Ricci flow); the value at
    /// the final state is sampled there as well.
    std::vector<double> s_samples;
    double dt = 0.0;
    FlowKind kind = FlowKind::ricci;
    bool truncated = false;
    std::string truncation_reason;

    std::vector<double> times() const;
    /// The flow adds s to the conjugate equation (rescaled and normalized).
    bool rescaled() const { return kind != FlowKind::ricci; }
};

/// Integrates N = ceil(T / dt) steps, storing N + 1 states starting with the
/// initial one at t_i = t0 + i dt. The normalized kind uses AverageScalar and
/// ignores `provider`; the ricci kind ignores it too. BlowUp truncates the
/// trajectory (flag and reason set) instead of throwing; StabilityViolation
/// propagates.
Trajectory integrate(const FlowState& initial, double T, double dt, FlowKind kind,
                     const SProvider& provider = provider::Constant{0.0}, const FlowOptions& options = {});

/// Integrates the conjugate weight equation backward from the final state of
/// the trajectory to its first one. Returns f(t_i) aligned with the states.
/// Throws InvalidArgument for a non-finite f_terminal, StabilityViolation if
/// the trajectory's dt exceeds a state's CFL bound, BlowUp on overflow.
std::vector<ScalarField> conjugate_f_solve(const Trajectory& trajectory, const ScalarField& f_terminal,
                                           const FlowOptions& options = {});

/// Metric at time t_i + theta dt (0 <= theta <= 1) by cubic Hermite
/// interpolation of u (or r2) and its flow velocity.
Metric interpolate_metric(const Trajectory& trajectory, std::size_t i, double theta);

}  // namespace rflab
