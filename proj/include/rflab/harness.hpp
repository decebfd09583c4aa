#pragma once

// Verification experiments: finite-difference checks of the evolution
// identities, monotonicity scans, flow correspondence, convergence orders and
// the configurable suite that strings them together.

#include "rflab/flow.hpp"
#include "rflab/functionals.hpp"
#include "rflab/geometry.hpp"
#include "rflab/spectral.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rflab {

struct CheckResult {
    std::string name;
    bool passed = false;
    /// Hypothesis not met: never counted as a failure.
    bool skipped = false;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::string details;
    /// Supporting measurements (orders, per-level errors, hypothesis values;
    /// "runtime_error" = 1 when a stability violation or blow-up aborted it).
    std::map<std::string, double> extra;
};

struct OrderFit {
    double slope = 0.0;
    /// Standard error of the slope (0 for two levels).
    double uncertainty = 0.0;
};

/// Least-squares slope of log(err) against log(h); needs >= 2 levels with
/// positive errors.
OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& err);

/// Central differences of F_k along the coupled direction
///   delta u = -R/2 (delta g = -2 Ric), delta f = -Lap f + |grad f|^2 - R
/// (sphere: delta r2 = -2(n-1)), compared with rhs_f_variation. Passes if the
/// smallest-eps relative error is <= 1e-4 and the fitted order >= 1.8 (or all
/// errors are at rounding level for an identically vanishing identity).
CheckResult check_first_variation(const Metric& g, const ScalarField& f, double k,
                                  const std::vector<double>& eps = {1e-3, 5e-4, 2.5e-4});

/// Central difference of lambda(t) at the interior states against rhs_lambda
/// with the step's s. Relative error is measured against max |rhs| over the
/// trajectory. Passes if <= tolerance.
CheckResult check_dlambda_identity(const Trajectory& trajectory, double k, const SolverOptions& solver = {},
                                   double tolerance = 1e-3);

/// check_dlambda_identity on `levels` trajectories with dt0, dt0/2, ...;
/// passes if the finest error is <= tolerance and the fitted order >= 1.
CheckResult check_dlambda_convergence(const FlowState& initial, double T, double dt0, FlowKind kind,
                                      const SProvider& provider, double k, int levels = 3,
                                      const SolverOptions& solver = {}, double tolerance = 1e-3);

struct MonotoneHypothesis {
    std::string description;
    /// The measured quantity the hypothesis is about (e.g. s or average R).
    double measured = 0.0;
    bool satisfied = true;
};

/// Passes if every consecutive difference is >= -monotonicity_epsilon.
/// Skips (never fails) when the hypothesis is unmet. Records strictness and
/// the terminal Einstein residual.
CheckResult check_monotone(const MonitorSeries& series, const MonotoneHypothesis& hypothesis,
                           double solver_tolerance = 1e-9, double terminal_einstein_residual = 0.0);

/// Runs Ricci flow from `initial` for T with step dt, maps it through the
/// constant-s rescaling, and compares with a direct rescaled run: metric
/// discrepancy (<= metric_tolerance), lambda(gbar) = lambda(g)/phi
/// (<= 1e-8 relative), and Wbar_k nondecreasing along the direct run.
/// Throws InvalidArgument for s = 0, DomainExhausted if the map truncates.
CheckResult check_correspondence(const FlowState& initial, double s, double T, double dt, double k,
                                 double metric_tolerance = 1e-6, const SolverOptions& solver = {});

/// Metric discrepancy of the correspondence at dt0, dt0/2, ...; passes if the
/// finest is <= tolerance and the fitted order >= 2.
CheckResult check_correspondence_convergence(const FlowState& initial, double s, double T, double dt0, int levels = 3,
                                             double tolerance = 1e-6);

/// max_i |int R dmu| against 1e-8 max(1, ||R||_inf V) over a trajectory's torus
/// states (trivially satisfied on spheres, which are not tori).
CheckResult check_gauss_bonnet(const Trajectory& trajectory, const std::string& name);

struct SuiteConfig {
    /// Metric families to exercise: "torus", "sphere".
    std::vector<std::string> families{"torus", "sphere"};
    std::vector<double> k_values{1.0, 2.0, 5.0};
    std::vector<double> s_values{0.0, -1.0, -5.0};
    /// Torus grid and initial conformal factor amplitude.
    int grid = 32;
    double amplitude = 0.1;
    /// Sphere dimension and squared radius.
    int sphere_n = 2;
    double sphere_r2 = 1.0;
    int steps = 200;
    /// Fixed time step for the torus runs; 0 means half the CFL bound.
    double dt = 0.0;
    std::uint64_t seed = 1;
    /// Check-name prefixes to run; empty runs everything.
    std::vector<std::string> checks;
    SolverOptions solver;
};

struct RunReport {
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<std::string> trajectory_summary;
    std::vector<MonitorSeries> series;
    std::vector<CheckResult> checks;
    bool passed = false;
};

/// Executes the configured checks. Errors inside a check become failed
/// CheckResults; the report is always returned.
RunReport run_suite(const SuiteConfig& config);

}  // namespace rflab
