#pragma once

// Entropy-type functionals, the right-hand sides of their evolution
// identities, Einstein/soliton residuals, and monitored series along a
// trajectory. Tensor norms are metric norms |T|^2 = g^{ik} g^{jl} T_ij T_kl.

#include "rflab/fields.hpp"
#include "rflab/flow.hpp"
#include "rflab/geometry.hpp"
#include "rflab/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rflab {

/// int e^{-f} dmu.
double weighted_mass(const Metric& g, const ScalarField& f);

struct FkForms {
    /// int (k R + |grad f|^2) e^{-f} dmu
    double gradient_form = 0.0;
    /// int (k R + Lap f) e^{-f} dmu
    double laplacian_form = 0.0;
};

FkForms F_k_forms(const Metric& g, const ScalarField& f, double k);

/// Gradient form of F_k. Throws FormMismatch if the Laplacian form differs by
/// more than `tolerance` relative to the scale of the terms.
double F_k(const Metric& g, const ScalarField& f, double k, double tolerance = 1e-9);

/// tau^2 int [k (R + n / (2 tau)) + Lap f] e^{-f} dmu. Throws InvalidArgument
/// unless tau > 0.
double w_k(const Metric& g, const ScalarField& f, double tau, double k);

/// e^{-2 s tbar / n} (Fbar - k s).
double w_bar_k(double F_bar, double s, double t_bar, double k, int n);

/// 2 (k-1) int |Ric|^2 e^{-f} + 2 int |Ric + Hess f|^2 e^{-f}.
double rhs_f_variation(const Metric& g, const ScalarField& f, double k);

struct RescaledFForms {
    /// -(2s/n) F + 2(k-1) int |Ric|^2 e^{-f} + 2 int |Ric + Hess f|^2 e^{-f}
    double form_A = 0.0;
    /// (2s/n) F - 2ks^2/n + 2(k-1) int |Ric - (s/n) g|^2 e^{-f}
    ///   + 2 int |Ric + Hess f - (s/n) g|^2 e^{-f}
    double form_B = 0.0;
    double weighted_mass = 0.0;
};

/// Both forms of the F_k evolution under rescaled flow (n is the metric's
/// dimension). When int e^{-f} dmu = 1 (to 1e-12) the forms must agree to
/// 1e-9 (1 + |form_A|) or FormMismatch is thrown.
RescaledFForms rhs_rescaled_F(const Metric& g, const ScalarField& f, double k, double s);

/// (2s/n)(lambda - ks) + 2(k-1) int |Ric - (s/n) g|^2 e^{-f}
///   + 2 int |Ric + Hess f - (s/n) g|^2 e^{-f}, with f from the eigenfunction.
double rhs_lambda(const Metric& g, const SpectralResult& result, double k, double s);

/// 2(k-1) tau^2 int |Ric + g/(2 tau)|^2 e^{-f} + 2 tau^2 int |Ric + Hess f + g/(2 tau)|^2 e^{-f},
/// the derivative of w_k along Ricci flow with the conjugate weight and
/// dtau/dt = 1.
double rhs_w_variation(const Metric& g, const ScalarField& f, double tau, double k);

/// int |Ric - (s/n) g|^2 dmu / V.
double einstein_residual(const Metric& g, double s);
/// int |Ric + Hess f - (s/n) g|^2 e^{-f} dmu.
double soliton_residual(const Metric& g, const ScalarField& f, double s);

/// Tolerance for "nondecreasing": 1e-7 (1 + |value|) + 10 solver_tolerance.
double monotonicity_epsilon(double value, double solver_tolerance);

struct MonitorSeries {
    /// M1, M2, M3, M4, F_k or W_k.
    std::string name;
    double k = 1.0;
    /// s for M3 and tau0 for M2 / W_k, when applicable.
    std::optional<double> s;
    std::optional<double> tau0;
    std::vector<double> values;
};

struct MonitorOptions {
    /// tau(t) = tau0 + (t - t0). Defaults to -2n/s when a constant s < 0 is
    /// in effect, otherwise to 1.
    std::optional<double> tau0;
    /// s for M3. Defaults to the trajectory's constant s (0 for Ricci flow).
    std::optional<double> s;
    SolverOptions solver;
    /// Also evaluate F_k and W_k along the conjugate weight solved backward
    /// from the terminal eigen-weight.
    bool weights = true;
    FlowOptions flow;
};

struct MonitorResult {
    std::vector<SpectralResult> spectra;
    /// Conjugate weights aligned with the states (empty unless requested).
    std::vector<ScalarField> weights;
    double tau0 = 1.0;
    double s = 0.0;
    std::vector<MonitorSeries> series;

    const MonitorSeries& get(const std::string& name) const;
};

/// The trajectory's s if it is constant over all samples.
std::optional<double> constant_s(const Trajectory& trajectory);

/// M1 = lambda, M2 = tau^2 (lambda + k n / (2 tau)), M3 = e^{-2s(t-t0)/n}(lambda - ks),
/// M4 = lambda V^{2/n} at every state (warm-started eigensolves), plus F_k and
/// W_k when requested. W_k is NaN where tau <= 0.
MonitorResult monitor(const Trajectory& trajectory, double k, const MonitorOptions& options = {});

}  // namespace rflab
