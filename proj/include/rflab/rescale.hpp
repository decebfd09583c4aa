#pragma once

// Correspondence between Ricci flow g(t) and rescaled Ricci flow
//   gbar(tbar) = phi(t) g(t),   phi(t) = 1 / (1 - (2/n) int_0^t s),
//   tbar(t) = int_0^t phi,
// with the weight transformed as fbar = f + (n/2) ln phi so that
// e^{-fbar} dmubar = e^{-f} dmu. For constant s != 0 the expander time is
// tau(t) = -2n/s + t.

#include "rflab/flow.hpp"
#include "rflab/geometry.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rflab {

struct RescaleMap {
    int n = 2;
    std::vector<double> t;
    std::vector<double> s_history;
    /// Scale factor and reparameterized time, on the valid prefix of t.
    std::vector<double> phi;
    std::vector<double> t_bar;
    /// Present when s is a nonzero constant.
    std::optional<std::vector<double>> tau;
    /// Set when 1 - (2/n) int s reached <= 0; phi, t_bar, tau stop before it.
    bool truncated = false;
    std::string truncation_reason;

    std::size_t size() const { return phi.size(); }
    /// Throws DomainExhausted if the map is truncated.
    void require_complete() const;
};

/// Cumulative composite-Simpson integral of uniformly spaced samples (exact
/// for quadratics on every partial interval).
std::vector<double> cumulative_simpson(const std::vector<double>& f, double h);

/// Builds the map on a uniform time grid. Throws InvalidArgument if the grid
/// is not uniform or the sizes differ; a non-positive denominator truncates
/// the map (flagged) rather than throwing.
RescaleMap build_map(int n, const std::vector<double>& s_history, const std::vector<double>& t_grid);

/// tau = -2n/s + t.
double tau_of_t(int n, double s, double t);
/// The same tau reached through the scale factor, t = n (phi - 1) / (2 s phi).
double tau_of_phi(int n, double s, double phi);

/// (phi g, f + (n/2) ln phi). Throws InvalidArgument unless phi > 0.
std::pair<Metric, std::optional<ScalarField>> to_rescaled(const Metric& g, const std::optional<ScalarField>& f,
                                                          double phi);
/// Inverse of to_rescaled.
std::pair<Metric, std::optional<ScalarField>> from_rescaled(const Metric& gbar,
                                                            const std::optional<ScalarField>& fbar, double phi);

/// Max componentwise error of from_rescaled(to_rescaled(g, f)) against the
/// inputs: absolute in u and f, relative in r2.
double round_trip(const Metric& g, const std::optional<ScalarField>& f, double phi);

/// Metric discrepancy max |e^{2(u_a - u_b)} - 1| (torus) or |r2_a / r2_b - 1|.
double metric_discrepancy(const Metric& a, const Metric& b);

struct CorrespondenceReport {
    RescaleMap map;
    /// Direct rescaled run from the mapped initial state.
    Trajectory direct;
    /// Discrepancy at each direct-run time against the mapped Ricci states
    /// interpolated (cubic Lagrange in tbar).
    std::vector<double> errors;
    double max_error = 0.0;
};

/// Maps a Ricci-flow trajectory through (phi, tbar) for constant s, runs the
/// rescaled flow with step dt from the mapped initial state over the covered
/// tbar range, and compares. Throws InvalidArgument unless the trajectory is
/// a Ricci flow with at least 4 states, DomainExhausted if the map truncates.
CorrespondenceReport correspondence_check(const Trajectory& ricci, double s, double dt, const FlowOptions& options = {});

}  // namespace rflab
