#include "rflab/rescale.hpp"

#include "overloaded.hpp"
#include "rflab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace rflab {
namespace {

std::pair<Metric, std::optional<ScalarField>> apply_scale(const Metric& g, const std::optional<ScalarField>& f,
                                                          double phi, double sign) {
    if (!(phi > 0.0) || !std::isfinite(phi)) throw InvalidArgument("scale factor phi must be positive and finite");
    const double log_phi = std::log(phi);
    Metric out = std::visit(Overloaded{[&](const ConformalTorus& t) -> Metric {
                                           ScalarField u = t.u();
                                           u += sign * 0.5 * log_phi;
                                           return t.with_u(std::move(u));
                                       },
                                       [&](const RoundSphere& s) -> Metric {
                                           return RoundSphere(s.n(), sign > 0 ? s.r2() * phi : s.r2() / phi);
                                       }},
                            g);
    std::optional<ScalarField> fo;
    if (f) {
        require_field(g, *f, "rescaled weight");
        fo = *f;
        *fo += sign * 0.5 * dimension(g) * log_phi;
    }
    return {std::move(out), std::move(fo)};
}

ScalarField state_of(const Metric& g) {
    return std::visit(Overloaded{[](const ConformalTorus& t) { return t.u(); },
                                 [](const RoundSphere& s) { return ScalarField(1, s.r2()); }},
                      g);
}

Metric metric_from_state(const Metric& like, const ScalarField& x) {
    return std::visit(Overloaded{[&](const ConformalTorus& t) -> Metric { return t.with_u(x); },
                                 [&](const RoundSphere& s) -> Metric { return RoundSphere(s.n(), x[0]); }},
                      like);
}

bool uniform_grid(const std::vector<double>& t) {
    if (t.size() < 2) return true;
    const double h = t[1] - t[0];
    if (!(h > 0.0)) return false;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * h) return false;
    return true;
}

}  // namespace

void RescaleMap::require_complete() const {
    if (truncated) throw DomainExhausted(truncation_reason);
}

std::vector<double> cumulative_simpson(const std::vector<double>& f, double h) {
    std::vector<double> out(f.size(), 0.0);
    if (f.size() < 2) return out;
    if (f.size() == 2) {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    for (std::size_t i = 1; i < f.size(); ++i) {
        if (i % 2 == 0) {
            out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        } else if (i == 1) {
            out[i] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
        } else {
            out[i] = out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
        }
    }
    return out;
}

RescaleMap build_map(int n, const std::vector<double>& s_history, const std::vector<double>& t_grid) {
    if (n < 2) throw InvalidArgument("dimension must be >= 2");
    if (s_history.size() != t_grid.size() || t_grid.empty())
        throw InvalidArgument("s history and time grid must be non-empty and of equal length");
    if (!uniform_grid(t_grid)) throw InvalidArgument("time grid must be uniform and increasing");
    for (double s : s_history)
        if (!std::isfinite(s)) throw InvalidArgument("s history has a non-finite entry");

    RescaleMap map;
    map.n = n;
    map.t = t_grid;
    map.s_history = s_history;
    const double h = t_grid.size() > 1 ? t_grid[1] - t_grid[0] : 0.0;
    const std::vector<double> int_s = cumulative_simpson(s_history, h);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double den = 1.0 - 2.0 / n * int_s[i];
        if (!(den > 0.0)) {
            map.truncated = true;
            char buf[96];
            std::snprintf(buf, sizeof buf, "scale-factor denominator reached %.6g at t = %.6g", den, t_grid[i]);
            map.truncation_reason = buf;
            break;
        }
        map.phi.push_back(1.0 / den);
    }
    map.t_bar = cumulative_simpson(map.phi, h);

    const bool constant = std::all_of(s_history.begin(), s_history.end(), [&](double s) { return s == s_history[0]; });
    if (constant && s_history[0] != 0.0) {
        std::vector<double> tau(map.phi.size());
        for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = tau_of_t(n, s_history[0], t_grid[i]);
        map.tau = std::move(tau);
    }
    return map;
}

double tau_of_t(int n, double s, double t) { return -2.0 * n / s + t; }

double tau_of_phi(int n, double s, double phi) { return -2.0 * n / s + n * (phi - 1.0) / (2.0 * s * phi); }

std::pair<Metric, std::optional<ScalarField>> to_rescaled(const Metric& g, const std::optional<ScalarField>& f,
                                                          double phi) {
    return apply_scale(g, f, phi, 1.0);
}

std::pair<Metric, std::optional<ScalarField>> from_rescaled(const Metric& gbar,
                                                            const std::optional<ScalarField>& fbar, double phi) {
    return apply_scale(gbar, fbar, phi, -1.0);
}

double round_trip(const Metric& g, const std::optional<ScalarField>& f, double phi) {
    const auto [gb, fb] = to_rescaled(g, f, phi);
    const auto [g2, f2] = from_rescaled(gb, fb, phi);
    double err = std::visit(Overloaded{[&](const ConformalTorus& t) {
                                           const ScalarField& u2 = std::get<ConformalTorus>(g2).u();
                                           double m = 0.0;
                                           for (std::size_t i = 0; i < u2.size(); ++i)
                                               m = std::max(m, std::abs(u2[i] - t.u()[i]));
                                           return m;
                                       },
                                       [&](const RoundSphere& s) {
                                           return std::abs(std::get<RoundSphere>(g2).r2() - s.r2()) / s.r2();
                                       }},
                            g);
    if (f)
        for (std::size_t i = 0; i < f->size(); ++i) err = std::max(err, std::abs((*f2)[i] - (*f)[i]));
    return err;
}

double metric_discrepancy(const Metric& a, const Metric& b) {
    if (!same_shape(a, b)) throw InvalidArgument("metric_discrepancy: metrics live on different grids");
    return std::visit(Overloaded{[&](const ConformalTorus& ta) {
                                     const ScalarField& ub = std::get<ConformalTorus>(b).u();
                                     double m = 0.0;
                                     for (std::size_t i = 0; i < ub.size(); ++i)
                                         m = std::max(m, std::abs(std::expm1(2.0 * (ta.u()[i] - ub[i]))));
                                     return m;
                                 },
                                 [&](const RoundSphere& sa) {
                                     return std::abs(sa.r2() / std::get<RoundSphere>(b).r2() - 1.0);
                                 }},
                      a);
}

CorrespondenceReport correspondence_check(const Trajectory& ricci, double s, double dt, const FlowOptions& options) {
    if (ricci.kind != FlowKind::ricci) throw InvalidArgument("correspondence_check needs a Ricci-flow trajectory");
    if (ricci.states.size() < 4) throw InvalidArgument("correspondence_check needs at least 4 states");
    if (!std::isfinite(s)) throw InvalidArgument("s must be finite");
    const int n = dimension(ricci.states.front().metric);

    std::vector<double> times = ricci.times();
    for (double& t : times) t -= times.front();
    CorrespondenceReport report;
    report.map = build_map(n, std::vector<double>(times.size(), s), times);
    report.map.require_complete();
    const RescaleMap& map = report.map;

    std::vector<ScalarField> mapped;
    mapped.reserve(map.size());
    for (std::size_t i = 0; i < map.size(); ++i)
        mapped.push_back(state_of(to_rescaled(ricci.states[i].metric, std::nullopt, map.phi[i]).first));

    const double span = map.t_bar.back();
    const long steps = static_cast<long>(std::floor(span / dt + 1e-9));
    if (steps < 1) throw InvalidArgument("rescaled step larger than the covered tbar range");
    const FlowState init{0.0, metric_from_state(ricci.states.front().metric, mapped.front()), std::nullopt};
    report.direct = integrate(init, static_cast<double>(steps) * dt, dt, FlowKind::rescaled, provider::Constant{s}, options);

    const std::size_t m = map.size();
    for (const FlowState& st : report.direct.states) {
        const double tb = std::min(st.t, span);
        // Four-point stencil around tb, clamped to the data.
        const std::size_t hi = static_cast<std::size_t>(std::lower_bound(map.t_bar.begin(), map.t_bar.end(), tb) -
                                                        map.t_bar.begin());
        std::size_t start = hi >= 2 ? hi - 2 : 0;
        start = std::min(start, m - 4);
        ScalarField x(mapped.front().size(), 0.0);
        for (std::size_t a = start; a < start + 4; ++a) {
            double w = 1.0;
            for (std::size_t b = start; b < start + 4; ++b)
                if (b != a) w *= (tb - map.t_bar[b]) / (map.t_bar[a] - map.t_bar[b]);
            for (std::size_t j = 0; j < x.size(); ++j) x[j] += w * mapped[a][j];
        }
        const double e = metric_discrepancy(st.metric, metric_from_state(st.metric, x));
        report.errors.push_back(e);
        report.max_error = std::max(report.max_error, e);
    }
    return report;
}

}  // namespace rflab
