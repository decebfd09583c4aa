#include "rflab/harness.hpp"

#include "overloaded.hpp"
#include "rflab/error.hpp"
#include "rflab/random.hpp"
#include "rflab/rescale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace rflab {
namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string num(double v) { return fmt("%.6g", v); }

// Label for parameter values inside check names: 2 -> "2", -0.5 -> "-0.5".
std::string label(double v) { return fmt("%g", v); }

std::pair<Metric, ScalarField> perturb(const Metric& g, const ScalarField& f, double eps) {
    const ScalarField r = scalar_curvature(g);
    return std::visit(Overloaded{[&](const ConformalTorus& t) {
                                     ScalarField u = t.u();
                                     const ScalarField lap = laplace_beltrami(g, f);
                                     const ScalarField grad = gradient_norm_sq(g, f);
                                     ScalarField fe = f;
                                     for (std::size_t i = 0; i < u.size(); ++i) {
                                         u[i] -= 0.5 * eps * r[i];
                                         fe[i] += eps * (-lap[i] + grad[i] - r[i]);
                                     }
                                     return std::pair<Metric, ScalarField>(t.with_u(std::move(u)), std::move(fe));
                                 },
                                 [&](const RoundSphere& s) {
                                     ScalarField fe = f;
                                     fe[0] -= eps * r[0];
                                     return std::pair<Metric, ScalarField>(
                                         RoundSphere(s.n(), s.r2() - 2.0 * (s.n() - 1) * eps), std::move(fe));
                                 }},
                      g);
}

struct DlambdaErrors {
    double max_abs = 0.0;
    double max_rhs = 0.0;
    double max_pointwise_relative = 0.0;
    double noise = 0.0;
    std::size_t samples = 0;
};

DlambdaErrors dlambda_errors(const Trajectory& traj, double k, const SolverOptions& solver) {
    if (traj.states.size() < 3) throw InvalidArgument("dlambda check needs at least 3 states");
    MonitorOptions mo;
    mo.solver = solver;
    mo.weights = false;
    const MonitorResult mon = monitor(traj, k, mo);
    DlambdaErrors out;
    double max_lambda = 0.0;
    for (const auto& r : mon.spectra) max_lambda = std::max(max_lambda, std::abs(r.lambda));
    for (std::size_t i = 1; i + 1 < traj.states.size(); ++i) {
        const double fd = (mon.spectra[i + 1].lambda - mon.spectra[i - 1].lambda) / (2.0 * traj.dt);
        const double s = traj.rescaled() ? traj.s_samples[i] : 0.0;
        const double rhs = rhs_lambda(traj.states[i].metric, mon.spectra[i], k, s);
        const double diff = std::abs(fd - rhs);
        out.max_abs = std::max(out.max_abs, diff);
        out.max_rhs = std::max(out.max_rhs, std::abs(rhs));
        if (rhs != 0.0) out.max_pointwise_relative = std::max(out.max_pointwise_relative, diff / std::abs(rhs));
        ++out.samples;
    }
    // Rounding in lambda amplified by the difference quotient.
    out.noise = 1e-11 * (1.0 + max_lambda) / traj.dt;
    return out;
}

bool selected(const SuiteConfig& config, const std::string& name) {
    if (config.checks.empty()) return true;
    return std::any_of(config.checks.begin(), config.checks.end(),
                       [&](const std::string& p) { return name.compare(0, p.size(), p) == 0; });
}

// 1/250 of the time for r2' = -2(n-1) + (2s/n) r2 to reach zero (of r2 / (2(n-1))
// when it never does), so 200 steps cover 0.8 of the lifetime.
double sphere_step(const RoundSphere& g, double s) {
    const double c = 2.0 * (g.n() - 1);
    const double a = 2.0 * s / g.n();
    double life = g.r2() / c;
    if (a != 0.0 && c - a * g.r2() > 0.0) life = std::log(c / (c - a * g.r2())) / a;
    return life / 250.0;
}

CheckResult failure(const std::string& name, const std::string& why) {
    CheckResult r;
    r.name = name;
    r.passed = false;
    r.observed = std::numeric_limits<double>::quiet_NaN();
    r.details = why;
    return r;
}

}  // namespace

OrderFit fit_order(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size() || h.size() < 2) throw InvalidArgument("fit_order needs >= 2 matching levels");
    const std::size_t n = h.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(h[i] > 0.0) || !(err[i] > 0.0)) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
        x[i] = std::log(h[i]);
        y[i] = std::log(err[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    OrderFit fit;
    fit.slope = sxy / sxx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = y[i] - (my + fit.slope * (x[i] - mx));
            rss += e * e;
        }
        fit.uncertainty = std::sqrt(rss / (n - 2) / sxx);
    }
    return fit;
}

CheckResult check_first_variation(const Metric& g, const ScalarField& f, double k, const std::vector<double>& eps) {
    if (eps.empty()) throw InvalidArgument("first-variation check needs at least one eps");
    for (std::size_t i = 1; i < eps.size(); ++i)
        if (!(eps[i] < eps[i - 1])) throw InvalidArgument("eps sequence must be decreasing");
    CheckResult res;
    res.name = "first_variation";
    const double rhs = rhs_f_variation(g, f, k);
    std::vector<double> errs;
    for (double e : eps) {
        const auto [gp, fp] = perturb(g, f, e);
        const auto [gm, fm] = perturb(g, f, -e);
        const double fd = (F_k_forms(gp, fp, k).gradient_form - F_k_forms(gm, fm, k).gradient_form) / (2.0 * e);
        errs.push_back(rhs != 0.0 ? std::abs(fd - rhs) / std::abs(rhs) : std::abs(fd));
        res.extra["error_eps_" + fmt("%g", e)] = errs.back();
        res.extra["fd_eps_" + fmt("%g", e)] = fd;
    }
    res.expected = rhs;
    res.observed = errs.back();
    res.tolerance = 1e-4;
    res.extra["rhs"] = rhs;
    const bool vanishing = std::all_of(errs.begin(), errs.end(), [](double e) { return e <= 1e-12; });
    if (vanishing) {
        res.passed = true;
        res.details = "identity vanishes; finite differences at rounding level";
        return res;
    }
    const OrderFit fit = fit_order(eps, errs);
    res.extra["order"] = fit.slope;
    res.extra["order_uncertainty"] = fit.uncertainty;
    res.passed = errs.back() <= 1e-4 && fit.slope >= 1.8;
    res.details = "relative error " + num(errs.back()) + " at eps " + num(eps.back()) + ", order " + num(fit.slope) +
                  " +- " + num(fit.uncertainty);
    return res;
}

CheckResult check_dlambda_identity(const Trajectory& trajectory, double k, const SolverOptions& solver,
                                   double tolerance) {
    const DlambdaErrors e = dlambda_errors(trajectory, k, solver);
    CheckResult res;
    res.name = "dlambda_identity";
    res.observed = e.max_abs;
    res.expected = 0.0;
    res.tolerance = tolerance * e.max_rhs + e.noise;
    res.passed = res.observed <= res.tolerance;
    const double rel = e.max_rhs > 0.0 ? e.max_abs / e.max_rhs : e.max_abs;
    res.extra["relative_error"] = rel;
    res.extra["max_pointwise_relative_error"] = e.max_pointwise_relative;
    res.extra["max_rhs"] = e.max_rhs;
    res.extra["noise_allowance"] = e.noise;
    res.extra["interior_samples"] = static_cast<double>(e.samples);
    res.details = "max |dlambda/dt - rhs| / max |rhs| = " + num(rel) + " over " + std::to_string(e.samples) +
                  " interior states";
    return res;
}

CheckResult check_dlambda_convergence(const FlowState& initial, double T, double dt0, FlowKind kind,
                                      const SProvider& provider, double k, int levels, const SolverOptions& solver,
                                      double tolerance) {
    if (levels < 2) throw InvalidArgument("convergence check needs >= 2 levels");
    CheckResult res;
    res.name = "dlambda_convergence";
    std::vector<double> hs, errs;
    bool all_within = true;
    for (int level = 0; level < levels; ++level) {
        const double dt = dt0 / std::pow(2.0, level);
        const Trajectory traj = integrate(initial, T, dt, kind, provider);
        if (traj.truncated) throw BlowUp(traj.truncation_reason);
        const DlambdaErrors e = dlambda_errors(traj, k, solver);
        const double rel = e.max_rhs > 0.0 ? e.max_abs / e.max_rhs : e.max_abs;
        all_within = all_within && e.max_abs <= tolerance * e.max_rhs + e.noise;
        hs.push_back(dt);
        errs.push_back(rel);
        res.extra["relative_error_level_" + std::to_string(level)] = rel;
    }
    const OrderFit fit = fit_order(hs, errs);
    res.extra["order"] = fit.slope;
    res.extra["order_uncertainty"] = fit.uncertainty;
    res.observed = errs.back();
    res.expected = 0.0;
    res.tolerance = tolerance;
    res.passed = errs.back() <= tolerance && fit.slope >= 1.0;
    res.details = "finest relative error " + num(errs.back()) + ", order " + num(fit.slope) + " +- " +
                  num(fit.uncertainty) + (all_within ? "" : " (a coarse level exceeded the tolerance)");
    return res;
}

CheckResult check_monotone(const MonitorSeries& series, const MonotoneHypothesis& hypothesis, double solver_tolerance,
                           double terminal_einstein_residual) {
    CheckResult res;
    res.name = "monotone." + series.name;
    res.extra["hypothesis_measured"] = hypothesis.measured;
    res.extra["terminal_einstein_residual"] = terminal_einstein_residual;
    if (!hypothesis.satisfied) {
        res.skipped = true;
        res.passed = false;
        res.details = "hypothesis unmet: " + hypothesis.description + " (measured " + num(hypothesis.measured) + ")";
        return res;
    }
    if (series.values.size() < 2) throw InvalidArgument("monotonicity check needs at least two values");
    double worst = std::numeric_limits<double>::infinity();
    double worst_eps = 0.0;
    bool ok = true, strict = true;
    for (std::size_t i = 1; i < series.values.size(); ++i) {
        const double d = series.values[i] - series.values[i - 1];
        const double eps = monotonicity_epsilon(series.values[i], solver_tolerance);
        if (!(d >= -eps)) ok = false;
        if (!(d > 0.0)) strict = false;
        if (d < worst) {
            worst = d;
            worst_eps = eps;
        }
    }
    res.observed = worst;
    res.expected = 0.0;
    res.tolerance = worst_eps;
    res.passed = ok;
    res.extra["strict"] = strict ? 1.0 : 0.0;
    res.extra["steps"] = static_cast<double>(series.values.size() - 1);
    res.details = std::string(ok ? "nondecreasing" : "decreasing step found") + ", smallest increment " + num(worst) +
                  (strict ? ", strict" : ", not strict") + ", terminal Einstein residual " +
                  num(terminal_einstein_residual) + "; " + hypothesis.description;
    return res;
}

CheckResult check_correspondence(const FlowState& initial, double s, double T, double dt, double k,
                                 double metric_tolerance, const SolverOptions& solver) {
    if (s == 0.0 || !std::isfinite(s)) throw InvalidArgument("correspondence check needs a nonzero finite s");
    const int n = dimension(initial.metric);
    const Trajectory ricci = integrate(initial, T, dt, FlowKind::ricci);
    if (ricci.truncated) throw BlowUp(ricci.truncation_reason);
    // The rescaled metric shrinks by phi when s < 0; keep its step admissible.
    std::vector<double> times = ricci.times();
    for (double& t : times) t -= times.front();
    const RescaleMap map = build_map(n, std::vector<double>(times.size(), s), times);
    map.require_complete();
    const double dt_bar = dt * std::min(1.0, map.phi.back());
    const CorrespondenceReport rep = correspondence_check(ricci, s, dt_bar);

    CheckResult res;
    res.name = "correspondence";
    res.extra["metric_discrepancy"] = rep.max_error;

    // lambda(phi g) = lambda(g) / phi at the first, middle and last states.
    double lambda_err = 0.0;
    for (std::size_t i : {std::size_t{0}, ricci.states.size() / 2, ricci.states.size() - 1}) {
        const SpectralResult a = lowest_eigenpair(ricci.states[i].metric, k, solver);
        const SpectralResult b = lowest_eigenpair(to_rescaled(ricci.states[i].metric, std::nullopt, map.phi[i]).first,
                                                  k, solver);
        const double expect = a.lambda / map.phi[i];
        lambda_err = std::max(lambda_err, std::abs(b.lambda - expect) / std::max(std::abs(expect), 1e-300));
    }
    res.extra["lambda_scaling_error"] = lambda_err;

    // Wbar_k along the direct rescaled run.
    MonitorOptions mo;
    mo.solver = solver;
    const MonitorResult mon = monitor(rep.direct, k, mo);
    const auto& fbar = mon.get("F_k").values;
    MonitorSeries wbar{"W_bar_k", k, s, std::nullopt, {}};
    for (std::size_t i = 0; i < fbar.size(); ++i)
        wbar.values.push_back(w_bar_k(fbar[i], s, rep.direct.states[i].t, k, n));
    const CheckResult mono = check_monotone(wbar, {"s constant", s, true}, solver.tolerance);
    res.extra["w_bar_smallest_increment"] = mono.observed;

    const bool metric_ok = rep.max_error <= metric_tolerance;
    const bool lambda_ok = lambda_err <= 1e-8;
    res.observed = rep.max_error;
    res.expected = 0.0;
    res.tolerance = metric_tolerance;
    res.passed = metric_ok && lambda_ok && mono.passed;
    res.details = "metric discrepancy " + num(rep.max_error) + ", lambda scaling error " + num(lambda_err) +
                  ", W_bar_k " + (mono.passed ? "nondecreasing" : "decreasing") + " (smallest increment " +
                  num(mono.observed) + ")";
    return res;
}

CheckResult check_correspondence_convergence(const FlowState& initial, double s, double T, double dt0, int levels,
                                             double tolerance) {
    if (levels < 2) throw InvalidArgument("convergence check needs >= 2 levels");
    const int n = dimension(initial.metric);
    CheckResult res;
    res.name = "correspondence_convergence";
    std::vector<double> hs, errs;
    for (int level = 0; level < levels; ++level) {
        const double dt = dt0 / std::pow(2.0, level);
        const Trajectory ricci = integrate(initial, T, dt, FlowKind::ricci);
        if (ricci.truncated) throw BlowUp(ricci.truncation_reason);
        const double phi_end = 1.0 / (1.0 - 2.0 / n * s * (ricci.states.back().t - ricci.states.front().t));
        const CorrespondenceReport rep = correspondence_check(ricci, s, dt * std::min(1.0, phi_end));
        hs.push_back(dt);
        errs.push_back(rep.max_error);
        res.extra["discrepancy_level_" + std::to_string(level)] = rep.max_error;
    }
    const OrderFit fit = fit_order(hs, errs);
    res.extra["order"] = fit.slope;
    res.extra["order_uncertainty"] = fit.uncertainty;
    res.observed = errs.back();
    res.expected = 0.0;
    res.tolerance = tolerance;
    res.passed = errs.back() <= tolerance && fit.slope >= 2.0;
    res.details = "finest discrepancy " + num(errs.back()) + ", order " + num(fit.slope) + " +- " + num(fit.uncertainty);
    return res;
}

CheckResult check_gauss_bonnet(const Trajectory& trajectory, const std::string& name) {
    CheckResult res;
    res.name = name;
    double worst_ratio = 0.0;
    double worst = 0.0, worst_tol = 0.0;
    bool ok = true;
    for (const FlowState& st : trajectory.states) {
        if (!std::holds_alternative<ConformalTorus>(st.metric)) continue;
        const ScalarField r = scalar_curvature(st.metric);
        const double total = std::abs(integrate(st.metric, r));
        const double tol = 1e-8 * std::max(1.0, r.max_abs() * volume(st.metric));
        if (!(total <= tol)) ok = false;
        if (total / tol >= worst_ratio) {
            worst_ratio = total / tol;
            worst = total;
            worst_tol = tol;
        }
    }
    res.observed = worst;
    res.expected = 0.0;
    res.tolerance = worst_tol;
    res.passed = ok;
    res.details = "max |int R dmu| = " + num(worst) + " over " + std::to_string(trajectory.states.size()) + " states";
    return res;
}

RunReport run_suite(const SuiteConfig& config) {
    RunReport report;
    auto echo = [&](const std::string& k, const std::string& v) { report.config_echo.emplace_back(k, v); };
    auto join = [](const std::vector<double>& v) {
        std::string out;
        for (double x : v) out += (out.empty() ? "" : ",") + label(x);
        return out;
    };
    std::string fams, checks;
    for (const auto& f : config.families) fams += (fams.empty() ? "" : ",") + f;
    for (const auto& c : config.checks) checks += (checks.empty() ? "" : ",") + c;
    echo("families", fams);
    echo("k_values", join(config.k_values));
    echo("s_values", join(config.s_values));
    echo("grid", std::to_string(config.grid));
    echo("amplitude", fmt("%.17g", config.amplitude));
    echo("sphere_n", std::to_string(config.sphere_n));
    echo("sphere_r2", fmt("%.17g", config.sphere_r2));
    echo("steps", std::to_string(config.steps));
    echo("seed", std::to_string(config.seed));
    echo("checks", checks.empty() ? "all" : checks);
    echo("solver_tolerance", fmt("%.17g", config.solver.tolerance));
    echo("solver_max_iterations", std::to_string(config.solver.max_iterations));

    auto run = [&](const std::string& name, const std::function<CheckResult()>& fn) {
        if (!selected(config, name)) return;
        try {
            CheckResult r = fn();
            r.name = name;
            report.checks.push_back(std::move(r));
        } catch (const StabilityViolation& e) {
            report.checks.push_back(failure(name, std::string("stability violation: ") + e.what()));
            report.checks.back().extra["runtime_error"] = 1.0;
        } catch (const BlowUp& e) {
            report.checks.push_back(failure(name, std::string("blow-up: ") + e.what()));
            report.checks.back().extra["runtime_error"] = 1.0;
        } catch (const std::exception& e) {
            report.checks.push_back(failure(name, std::string("error: ") + e.what()));
        }
    };
    auto wants = [&](const std::string& prefix) {
        if (config.checks.empty()) return true;
        return std::any_of(config.checks.begin(), config.checks.end(), [&](const std::string& p) {
            const std::size_t m = std::min(p.size(), prefix.size());
            return p.compare(0, m, prefix, 0, m) == 0;
        });
    };
    const RandomStream root(config.seed, "suite");
    const double tol = config.solver.tolerance;

    for (const std::string& family : config.families) {
        if (family != "torus" && family != "sphere") {
            report.checks.push_back(failure("family." + family, "unknown metric family"));
            continue;
        }
        const bool torus = family == "torus";
        Metric g0 = RoundSphere(2, 1.0);
        double dt = 0.0;
        try {
            if (torus) {
                const double amp = config.amplitude;
                g0 = ConformalTorus::from_function(config.grid, config.grid, 1.0, 1.0, [amp](double x, double y) {
                    return amp * (std::sin(2 * std::numbers::pi * x) + 0.5 * std::cos(2 * std::numbers::pi * y));
                });
                dt = config.dt > 0.0 ? config.dt : 0.5 * cfl_bound(g0);
            } else {
                g0 = RoundSphere(config.sphere_n, config.sphere_r2);
                // 1/250 of the time to extinction, so 200 steps reach 0.8 of it.
                dt = sphere_step(std::get<RoundSphere>(g0), 0.0);
            }
        } catch (const std::exception& e) {
            report.checks.push_back(failure(family + ".setup", e.what()));
            continue;
        }
        const FlowState init{0.0, g0, std::nullopt};
        const int n = dimension(g0);
        const double T = config.steps * dt;
        echo(family + ".dt", fmt("%.17g", dt));
        echo(family + ".T", fmt("%.17g", T));

        // Trajectories are built lazily and shared between checks.
        std::map<std::string, Trajectory> trajs;
        auto trajectory = [&](const std::string& key, FlowKind kind, double s) -> const Trajectory& {
            auto it = trajs.find(key);
            if (it != trajs.end()) return it->second;
            // Sphere runs resolve their own extinction time.
            const double fdt = torus ? dt : sphere_step(std::get<RoundSphere>(g0), kind == FlowKind::ricci ? 0.0 : s);
            const double fT = config.steps * fdt;
            Trajectory t = integrate(init, fT, fdt, kind, provider::Constant{s});
            report.trajectory_summary.push_back(family + " " + key + ": " + std::to_string(t.states.size()) +
                                                " states, dt " + num(fdt) + ", T " + num(fT) +
                                                (t.truncated ? ", truncated: " + t.truncation_reason : ""));
            return trajs.emplace(key, std::move(t)).first->second;
        };
        auto flow_key = [](double s) { return s == 0.0 ? std::string("ricci") : "rescaled_s" + label(s); };
        auto flow_of = [&](double s) -> const Trajectory& {
            return trajectory(flow_key(s), s == 0.0 ? FlowKind::ricci : FlowKind::rescaled, s);
        };
        std::map<std::string, MonitorResult> monitors;
        auto monitored = [&](const std::string& key, const Trajectory& t, double k,
                             std::optional<double> tau0) -> const MonitorResult& {
            const std::string id = key + "|" + label(k) + "|" + (tau0 ? label(*tau0) : std::string("-"));
            auto it = monitors.find(id);
            if (it != monitors.end()) return it->second;
            MonitorOptions mo;
            mo.solver = config.solver;
            mo.tau0 = tau0;
            mo.weights = false;
            return monitors.emplace(id, monitor(t, k, mo)).first->second;
        };

        // Closed-form eigenvalue law on the sphere under Ricci flow.
        if (!torus) {
            for (double k : config.k_values) {
                run("eigenvalue_law.sphere.k" + label(k), [&] {
                    const Trajectory& t = flow_of(0.0);
                    const auto& sp0 = std::get<RoundSphere>(g0);
                    double worst = 0.0;
                    for (const FlowState& st : t.states) {
                        const double exact = k * n * (n - 1) / (sp0.r2() - 2.0 * (n - 1) * st.t);
                        const double lam = lowest_eigenpair(st.metric, k, config.solver).lambda;
                        worst = std::max(worst, std::abs(lam - exact) / exact);
                    }
                    CheckResult r;
                    r.observed = worst;
                    r.tolerance = 1e-10;
                    r.passed = worst <= 1e-10;
                    r.details = "max relative deviation from k n(n-1)/(r2_0 - 2(n-1)t) is " + num(worst);
                    return r;
                });
            }
        }

        for (double k : config.k_values) {
            run("first_variation." + family + ".k" + label(k), [&] {
                ScalarField f = constant_field(g0, std::log(volume(g0)));
                if (torus) {
                    RandomStream rng = root.split("first_variation").split(label(k));
                    f = random_smooth_field(std::get<ConformalTorus>(g0), rng, 2, 0.2);
                }
                return check_first_variation(g0, f, k);
            });
            run("scale_invariance." + family + ".k" + label(k), [&] {
                const double base = lambda_bar(g0, k, config.solver);
                double worst = 0.0;
                for (double c : {0.5, 2.0, 10.0})
                    worst = std::max(worst, std::abs(lambda_bar(scaled(g0, c), k, config.solver) - base) /
                                                std::max(std::abs(base), 1e-300));
                CheckResult r;
                r.observed = worst;
                r.tolerance = 1e-9;
                r.passed = worst <= 1e-9 || (base == 0.0 && worst == 0.0);
                r.details = "max relative change of lambda_bar over c in {0.5, 2, 10}: " + num(worst);
                return r;
            });
        }

        for (double s : config.s_values) {
            for (double k : config.k_values) {
                const std::string suffix = "." + family + ".k" + label(k) + ".s" + label(s);
                run("dlambda" + suffix, [&] { return check_dlambda_identity(flow_of(s), k, config.solver); });
                if (torus && s != 0.0) {
                    run("dlambda_order" + suffix, [&] {
                        return check_dlambda_convergence(init, 40 * dt, dt, FlowKind::rescaled, provider::Constant{s}, k,
                                                         3, config.solver);
                    });
                }
            }
        }

        for (double k : config.k_values) {
            const std::string kl = ".k" + label(k);
            if (wants("monotone.M1.ricci." + family) || wants("monotone.M4.ricci." + family)) {
                run("monotone.M1.ricci." + family + kl, [&] {
                    const Trajectory& t = flow_of(0.0);
                    const MonitorResult& m = monitored("ricci", t, k, std::nullopt);
                    return check_monotone(m.get("M1"), {"Ricci flow, k >= 1", k, k >= 1.0}, tol,
                                          einstein_residual(t.states.back().metric, 0.0));
                });
                run("monotone.M4.ricci." + family + kl, [&] {
                    const Trajectory& t = flow_of(0.0);
                    const MonitorResult& m = monitored("ricci", t, k, std::nullopt);
                    return check_monotone(m.get("M4"), {"Ricci flow, k >= 1", k, k >= 1.0}, tol,
                                          einstein_residual(t.states.back().metric, 0.0));
                });
            }
            for (double s : config.s_values) {
                if (s == 0.0) continue;
                const std::string sl = ".s" + label(s);
                run("monotone.M2.ricci." + family + kl + sl, [&] {
                    const double tau0 = -2.0 * n / s;
                    const Trajectory& t = flow_of(0.0);
                    if (!(tau0 > 0.0)) {
                        CheckResult r;
                        r.skipped = true;
                        r.details = "hypothesis unmet: tau0 = -2n/s must be positive (measured s " + num(s) + ")";
                        r.extra["hypothesis_measured"] = s;
                        return r;
                    }
                    const MonitorResult& m = monitored("ricci", t, k, tau0);
                    MonitorSeries series = m.get("M2");
                    return check_monotone(series, {"tau0 = -2n/s > 0", tau0, true}, tol,
                                          einstein_residual(t.states.back().metric, 0.0));
                });
                run("monotone.M1.rescaled." + family + kl + sl, [&] {
                    if (s > 0.0) return check_monotone({"M1", k, s, {}, {}}, {"s <= 0", s, false}, tol);
                    const Trajectory& t = flow_of(s);
                    const MonitorResult& m = monitored(flow_key(s), t, k, std::nullopt);
                    return check_monotone(m.get("M1"), {"s <= 0", s, true}, tol,
                                          einstein_residual(t.states.back().metric, s));
                });
                run("monotone.M3.rescaled." + family + kl + sl, [&] {
                    const Trajectory& t = flow_of(s);
                    const MonitorResult& m = monitored(flow_key(s), t, k, std::nullopt);
                    return check_monotone(m.get("M3"), {"s constant", s, true}, tol,
                                          einstein_residual(t.states.back().metric, s));
                });
            }
            run("monotone.M1.normalized." + family + kl, [&] {
                const Trajectory& t = trajectory("normalized", FlowKind::normalized, 0.0);
                double max_s = -std::numeric_limits<double>::infinity();
                for (double v : t.s_samples) max_s = std::max(max_s, v);
                // Gauss-Bonnet makes the average vanish on the torus; allow its
                // rounding-level residue.
                const double slack = torus ? 1e-8 : 0.0;
                const MonotoneHypothesis hyp{"average scalar curvature <= 0", max_s, max_s <= slack};
                if (!hyp.satisfied) return check_monotone({"M1", k, {}, {}, {}}, hyp, tol);
                const MonitorResult& m = monitored("normalized", t, k, std::nullopt);
                return check_monotone(m.get("M1"), hyp, tol, einstein_residual(t.states.back().metric, max_s));
            });
        }

        if (torus) {
            run("normalized.average_scalar.torus", [&] {
                const Trajectory& t = trajectory("normalized", FlowKind::normalized, 0.0);
                double worst = 0.0;
                for (double v : t.s_samples) worst = std::max(worst, std::abs(v));
                CheckResult r;
                r.observed = worst;
                r.tolerance = 1e-8;
                r.passed = worst <= 1e-8;
                r.details = "max |s| = " + num(worst);
                return r;
            });
            run("normalized.volume.torus", [&] {
                const Trajectory& t = trajectory("normalized", FlowKind::normalized, 0.0);
                const double v0 = volume(t.states.front().metric);
                double worst = 0.0;
                for (const auto& st : t.states) worst = std::max(worst, std::abs(volume(st.metric) - v0) / v0);
                CheckResult r;
                r.observed = worst;
                r.tolerance = 1e-6;
                r.passed = worst <= 1e-6;
                r.details = "max relative volume drift " + num(worst);
                return r;
            });
            run("forms.F_k.torus", [&] {
                RandomStream rng = root.split("forms.F_k");
                double worst = 0.0;
                for (int i = 0; i < 100; ++i) {
                    const ConformalTorus t = random_torus(config.grid, config.grid, 1.0, 1.0, rng, 3, 0.5);
                    const ScalarField f = random_smooth_field(t, rng, 3, 0.5);
                    const FkForms fk = F_k_forms(t, f, rng.uniform(1.0, 5.0));
                    worst = std::max(worst, std::abs(fk.gradient_form - fk.laplacian_form) / std::abs(fk.gradient_form));
                }
                CheckResult r;
                r.observed = worst;
                r.tolerance = 1e-9;
                r.passed = worst <= 1e-9;
                r.details = "max relative gradient-vs-Laplacian discrepancy over 100 inputs " + num(worst);
                return r;
            });
            run("forms.rescaled_F.torus", [&] {
                RandomStream rng = root.split("forms.rescaled_F");
                double worst = 0.0;
                for (int i = 0; i < 100; ++i) {
                    const ConformalTorus t = random_torus(config.grid, config.grid, 1.0, 1.0, rng, 3, 0.5);
                    ScalarField f = random_smooth_field(t, rng, 3, 0.5);
                    f += std::log(weighted_mass(t, f));
                    const double s = config.s_values[static_cast<std::size_t>(i) % config.s_values.size()];
                    const RescaledFForms forms = rhs_rescaled_F(t, f, rng.uniform(1.0, 5.0), s);
                    worst = std::max(worst, std::abs(forms.form_A - forms.form_B) / (1.0 + std::abs(forms.form_A)));
                }
                CheckResult r;
                r.observed = worst;
                r.tolerance = 1e-9;
                r.passed = worst <= 1e-9;
                r.details = "max |form_A - form_B| / (1 + |form_A|) over 100 unit-mass inputs " + num(worst);
                return r;
            });
        }

        for (double s : config.s_values) {
            if (s == 0.0) continue;
            const double k = config.k_values.empty() ? 1.0 : config.k_values.front();
            run("correspondence." + family + ".s" + label(s), [&] {
                const double t_end = torus ? T : std::min(T, 0.6 * config.sphere_r2 / (2.0 * (n - 1)));
                return check_correspondence(init, s, t_end, dt, k, 1e-6, config.solver);
            });
            if (torus) {
                run("correspondence_order.torus.s" + label(s), [&] {
                    // A coarse copy keeps the temporal discrepancy above rounding.
                    const double amp = config.amplitude;
                    const ConformalTorus coarse = ConformalTorus::from_function(8, 8, 1.0, 1.0, [amp](double x, double y) {
                        return amp * (std::sin(2 * std::numbers::pi * x) + 0.5 * std::cos(2 * std::numbers::pi * y));
                    });
                    const FlowState ci{0.0, coarse, std::nullopt};
                    const double cdt = 0.5 * cfl_bound(coarse);
                    return check_correspondence_convergence(ci, s, 64 * cdt, cdt, 3);
                });
            }
        }

        if (torus && wants("gauss_bonnet")) {
            for (double s : config.s_values) {
                run("gauss_bonnet.torus." + flow_key(s), [&] { return check_gauss_bonnet(flow_of(s), ""); });
            }
            run("gauss_bonnet.torus.normalized", [&] {
                return check_gauss_bonnet(trajectory("normalized", FlowKind::normalized, 0.0), "");
            });
        }

        for (const auto& [id, m] : monitors) {
            for (const auto& series : m.series) {
                MonitorSeries copy = series;
                copy.name = family + "." + id.substr(0, id.find('|')) + "." + series.name;
                report.series.push_back(std::move(copy));
            }
        }
    }

    report.passed = !report.checks.empty() &&
                    std::all_of(report.checks.begin(), report.checks.end(), [](const CheckResult& c) {
                        return c.passed || c.skipped;
                    });
    return report;
}

}  // namespace rflab
