#include "rflab/functionals.hpp"

#include "rflab/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace rflab {
namespace {

// int field e^{-f} dmu
double weighted_integral(const Metric& g, const ScalarField& field, const ScalarField& f) {
    const ScalarField w = measure_weight(g);
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += field[i] * std::exp(-f[i]) * w[i];
    return sum;
}

// int |Ric + c g|^2 e^{-f} dmu and int |Ric + Hess f + c g|^2 e^{-f} dmu
struct SquareTerms {
    double ricci = 0.0;
    double soliton = 0.0;
};

SquareTerms square_terms(const Metric& g, const ScalarField& f, double c) {
    const SymTensorField ric = ricci(g);
    const SymTensorField a = add_metric_multiple(g, ric, c);
    const SymTensorField b = add_metric_multiple(g, ric + hessian(g, f), c);
    return {weighted_integral(g, tensor_norm_sq(g, a), f), weighted_integral(g, tensor_norm_sq(g, b), f)};
}

void require_k(double k) {
    if (!(k >= 1.0) || !std::isfinite(k)) throw InvalidArgument("k must be >= 1");
}

}  // namespace

double weighted_mass(const Metric& g, const ScalarField& f) {
    require_field(g, f, "weighted_mass");
    return weighted_integral(g, ScalarField(f.size(), 1.0), f);
}

FkForms F_k_forms(const Metric& g, const ScalarField& f, double k) {
    require_field(g, f, "F_k");
    const ScalarField r = scalar_curvature(g);
    const ScalarField grad = gradient_norm_sq(g, f);
    const ScalarField lap = laplace_beltrami(g, f);
    const ScalarField w = measure_weight(g);
    FkForms out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double e = std::exp(-f[i]) * w[i];
        out.gradient_form += (k * r[i] + grad[i]) * e;
        out.laplacian_form += (k * r[i] + lap[i]) * e;
    }
    return out;
}

double F_k(const Metric& g, const ScalarField& f, double k, double tolerance) {
    const FkForms forms = F_k_forms(g, f, k);
    // Relative to the size of the integrated terms, so that a functional that
    // vanishes by cancellation is not held to an absolute bound of zero.
    const ScalarField r = scalar_curvature(g);
    const ScalarField grad = gradient_norm_sq(g, f);
    double scale = 0.0;
    const ScalarField w = measure_weight(g);
    for (std::size_t i = 0; i < w.size(); ++i) scale += (k * std::abs(r[i]) + grad[i]) * std::exp(-f[i]) * w[i];
    scale = std::max({scale, std::abs(forms.gradient_form), std::numeric_limits<double>::min()});
    if (std::abs(forms.gradient_form - forms.laplacian_form) > tolerance * scale) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "F_k gradient form %.17g and Laplacian form %.17g disagree", forms.gradient_form,
                      forms.laplacian_form);
        throw FormMismatch(buf);
    }
    return forms.gradient_form;
}

double w_k(const Metric& g, const ScalarField& f, double tau, double k) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("w_k needs tau > 0");
    const int n = dimension(g);
    const FkForms forms = F_k_forms(g, f, k);
    return tau * tau * (forms.laplacian_form + k * n / (2.0 * tau) * weighted_mass(g, f));
}

double w_bar_k(double F_bar, double s, double t_bar, double k, int n) {
    return std::exp(-2.0 * s * t_bar / n) * (F_bar - k * s);
}

double rhs_f_variation(const Metric& g, const ScalarField& f, double k) {
    require_field(g, f, "rhs_f_variation");
    const SquareTerms sq = square_terms(g, f, 0.0);
    return 2.0 * (k - 1.0) * sq.ricci + 2.0 * sq.soliton;
}

RescaledFForms rhs_rescaled_F(const Metric& g, const ScalarField& f, double k, double s) {
    require_field(g, f, "rhs_rescaled_F");
    const int n = dimension(g);
    const double F = F_k_forms(g, f, k).gradient_form;
    const SquareTerms plain = square_terms(g, f, 0.0);
    const SquareTerms shifted = square_terms(g, f, -s / n);
    RescaledFForms out;
    out.weighted_mass = weighted_mass(g, f);
    out.form_A = -2.0 * s / n * F + 2.0 * (k - 1.0) * plain.ricci + 2.0 * plain.soliton;
    out.form_B = 2.0 * s / n * F - 2.0 * k * s * s / n + 2.0 * (k - 1.0) * shifted.ricci + 2.0 * shifted.soliton;
    if (std::abs(out.weighted_mass - 1.0) <= 1e-12 &&
        std::abs(out.form_A - out.form_B) > 1e-9 * (1.0 + std::abs(out.form_A))) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "rescaled F_k forms disagree: %.17g vs %.17g", out.form_A, out.form_B);
        throw FormMismatch(buf);
    }
    return out;
}

double rhs_lambda(const Metric& g, const SpectralResult& result, double k, double s) {
    const ScalarField f = f_from_eigenfunction(result);
    const int n = dimension(g);
    const SquareTerms sq = square_terms(g, f, -s / n);
    return 2.0 * s / n * (result.lambda - k * s) + 2.0 * (k - 1.0) * sq.ricci + 2.0 * sq.soliton;
}

double rhs_w_variation(const Metric& g, const ScalarField& f, double tau, double k) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("rhs_w_variation needs tau > 0");
    const SquareTerms sq = square_terms(g, f, 1.0 / (2.0 * tau));
    return tau * tau * (2.0 * (k - 1.0) * sq.ricci + 2.0 * sq.soliton);
}

double einstein_residual(const Metric& g, double s) {
    const int n = dimension(g);
    const SymTensorField t = add_metric_multiple(g, ricci(g), -s / n);
    return integrate(g, tensor_norm_sq(g, t)) / volume(g);
}

double soliton_residual(const Metric& g, const ScalarField& f, double s) {
    require_field(g, f, "soliton_residual");
    return square_terms(g, f, -s / dimension(g)).soliton;
}

double monotonicity_epsilon(double value, double solver_tolerance) {
    return 1e-7 * (1.0 + std::abs(value)) + 10.0 * solver_tolerance;
}

const MonitorSeries& MonitorResult::get(const std::string& name) const {
    for (const auto& s : series)
        if (s.name == name) return s;
    throw InvalidArgument("no monitored series named " + name);
}

std::optional<double> constant_s(const Trajectory& trajectory) {
    if (trajectory.kind == FlowKind::ricci) return 0.0;
    if (trajectory.s_samples.empty()) return std::nullopt;
    for (double s : trajectory.s_samples)
        if (s != trajectory.s_samples.front()) return std::nullopt;
    return trajectory.s_samples.front();
}

MonitorResult monitor(const Trajectory& trajectory, double k, const MonitorOptions& options) {
    require_k(k);
    if (trajectory.states.empty()) throw InvalidArgument("monitor needs a non-empty trajectory");
    const int n = dimension(trajectory.states.front().metric);
    const std::optional<double> s_const = constant_s(trajectory);

    MonitorResult out;
    out.s = options.s ? *options.s : s_const.value_or(0.0);
    if (options.tau0) {
        out.tau0 = *options.tau0;
    } else if (s_const && *s_const < 0.0) {
        out.tau0 = -2.0 * n / *s_const;
    } else {
        out.tau0 = 1.0;
    }

    const std::size_t count = trajectory.states.size();
    const double t0 = trajectory.states.front().t;
    std::optional<ScalarField> guess;
    out.spectra.reserve(count);
    for (const FlowState& st : trajectory.states) {
        SpectralResult r = lowest_eigenpair(st.metric, k, options.solver, guess);
        if (std::holds_alternative<ConformalTorus>(st.metric)) guess = r.eigenfunction;
        out.spectra.push_back(std::move(r));
    }

    MonitorSeries m1{"M1", k, std::nullopt, std::nullopt, {}};
    MonitorSeries m2{"M2", k, std::nullopt, out.tau0, {}};
    MonitorSeries m3{"M3", k, out.s, std::nullopt, {}};
    MonitorSeries m4{"M4", k, std::nullopt, std::nullopt, {}};
    for (std::size_t i = 0; i < count; ++i) {
        const double lambda = out.spectra[i].lambda;
        const double t = trajectory.states[i].t - t0;
        const double tau = out.tau0 + t;
        m1.values.push_back(lambda);
        m2.values.push_back(tau * tau * lambda + k * n * tau / 2.0);
        m3.values.push_back(std::exp(-2.0 * out.s * t / n) * (lambda - k * out.s));
        m4.values.push_back(lambda_bar(trajectory.states[i].metric, out.spectra[i]));
    }
    out.series = {m1, m2, m3, m4};

    if (options.weights) {
        out.weights = conjugate_f_solve(trajectory, f_from_eigenfunction(out.spectra.back()), options.flow);
        MonitorSeries fk{"F_k", k, std::nullopt, std::nullopt, {}};
        MonitorSeries wk{"W_k", k, std::nullopt, out.tau0, {}};
        for (std::size_t i = 0; i < count; ++i) {
            const Metric& g = trajectory.states[i].metric;
            const double tau = out.tau0 + (trajectory.states[i].t - t0);
            fk.values.push_back(F_k_forms(g, out.weights[i], k).gradient_form);
            wk.values.push_back(tau > 0.0 ? w_k(g, out.weights[i], tau, k) : std::nan(""));
        }
        out.series.push_back(std::move(fk));
        out.series.push_back(std::move(wk));
    }
    return out;
}

}  // namespace rflab
