#pragma once

// Ground state of the Schrodinger-type operator L_k = -4 Lap_g + k R.
//
// The discrete problem is the symmetric generalized eigenproblem
//   A x = lambda B x,   A = 4 hx hy (-Lap0) + diag(k R e^{2u} hx hy),
//                       B = diag(e^{2u} hx hy),
// solved in the equivalent form S y = lambda y with S = B^{-1/2} A B^{-1/2}
// and y = B^{1/2} x. On the round sphere the ground state is the constant
// function with lambda = k R.

#include "rflab/fields.hpp"
#include "rflab/geometry.hpp"

#include <optional>

namespace rflab {

struct SolverOptions {
    /// Bound on ||S y - lambda y|| / (1 + |lambda|) with ||y|| = 1.
    double tolerance = 1e-9;
    int max_iterations = 4000;
};

struct SpectralResult {
    double lambda = 0.0;
    /// Positive ground state normalized to int u^2 dmu = 1.
    ScalarField eigenfunction;
    double k = 1.0;
    double residual = 0.0;
    int iterations = 0;
};

/// Throws InvalidArgument for k < 1 and SolverNoConvergence when the residual
/// bound is not met within max_iterations. `initial_guess`, if given, is a
/// nodal field used as the starting vector instead of the constant.
SpectralResult lowest_eigenpair(const Metric& g, double k, const SolverOptions& options = {},
                                const std::optional<ScalarField>& initial_guess = std::nullopt);

/// (-4 Lap_g + k R) u, with the Laplacian in the form used by the eigensolver.
ScalarField apply_schrodinger(const Metric& g, double k, const ScalarField& u);

/// int (4 |grad u|^2 + k R u^2) dmu / int u^2 dmu. Throws ZeroField when the
/// denominator vanishes.
double rayleigh_quotient(const Metric& g, double k, const ScalarField& u);

/// lambda_k V^{2/n}, invariant under g -> c g.
double lambda_bar(const Metric& g, double k, const SolverOptions& options = {});
double lambda_bar(const Metric& g, const SpectralResult& result);

/// f = -2 ln(u) so that e^{-f/2} is the eigenfunction and int e^{-f} dmu = 1.
/// Throws NonPositiveEigenfunction if any node value is <= 0.
ScalarField f_from_eigenfunction(const SpectralResult& result);

}  // namespace rflab
