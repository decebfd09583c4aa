#pragma once

// Pseudo-spectral differentiation on a uniform periodic grid.
//
// Fields are row-major, node (i, j) at index j * nx + i with x = i * hx and
// y = j * hy. First derivatives drop the Nyquist mode of an even-sized axis;
// Dxx, Dyy and the Laplacian keep it (symbol -k^2), so the Laplacian kernel is
// exactly the constants. The Hessian trace identity Dxx + Dyy = Laplacian is
// exact; summation by parts against first derivatives is exact up to the
// Nyquist content of the fields.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rflab::fourier {

struct PeriodicGrid {
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;

    double hx() const { return lx / nx; }
    double hy() const { return ly / ny; }
    std::size_t nodes() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
};

/// Which derivatives to return from `differentiate`.
struct DerivativeRequest {
    bool dx = false;
    bool dy = false;
    bool dxx = false;
    bool dxy = false;
    bool dyy = false;
};

struct Derivatives {
    std::vector<double> dx, dy, dxx, dxy, dyy;
};

/// Computes the requested derivatives with one forward transform.
Derivatives differentiate(const PeriodicGrid& grid, std::span<const double> f, DerivativeRequest request);

/// Dxx f + Dyy f.
std::vector<double> laplacian(const PeriodicGrid& grid, std::span<const double> f);

/// Applies a real Fourier multiplier symbol(kx, ky) (kx, ky in rad / length).
/// The symbol must be even in each wavenumber for the result to stay real.
std::vector<double> apply_symbol(const PeriodicGrid& grid, std::span<const double> f,
                                 const std::function<double(double, double)>& symbol);

/// Largest |k|^2 retained by the Laplacian symbol.
double max_laplacian_symbol(const PeriodicGrid& grid);

}  // namespace rflab::fourier
