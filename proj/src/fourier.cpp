#include "rflab/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace rflab::fourier {
namespace {

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <class T>
FftwBuffer<T> allocate(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (p == nullptr) throw std::bad_alloc();
    return FftwBuffer<T>(p);
}

// Plans are created once per shape; the FFTW planner is not reentrant, but
// fftw_execute_dft_* on fresh fftw_malloc buffers is.
struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, p] : plans_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.backward);
        }
    }

    PlanPair get(int nx, int ny) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find({nx, ny});
        if (it != plans_.end()) return it->second;
        const std::size_t n = static_cast<std::size_t>(nx) * ny;
        const std::size_t nc = static_cast<std::size_t>(nx / 2 + 1) * ny;
        auto real = allocate<double>(n);
        auto spec = allocate<fftw_complex>(nc);
        PlanPair p;
        p.forward = fftw_plan_dft_r2c_2d(ny, nx, real.get(), spec.get(), FFTW_ESTIMATE);
        p.backward = fftw_plan_dft_c2r_2d(ny, nx, spec.get(), real.get(), FFTW_ESTIMATE);
        plans_.emplace(std::make_pair(nx, ny), p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, PlanPair> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

// Wavenumbers of the half-complex layout. With `odd_symbol` the Nyquist entry
// of an even axis is zeroed, since i*k has no real representation there.
std::vector<double> wavenumbers_x(const PeriodicGrid& g, bool odd_symbol) {
    const int mx = g.nx / 2 + 1;
    std::vector<double> k(mx);
    for (int m = 0; m < mx; ++m) k[m] = 2.0 * std::numbers::pi * m / g.lx;
    if (odd_symbol && g.nx % 2 == 0) k[g.nx / 2] = 0.0;
    return k;
}

std::vector<double> wavenumbers_y(const PeriodicGrid& g, bool odd_symbol) {
    std::vector<double> k(g.ny);
    for (int j = 0; j < g.ny; ++j) {
        const int m = (2 * j <= g.ny) ? j : j - g.ny;
        k[j] = 2.0 * std::numbers::pi * m / g.ly;
    }
    if (odd_symbol && g.ny % 2 == 0) k[g.ny / 2] = 0.0;
    return k;
}

class Transform {
public:
    Transform(const PeriodicGrid& grid, std::span<const double> f)
        : grid_(grid),
          plans_(plan_cache().get(grid.nx, grid.ny)),
          mx_(grid.nx / 2 + 1),
          spectrum_(allocate<fftw_complex>(static_cast<std::size_t>(mx_) * grid.ny)),
          real_(allocate<double>(grid.nodes())),
          work_(allocate<fftw_complex>(static_cast<std::size_t>(mx_) * grid.ny)) {
        if (f.size() != grid.nodes()) throw std::invalid_argument("fourier: field size does not match grid");
        std::copy(f.begin(), f.end(), real_.get());
        fftw_execute_dft_r2c(plans_.forward, real_.get(), spectrum_.get());
    }

    // Inverse transform of spectrum * symbol(ix, j), normalized.
    template <class Symbol>
    std::vector<double> inverse(Symbol&& symbol) {
        const double scale = 1.0 / static_cast<double>(grid_.nodes());
        for (int j = 0; j < grid_.ny; ++j) {
            for (int m = 0; m < mx_; ++m) {
                const std::size_t idx = static_cast<std::size_t>(j) * mx_ + m;
                const std::complex<double> s = symbol(m, j) * scale;
                const std::complex<double> v(spectrum_[idx][0], spectrum_[idx][1]);
                const std::complex<double> r = s * v;
                work_[idx][0] = r.real();
                work_[idx][1] = r.imag();
            }
        }
        fftw_execute_dft_c2r(plans_.backward, work_.get(), real_.get());
        return std::vector<double>(real_.get(), real_.get() + grid_.nodes());
    }

private:
    PeriodicGrid grid_;
    PlanPair plans_;
    int mx_;
    FftwBuffer<fftw_complex> spectrum_;
    FftwBuffer<double> real_;
    FftwBuffer<fftw_complex> work_;
};

}  // namespace

Derivatives differentiate(const PeriodicGrid& grid, std::span<const double> f, DerivativeRequest request) {
    Transform t(grid, f);
    const auto kx = wavenumbers_x(grid, true);
    const auto ky = wavenumbers_y(grid, true);
    const auto kx2 = wavenumbers_x(grid, false);
    const auto ky2 = wavenumbers_y(grid, false);
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    Derivatives d;
    if (request.dx) d.dx = t.inverse([&](int m, int) { return i * kx[m]; });
    if (request.dy) d.dy = t.inverse([&](int, int j) { return i * ky[j]; });
    if (request.dxx) d.dxx = t.inverse([&](int m, int) { return C(-kx2[m] * kx2[m]); });
    if (request.dxy) d.dxy = t.inverse([&](int m, int j) { return C(-kx[m] * ky[j]); });
    if (request.dyy) d.dyy = t.inverse([&](int, int j) { return C(-ky2[j] * ky2[j]); });
    return d;
}

std::vector<double> laplacian(const PeriodicGrid& grid, std::span<const double> f) {
    Transform t(grid, f);
    const auto kx = wavenumbers_x(grid, false);
    const auto ky = wavenumbers_y(grid, false);
    return t.inverse([&](int m, int j) { return std::complex<double>(-(kx[m] * kx[m] + ky[j] * ky[j])); });
}

std::vector<double> apply_symbol(const PeriodicGrid& grid, std::span<const double> f,
                                 const std::function<double(double, double)>& symbol) {
    Transform t(grid, f);
    const auto kx = wavenumbers_x(grid, false);
    const auto ky = wavenumbers_y(grid, false);
    return t.inverse([&](int m, int j) { return std::complex<double>(symbol(kx[m], ky[j])); });
}

double max_laplacian_symbol(const PeriodicGrid& grid) {
    const auto kx = wavenumbers_x(grid, false);
    const auto ky = wavenumbers_y(grid, false);
    double mx = 0.0, my = 0.0;
    for (double k : kx) mx = std::max(mx, k * k);
    for (double k : ky) my = std::max(my, k * k);
    return mx + my;
}

}  // namespace rflab::fourier
