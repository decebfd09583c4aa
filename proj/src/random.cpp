#include "rflab/random.hpp"

#include <cmath>
#include <numbers>

namespace rflab {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t derived_seed) : seed_(derived_seed), engine_(derived_seed) {}

RandomStream::RandomStream(std::uint64_t seed, std::string_view name)
    : RandomStream(splitmix64(seed ^ fnv1a(name))) {}

RandomStream RandomStream::split(std::string_view name) const { return RandomStream(splitmix64(seed_ ^ fnv1a(name))); }

// Explicit transforms instead of std::uniform_*_distribution keep draws
// identical across standard library implementations.
double RandomStream::uniform(double lo, double hi) {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
}

int RandomStream::uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
}

ScalarField random_smooth_field(const ConformalTorus& torus, RandomStream& rng, int max_mode, double amplitude) {
    struct Mode {
        int mx, my;
        double a, phase;
    };
    std::vector<Mode> modes;
    double total = 0.0;
    for (int my = -max_mode; my <= max_mode; ++my) {
        for (int mx = 0; mx <= max_mode; ++mx) {
            if (mx == 0 && my <= 0) continue;
            Mode m{mx, my, rng.uniform(-1.0, 1.0), rng.uniform(0.0, 2.0 * std::numbers::pi)};
            total += std::abs(m.a);
            modes.push_back(m);
        }
    }
    const double scale = total > 0.0 ? amplitude / total : 0.0;
    return torus.sample([&](double x, double y) {
        double v = 0.0;
        for (const Mode& m : modes)
            v += m.a * std::cos(2.0 * std::numbers::pi * (m.mx * x / torus.lx() + m.my * y / torus.ly()) + m.phase);
        return scale * v;
    });
}

ConformalTorus random_torus(int nx, int ny, double lx, double ly, RandomStream& rng, int max_mode, double amplitude) {
    const ConformalTorus flat = ConformalTorus::flat(nx, ny, lx, ly);
    return flat.with_u(random_smooth_field(flat, rng, max_mode, amplitude));
}

}  // namespace rflab
