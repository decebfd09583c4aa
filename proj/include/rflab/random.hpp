#pragma once

// All randomness derives from one seed through named streams, so adding a new
// consumer never perturbs the draws of an existing one.

#include "rflab/fields.hpp"
#include "rflab/geometry.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace rflab {

class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::string_view name);

    /// Independent child stream; depends only on this stream's seed and `name`.
    RandomStream split(std::string_view name) const;

    double uniform(double lo, double hi);
    int uniform_int(int lo, int hi);
    std::uint64_t seed() const { return seed_; }

private:
    explicit RandomStream(std::uint64_t derived_seed);

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Random trigonometric polynomial with modes |m| <= max_mode in each
/// direction, scaled so that max |field| <= amplitude. Smooth and periodic.
ScalarField random_smooth_field(const ConformalTorus& torus, RandomStream& rng, int max_mode, double amplitude);

/// A random conformal factor with the same construction.
ConformalTorus random_torus(int nx, int ny, double lx, double ly, RandomStream& rng, int max_mode, double amplitude);

}  // namespace rflab
