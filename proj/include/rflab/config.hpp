#pragma once

// Run configuration: a flat `key = value` file with [section] headers.
//
//   [metric]  family, nx, ny, lx, ly (torus) | n, r2 (sphere),
//             initial = zero | sinusoid | random | file, amplitude, modes, file
//   [flow]    kind = ricci | rescaled | normalized,
//             provider = constant | average_scalar | eigen_normalized | test_function,
//             s, provider_k, test_function = zero | eigen, T, dt = auto | value, blowup_cap
//   [monitor] k (comma list), tau0 = auto | value, weights
//   [solver]  tolerance, max_iterations
//   [random]  seed
//   [output]  root, name
//   [suite]   families, k, s, grid, amplitude, sphere_n, sphere_r2, steps, dt, checks
//   [sweep]   k, s
//
// Every key is optional; unknown sections or keys are rejected.

#include "rflab/flow.hpp"
#include "rflab/geometry.hpp"
#include "rflab/harness.hpp"
#include "rflab/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rflab {

enum class InitialKind { zero, sinusoid, random, file };

struct RunConfig {
    std::string family = "torus";
    int nx = 32;
    int ny = 32;
    double lx = 1.0;
    double ly = 1.0;
    int sphere_n = 2;
    double sphere_r2 = 1.0;

    /// sinusoid: u = amplitude (sin(2 pi m x / lx) + cos(2 pi m y / ly) / 2) with m = modes;
    /// random: trigonometric polynomial with modes <= `modes`, max |u| = amplitude.
    InitialKind initial = InitialKind::sinusoid;
    double amplitude = 0.1;
    int modes = 1;
    std::string initial_file;

    FlowKind kind = FlowKind::ricci;
    std::string provider = "constant";
    double s = 0.0;
    double provider_k = 1.0;
    std::string test_function = "zero";
    double T = 0.01;
    /// Unset means "auto": half the stability bound on the torus, 1/250 of the
    /// extinction time on the sphere. resolve_dt fills it in.
    std::optional<double> dt;
    FlowOptions flow;

    std::vector<double> k_values{1.0};
    std::optional<double> tau0;
    bool weights = true;

    SolverOptions solver;
    std::uint64_t seed = 1;

    std::string output_root = "results";
    /// Unset: the command's default ("run", "verify", "sweep").
    std::optional<std::string> name;

    SuiteConfig suite;
    std::vector<double> sweep_k{1.0, 2.0, 5.0};
    std::vector<double> sweep_s{0.0, -1.0, -5.0};
};

/// Parses and validates; throws ConfigInvalid naming the offending field.
RunConfig parse_config(std::istream& in, const std::string& origin);
/// Throws ConfigInvalid("config", ...) naming the path when it cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// The initial metric described by [metric].
Metric initial_metric(const RunConfig& config);
/// The normalization described by [flow] for rescaled runs.
SProvider make_provider(const RunConfig& config, const Metric& initial);
/// Resolves an "auto" time step against the initial metric.
double resolve_dt(RunConfig& config, const Metric& initial);

/// Every resolved setting as ordered key/value pairs (numbers with 17 digits).
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& config);

/// [output] root, overridden by the RFLAB_OUTPUT_ROOT environment variable,
/// joined with [output] name (or `default_name`).
std::filesystem::path output_directory(const RunConfig& config, const std::string& default_name = "run");

}  // namespace rflab
