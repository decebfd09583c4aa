#pragma once

// Command implementations behind the rflab executable. Each returns a process
// exit code and writes human-readable progress to `out` and one-line
// diagnostics to `err`.

#include "rflab/config.hpp"
#include "rflab/flow.hpp"
#include "rflab/report_io.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace rflab {

enum ExitCode : int {
    exit_success = 0,
    exit_check_failure = 1,
    exit_config_error = 2,
    exit_runtime_error = 3,
};

struct RunOutput {
    Trajectory trajectory;
    CsvTable table;
};

/// Integrates and monitors the configured run (resolving an "auto" dt in
/// `config`). A truncated trajectory is returned with its partial table;
/// StabilityViolation propagates.
RunOutput execute_run(RunConfig& config);

/// Writes trajectory.csv and manifest.json under the output directory.
/// Exit 3 for a truncated trajectory (after writing the partial CSV).
int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);
/// Runs the verification suite (defaults when no config) and writes
/// report.json. Exit 0 iff every check passed or was skipped.
int cmd_verify(const std::optional<std::filesystem::path>& config_path, std::ostream& out, std::ostream& err);
/// Renders a CSV written by `run` as SVG.
int cmd_plot(const std::filesystem::path& csv_path, const std::filesystem::path& svg_path, std::ostream& out,
             std::ostream& err);
/// One run per (k, s) in the cartesian product of [sweep] k and s, each in
/// its own subdirectory k{K}_s{S}; s = 0 is Ricci flow, otherwise rescaled
/// flow with constant s. Runs execute concurrently. Returns the largest exit
/// code of the runs.
int cmd_sweep(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

}  // namespace rflab
