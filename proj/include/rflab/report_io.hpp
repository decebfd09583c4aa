#pragma once

// Serialization: trajectory tables as CSV, run manifests and verification
// reports as JSON.

#include "rflab/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rflab {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a column; throws InvalidArgument if absent.
    std::size_t column(const std::string& name) const;
};

/// t,t_bar,tau,s,volume, then lambda_k{K},lambda_bar_k{K},F_k{K},W_k{K},M2_k{K},M3_k{K}
/// for each K, then einstein_residual,soliton_residual.
std::vector<std::string> csv_header(const std::vector<double>& k_values);

/// 17 significant digits; "nan" for NaN, "inf"/"-inf" for infinities.
std::string format_number(double v);

void write_csv(std::ostream& out, const CsvTable& table);
/// Throws InvalidArgument naming the row and column of the first malformed
/// entry, or if the input has no header or no data rows.
CsvTable read_csv(std::istream& in);

struct Manifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, std::string>> outputs;
    std::size_t states = 0;
    bool truncated = false;
    std::string truncation_reason;
    int exit_code = 0;
};

std::string manifest_json(const Manifest& manifest);
std::string report_json(const RunReport& report);

/// Writes `contents` to `path`, creating parent directories; throws Error on
/// failure.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace rflab
