#include "rflab/report_io.hpp"

#include "rflab/error.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace rflab {
namespace {

using nlohmann::ordered_json;

std::string k_label(double k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", k);
    return buf;
}

// JSON has no NaN; undefined values become null.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw InvalidArgument("CSV has no column '" + name + "'");
}

std::vector<std::string> csv_header(const std::vector<double>& k_values) {
    std::vector<std::string> h{"t", "t_bar", "tau", "s", "volume"};
    for (double k : k_values) {
        const std::string K = k_label(k);
        for (const char* base : {"lambda_k", "lambda_bar_k", "F_k", "W_k", "M2_k", "M3_k"}) h.push_back(base + K);
    }
    h.emplace_back("einstein_residual");
    h.emplace_back("soliton_residual");
    return h;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const CsvTable& table) {
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw InvalidArgument("CSV row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw InvalidArgument("CSV is empty (no header row)");
    if (line.back() == '\r') line.pop_back();
    table.header = split_line(line);
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (table.header[c].empty()) throw InvalidArgument("CSV header column " + std::to_string(c + 1) + " is empty");
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != table.header.size())
            throw InvalidArgument("CSV row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                                  " columns, header has " + std::to_string(table.header.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& s = cells[c];
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size())
                throw InvalidArgument("CSV row " + std::to_string(row_no) + ", column " + std::to_string(c + 1) +
                                      " ('" + table.header[c] + "'): '" + s + "' is not a number");
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw InvalidArgument("CSV has a header but no data rows");
    return table;
}

std::string manifest_json(const Manifest& m) {
    ordered_json j;
    j["command"] = m.command;
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : m.config) cfg[k] = v;
    j["config"] = cfg;
    ordered_json outs = ordered_json::object();
    for (const auto& [k, v] : m.outputs) outs[k] = v;
    j["outputs"] = outs;
    j["trajectory"] = {{"states", m.states}, {"truncated", m.truncated}, {"truncation_reason", m.truncation_reason}};
    j["exit_code"] = m.exit_code;
    return j.dump(2) + "\n";
}

std::string report_json(const RunReport& r) {
    ordered_json j;
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : r.config_echo) cfg[k] = v;
    j["config"] = cfg;
    j["trajectories"] = r.trajectory_summary;
    ordered_json checks = ordered_json::array();
    std::size_t passed = 0, failed = 0, skipped = 0;
    for (const auto& c : r.checks) {
        ordered_json e;
        e["name"] = c.name;
        e["status"] = c.skipped ? "skipped" : (c.passed ? "passed" : "failed");
        e["passed"] = c.passed;
        e["observed"] = number(c.observed);
        e["expected"] = number(c.expected);
        e["tolerance"] = number(c.tolerance);
        e["details"] = c.details;
        ordered_json extra = ordered_json::object();
        for (const auto& [k, v] : c.extra) extra[k] = number(v);
        e["extra"] = extra;
        checks.push_back(std::move(e));
        (c.skipped ? skipped : (c.passed ? passed : failed))++;
    }
    j["summary"] = {{"passed", passed}, {"failed", failed}, {"skipped", skipped}};
    j["checks"] = checks;
    ordered_json series = ordered_json::array();
    for (const auto& s : r.series) {
        ordered_json e;
        e["name"] = s.name;
        e["k"] = s.k;
        e["s"] = s.s ? number(*s.s) : ordered_json(nullptr);
        e["tau0"] = s.tau0 ? number(*s.tau0) : ordered_json(nullptr);
        ordered_json values = ordered_json::array();
        for (double v : s.values) values.push_back(number(v));
        e["values"] = values;
        series.push_back(std::move(e));
    }
    j["series"] = series;
    j["passed"] = r.passed;
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace rflab
