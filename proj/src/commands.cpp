#include "rflab/commands.hpp"

#include "rflab/error.hpp"
#include "rflab/functionals.hpp"
#include "rflab/plot.hpp"
#include "rflab/rescale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace rflab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Maps an exception to an exit code and a one-line diagnostic.
int report_error(const std::exception& e, std::ostream& err) {
    if (dynamic_cast<const ConfigInvalid*>(&e)) {
        err << "rflab: configuration error: " << e.what() << "\n";
        return exit_config_error;
    }
    if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const InvalidMetric*>(&e)) {
        err << "rflab: invalid input: " << e.what() << "\n";
        return exit_config_error;
    }
    err << "rflab: runtime error: " << e.what() << "\n";
    return exit_runtime_error;
}

int run_configured(RunConfig config, const std::string& command, std::ostream& out, std::ostream& err) {
    const std::filesystem::path dir = output_directory(config);
    RunOutput result;
    try {
        result = execute_run(config);
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
    const std::filesystem::path csv = dir / "trajectory.csv";
    const std::filesystem::path manifest = dir / "manifest.json";
    const int code = result.trajectory.truncated ? exit_runtime_error : exit_success;
    try {
        std::ostringstream table;
        write_csv(table, result.table);
        write_text_file(csv, table.str());
        Manifest m;
        m.command = command;
        m.config = describe(config);
        m.outputs = {{"csv", csv.string()}};
        m.states = result.trajectory.states.size();
        m.truncated = result.trajectory.truncated;
        m.truncation_reason = result.trajectory.truncation_reason;
        m.exit_code = code;
        write_text_file(manifest, manifest_json(m));
    } catch (const std::exception& e) {
        err << "rflab: I/O error: " << e.what() << "\n";
        return exit_runtime_error;
    }
    out << "wrote " << csv.string() << " (" << result.table.rows.size() << " rows) and " << manifest.string() << "\n";
    if (result.trajectory.truncated)
        err << "rflab: trajectory truncated: " << result.trajectory.truncation_reason << " (partial CSV written)\n";
    return code;
}

}  // namespace

RunOutput execute_run(RunConfig& config) {
    const Metric g0 = initial_metric(config);
    const double dt = resolve_dt(config, g0);
    const SProvider provider = make_provider(config, g0);
    RunOutput out;
    out.trajectory = integrate(FlowState{0.0, g0, std::nullopt}, config.T, dt, config.kind, provider, config.flow);
    const Trajectory& traj = out.trajectory;
    const int n = dimension(g0);
    const std::size_t count = traj.states.size();
    const std::optional<double> s_const = constant_s(traj);

    std::vector<MonitorResult> monitors;
    for (double k : config.k_values) {
        MonitorOptions mo;
        mo.tau0 = config.tau0;
        mo.solver = config.solver;
        mo.weights = config.weights;
        mo.flow = config.flow;
        monitors.push_back(monitor(traj, k, mo));
    }

    // Rescaled time: the trajectory's own time for rescaled runs; for a Ricci
    // run with a constant s configured, the time of the corresponding
    // rescaled flow (NaN past the end of its domain).
    std::vector<double> t_bar(count);
    for (std::size_t i = 0; i < count; ++i) t_bar[i] = traj.states[i].t;
    if (config.kind == FlowKind::ricci && config.provider == "constant" && config.s != 0.0 && count > 1) {
        std::vector<double> times = traj.times();
        for (double& t : times) t -= times.front();
        const RescaleMap map = build_map(n, std::vector<double>(count, config.s), times);
        for (std::size_t i = 0; i < count; ++i) t_bar[i] = i < map.t_bar.size() ? map.t_bar[i] : kNaN;
    }

    out.table.header = csv_header(config.k_values);
    const double t0 = traj.states.front().t;
    for (std::size_t i = 0; i < count; ++i) {
        const Metric& g = traj.states[i].metric;
        const double s = traj.rescaled() ? traj.s_samples[i] : 0.0;
        std::vector<double> row{traj.states[i].t, t_bar[i], monitors.front().tau0 + (traj.states[i].t - t0), s,
                                volume(g)};
        for (const MonitorResult& m : monitors) {
            row.push_back(m.get("M1").values[i]);
            row.push_back(m.get("M4").values[i]);
            row.push_back(config.weights ? m.get("F_k").values[i] : kNaN);
            row.push_back(config.weights ? m.get("W_k").values[i] : kNaN);
            row.push_back(m.get("M2").values[i]);
            row.push_back(s_const ? m.get("M3").values[i] : kNaN);
        }
        row.push_back(einstein_residual(g, s));
        row.push_back(soliton_residual(g, f_from_eigenfunction(monitors.front().spectra[i]), s));
        out.table.rows.push_back(std::move(row));
    }
    return out;
}

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        config = load_config(config_path);
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
    return run_configured(std::move(config), "run", out, err);
}

int cmd_verify(const std::optional<std::filesystem::path>& config_path, std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        if (config_path) config = load_config(*config_path);
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
    const RunReport report = run_suite(config.suite);
    bool runtime = false;
    std::size_t failed = 0, skipped = 0;
    for (const auto& c : report.checks) {
        const char* status = c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL");
        out << status << " " << c.name << ": " << c.details << "\n";
        if (c.skipped) ++skipped;
        if (!c.passed && !c.skipped) ++failed;
        if (!c.passed && !c.skipped && c.extra.count("runtime_error")) runtime = true;
    }
    const std::filesystem::path path = output_directory(config, "verify") / "report.json";
    try {
        write_text_file(path, report_json(report));
    } catch (const std::exception& e) {
        err << "rflab: I/O error: " << e.what() << "\n";
        return exit_runtime_error;
    }
    out << report.checks.size() << " checks, " << failed << " failed, " << skipped << " skipped; report "
        << path.string() << "\n";
    if (report.passed) return exit_success;
    err << "rflab: verification failed (" << failed << " of " << report.checks.size() << " checks)\n";
    return runtime ? exit_runtime_error : exit_check_failure;
}

int cmd_plot(const std::filesystem::path& csv_path, const std::filesystem::path& svg_path, std::ostream& out,
             std::ostream& err) {
    std::ifstream in(csv_path);
    if (!in) {
        err << "rflab: cannot read CSV '" << csv_path.string() << "'\n";
        return exit_config_error;
    }
    std::string svg;
    try {
        svg = render_svg(read_csv(in));
    } catch (const std::exception& e) {
        err << "rflab: malformed CSV '" << csv_path.string() << "': " << e.what() << "\n";
        return exit_config_error;
    }
    try {
        write_text_file(svg_path, svg);
    } catch (const std::exception& e) {
        err << "rflab: I/O error: " << e.what() << "\n";
        return exit_runtime_error;
    }
    out << "wrote " << svg_path.string() << "\n";
    return exit_success;
}

int cmd_sweep(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
    RunConfig base;
    try {
        base = load_config(config_path);
    } catch (const std::exception& e) {
        return report_error(e, err);
    }
    struct Job {
        RunConfig config;
        std::string id;
        std::ostringstream out, err;
        int code = 0;
    };
    std::vector<Job> jobs;
    jobs.reserve(base.sweep_k.size() * base.sweep_s.size());
    for (double k : base.sweep_k) {
        for (double s : base.sweep_s) {
            Job& job = jobs.emplace_back();
            job.config = base;
            job.config.k_values = {k};
            job.config.kind = s == 0.0 ? FlowKind::ricci : FlowKind::rescaled;
            job.config.provider = "constant";
            job.config.s = s;
            job.id = "k" + label(k) + "_s" + label(s);
            job.config.name = base.name.value_or("sweep") + "/" + job.id;
        }
    }
    // Disjoint output directories; results are reported in a fixed order.
    const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < jobs.size(); start += width) {
        std::vector<std::future<void>> running;
        for (std::size_t i = start; i < std::min(jobs.size(), start + width); ++i) {
            running.push_back(std::async(std::launch::async, [&job = jobs[i]] {
                job.code = run_configured(job.config, "sweep", job.out, job.err);
            }));
        }
        for (auto& f : running) f.get();
    }
    int worst = exit_success;
    std::vector<std::pair<std::string, std::string>> outputs;
    for (Job& job : jobs) {
        out << "[" << job.id << "] " << job.out.str();
        err << job.err.str();
        worst = std::max(worst, job.code);
        outputs.emplace_back(job.id, "exit " + std::to_string(job.code));
    }
    Manifest m;
    m.command = "sweep";
    m.config = describe(base);
    m.outputs = outputs;
    m.exit_code = worst;
    try {
        write_text_file(output_directory(base, "sweep") / "sweep.json", manifest_json(m));
    } catch (const std::exception& e) {
        err << "rflab: I/O error: " << e.what() << "\n";
        return exit_runtime_error;
    }
    return worst;
}

}  // namespace rflab
