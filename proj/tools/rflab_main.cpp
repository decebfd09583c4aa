// rflab: run, verify, plot and sweep entry points.

#include "rflab/commands.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Spectral monotonicity experiments for Ricci-type flows on surfaces and spheres"};
    app.require_subcommand(1);

    std::string run_config;
    auto* run = app.add_subcommand("run", "Integrate and monitor a configured flow; writes CSV and a JSON manifest");
    run->add_option("--config", run_config, "Configuration file")->required();

    std::string verify_config;
    auto* verify = app.add_subcommand("verify", "Run the verification suite; exit 0 iff every check passes");
    verify->add_option("--config", verify_config, "Configuration file (defaults when omitted)");

    std::string plot_input, plot_output;
    auto* plot = app.add_subcommand("plot", "Render a run CSV as SVG, one pane per column");
    plot->add_option("--input", plot_input, "CSV written by run")->required();
    plot->add_option("--output", plot_output, "SVG to write")->required();

    std::string sweep_config;
    auto* sweep = app.add_subcommand("sweep", "One run per (k, s) pair listed in [sweep]");
    sweep->add_option("--config", sweep_config, "Configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? rflab::exit_success : rflab::exit_config_error;
    }

    if (*run) return rflab::cmd_run(run_config, std::cout, std::cerr);
    if (*verify)
        return rflab::cmd_verify(verify_config.empty() ? std::nullopt
                                                       : std::optional<std::filesystem::path>(verify_config),
                                 std::cout, std::cerr);
    if (*plot) return rflab::cmd_plot(plot_input, plot_output, std::cout, std::cerr);
    if (*sweep) return rflab::cmd_sweep(sweep_config, std::cout, std::cerr);
    return rflab::exit_config_error;
}
