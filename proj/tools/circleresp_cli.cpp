// Command-line front end: parse a scenario config, run the requested
// pipeline, print the verdict report, and map outcomes to exit codes
// (0 = all checks passed, 1 = a check failed or a solve broke down,
// 2 = the configuration itself is invalid).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "circleresp/errors.hpp"
#include "circleresp/scenario.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::vector<std::string> params;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("config", opts.config_path, "scenario config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", opts.out_dir, "override the [output] out_dir");
    cmd->add_option("--seed", opts.seed, "override the Monte Carlo seed");
    cmd->add_option("--threads", opts.threads, "worker threads for the delta sweep");
    cmd->add_option("--param", opts.params,
                    "key=value override of any [numerics]/[noise] key (repeatable)");
}

circleresp::Scenario load(const CommonOpts& opts) {
    circleresp::Scenario sc = circleresp::parse_scenario_file(opts.config_path);
    for (const std::string& p : opts.params) circleresp::apply_override(sc, p);
    if (!opts.out_dir.empty()) sc.out_dir = opts.out_dir;
    if (opts.seed) sc.seed = *opts.seed;
    if (opts.threads) sc.threads = *opts.threads;
    circleresp::validate_scenario(sc);
    return sc;
}

int report_and_exit_code(const circleresp::ScenarioReport& rep) {
    std::cout << circleresp::render_report(rep);
    return rep.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stationary densities and linear/quadratic response of circle-map "
                 "transfer operators"};
    app.require_subcommand(1);

    CommonOpts run_opts, check_opts, sweep_opts;
    CLI::App* run_cmd = app.add_subcommand(
        "run", "full pipeline; writes CSV artifacts and report.txt to out_dir");
    add_common(run_cmd, run_opts);
    CLI::App* check_cmd = app.add_subcommand(
        "check", "parse and validate the config only; no computation");
    add_common(check_cmd, check_opts);
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "responses and the delta sweep only (plus remainders.csv)");
    add_common(sweep_cmd, sweep_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends exit 0; every malformed invocation is a config
        // error (exit 2), not a check failure.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed())
            return report_and_exit_code(circleresp::run_scenario(load(run_opts), true));
        if (check_cmd->parsed()) {
            const circleresp::Scenario sc = load(check_opts);
            std::cout << "config ok: scenario '" << sc.name << "' ("
                      << (sc.noisy() ? "noisy" : "deterministic")
                      << ", truncation_order " << sc.truncation_order << ", quadrature "
                      << sc.effective_quadrature() << ")\n";
            return 0;
        }
        return report_and_exit_code(circleresp::run_sweep(load(sweep_opts), true));
    } catch (const circleresp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const circleresp::AdmissibilityError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const circleresp::ExpansionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
