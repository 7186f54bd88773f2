#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hazardlab/app.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

hazardlab::RunConfig load(const std::string& path, hazardlab::RunKind expected) {
    auto config = hazardlab::parse_config(read_file(path));
    if (config.kind != expected)
        throw std::invalid_argument(path + ": experiment.kind is " + to_string(config.kind) + " but the subcommand is " +
                                    to_string(expected));
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random hazard rates: regime catalog, condition checks and Monte Carlo limit tests"};
    app.set_version_flag("--version", hazardlab::tool_version());
    app.require_subcommand(1);

    std::string out_path;
    std::string format = "csv";
    auto* regimes = app.add_subcommand("regimes", "Dump the regime catalog");
    regimes->add_option("--out", out_path, "Output file (default stdout)");
    regimes->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    std::string config_path;
    auto* check = app.add_subcommand("check-conditions", "Evaluate limit-theorem conditions over a horizon grid");
    check->add_option("--config", config_path, "Configuration file")->required();

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo test of a Gaussian limit");
    simulate->add_option("--config", config_path, "Configuration file")->required();

    int grid = 0;
    auto* paths = app.add_subcommand("sample-paths", "Hazard path of one seeded replicate as CSV t,hazard");
    paths->add_option("--config", config_path, "Configuration file")->required();
    paths->add_option("--grid", grid, "Number of time points")->required()->check(CLI::Range(2, 100000000));

    CLI11_PARSE(app, argc, argv);

    try {
        using hazardlab::RunKind;
        if (regimes->parsed())
            return hazardlab::run_regimes(out_path, hazardlab::parse_output_format(format), std::cout);
        if (check->parsed()) return hazardlab::run_config(load(config_path, RunKind::CheckConditions), std::cout, std::cerr);
        if (simulate->parsed()) return hazardlab::run_config(load(config_path, RunKind::Simulate), std::cout, std::cerr);
        if (paths->parsed())
            return hazardlab::run_sample_paths(load(config_path, RunKind::SamplePaths), grid, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hazardlab::kExitError;
    }
    return hazardlab::kExitError;
}
