#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hazardlab/asymptotics.hpp"
#include "hazardlab/conditions.hpp"
#include "hazardlab/crm.hpp"
#include "hazardlab/kernels.hpp"
#include "hazardlab/montecarlo.hpp"

namespace hazardlab {

enum class RunKind { Regimes, CheckConditions, Simulate, SamplePaths };

std::string to_string(RunKind kind);
RunKind parse_run_kind(const std::string& text);

enum class OutputFormat { Json, Csv };

std::string to_string(OutputFormat format);
OutputFormat parse_output_format(const std::string& text);

struct RunConfig {
    RunKind kind = RunKind::Regimes;

    // check-conditions and simulate
    Functional functional = Functional::CumulativeHazard;
    // check-conditions
    std::optional<RateFunction> rate;
    std::optional<RateFunction> rate0;
    std::vector<double> t_grid{50.0, 100.0, 200.0, 400.0, 800.0};
    std::map<int, Behaviour> expect;
    // simulate and sample-paths
    double horizon = 0.0;
    std::uint64_t seed = 1;
    double epsilon = 1e-6;
    // simulate
    int replicates = 2000;
    CenteringMode centering = CenteringMode::QuadratureI1;
    double ks_threshold = 0.01;

    std::optional<Kernel> kernel;
    std::optional<JumpIntensity> intensity;

    std::string output_path;
    OutputFormat format = OutputFormat::Json;
    std::string samples_path;

    bool operator==(const RunConfig&) const = default;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string key, const std::string& message);
    // 0 when the problem is not tied to one line.
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

// Key = value lines under [experiment], [kernel], [crm] and [output]; '#' and ';'
// start comments.
RunConfig parse_config(const std::string& text);

// Inverse of parse_config: parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

ExperimentConfig experiment_config(const RunConfig& config);

}  // namespace hazardlab
