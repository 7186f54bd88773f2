#pragma once

#include <iosfwd>
#include <string>

#include "hazardlab/config.hpp"

namespace hazardlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerdict = 2;

std::string tool_version();

// Catalog dump; out_path empty writes to out.
int run_regimes(const std::string& out_path, OutputFormat format, std::ostream& out);

// check-conditions and simulate. Returns kExitVerdict when a condition misses its
// expected behaviour or the KS p-value falls below the threshold.
int run_config(const RunConfig& config, std::ostream& out, std::ostream& log);

// One seeded replicate of h(t) on grid_points equally spaced times in [0, horizon].
int run_sample_paths(const RunConfig& config, int grid_points, std::ostream& out);

}  // namespace hazardlab
