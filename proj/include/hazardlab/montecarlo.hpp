#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hazardlab/asymptotics.hpp"
#include "hazardlab/crm.hpp"
#include "hazardlab/kernels.hpp"

namespace hazardlab {

enum class CenteringMode { Catalog, QuadratureI1 };

std::string to_string(CenteringMode mode);
CenteringMode parse_centering_mode(const std::string& text);

struct ExperimentConfig {
    Kernel kernel;
    JumpIntensity intensity;
    Functional functional = Functional::CumulativeHazard;
    double horizon = 0.0;
    int replicates = 2000;
    std::uint64_t seed = 0;
    double epsilon = 1e-6;
    CenteringMode centering = CenteringMode::QuadratureI1;

    void validate() const;
};

// H(T) = sum J K_T(x)
double cumhaz(const CrmSample& sample, const Kernel& kernel, double T);

// (1/T) int_0^T h(t)^2 dt by an exact sweep over the points where the path changes form.
double path_second_moment(const CrmSample& sample, const Kernel& kernel, double T);

// (1/T) sum_i sum_j J_i J_j Q_T(x_i, x_j), with locality for the rectangular kernel.
double path_second_moment_pairwise(const CrmSample& sample, const Kernel& kernel, double T);

// path_second_moment - (H(T)/T)^2
double path_variance(const CrmSample& sample, const Kernel& kernel, double T);

struct PathFunctionals {
    double cumulative_hazard;
    double path_second_moment;
    double path_variance;
};

PathFunctionals evaluate_all(const CrmSample& sample, const Kernel& kernel, double T);
double evaluate(Functional functional, const CrmSample& sample, const Kernel& kernel, double T);

// h(t) = sum J k(t, x) at each grid point.
std::vector<double> hazard_path(const CrmSample& sample, const Kernel& kernel, const std::vector<double>& grid);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct KsResult {
    double statistic;
    double p_value;
};

KsResult ks_test(std::vector<double> samples, double mean, double variance);

// Expectation of a functional when jumps below epsilon are removed; epsilon = 0
// gives the full law. The path variance uses (1/T) int E[h^2] - E[H]^2 / T^2.
double expected_functional(Functional functional, const Kernel& kernel, const JumpIntensity& intensity, double T,
                           double epsilon = 0.0);

struct TruncationBudget {
    double mean_deficit;
    // rate(T) times the change in the expected functional caused by truncation.
    double standardized_shift;
    // rate(T) times the first-order standard deviation of the removed small jumps.
    double standardized_sd;
    bool shift_corrected;
    double residual;
    double limit;
    bool ok;
};

struct CltReport {
    Functional functional;
    double horizon;
    int replicates;
    std::uint64_t seed;
    double epsilon;
    std::string kernel;
    std::string intensity;
    std::string rate;
    CenteringMode centering_mode;
    std::string centering_source;
    double centering;
    std::vector<double> values;
    std::vector<double> standardized_samples;
    double sample_mean;
    double sample_variance;
    double target_variance;
    double ks_statistic;
    double ks_p_value;
    double variance_ratio;
    bool truncation_budget_ok;
    TruncationBudget budget;
};

class TruncationBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Truncation budget for a configuration against its catalog regime.
TruncationBudget truncation_budget(const ExperimentConfig& config);

CltReport run_clt(const ExperimentConfig& config);

}  // namespace hazardlab
