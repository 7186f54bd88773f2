#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hazardlab/asymptotics.hpp"
#include "hazardlab/crm.hpp"
#include "hazardlab/kernels.hpp"
#include "hazardlab/numeric.hpp"

namespace hazardlab {

enum class Theorem { CumHaz, Path2nd, PathVar };

std::string to_string(Theorem t);
Theorem parse_theorem(const std::string& text);

// Derived kernels at horizon T.
double k0(const Kernel& kernel, double T, double s, double x);
double k1(const Kernel& kernel, double T, double s, double x, double t, double y);
double k2(const Kernel& kernel, double T, double s, double x);
double k3(const Kernel& kernel, const JumpIntensity& intensity, double T, double s, double x);

// K^(a)(x) for any real order a > 0, constant for homogeneous intensities.
class MomentField {
public:
    explicit MomentField(const JumpIntensity& intensity);
    double operator()(int order, double x) const;
    bool homogeneous() const { return homogeneous_; }

private:
    JumpIntensity intensity_;
    bool homogeneous_;
    std::array<double, 7> constant_{};
};

// I_i(T) = int K^(i)(x) K_T(x)^i dx.
QuadResult I_moments(const Kernel& kernel, const JumpIntensity& intensity, double T, int i);

// k1 contracted with itself over one coordinate, divided by st/T^2:
// P(x,y) = int K^(2)(w) Q_T(x,w) Q_T(y,w) dw.
double contraction_core(const Kernel& kernel, const JumpIntensity& intensity, double T, double x, double y);

struct ContractionNorms {
    // ||k1||^2_L2, ||k1||^4_L4, ||k1*11k1||^2, ||k1*21k1||^2, ||k2+2k3||^2_L2, ||k2+2k3||^3_L3
    std::array<double, 6> value{};
    std::array<bool, 6> converged{};
};

ContractionNorms contraction_norms(const Kernel& kernel, const JumpIntensity& intensity, double T);

// || C1 (k2 + 2 k3) - delta C0 k0 ||^2_L2
QuadResult combined_norm(const Kernel& kernel, const JumpIntensity& intensity, double T, double c1, double c0,
                         double delta);

struct SlopeFit {
    double slope;
    double intercept;
    double r2;
};

// OLS of log y on log t.
SlopeFit fit_slope(const std::vector<double>& t, const std::vector<double>& y);

struct PowerLogFit {
    double intercept;
    double p;  // coefficient of log T
    double q;  // coefficient of log log T
    double r2;
};

// OLS of log y on (log t, log log t).
PowerLogFit fit_power_log(const std::vector<double>& t, const std::vector<double>& y);

struct ConvergesToPositive {
    double limit;
};
struct VanishesWithSlope {
    double slope;
    double r2;
};
struct Diverges {
    double slope;
    double r2;
};
struct Inconclusive {
    std::string reason;
};

using Verdict = std::variant<ConvergesToPositive, VanishesWithSlope, Diverges, Inconclusive>;

enum class Behaviour { Converges, Vanishes, Diverges };

std::string to_string(Behaviour b);
Behaviour parse_behaviour(const std::string& text);
std::string verdict_name(const Verdict& v);
bool matches(const Verdict& v, Behaviour b);

// Classifies a positive series over an increasing grid. With log_corrected set the
// global trend is fitted jointly in log T and log log T.
Verdict classify(const std::vector<double>& t, const std::vector<double>& y, bool log_corrected = false);

struct ConditionSeries {
    int index;
    std::string quantity;
    std::vector<double> values;
    bool all_converged;
    Verdict verdict;
    Behaviour expected;
    bool as_expected;
};

struct ConditionReport {
    Theorem theorem;
    std::string kernel;
    std::string intensity;
    RateFunction rate;
    std::optional<RateFunction> rate0;
    std::vector<double> t_grid;
    std::vector<ConditionSeries> conditions;
    // Theorem 3: delta used in condition 3 and its source.
    std::optional<double> delta;
    std::string delta_source;
    bool all_as_expected() const;
};

std::map<int, Behaviour> default_expectations(Theorem theorem);

// rate is C0 for the cumulative hazard and C1 otherwise. For the path variance,
// rate0 supplies C0; when absent the cumulative-hazard catalog rate is used.
ConditionReport check_theorem(const Kernel& kernel, const JumpIntensity& intensity, Theorem theorem,
                              const RateFunction& rate, const std::vector<double>& t_grid,
                              std::optional<RateFunction> rate0 = std::nullopt,
                              const std::map<int, Behaviour>& expect = {});

struct ComparisonReport {
    std::vector<double> t_grid;
    std::vector<double> i2_lo;
    std::vector<double> i2_target;
    std::vector<double> i2_hi;
    std::vector<bool> bracketed;
    bool all_bracketed;
    // Slope of log sqrt(I2_hi / I2_lo) in log T: the log-ratio of the two C0 rates.
    double rate_ratio_slope;
    bool rates_equivalent;
    std::optional<std::array<double, 2>> variance_interval;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Comparison of a target (kernel, intensity) against pointwise lower and upper
// bounds. Dominance is verified on a 200 x 200 (t, x) grid and a jump-size grid.
ComparisonReport sandwich_compare(const Kernel& kernel_lo, const Kernel& kernel_hi, const JumpIntensity& intensity_lo,
                                  const JumpIntensity& intensity_hi, const Kernel& target_kernel,
                                  const JumpIntensity& target_intensity, const std::vector<double>& t_grid,
                                  std::optional<RateFunction> rate = std::nullopt);

}  // namespace hazardlab
