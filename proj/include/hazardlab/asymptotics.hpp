#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hazardlab/crm.hpp"
#include "hazardlab/kernels.hpp"

namespace hazardlab {

enum class Functional { CumulativeHazard, PathSecondMoment, PathVariance };

std::string to_string(Functional f);
Functional parse_functional(const std::string& text);

// C(T) = T^p
struct Power {
    double p;
    bool operator==(const Power&) const = default;
};

// C(T) = T^p (log T)^q
struct PowerLog {
    double p;
    double q;
    bool operator==(const PowerLog&) const = default;
};

class RateFunction {
public:
    using Form = std::variant<Power, PowerLog>;

    RateFunction(Form form) : form_(form) {}
    RateFunction(Power p) : form_(p) {}
    RateFunction(PowerLog p) : form_(p) {}

    double operator()(double T) const;
    const Form& form() const { return form_; }
    double exponent() const;
    // "power:<p>" or "powerlog:<p>,<q>"; parse(describe()) is the identity.
    std::string describe() const;
    static RateFunction parse(const std::string& text);

    bool operator==(const RateFunction&) const = default;

private:
    Form form_;
};

// trend(T) = coefficient * T^exponent
struct Monomial {
    double coefficient;
    double exponent;
    bool operator==(const Monomial&) const = default;
};

// Centering at I1(T) = E[H(T)] evaluated by quadrature.
struct MonteCarloMean {
    bool operator==(const MonteCarloMean&) const = default;
};

using CenteringRule = std::variant<Monomial, MonteCarloMean>;

std::optional<double> centering_value(const CenteringRule& rule, double T);
std::string describe(const CenteringRule& rule);

struct RegimeSpec {
    Functional functional;
    RateFunction rate;
    CenteringRule centering;
    double limit_variance;
    // Variance components: sigma0^2 for the cumulative hazard, (sigma1^2, sigma2^2)
    // for the path second moment, (sigma1^2, sigma3^2) for the path variance.
    std::vector<double> components;
    std::optional<double> delta;
    // The one-sided half-range evaluation of the same variance, kept for comparison.
    std::optional<double> published_variance;
};

struct Unsupported {
    std::string reason;
};

using RegimeResult = std::variant<RegimeSpec, Unsupported>;

class NotCataloged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

RegimeSpec regime_cumhaz(const Kernel& kernel, const JumpIntensity& intensity);
RegimeResult regime_path2nd(const Kernel& kernel, const JumpIntensity& intensity);
RegimeResult regime_pathvar(const Kernel& kernel, const JumpIntensity& intensity);
// Dispatch on the functional; a missing cumulative-hazard entry becomes Unsupported.
RegimeResult regime(const Kernel& kernel, const JumpIntensity& intensity, Functional functional);

// Symbolic catalog row for display.
struct CatalogRow {
    std::string kernel;
    std::string crm;
    std::string functional;
    std::string rate;
    std::string trend;
    std::string variance;
    std::string delta;
    bool supported;
};

std::vector<CatalogRow> catalog_rows();

}  // namespace hazardlab
