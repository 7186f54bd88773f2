#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hazardlab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    bool covers(const Interval& other) const { return lo <= other.lo && hi >= other.hi; }
    bool operator==(const Interval&) const = default;
};

struct Constant {
    double a;
    bool operator==(const Constant&) const = default;
};

// x -> a + b*sqrt(x); a must be strictly positive.
struct AffineSqrt {
    double a;
    double b;
    bool operator==(const AffineSqrt&) const = default;
};

// x -> 1 on [0, b], sqrt(x) beyond.
struct IndicatorSqrt {
    double b;
    bool operator==(const IndicatorSqrt&) const = default;
};

class PositiveFunction {
public:
    using Form = std::variant<Constant, AffineSqrt, IndicatorSqrt>;

    PositiveFunction(Form form);
    PositiveFunction(Constant c) : PositiveFunction(Form{c}) {}
    PositiveFunction(AffineSqrt f) : PositiveFunction(Form{f}) {}
    PositiveFunction(IndicatorSqrt f) : PositiveFunction(Form{f}) {}

    double operator()(double x) const;
    double infimum(const Interval& window) const;
    double supremum(const Interval& window) const;
    bool is_constant() const { return std::holds_alternative<Constant>(form_); }
    // Points where the function is not smooth.
    std::vector<double> kinks() const;
    // s such that f(x) ~ s*sqrt(x) for large x; empty for constants.
    std::optional<double> sqrt_growth() const;
    const Form& form() const { return form_; }
    std::string describe() const;

    bool operator==(const PositiveFunction&) const = default;

private:
    Form form_;
};

struct GeneralizedGamma {
    double sigma;
    double gamma;
    bool operator==(const GeneralizedGamma&) const = default;
};

struct ExtendedGamma {
    PositiveFunction beta_fn;
    bool operator==(const ExtendedGamma&) const = default;
};

struct Beta {
    PositiveFunction c_fn;
    bool operator==(const Beta&) const = default;
};

// Levy intensity rho(dv|x) dx of a completely random measure on [0, inf).
class JumpIntensity {
public:
    using Family = std::variant<GeneralizedGamma, ExtendedGamma, Beta>;

    JumpIntensity(Family family);
    JumpIntensity(GeneralizedGamma f) : JumpIntensity(Family{f}) {}
    JumpIntensity(ExtendedGamma f) : JumpIntensity(Family{std::move(f)}) {}
    JumpIntensity(Beta f) : JumpIntensity(Family{std::move(f)}) {}

    const Family& family() const { return family_; }
    bool is_homogeneous() const;
    // Homogeneous intensity with the location dependence frozen at x.
    JumpIntensity at(double x) const;
    double max_jump() const;
    std::vector<double> kinks() const;
    std::string describe() const;

    bool operator==(const JumpIntensity&) const = default;

private:
    Family family_;
};

class UnsupportedEnvelope : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Integer jump moments K^(order), order in {1,2,3,4}.
double moment(const JumpIntensity& intensity, int order, std::optional<double> x = std::nullopt);
// Real-order jump moment, order > 0 (order > sigma for the generalized gamma).
double general_moment(const JumpIntensity& intensity, double order, std::optional<double> x = std::nullopt);
// Contribution of jumps below epsilon to the moment of the given order.
double small_jump_moment(const JumpIntensity& intensity, double order, double epsilon,
                         std::optional<double> x = std::nullopt);
double tail_mass(const JumpIntensity& intensity, double v, std::optional<double> x = std::nullopt);
double levy_density(const JumpIntensity& intensity, double v, std::optional<double> x = std::nullopt);

// Counter-based stream split: stream `index` of `master_seed` is an mt19937_64
// seeded through seed_seq from the four 32-bit halves of (master_seed, index).
class RandomStream {
public:
    explicit RandomStream(std::uint64_t master_seed, std::uint64_t index = 0);

    double uniform();
    double exponential();
    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::uint64_t index_;
};

struct Atom {
    double jump;
    double location;
    bool operator==(const Atom&) const = default;
};

struct CrmSample {
    std::vector<Atom> atoms;
    Interval window;
    double epsilon = 0.0;
    double mean_deficit = 0.0;
    std::uint64_t seed = 0;
    std::string envelope;
};

void write_csv(std::ostream& out, const CrmSample& sample);
CrmSample read_csv(std::istream& in);

class TailTable;

// Reusable sampler: the tail-inversion table for (intensity, window, epsilon) is
// built once and shared by every draw.
class CrmSampler {
public:
    CrmSampler(const JumpIntensity& intensity, const Interval& window, double epsilon);
    ~CrmSampler();
    CrmSampler(CrmSampler&&) noexcept;
    CrmSampler& operator=(CrmSampler&&) noexcept;

    CrmSample draw(RandomStream& rng) const;
    double mean_deficit() const { return mean_deficit_; }
    const std::string& envelope() const { return envelope_; }
    bool thinning() const { return thinning_; }
    // Expected number of envelope atoms, N(epsilon).
    double envelope_mass() const;
    // Envelope tail N(v) = scale * |window| * tail(v) and its inverse.
    double envelope_tail(double v) const;
    double invert_envelope_tail(double g) const;

private:
    JumpIntensity intensity_;
    Interval window_;
    double epsilon_;
    double mean_deficit_ = 0.0;
    std::string envelope_;
    bool thinning_ = false;
    double envelope_rate_ = 0.0;  // L for the extended gamma envelope
    double c_min_ = 0.0;
    double c_max_ = 0.0;
    std::unique_ptr<TailTable> table_;
};

CrmSample sample_homogeneous(const JumpIntensity& intensity, const Interval& window, double epsilon,
                             RandomStream& rng);
CrmSample sample_nonhomogeneous(const JumpIntensity& intensity, const Interval& window, double epsilon,
                                RandomStream& rng);

}  // namespace hazardlab
