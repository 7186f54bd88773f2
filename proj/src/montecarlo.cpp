#include "hazardlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "hazardlab/conditions.hpp"
#include "hazardlab/numeric.hpp"
#include "hazardlab/parallel.hpp"
#include "hazardlab/text.hpp"

namespace hazardlab {

namespace {

constexpr double kQuadTol = 1e-10;
constexpr double kBudgetFraction = 0.01;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_window(const CrmSample& sample, const Kernel& kernel, double T) {
    const Interval need = location_window(kernel, T);
    if (!sample.atoms.empty() && !sample.window.covers(need))
        throw std::invalid_argument("sample window [" + format_double(sample.window.lo) + ", " +
                                    format_double(sample.window.hi) + "] does not cover the location window [" +
                                    format_double(need.lo) + ", " + format_double(need.hi) + "] of " +
                                    kernel.describe() + " at T=" + format_double(T));
}

struct Piece {
    double lo;
    double hi;
    double jump;
};

// Intervals of [0, T] on which an indicator kernel is switched on by an atom at x.
void active_pieces(const Kernel& kernel, double T, const Atom& a, std::vector<Piece>& out) {
    auto push = [&](double lo, double hi) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, T);
        if (hi > lo) out.push_back({lo, hi, a.jump});
    };
    std::visit(overloaded{
                   [&](const Rectangular& k) { push(a.location - k.tau, a.location + k.tau); },
                   [&](const DykstraLaud&) {
                       if (a.location >= 0.0) push(a.location, T);
                   },
                   [&](const UShaped& k) {
                       if (a.location < 0.0) return;
                       push(0.0, k.beta_center - a.location);
                       push(k.beta_center + a.location, T);
                   },
                   [&](const OrnsteinUhlenbeck&) {},
               },
               kernel.form());
}

// int_0^T h^2 for a piecewise-constant path.
double indicator_square_integral(const CrmSample& sample, const Kernel& kernel, double T) {
    std::vector<Piece> pieces;
    pieces.reserve(2 * sample.atoms.size());
    for (const auto& a : sample.atoms) active_pieces(kernel, T, a, pieces);
    std::vector<std::pair<double, double>> events;
    events.reserve(2 * pieces.size());
    for (const auto& p : pieces) {
        events.emplace_back(p.lo, p.jump);
        events.emplace_back(p.hi, -p.jump);
    }
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    CompensatedSum level;
    CompensatedSum total;
    double t = 0.0;
    for (const auto& [time, delta] : events) {
        if (time > t) {
            const double h = level.value();
            total += h * h * (time - t);
            t = time;
        }
        level += delta;
    }
    return total.value();
}

// int_0^T h^2 for the Ornstein-Uhlenbeck path, exact between consecutive locations.
double ou_square_integral(const CrmSample& sample, double kappa, double T) {
    std::vector<Atom> atoms;
    atoms.reserve(sample.atoms.size());
    for (const auto& a : sample.atoms)
        if (a.location >= 0.0 && a.location < T) atoms.push_back(a);
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
    const double amp = std::sqrt(2.0 * kappa);
    auto segment = [&](double level, double dt) { return -level * level * std::expm1(-2.0 * kappa * dt) / (2.0 * kappa); };
    CompensatedSum total;
    double level = 0.0;
    double s = 0.0;
    for (const auto& a : atoms) {
        const double dt = a.location - s;
        if (dt > 0.0) {
            total += segment(level, dt);
            level *= std::exp(-kappa * dt);
            s = a.location;
        }
        level += amp * a.jump;
    }
    if (T > s) total += segment(level, T - s);
    return total.value();
}

// x -> K(order, x) - contribution of jumps below epsilon.
struct TruncatedMoment {
    const JumpIntensity& intensity;
    double epsilon;
    int order;

    double operator()(double x) const {
        const std::optional<double> at = intensity.is_homogeneous() ? std::nullopt : std::optional<double>(x);
        const double full = moment(intensity, order, at);
        if (!(epsilon > 0.0)) return full;
        return std::max(0.0, full - small_jump_moment(intensity, order, epsilon, at));
    }
};

std::vector<double> location_breaks(const Kernel& kernel, const JumpIntensity& intensity, double T) {
    auto b = mass_breaks(kernel, T);
    for (double p : intensity.kinks()) b.push_back(p);
    if (!intensity.is_homogeneous())
        for (double p = 1.0; p < T; p *= 4.0) b.push_back(p);
    return b;
}

template <class F>
double over_locations(const Kernel& kernel, const JumpIntensity& intensity, double T, F&& f) {
    const Interval w = location_window(kernel, T);
    return integrate_pieces(f, w.lo, w.hi, location_breaks(kernel, intensity, T), kQuadTol).value;
}

// E[h(t)] under the truncated law.
double truncated_mean_hazard(const Kernel& kernel, const JumpIntensity& intensity, const TruncatedMoment& k1,
                             double t) {
    if (intensity.is_homogeneous()) {
        const double full = moment(intensity, 1);
        return full > 0.0 ? k1(0.0) / full * mean_hazard(kernel, intensity, t) : 0.0;
    }
    auto breaks = slice_breaks(kernel, t);
    const double hi = *std::max_element(breaks.begin(), breaks.end());
    for (double p : intensity.kinks()) breaks.push_back(p);
    return integrate_pieces([&](double x) { return k1(x) * eval(kernel, t, x); }, 0.0, hi, breaks, kQuadTol).value;
}

struct Expectations {
    double cumhaz;
    double second_moment;
};

Expectations expectations(const Kernel& kernel, const JumpIntensity& intensity, double T, double epsilon) {
    const TruncatedMoment k1{intensity, epsilon, 1};
    const TruncatedMoment k2{intensity, epsilon, 2};
    const double h = over_locations(kernel, intensity, T, [&](double x) { return k1(x) * K_T(kernel, T, x); });
    const double diag = over_locations(kernel, intensity, T, [&](double x) { return k2(x) * Q_T(kernel, T, x, x); });
    auto breaks = mass_breaks(kernel, T);
    for (double p : intensity.kinks()) breaks.push_back(p);
    const double mean_sq = integrate_pieces(
                               [&](double t) {
                                   const double m = truncated_mean_hazard(kernel, intensity, k1, t);
                                   return m * m;
                               },
                               0.0, T, breaks, kQuadTol)
                               .value;
    return {h, (diag + mean_sq) / T};
}

double select(Functional functional, const Expectations& e, double T) {
    switch (functional) {
        case Functional::CumulativeHazard:
            return e.cumhaz;
        case Functional::PathSecondMoment:
            return e.second_moment;
        case Functional::PathVariance:
            return e.second_moment - e.cumhaz * e.cumhaz / (T * T);
    }
    return 0.0;
}

double sample_mean(const std::vector<double>& v) {
    CompensatedSum s;
    for (double x : v) s += x;
    return s.value() / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    CompensatedSum s;
    for (double x : v) s += (x - mean) * (x - mean);
    return s.value() / static_cast<double>(v.size() - 1);
}

}  // namespace

std::string to_string(CenteringMode mode) {
    return mode == CenteringMode::Catalog ? "catalog" : "quadrature";
}

CenteringMode parse_centering_mode(const std::string& text) {
    if (text == "catalog") return CenteringMode::Catalog;
    if (text == "quadrature" || text == "quadrature-i1") return CenteringMode::QuadratureI1;
    throw std::invalid_argument("unknown centering mode '" + text + "' (expected catalog or quadrature)");
}

void ExperimentConfig::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
    if (replicates < 100) throw std::invalid_argument("replicates must be at least 100");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive");
}

double cumhaz(const CrmSample& sample, const Kernel& kernel, double T) {
    require_window(sample, kernel, T);
    CompensatedSum s;
    for (const auto& a : sample.atoms) s += a.jump * K_T(kernel, T, a.location);
    return s.value();
}

double path_second_moment(const CrmSample& sample, const Kernel& kernel, double T) {
    require_window(sample, kernel, T);
    if (sample.atoms.empty()) return 0.0;
    if (kernel.is<OrnsteinUhlenbeck>()) return ou_square_integral(sample, kernel.as<OrnsteinUhlenbeck>().kappa, T) / T;
    return indicator_square_integral(sample, kernel, T) / T;
}

double path_second_moment_pairwise(const CrmSample& sample, const Kernel& kernel, double T) {
    require_window(sample, kernel, T);
    std::vector<Atom> atoms = sample.atoms;
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
    const bool local = kernel.is<Rectangular>();
    const double reach = local ? 2.0 * kernel.as<Rectangular>().tau : 0.0;
    CompensatedSum s;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const auto& a = atoms[i];
        s += a.jump * a.jump * Q_T(kernel, T, a.location, a.location);
        for (std::size_t j = i + 1; j < atoms.size(); ++j) {
            const auto& b = atoms[j];
            if (local && b.location - a.location >= reach) break;
            s += 2.0 * a.jump * b.jump * Q_T(kernel, T, a.location, b.location);
        }
    }
    return s.value() / T;
}

namespace {

double variance_from(double second, double h, double T) {
    const double mean = h / T;
    const double v = second - mean * mean;
    if (v >= 0.0) return v;
    if (-v <= 1e-12 * std::max(second, mean * mean)) return 0.0;
    throw std::logic_error("path variance negative beyond rounding: " + format_double(v));
}

}  // namespace

double path_variance(const CrmSample& sample, const Kernel& kernel, double T) {
    return variance_from(path_second_moment(sample, kernel, T), cumhaz(sample, kernel, T), T);
}

PathFunctionals evaluate_all(const CrmSample& sample, const Kernel& kernel, double T) {
    const double h = cumhaz(sample, kernel, T);
    const double second = path_second_moment(sample, kernel, T);
    return {h, second, variance_from(second, h, T)};
}

double evaluate(Functional functional, const CrmSample& sample, const Kernel& kernel, double T) {
    switch (functional) {
        case Functional::CumulativeHazard:
            return cumhaz(sample, kernel, T);
        case Functional::PathSecondMoment:
            return path_second_moment(sample, kernel, T);
        case Functional::PathVariance:
            return path_variance(sample, kernel, T);
    }
    return 0.0;
}

std::vector<double> hazard_path(const CrmSample& sample, const Kernel& kernel, const std::vector<double>& grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    for (double t : grid) {
        CompensatedSum s;
        for (const auto& a : sample.atoms) s += a.jump * eval(kernel, t, a.location);
        out.push_back(s.value());
    }
    return out;
}

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    constexpr int kTerms = 100;
    if (lambda < 1.18) {
        // Jacobi theta form of the distribution function, accurate where the alternating series is not.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int k = 1; k <= kTerms; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
            cdf += term;
            if (term < 1e-300) break;
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-300) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, double mean, double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) throw std::invalid_argument("ks_test requires variance > 0");
    if (samples.size() < 20) throw std::invalid_argument("ks_test requires at least 20 samples");
    std::sort(samples.begin(), samples.end());
    const double sd = std::sqrt(variance);
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double z = (samples[i] - mean) / sd;
        const double f = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

double expected_functional(Functional functional, const Kernel& kernel, const JumpIntensity& intensity, double T,
                           double epsilon) {
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
    return select(functional, expectations(kernel, intensity, T, epsilon), T);
}

namespace {

RegimeSpec require_regime(const ExperimentConfig& config) {
    const auto r = regime(config.kernel, config.intensity, config.functional);
    if (const auto* u = std::get_if<Unsupported>(&r))
        throw std::invalid_argument("no Gaussian regime for " + to_string(config.functional) + " with " +
                                    config.kernel.describe() + " and " + config.intensity.describe() + ": " +
                                    u->reason + "; use check-conditions to examine the conditions");
    return std::get<RegimeSpec>(r);
}

struct Centering {
    double value;
    std::string source;
    bool corrected;
};

Centering choose_centering(const ExperimentConfig& config, const RegimeSpec& spec) {
    const double T = config.horizon;
    if (config.centering == CenteringMode::Catalog) {
        if (const auto v = centering_value(spec.centering, T)) return {*v, "catalog " + describe(spec.centering), false};
    }
    return {expected_functional(config.functional, config.kernel, config.intensity, T, config.epsilon),
            "quadrature mean of the truncated law", true};
}

// First-order sensitivity of the functional to a unit jump at x.
double sensitivity(const ExperimentConfig& config, double i1, double x) {
    const double T = config.horizon;
    switch (config.functional) {
        case Functional::CumulativeHazard:
            return K_T(config.kernel, T, x);
        case Functional::PathSecondMoment:
            return 2.0 * kT3(config.kernel, config.intensity, T, x);
        case Functional::PathVariance:
            return 2.0 * kT3(config.kernel, config.intensity, T, x) - 2.0 * i1 * K_T(config.kernel, T, x) / (T * T);
    }
    return 0.0;
}

TruncationBudget budget_for(const ExperimentConfig& config, const RegimeSpec& spec, const CrmSampler& sampler,
                            bool corrected) {
    const double T = config.horizon;
    const double rate = spec.rate(T);
    const double full = expected_functional(config.functional, config.kernel, config.intensity, T);
    const double truncated =
        expected_functional(config.functional, config.kernel, config.intensity, T, config.epsilon);
    const double i1 = expected_functional(Functional::CumulativeHazard, config.kernel, config.intensity, T);
    const JumpIntensity& intensity = config.intensity;
    const double small_var = over_locations(config.kernel, intensity, T, [&](double x) {
        const std::optional<double> at = intensity.is_homogeneous() ? std::nullopt : std::optional<double>(x);
        const double g = sensitivity(config, i1, x);
        return small_jump_moment(intensity, 2.0, config.epsilon, at) * g * g;
    });
    TruncationBudget b{};
    b.mean_deficit = sampler.mean_deficit();
    b.standardized_shift = rate * (full - truncated);
    b.standardized_sd = rate * std::sqrt(std::max(small_var, 0.0));
    b.shift_corrected = corrected;
    b.residual = (corrected ? 0.0 : std::abs(b.standardized_shift)) + b.standardized_sd;
    b.limit = kBudgetFraction * std::sqrt(spec.limit_variance);
    b.ok = b.residual <= b.limit;
    return b;
}

}  // namespace

TruncationBudget truncation_budget(const ExperimentConfig& config) {
    config.validate();
    const RegimeSpec spec = require_regime(config);
    const CrmSampler sampler(config.intensity, location_window(config.kernel, config.horizon), config.epsilon);
    return budget_for(config, spec, sampler, choose_centering(config, spec).corrected);
}

CltReport run_clt(const ExperimentConfig& config) {
    config.validate();
    const RegimeSpec spec = require_regime(config);
    const double T = config.horizon;
    const CrmSampler sampler(config.intensity, location_window(config.kernel, T), config.epsilon);
    const Centering centering = choose_centering(config, spec);
    const TruncationBudget budget = budget_for(config, spec, sampler, centering.corrected);
    if (!budget.ok)
        throw TruncationBudgetError(
            "truncation budget exceeded at epsilon=" + format_double(config.epsilon) +
            ": mean_deficit=" + format_double(budget.mean_deficit) +
            ", standardized shift=" + format_double(budget.standardized_shift) +
            ", standardized small-jump sd=" + format_double(budget.standardized_sd) +
            ", residual=" + format_double(budget.residual) + " > limit=" + format_double(budget.limit) +
            (budget.shift_corrected ? "" : "; quadrature centering corrects the shift") + "; lower epsilon");

    const auto R = static_cast<std::size_t>(config.replicates);
    std::vector<double> values(R);
    parallel_for(R, [&](std::size_t r) {
        RandomStream rng(config.seed, r + 1);
        const CrmSample sample = sampler.draw(rng);
        values[r] = evaluate(config.functional, sample, config.kernel, T);
    });

    const double rate = spec.rate(T);
    std::vector<double> z(R);
    for (std::size_t r = 0; r < R; ++r) z[r] = rate * (values[r] - centering.value);

    CltReport report;
    report.functional = config.functional;
    report.horizon = T;
    report.replicates = config.replicates;
    report.seed = config.seed;
    report.epsilon = config.epsilon;
    report.kernel = config.kernel.describe();
    report.intensity = config.intensity.describe();
    report.rate = spec.rate.describe();
    report.centering_mode = config.centering;
    report.centering_source = centering.source;
    report.centering = centering.value;
    report.sample_mean = sample_mean(z);
    report.sample_variance = sample_variance(z, report.sample_mean);
    report.target_variance = spec.limit_variance;
    const auto ks = ks_test(z, 0.0, spec.limit_variance);
    report.ks_statistic = ks.statistic;
    report.ks_p_value = ks.p_value;
    report.variance_ratio = report.sample_variance / spec.limit_variance;
    report.truncation_budget_ok = budget.ok;
    report.budget = budget;
    report.values = std::move(values);
    report.standardized_samples = std::move(z);
    return report;
}

}  // namespace hazardlab
