#include "hazardlab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hazardlab/parallel.hpp"
#include "hazardlab/text.hpp"

namespace hazardlab {

namespace {

constexpr double kOuterTol = 1e-9;
constexpr double kInnerTol = 1e-10;

void append(std::vector<double>& to, const std::vector<double>& from) { to.insert(to.end(), from.begin(), from.end()); }

// Geometric points 1, 4, 16, ... below T: resolve x-dependent moments over long windows.
std::vector<double> geometric_points(double T) {
    std::vector<double> out;
    for (double p = 1.0; p < T; p *= 4.0) out.push_back(p);
    return out;
}

// Kinks and scale points of x -> (any location integral of Q_T(x, .)).
std::vector<double> outer_breaks(const Kernel& kernel, const JumpIntensity& intensity, double T) {
    auto b = mass_breaks(kernel, T);
    append(b, intensity.kinks());
    if (!intensity.is_homogeneous()) append(b, geometric_points(T));
    if (kernel.is<Rectangular>()) {
        const double tau = kernel.as<Rectangular>().tau;
        for (int k = 0; k <= 6; ++k) {
            b.push_back(k * tau);
            b.push_back(T - k * tau);
            b.push_back(T + tau - k * tau);
        }
    } else if (kernel.is<OrnsteinUhlenbeck>()) {
        const double kappa = kernel.as<OrnsteinUhlenbeck>().kappa;
        for (double s = 1.0 / kappa; s < T; s *= 2.0) {
            b.push_back(s);
            b.push_back(T - s);
        }
    }
    return b;
}

std::vector<double> inner_breaks(const Kernel& kernel, const JumpIntensity& intensity, double T, double x) {
    auto b = overlap_breaks(kernel, T, x);
    append(b, intensity.kinks());
    if (!intensity.is_homogeneous()) append(b, geometric_points(T));
    return b;
}

// int_0^T Q(x,w) Q(y,w) dw for the OU kernel, y <= x <= T.
double ou_core(double kappa, double T, double x, double y) {
    if (y > x) std::swap(x, y);
    if (y < 0.0 || x >= T) return 0.0;
    if (kappa * T < 0.5) {
        // The closed form cancels catastrophically on short horizons.
        const Kernel k = OrnsteinUhlenbeck{kappa};
        return integrate_pieces([&](double w) { return Q_T(k, T, x, w) * Q_T(k, T, y, w); }, 0.0, T, {y, x},
                                1e-13)
            .value;
    }
    const double d = x - y;
    const double s = x + y;
    const double e = std::exp(kappa * (s - 2.0 * T));
    const double ed = std::exp(-kappa * d);
    const double tail = std::exp(-2.0 * kappa * T) * ed + std::exp(kappa * (d - 2.0 * T));
    return ed * (d + 1.0 / kappa) - std::exp(-kappa * s) / (2.0 * kappa) - e / kappa - (2.0 * T - s) * e +
           (tail - std::exp(-2.0 * kappa * T) * e) / (2.0 * kappa);
}

// int_0^T Q(x,w) Q(y,w) dw for the Dykstra-Laud kernel.
double dl_core(double T, double x, double y) {
    if (y > x) std::swap(x, y);
    if (y < 0.0 || x >= T) return 0.0;
    const double a = T - x;
    const double b = T - y;
    return y * a * b + 0.5 * a * (b * b - a * a) + a * a * a / 3.0;
}

// Location-dependent moments grow like sqrt(x) from the origin; x = u^2 keeps the integrand smooth.
template <class F>
QuadResult integrate_locations(const JumpIntensity& intensity, F&& f, const Interval& w, std::vector<double> breaks,
                               double tol) {
    if (intensity.is_homogeneous() || w.lo != 0.0) return integrate_pieces(f, w.lo, w.hi, std::move(breaks), tol);
    for (double& b : breaks) b = b > 0.0 ? std::sqrt(b) : 0.0;
    return integrate_pieces([&](double u) { return 2.0 * u * f(u * u); }, 0.0, std::sqrt(w.hi), std::move(breaks),
                            tol);
}

template <class F>
QuadResult outer(const Kernel& kernel, const JumpIntensity& intensity, double T, F&& f) {
    return integrate_locations(intensity, f, location_window(kernel, T), outer_breaks(kernel, intensity, T),
                               kOuterTol);
}

template <class F>
QuadResult inner(const Kernel& kernel, const JumpIntensity& intensity, double T, double x, F&& f) {
    return integrate_locations(intensity, f, location_window(kernel, T), inner_breaks(kernel, intensity, T, x),
                               kInnerTol);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string to_string(Theorem t) {
    switch (t) {
        case Theorem::CumHaz:
            return "cumulative-hazard";
        case Theorem::Path2nd:
            return "path-second-moment";
        case Theorem::PathVar:
            return "path-variance";
    }
    return "";
}

Theorem parse_theorem(const std::string& text) {
    switch (parse_functional(text)) {
        case Functional::CumulativeHazard:
            return Theorem::CumHaz;
        case Functional::PathSecondMoment:
            return Theorem::Path2nd;
        case Functional::PathVariance:
            return Theorem::PathVar;
    }
    return Theorem::CumHaz;
}

double k0(const Kernel& kernel, double T, double s, double x) { return s * K_T(kernel, T, x); }

double k1(const Kernel& kernel, double T, double s, double x, double t, double y) {
    return s * t / T * Q_T(kernel, T, x, y);
}

double k2(const Kernel& kernel, double T, double s, double x) { return s * s / T * Q_T(kernel, T, x, x); }

double k3(const Kernel& kernel, const JumpIntensity& intensity, double T, double s, double x) {
    return s * kT3(kernel, intensity, T, x);
}

MomentField::MomentField(const JumpIntensity& intensity)
    : intensity_(intensity), homogeneous_(intensity.is_homogeneous()) {
    if (homogeneous_) {
        for (int a = 1; a <= 6; ++a)
            constant_[a] = a <= 4 ? moment(intensity_, a) : general_moment(intensity_, a);
    }
}

double MomentField::operator()(int order, double x) const {
    if (homogeneous_) return constant_.at(order);
    return order <= 4 ? moment(intensity_, order, x) : general_moment(intensity_, order, x);
}

QuadResult I_moments(const Kernel& kernel, const JumpIntensity& intensity, double T, int i) {
    if (i < 1 || i > 3) throw std::domain_error("I_moments order must be in {1,2,3}");
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    const MomentField K(intensity);
    if (K.homogeneous() && kernel.is<DykstraLaud>()) return {K(i, 0.0) * std::pow(T, i + 1) / (i + 1), 0.0, true};
    auto f = [&](double x) { return K(i, x) * std::pow(K_T(kernel, T, x), i); };
    return outer(kernel, intensity, T, f);
}

namespace {

// Rectangular Q_T is piecewise linear in each argument with kinks in overlap_breaks.
bool piecewise_polynomial(const Kernel& kernel, const MomentField& K) {
    return K.homogeneous() && kernel.is<Rectangular>();
}

// Kinks in y of the contraction core for the rectangular kernel.
std::vector<double> rectangular_core_breaks(double tau, double T, double x) {
    std::vector<double> b;
    for (int k = -4; k <= 4; ++k) b.push_back(x + k * tau);
    for (int k = 0; k <= 6; ++k) {
        b.push_back(k * tau);
        b.push_back(T + tau - k * tau);
    }
    return b;
}

double core(const Kernel& kernel, const JumpIntensity& intensity, const MomentField& K, double T, double x,
            double y) {
    if (K.homogeneous()) {
        if (kernel.is<OrnsteinUhlenbeck>()) return K(2, 0.0) * ou_core(kernel.as<OrnsteinUhlenbeck>().kappa, T, x, y);
        if (kernel.is<DykstraLaud>()) return K(2, 0.0) * dl_core(T, x, y);
    }
    if (piecewise_polynomial(kernel, K)) {
        auto breaks = overlap_breaks(kernel, T, x);
        append(breaks, overlap_breaks(kernel, T, y));
        const Interval w = location_window(kernel, T);
        return K(2, 0.0) * integrate_polynomial_pieces(
                               [&](double u) { return Q_T(kernel, T, x, u) * Q_T(kernel, T, y, u); }, w.lo, w.hi,
                               breaks);
    }
    auto breaks = inner_breaks(kernel, intensity, T, x);
    append(breaks, overlap_breaks(kernel, T, y));
    const Interval w = location_window(kernel, T);
    auto f = [&](double u) { return K(2, u) * Q_T(kernel, T, x, u) * Q_T(kernel, T, y, u); };
    return integrate_locations(intensity, f, w, breaks, kInnerTol).value;
}

}  // namespace

double contraction_core(const Kernel& kernel, const JumpIntensity& intensity, double T, double x, double y) {
    return core(kernel, intensity, MomentField(intensity), T, x, y);
}

ContractionNorms contraction_norms(const Kernel& kernel, const JumpIntensity& intensity, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    const MomentField K(intensity);
    ContractionNorms out;
    const double T2 = T * T;
    const double T4 = T2 * T2;

    const bool exact = piecewise_polynomial(kernel, K);
    bool inner_ok = true;
    auto r2 = [&](double x) {
        if (exact) {
            const Interval w = location_window(kernel, T);
            return K(2, 0.0) * integrate_polynomial_pieces(
                                   [&](double y) {
                                       const double q = Q_T(kernel, T, x, y);
                                       return q * q;
                                   },
                                   w.lo, w.hi, overlap_breaks(kernel, T, x));
        }
        const auto r = inner(kernel, intensity, T, x, [&](double y) {
            const double q = Q_T(kernel, T, x, y);
            return K(2, y) * q * q;
        });
        inner_ok = inner_ok && r.converged;
        return r.value;
    };
    auto r4 = [&](double x) {
        if (exact) {
            const Interval w = location_window(kernel, T);
            return K(4, 0.0) * integrate_polynomial_pieces(
                                   [&](double y) {
                                       const double q = Q_T(kernel, T, x, y);
                                       return q * q * q * q;
                                   },
                                   w.lo, w.hi, overlap_breaks(kernel, T, x));
        }
        const auto r = inner(kernel, intensity, T, x, [&](double y) {
            const double q = Q_T(kernel, T, x, y);
            const double q2 = q * q;
            return K(4, y) * q2 * q2;
        });
        inner_ok = inner_ok && r.converged;
        return r.value;
    };

    inner_ok = true;
    auto n1 = outer(kernel, intensity, T, [&](double x) { return K(2, x) * r2(x); });
    out.value[0] = n1.value / T2;
    out.converged[0] = n1.converged && inner_ok;

    inner_ok = true;
    auto n2 = outer(kernel, intensity, T, [&](double x) { return K(4, x) * r4(x); });
    out.value[1] = n2.value / T4;
    out.converged[1] = n2.converged && inner_ok;

    inner_ok = true;
    auto n3 = outer(kernel, intensity, T, [&](double x) {
        auto breaks = inner_breaks(kernel, intensity, T, x);
        if (kernel.is<Rectangular>()) append(breaks, rectangular_core_breaks(kernel.as<Rectangular>().tau, T, x));
        const Interval w = location_window(kernel, T);
        if (exact) {
            const double v = integrate_polynomial_pieces(
                [&](double y) {
                    const double p = core(kernel, intensity, K, T, x, y);
                    return p * p;
                },
                w.lo, w.hi, breaks);
            return K(2, 0.0) * K(2, 0.0) * v;
        }
        const auto r = integrate_locations(
            intensity,
            [&](double y) {
                const double p = core(kernel, intensity, K, T, x, y);
                return K(2, y) * p * p;
            },
            w, breaks, kInnerTol);
        inner_ok = inner_ok && r.converged;
        return K(2, x) * r.value;
    });
    out.value[2] = n3.value / T4;
    out.converged[2] = n3.converged && inner_ok;

    inner_ok = true;
    auto n4 = outer(kernel, intensity, T, [&](double x) {
        const double r = r2(x);
        return K(4, x) * r * r;
    });
    out.value[3] = n4.value / T4;
    out.converged[3] = n4.converged && inner_ok;

    auto n5 = outer(kernel, intensity, T, [&](double x) {
        const double q = Q_T(kernel, T, x, x) / T;
        const double g = kT3(kernel, intensity, T, x);
        return K(4, x) * q * q + 4.0 * K(3, x) * q * g + 4.0 * K(2, x) * g * g;
    });
    out.value[4] = n5.value;
    out.converged[4] = n5.converged;

    auto n6 = outer(kernel, intensity, T, [&](double x) {
        const double q = Q_T(kernel, T, x, x) / T;
        const double g = kT3(kernel, intensity, T, x);
        return K(6, x) * q * q * q + 6.0 * K(5, x) * q * q * g + 12.0 * K(4, x) * q * g * g +
               8.0 * K(3, x) * g * g * g;
    });
    out.value[5] = n6.value;
    out.converged[5] = n6.converged;
    for (double& v : out.value) v = std::max(v, 0.0);
    return out;
}

QuadResult combined_norm(const Kernel& kernel, const JumpIntensity& intensity, double T, double c1, double c0,
                         double delta) {
    const MomentField K(intensity);
    auto r = outer(kernel, intensity, T, [&](double x) {
        const double a = c1 * Q_T(kernel, T, x, x) / T;
        const double b = 2.0 * c1 * kT3(kernel, intensity, T, x) - delta * c0 * K_T(kernel, T, x);
        return K(4, x) * a * a + 2.0 * K(3, x) * a * b + K(2, x) * b * b;
    });
    r.value = std::max(r.value, 0.0);
    return r;
}

SlopeFit fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw std::invalid_argument("fit_slope: t and y differ in length");
    if (t.size() < 2) throw std::invalid_argument("fit_slope: need at least two points");
    std::vector<std::vector<double>> rows;
    std::vector<double> ly;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(y[i] > 0.0)) throw std::invalid_argument("fit_slope: y values must be positive");
        if (!(t[i] > 0.0)) throw std::invalid_argument("fit_slope: t values must be positive");
        rows.push_back({1.0, std::log(t[i])});
        ly.push_back(std::log(y[i]));
    }
    const auto ls = least_squares(rows, ly);
    return {ls.coefficients[1], ls.coefficients[0], ls.r2};
}

PowerLogFit fit_power_log(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw std::invalid_argument("fit_power_log: t and y differ in length");
    if (t.size() < 4) throw std::invalid_argument("fit_power_log: need at least four points");
    std::vector<std::vector<double>> rows;
    std::vector<double> ly;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(y[i] > 0.0)) throw std::invalid_argument("fit_power_log: y values must be positive");
        if (!(t[i] > 1.0)) throw std::invalid_argument("fit_power_log: t values must exceed 1");
        const double lt = std::log(t[i]);
        rows.push_back({1.0, lt, std::log(lt)});
        ly.push_back(std::log(y[i]));
    }
    const auto ls = least_squares(rows, ly);
    return {ls.coefficients[0], ls.coefficients[1], ls.coefficients[2], ls.r2};
}

std::string to_string(Behaviour b) {
    switch (b) {
        case Behaviour::Converges:
            return "converges";
        case Behaviour::Vanishes:
            return "vanishes";
        case Behaviour::Diverges:
            return "diverges";
    }
    return "";
}

Behaviour parse_behaviour(const std::string& text) {
    if (text == "converges") return Behaviour::Converges;
    if (text == "vanishes") return Behaviour::Vanishes;
    if (text == "diverges") return Behaviour::Diverges;
    throw std::invalid_argument("unknown behaviour '" + text + "' (expected converges, vanishes or diverges)");
}

std::string verdict_name(const Verdict& v) {
    return std::visit(overloaded{
                          [](const ConvergesToPositive&) { return std::string("converges-to-positive"); },
                          [](const VanishesWithSlope&) { return std::string("vanishes-with-slope"); },
                          [](const Diverges&) { return std::string("diverges"); },
                          [](const Inconclusive&) { return std::string("inconclusive"); },
                      },
                      v);
}

bool matches(const Verdict& v, Behaviour b) {
    switch (b) {
        case Behaviour::Converges:
            return std::holds_alternative<ConvergesToPositive>(v);
        case Behaviour::Vanishes:
            return std::holds_alternative<VanishesWithSlope>(v);
        case Behaviour::Diverges:
            return std::holds_alternative<Diverges>(v);
    }
    return false;
}

Verdict classify(const std::vector<double>& t, const std::vector<double>& y, bool log_corrected) {
    constexpr double kR2 = 0.99;
    if (t.size() != y.size() || t.size() < 4) return Inconclusive{"need at least four grid points"};
    for (double v : y) {
        if (!std::isfinite(v)) return Inconclusive{"non-finite value"};
        if (!(v > 0.0)) return Inconclusive{"non-positive value"};
    }
    double slope = 0.0;
    double r2 = 0.0;
    if (log_corrected) {
        const auto pl = fit_power_log(t, y);
        slope = pl.p + pl.q / std::log(t.back());
        r2 = pl.r2;
    } else {
        const auto sf = fit_slope(t, y);
        slope = sf.slope;
        r2 = sf.r2;
    }
    auto power_verdict = [&]() -> Verdict {
        if (slope < 0.0) return VanishesWithSlope{slope, r2};
        return Diverges{slope, r2};
    };
    if (r2 >= kR2 && std::abs(slope) >= 0.25) return power_verdict();

    const double last = y.back();
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    double best_r2 = -1.0;
    double limit = last;
    if (*hi - *lo <= 1e-9 * *hi) {
        best_r2 = 1.0;
        limit = last;
    } else {
        const std::array<double (*)(double), 3> basis{
            [](double T) { return 1.0 / T; },
            [](double T) { return 1.0 / std::sqrt(T); },
            [](double T) { return 1.0 / std::log(T); },
        };
        for (auto phi : basis) {
            std::vector<std::vector<double>> rows;
            for (double T : t) rows.push_back({1.0, phi(T)});
            const auto ls = least_squares(rows, y);
            if (ls.r2 > best_r2) {
                best_r2 = ls.r2;
                limit = ls.coefficients[0];
            }
        }
    }
    if (best_r2 >= kR2 && limit > 0.0 && std::abs(limit - last) <= 0.5 * last) return ConvergesToPositive{limit};
    if (r2 >= kR2 && std::abs(slope) >= 0.05) return power_verdict();
    return Inconclusive{"no trend or limit fit reached R^2 >= 0.99 (slope " + format_double(slope) + ", R^2 " +
                        format_double(r2) + ")"};
}

bool ConditionReport::all_as_expected() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const ConditionSeries& c) { return c.as_expected; });
}

std::map<int, Behaviour> default_expectations(Theorem theorem) {
    switch (theorem) {
        case Theorem::CumHaz:
            return {{1, Behaviour::Converges}, {2, Behaviour::Vanishes}};
        case Theorem::Path2nd:
            return {{1, Behaviour::Converges}, {2, Behaviour::Vanishes}, {3, Behaviour::Vanishes},
                    {4, Behaviour::Vanishes},  {5, Behaviour::Converges}, {6, Behaviour::Vanishes}};
        case Theorem::PathVar:
            return {{1, Behaviour::Vanishes}, {2, Behaviour::Converges}, {3, Behaviour::Converges}};
    }
    return {};
}

ConditionReport check_theorem(const Kernel& kernel, const JumpIntensity& intensity, Theorem theorem,
                              const RateFunction& rate, const std::vector<double>& t_grid,
                              std::optional<RateFunction> rate0, const std::map<int, Behaviour>& expect) {
    if (t_grid.size() < 4) throw std::invalid_argument("t_grid needs at least four horizons");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 1.0) || !std::isfinite(t_grid[i]))
            throw std::invalid_argument("t_grid horizons must be finite and greater than 1");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("t_grid must be strictly increasing");
    }
    ConditionReport report{theorem, kernel.describe(), intensity.describe(), rate, rate0, t_grid, {}, {}, {}};
    const std::size_t n = t_grid.size();
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<bool>> ok;
    bool log_corrected = std::holds_alternative<PowerLog>(rate.form());

    auto allocate = [&](std::vector<std::string> names) {
        labels = std::move(names);
        values.assign(labels.size(), std::vector<double>(n, 0.0));
        ok.assign(labels.size(), std::vector<bool>(n, true));
    };

    if (theorem == Theorem::CumHaz) {
        allocate({"C0^2 I2", "C0^3 I3"});
        parallel_for(n, [&](std::size_t i) {
            const double T = t_grid[i];
            const double c = rate(T);
            const auto i2 = I_moments(kernel, intensity, T, 2);
            const auto i3 = I_moments(kernel, intensity, T, 3);
            values[0][i] = c * c * i2.value;
            values[1][i] = c * c * c * i3.value;
            ok[0][i] = i2.converged;
            ok[1][i] = i3.converged;
        });
    } else if (theorem == Theorem::Path2nd) {
        allocate({"2 C1^2 ||k1||^2", "C1^4 ||k1||^4_L4", "C1^4 ||k1*11k1||^2", "C1^4 ||k1*21k1||^2",
                  "C1^2 ||k2+2k3||^2", "C1^3 ||k2+2k3||^3_L3"});
        parallel_for(n, [&](std::size_t i) {
            const double T = t_grid[i];
            const double c = rate(T);
            const auto norms = contraction_norms(kernel, intensity, T);
            const std::array<double, 6> scale{2.0 * c * c, std::pow(c, 4), std::pow(c, 4), std::pow(c, 4), c * c,
                                              c * c * c};
            for (int k = 0; k < 6; ++k) {
                values[k][i] = scale[k] * norms.value[k];
                ok[k][i] = norms.converged[k];
            }
        });
    } else {
        if (!rate0) {
            const auto cat = regime(kernel, intensity, Functional::CumulativeHazard);
            if (const auto* spec = std::get_if<RegimeSpec>(&cat)) {
                rate0 = spec->rate;
            } else {
                throw std::invalid_argument("path-variance check needs a C0 rate: no cumulative-hazard regime for " +
                                            kernel.describe() + " with " + intensity.describe() +
                                            "; supply rate0");
            }
        }
        report.rate0 = rate0;
        allocate({"C1 / (T C0)^2", "2 C1 E[H(T)] / (T^2 C0)", "||C1 (k2+2k3) - delta C0 k0||^2"});
        std::vector<double> c0(n);
        parallel_for(n, [&](std::size_t i) {
            const double T = t_grid[i];
            const double c1 = rate(T);
            c0[i] = (*rate0)(T);
            const auto i1 = I_moments(kernel, intensity, T, 1);
            values[0][i] = c1 / std::pow(T * c0[i], 2);
            values[1][i] = 2.0 * c1 * i1.value / (T * T * c0[i]);
            ok[1][i] = i1.converged;
        });
        const auto cat = regime_pathvar(kernel, intensity);
        if (const auto* spec = std::get_if<RegimeSpec>(&cat); spec && spec->delta) {
            report.delta = *spec->delta;
            report.delta_source = "catalog";
        } else {
            const Verdict v = classify(t_grid, values[1]);
            if (const auto* c = std::get_if<ConvergesToPositive>(&v)) {
                report.delta = c->limit;
                report.delta_source = "fitted limit";
            } else {
                report.delta = values[1].back();
                report.delta_source = "largest horizon";
            }
        }
        parallel_for(n, [&](std::size_t i) {
            const double T = t_grid[i];
            const auto r = combined_norm(kernel, intensity, T, rate(T), c0[i], *report.delta);
            values[2][i] = r.value;
            ok[2][i] = r.converged;
        });
        log_corrected = false;
    }

    auto expectations = default_expectations(theorem);
    for (const auto& [k, b] : expect) {
        if (k < 1 || k > static_cast<int>(labels.size()))
            throw std::invalid_argument("expectation for unknown condition " + std::to_string(k));
        expectations[k] = b;
    }
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const int index = static_cast<int>(k) + 1;
        const bool lc = log_corrected && !(theorem == Theorem::PathVar);
        Verdict v = classify(t_grid, values[k], lc);
        const bool all_ok = std::all_of(ok[k].begin(), ok[k].end(), [](bool b) { return b; });
        const Behaviour b = expectations.at(index);
        report.conditions.push_back({index, labels[k], values[k], all_ok, v, b, matches(v, b)});
    }
    return report;
}

ComparisonReport sandwich_compare(const Kernel& kernel_lo, const Kernel& kernel_hi, const JumpIntensity& intensity_lo,
                                  const JumpIntensity& intensity_hi, const Kernel& target_kernel,
                                  const JumpIntensity& target_intensity, const std::vector<double>& t_grid,
                                  std::optional<RateFunction> rate) {
    if (t_grid.size() < 2) throw std::invalid_argument("sandwich_compare needs at least two horizons");
    const double t_max = t_grid.back();
    double x_max = 0.0;
    for (const Kernel* k : {&kernel_lo, &kernel_hi, &target_kernel})
        x_max = std::max(x_max, location_window(*k, t_max).hi);
    constexpr int kGrid = 200;
    constexpr double kSlack = 1e-12;
    for (int i = 0; i < kGrid; ++i) {
        const double t = t_max * i / (kGrid - 1);
        for (int j = 0; j < kGrid; ++j) {
            const double x = x_max * j / (kGrid - 1);
            const double lo = eval(kernel_lo, t, x);
            const double mid = eval(target_kernel, t, x);
            const double hi = eval(kernel_hi, t, x);
            if (lo > mid + kSlack || mid > hi + kSlack)
                throw PreconditionError("kernel dominance violated at t=" + format_double(t) +
                                        ", x=" + format_double(x));
        }
    }
    const double v_top = std::min(target_intensity.max_jump(), 50.0);
    for (int j = 0; j < kGrid; ++j) {
        const double x = x_max * j / (kGrid - 1);
        for (int m = 0; m < 60; ++m) {
            double v = std::exp(std::log(1e-6) + (std::log(v_top) - std::log(1e-6)) * m / 60.0);
            if (v >= target_intensity.max_jump()) v = std::nextafter(target_intensity.max_jump(), 0.0);
            const double lo = levy_density(intensity_lo, v, x);
            const double mid = levy_density(target_intensity, v, x);
            const double hi = levy_density(intensity_hi, v, x);
            if (lo > mid * (1.0 + kSlack) || mid > hi * (1.0 + kSlack))
                throw PreconditionError("intensity dominance violated at v=" + format_double(v) +
                                        ", x=" + format_double(x));
        }
    }
    ComparisonReport rep;
    rep.t_grid = t_grid;
    const std::size_t n = t_grid.size();
    rep.i2_lo.assign(n, 0.0);
    rep.i2_target.assign(n, 0.0);
    rep.i2_hi.assign(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const double T = t_grid[i];
        rep.i2_lo[i] = I_moments(kernel_lo, intensity_lo, T, 2).value;
        rep.i2_target[i] = I_moments(target_kernel, target_intensity, T, 2).value;
        rep.i2_hi[i] = I_moments(kernel_hi, intensity_hi, T, 2).value;
    });
    rep.all_bracketed = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double tol = 1e-9 * rep.i2_hi[i];
        const bool b = rep.i2_lo[i] <= rep.i2_target[i] + tol && rep.i2_target[i] <= rep.i2_hi[i] + tol;
        rep.bracketed.push_back(b);
        rep.all_bracketed = rep.all_bracketed && b;
    }
    std::vector<double> ratio;
    for (std::size_t i = 0; i < n; ++i) ratio.push_back(std::sqrt(rep.i2_hi[i] / rep.i2_lo[i]));
    rep.rate_ratio_slope = fit_slope(t_grid, ratio).slope;
    rep.rates_equivalent = std::abs(rep.rate_ratio_slope) <= 0.05;
    if (!rate) {
        const auto cat = regime(target_kernel, target_intensity, Functional::CumulativeHazard);
        if (const auto* spec = std::get_if<RegimeSpec>(&cat)) rate = spec->rate;
    }
    if (rate) {
        const double c = (*rate)(t_max);
        rep.variance_interval = std::array<double, 2>{c * c * rep.i2_lo.back(), c * c * rep.i2_hi.back()};
    }
    return rep;
}

}  // namespace hazardlab
