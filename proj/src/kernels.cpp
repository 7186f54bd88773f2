#include "hazardlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hazardlab/numeric.hpp"
#include "hazardlab/text.hpp"

namespace hazardlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_horizon(double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon T must be positive and finite");
}

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

// Length of {t in [0,T] : |t - beta| >= m}.
double ushaped_length(double beta, double T, double m) {
    const double left = positive_part(std::min(beta - m, T));
    const double right = positive_part(T - beta - m);
    return left + right;
}

// int_0^u min(2 tau, t + tau) dt
double rectangular_mean_primitive(double tau, double u) {
    if (u <= tau) return 0.5 * u * u + tau * u;
    return 1.5 * tau * tau + 2.0 * tau * (u - tau);
}

}  // namespace

Kernel::Kernel(Form form) : form_(form) {
    std::visit(overloaded{
                   [](const Rectangular& k) {
                       if (!(k.tau > 0.0) || !std::isfinite(k.tau))
                           throw std::invalid_argument("rectangular kernel requires tau > 0");
                   },
                   [](const DykstraLaud&) {},
                   [](const OrnsteinUhlenbeck& k) {
                       if (!(k.kappa > 0.0) || !std::isfinite(k.kappa))
                           throw std::invalid_argument("ornstein-uhlenbeck kernel requires kappa > 0");
                   },
                   [](const UShaped& k) {
                       if (!(k.beta_center > 0.0) || !std::isfinite(k.beta_center))
                           throw std::invalid_argument("u-shaped kernel requires beta > 0");
                   },
               },
               form_);
}

double Kernel::peak() const {
    if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&form_)) return std::sqrt(2.0 * ou->kappa);
    return 1.0;
}

std::string Kernel::name() const {
    return std::visit(overloaded{
                          [](const Rectangular&) { return std::string("rectangular"); },
                          [](const DykstraLaud&) { return std::string("dykstra-laud"); },
                          [](const OrnsteinUhlenbeck&) { return std::string("ornstein-uhlenbeck"); },
                          [](const UShaped&) { return std::string("u-shaped"); },
                      },
                      form_);
}

std::string Kernel::describe() const {
    return std::visit(overloaded{
                          [](const Rectangular& k) { return "rectangular(tau=" + format_double(k.tau) + ")"; },
                          [](const DykstraLaud&) { return std::string("dykstra-laud"); },
                          [](const OrnsteinUhlenbeck& k) {
                              return "ornstein-uhlenbeck(kappa=" + format_double(k.kappa) + ")";
                          },
                          [](const UShaped& k) { return "u-shaped(beta=" + format_double(k.beta_center) + ")"; },
                      },
                      form_);
}

double eval(const Kernel& kernel, double t, double x) {
    return std::visit(overloaded{
                          [&](const Rectangular& k) { return std::abs(t - x) <= k.tau ? 1.0 : 0.0; },
                          [&](const DykstraLaud&) { return (x >= 0.0 && x <= t) ? 1.0 : 0.0; },
                          [&](const OrnsteinUhlenbeck& k) {
                              if (!(x >= 0.0 && x <= t)) return 0.0;
                              return std::sqrt(2.0 * k.kappa) * std::exp(-k.kappa * (t - x));
                          },
                          [&](const UShaped& k) { return std::abs(t - k.beta_center) >= x ? 1.0 : 0.0; },
                      },
                      kernel.form());
}

double K_T(const Kernel& kernel, double T, double x) {
    require_horizon(T);
    return std::visit(overloaded{
                          [&](const Rectangular& k) {
                              return positive_part(std::min(T, x + k.tau) - std::max(0.0, x - k.tau));
                          },
                          [&](const DykstraLaud&) { return x < 0.0 ? 0.0 : positive_part(T - x); },
                          [&](const OrnsteinUhlenbeck& k) {
                              if (x < 0.0 || x >= T) return 0.0;
                              return -std::sqrt(2.0 / k.kappa) * std::expm1(-k.kappa * (T - x));
                          },
                          [&](const UShaped& k) { return ushaped_length(k.beta_center, T, std::max(x, 0.0)); },
                      },
                      kernel.form());
}

double Q_T(const Kernel& kernel, double T, double x, double y) {
    require_horizon(T);
    const double hi = std::max(x, y);
    const double lo = std::min(x, y);
    return std::visit(overloaded{
                          [&](const Rectangular& k) {
                              return positive_part(std::min(T, lo + k.tau) - std::max(0.0, hi - k.tau));
                          },
                          [&](const DykstraLaud&) { return lo < 0.0 ? 0.0 : positive_part(T - hi); },
                          [&](const OrnsteinUhlenbeck& k) {
                              if (lo < 0.0 || hi >= T) return 0.0;
                              return -std::exp(-k.kappa * (hi - lo)) * std::expm1(-2.0 * k.kappa * (T - hi));
                          },
                          [&](const UShaped& k) { return ushaped_length(k.beta_center, T, std::max(hi, 0.0)); },
                      },
                      kernel.form());
}

std::vector<double> slice_breaks(const Kernel& kernel, double t) {
    return std::visit(overloaded{
                          [&](const Rectangular& k) {
                              return std::vector<double>{0.0, std::max(0.0, t - k.tau), t + k.tau};
                          },
                          [&](const DykstraLaud&) { return std::vector<double>{0.0, t}; },
                          [&](const OrnsteinUhlenbeck&) { return std::vector<double>{0.0, t}; },
                          [&](const UShaped& k) { return std::vector<double>{0.0, std::abs(t - k.beta_center)}; },
                      },
                      kernel.form());
}

double mean_hazard(const Kernel& kernel, const JumpIntensity& intensity, double t) {
    if (t < 0.0) return 0.0;
    if (intensity.is_homogeneous()) {
        const double k1 = moment(intensity, 1);
        return k1 * std::visit(overloaded{
                                   [&](const Rectangular& k) { return std::min(2.0 * k.tau, t + k.tau); },
                                   [&](const DykstraLaud&) { return t; },
                                   [&](const OrnsteinUhlenbeck& k) {
                                       return -std::sqrt(2.0 / k.kappa) * std::expm1(-k.kappa * t);
                                   },
                                   [&](const UShaped& k) { return std::abs(t - k.beta_center); },
                               },
                               kernel.form());
    }
    auto breaks = slice_breaks(kernel, t);
    const double hi = *std::max_element(breaks.begin(), breaks.end());
    for (double p : intensity.kinks()) breaks.push_back(p);
    auto f = [&](double x) { return moment(intensity, 1, x) * eval(kernel, t, x); };
    return integrate_pieces(f, 0.0, hi, breaks, 1e-11).value;
}

Interval location_window(const Kernel& kernel, double T) {
    require_horizon(T);
    return std::visit(overloaded{
                          [&](const Rectangular& k) { return Interval{0.0, T + k.tau}; },
                          [&](const DykstraLaud&) { return Interval{0.0, T}; },
                          [&](const OrnsteinUhlenbeck&) { return Interval{0.0, T}; },
                          [&](const UShaped& k) {
                              return Interval{0.0, std::max(k.beta_center, T - k.beta_center)};
                          },
                      },
                      kernel.form());
}

std::vector<double> mass_breaks(const Kernel& kernel, double T) {
    return std::visit(overloaded{
                          [&](const Rectangular& k) {
                              return std::vector<double>{0.0, k.tau, T - k.tau, T + k.tau};
                          },
                          [&](const DykstraLaud&) { return std::vector<double>{0.0, T}; },
                          [&](const OrnsteinUhlenbeck& k) {
                              std::vector<double> b{0.0, T};
                              for (double s = 1.0 / k.kappa; s < T; s *= 2.0) b.push_back(T - s);
                              return b;
                          },
                          [&](const UShaped& k) {
                              const double b = k.beta_center;
                              return std::vector<double>{0.0, b, b - T, T - b};
                          },
                      },
                      kernel.form());
}

std::vector<double> overlap_breaks(const Kernel& kernel, double T, double x) {
    return std::visit(overloaded{
                          [&](const Rectangular& k) {
                              const double tau = k.tau;
                              return std::vector<double>{0.0,     tau,           T - tau,      T + tau,
                                                         x,       x - 2.0 * tau, x + 2.0 * tau};
                          },
                          [&](const DykstraLaud&) { return std::vector<double>{0.0, x, T}; },
                          [&](const OrnsteinUhlenbeck& k) {
                              std::vector<double> b{0.0, x, T};
                              for (double s = 1.0 / k.kappa; s < T; s *= 2.0) {
                                  b.push_back(x - s);
                                  b.push_back(x + s);
                                  b.push_back(T - s);
                              }
                              return b;
                          },
                          [&](const UShaped& k) {
                              const double b = k.beta_center;
                              return std::vector<double>{0.0, x, b, b - T, T - b};
                          },
                      },
                      kernel.form());
}

double kT3(const Kernel& kernel, const JumpIntensity& intensity, double T, double x) {
    require_horizon(T);
    if (K_T(kernel, T, x) <= 0.0) return 0.0;
    if (intensity.is_homogeneous()) {
        const double k1 = moment(intensity, 1);
        return k1 / T *
               std::visit(overloaded{
                              [&](const Rectangular& k) {
                                  const double a = std::max(0.0, x - k.tau);
                                  const double b = std::min(T, x + k.tau);
                                  if (!(b > a)) return 0.0;
                                  return rectangular_mean_primitive(k.tau, b) - rectangular_mean_primitive(k.tau, a);
                              },
                              [&](const DykstraLaud&) { return 0.5 * (T - x) * (T + x); },
                              [&](const OrnsteinUhlenbeck& k) {
                                  const double kap = k.kappa;
                                  const double v = 2.0 - std::exp(-kap * x) + std::exp(kap * (x - 2.0 * T)) -
                                                   2.0 * std::exp(kap * (x - T));
                                  return v / kap;
                              },
                              [&](const UShaped& k) {
                                  const double b = k.beta_center;
                                  double total = 0.0;
                                  const double u = positive_part(std::min(b - x, T));
                                  total += b * u - 0.5 * u * u;
                                  if (T > b + x) total += 0.5 * ((T - b) * (T - b) - x * x);
                                  return total;
                              },
                          },
                          kernel.form());
    }
    const Interval w = location_window(kernel, T);
    auto breaks = overlap_breaks(kernel, T, x);
    for (double p : intensity.kinks()) breaks.push_back(p);
    auto f = [&](double y) { return moment(intensity, 1, y) * Q_T(kernel, T, x, y); };
    return integrate_pieces(f, w.lo, w.hi, breaks, 1e-11).value / T;
}

}  // namespace hazardlab
