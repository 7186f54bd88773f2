#include <doctest.h>

#include <cmath>
#include <vector>

#include "hazardlab/kernels.hpp"
#include "support.hpp"

using namespace hazardlab;
using testing_support::Draws;
using testing_support::piecewise_integral;
using testing_support::rel_err;

namespace {

double oracle_k(const Kernel& kernel, double t, double x) {
    if (kernel.is<Rectangular>()) return std::abs(t - x) <= kernel.as<Rectangular>().tau ? 1.0 : 0.0;
    if (kernel.is<DykstraLaud>()) return x <= t ? 1.0 : 0.0;
    if (kernel.is<OrnsteinUhlenbeck>()) {
        const double kappa = kernel.as<OrnsteinUhlenbeck>().kappa;
        return x <= t ? std::sqrt(2.0 * kappa) * std::exp(-kappa * (t - x)) : 0.0;
    }
    return std::abs(t - kernel.as<UShaped>().beta_center) >= x ? 1.0 : 0.0;
}

// Points in t where t -> k(t, x) jumps.
std::vector<double> time_cuts(const Kernel& kernel, double x) {
    if (kernel.is<Rectangular>()) return {x - kernel.as<Rectangular>().tau, x + kernel.as<Rectangular>().tau};
    if (kernel.is<UShaped>()) return {kernel.as<UShaped>().beta_center - x, kernel.as<UShaped>().beta_center + x};
    return {x};
}

double parameter_of(const Kernel& kernel) {
    if (kernel.is<Rectangular>()) return kernel.as<Rectangular>().tau;
    if (kernel.is<UShaped>()) return kernel.as<UShaped>().beta_center;
    return 0.0;
}

double oracle_K(const Kernel& kernel, double T, double x) {
    return piecewise_integral([&](double t) { return oracle_k(kernel, t, x); }, 0.0, T, time_cuts(kernel, x));
}

double oracle_Q(const Kernel& kernel, double T, double x, double y) {
    auto cuts = time_cuts(kernel, x);
    for (double c : time_cuts(kernel, y)) cuts.push_back(c);
    return piecewise_integral([&](double t) { return oracle_k(kernel, t, x) * oracle_k(kernel, t, y); }, 0.0, T,
                              cuts);
}

double oracle_mean(const Kernel& kernel, const JumpIntensity& intensity, double t, double upper) {
    auto k1 = [&](double w) { return intensity.is_homogeneous() ? moment(intensity, 1) : moment(intensity, 1, w); };
    const double p = parameter_of(kernel);
    std::vector<double> cuts{t - p, t + p, t, std::abs(t - p)};
    for (double c : intensity.kinks()) cuts.push_back(c);
    // w = u^2 smooths the sqrt behaviour of K1 at the origin.
    for (double& c : cuts) c = c > 0.0 ? std::sqrt(c) : -1.0;
    return piecewise_integral([&](double u) { return 2.0 * u * k1(u * u) * oracle_k(kernel, t, u * u); }, 0.0,
                              std::sqrt(upper), cuts);
}

// (1/T) int_0^T k(t,x) int_0^upper K1(w) k(t,w) dw dt
double oracle_kT3(const Kernel& kernel, const JumpIntensity& intensity, double T, double x, double upper) {
    auto cuts = time_cuts(kernel, x);
    const double p = parameter_of(kernel);
    cuts.push_back(p);
    cuts.push_back(upper - p);
    cuts.push_back(upper + p);
    for (double c : intensity.kinks())
        for (double shift : {-p, 0.0, p}) cuts.push_back(c + shift);
    return piecewise_integral(
               [&](double t) { return oracle_k(kernel, t, x) * oracle_mean(kernel, intensity, t, upper); }, 0.0, T,
               cuts) /
           T;
}

bool close(double got, double want, double rel) {
    return std::abs(got - want) <= rel * std::abs(want) + 1e-14;
}

std::vector<Kernel> random_kernels(Draws& d) {
    return {Rectangular{d.uniform(0.2, 3.0)}, DykstraLaud{}, OrnsteinUhlenbeck{d.uniform(0.2, 3.0)},
            UShaped{d.uniform(0.5, 5.0)}};
}

}  // namespace

TEST_CASE("kernel values") {
    CHECK(eval(Rectangular{1.0}, 2.0, 2.5) == 1.0);
    CHECK(eval(Rectangular{1.0}, 2.0, 3.5) == 0.0);
    CHECK(eval(DykstraLaud{}, 1.0, 2.0) == 0.0);
    CHECK(eval(DykstraLaud{}, 2.0, 1.0) == 1.0);
    CHECK(eval(OrnsteinUhlenbeck{2.0}, 3.0, 3.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(eval(OrnsteinUhlenbeck{2.0}, 3.5, 3.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));
    CHECK(eval(UShaped{2.0}, 0.5, 1.0) == 1.0);
    CHECK(eval(UShaped{2.0}, 2.5, 1.0) == 0.0);
}

TEST_CASE("cumulative kernel reference values") {
    CHECK(K_T(Rectangular{1.0}, 10.0, 5.0) == doctest::Approx(2.0));
    CHECK(K_T(Rectangular{1.0}, 10.0, 0.5) == doctest::Approx(1.5));
    CHECK(K_T(Rectangular{1.0}, 10.0, 10.5) == doctest::Approx(0.5));
    CHECK(K_T(Rectangular{1.0}, 10.0, 11.5) == 0.0);
    CHECK(K_T(DykstraLaud{}, 3.0, 1.0) == doctest::Approx(2.0));
    CHECK(K_T(UShaped{2.0}, 10.0, 1.0) == doctest::Approx(8.0));
    CHECK(K_T(UShaped{2.0}, 10.0, 3.0) == doctest::Approx(5.0));
    CHECK(K_T(OrnsteinUhlenbeck{2.0}, 5.0, 1.0) ==
          doctest::Approx(std::sqrt(2.0 / 2.0) * (1.0 - std::exp(-8.0))).epsilon(1e-14));
    CHECK_THROWS_AS(K_T(DykstraLaud{}, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(K_T(DykstraLaud{}, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("overlap reference values") {
    CHECK(Q_T(OrnsteinUhlenbeck{1.0}, 20.0, 0.0, 0.0) == doctest::Approx(1.0 - std::exp(-40.0)).epsilon(1e-15));
    CHECK(Q_T(Rectangular{1.0}, 20.0, 5.0, 5.0) == doctest::Approx(2.0));
    CHECK(Q_T(DykstraLaud{}, 3.0, 1.0, 2.0) == doctest::Approx(1.0));
    CHECK(Q_T(Rectangular{1.0}, 20.0, 5.0, 6.5) == doctest::Approx(0.5));
    CHECK(Q_T(OrnsteinUhlenbeck{1.0}, 10.0, 1.0, 3.0) ==
          doctest::Approx(std::exp(4.0) * (std::exp(-6.0) - std::exp(-20.0))).epsilon(1e-14));
    CHECK_THROWS_AS(Q_T(DykstraLaud{}, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("location windows") {
    CHECK(location_window(Rectangular{2.0}, 10.0) == Interval{0.0, 12.0});
    CHECK(location_window(DykstraLaud{}, 5.0) == Interval{0.0, 5.0});
    CHECK(location_window(OrnsteinUhlenbeck{1.0}, 5.0) == Interval{0.0, 5.0});
    CHECK(location_window(UShaped{3.0}, 4.0) == Interval{0.0, 3.0});
    CHECK(location_window(UShaped{3.0}, 10.0) == Interval{0.0, 7.0});
    for (double t = 0.0; t <= 4.0; t += 0.01)
        for (double x : {3.0001, 3.5, 10.0}) CHECK(eval(UShaped{3.0}, t, x) == 0.0);
}

TEST_CASE("closed forms match quadrature on random draws") {
    Draws d(77);
    for (int draw = 0; draw < 100; ++draw) {
        const double T = d.uniform(0.3, 30.0);
        for (const auto& k : random_kernels(d)) {
            const auto w = location_window(k, T);
            const double x = d.uniform(0.0, 1.1 * w.hi);
            const double y = d.uniform(0.0, 1.1 * w.hi);
            INFO(k.describe(), " T ", T, " x ", x, " y ", y);
            CHECK(close(K_T(k, T, x), oracle_K(k, T, x), 1e-10));
            CHECK(close(Q_T(k, T, x, y), oracle_Q(k, T, x, y), 1e-10));
            CHECK(close(Q_T(k, T, x, x), oracle_Q(k, T, x, x), 1e-10));
        }
    }
}

TEST_CASE("mean hazard") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const double k1 = moment(gg, 1);
    CHECK(mean_hazard(Rectangular{0.7}, gg, 3.0) == doctest::Approx(1.4 * k1));
    CHECK(mean_hazard(Rectangular{0.7}, gg, 0.2) == doctest::Approx(0.9 * k1));
    CHECK(mean_hazard(DykstraLaud{}, gg, 4.0) == doctest::Approx(4.0 * k1));
    CHECK(mean_hazard(DykstraLaud{}, gg, 0.0) == 0.0);
    CHECK(mean_hazard(OrnsteinUhlenbeck{1.0}, gg, 0.0) == 0.0);
    CHECK(mean_hazard(UShaped{2.0}, gg, 2.0) == 0.0);
    CHECK(mean_hazard(UShaped{2.0}, gg, 0.0) == doctest::Approx(2.0 * k1));

    Draws d(5);
    const std::vector<JumpIntensity> intensities{gg, ExtendedGamma{AffineSqrt{1.0, 1.0}}, Beta{IndicatorSqrt{1.0}}};
    for (int draw = 0; draw < 30; ++draw)
        for (const auto& f : intensities)
            for (const auto& k : random_kernels(d)) {
                const double t = d.uniform(0.0, 20.0);
                const double upper = t + parameter_of(k) + 1.0;
                INFO(k.describe(), " ", f.describe(), " t ", t);
                CHECK(close(mean_hazard(k, f, t), oracle_mean(k, f, t, upper), 1e-9));
            }
}

TEST_CASE("rectangular third kernel reference values") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const Kernel rect = Rectangular{1.0};
    CHECK(rel_err(kT3(rect, gg, 20.0, 10.0), 0.2) < 1e-12);
    CHECK(rel_err(kT3(rect, gg, 20.0, 0.5), 0.125) < 1e-12);
    CHECK(rel_err(kT3(rect, gg, 20.0, 1.5), 0.19375) < 1e-12);
    CHECK(rel_err(kT3(rect, gg, 20.0, 19.5), 0.15) < 1e-12);
    CHECK(rel_err(kT3(rect, gg, 20.0, 20.5), 0.05) < 1e-12);
    CHECK(kT3(rect, gg, 20.0, 21.5) == 0.0);
    // The one-sided bulk value 2 tau^2 K1 / T is half of the full overlap integral.
    const double one_sided = oracle_kT3(rect, gg, 20.0, 10.0, 10.0);
    CHECK(rel_err(one_sided, 2.0 / 20.0) < 1e-10);
    CHECK(rel_err(kT3(rect, gg, 20.0, 10.0), 2.0 * one_sided) < 1e-10);
}

TEST_CASE("ornstein-uhlenbeck third kernel reference value") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const Kernel ou = OrnsteinUhlenbeck{1.0};
    const double T = 10.0;
    const double x = 1.0;
    CHECK(rel_err(kT3(ou, gg, T, x), 0.16318737448231808) < 1e-12);
    CHECK(rel_err(kT3(ou, gg, T, x), oracle_kT3(ou, gg, T, x, T)) < 1e-7);
    // The displayed closed form restricted to w <= x reproduces only that half of the overlap.
    const double displayed = (1.0 / T) * (std::exp(-2.0 * T) - std::exp(-2.0 * x)) * (std::exp(x) - std::exp(2.0 * x));
    CHECK(rel_err(displayed, oracle_kT3(ou, gg, T, x, x)) < 1e-7);
    CHECK(kT3(ou, gg, T, 10.5) == 0.0);
}

TEST_CASE("third kernel matches nested quadrature on random draws") {
    Draws d(31);
    const std::vector<JumpIntensity> intensities{GeneralizedGamma{0.5, 1.0}, ExtendedGamma{Constant{2.0}},
                                                 ExtendedGamma{AffineSqrt{1.0, 1.0}}, Beta{IndicatorSqrt{1.0}}};
    for (int draw = 0; draw < 100; ++draw) {
        const auto& f = intensities[draw % intensities.size()];
        const double T = d.uniform(0.5, 20.0);
        for (const auto& k : random_kernels(d)) {
            if (!f.is_homogeneous() && !(k.is<DykstraLaud>() || k.is<Rectangular>())) continue;
            const auto w = location_window(k, T);
            const double x = d.uniform(0.0, 1.05 * w.hi);
            const double upper = T + parameter_of(k) + 1.0;
            INFO(k.describe(), " ", f.describe(), " T ", T, " x ", x);
            CHECK(close(kT3(k, f, T, x), oracle_kT3(k, f, T, x, upper), 1e-7));
        }
    }
}

TEST_CASE("structural properties") {
    Draws d(11);
    for (int draw = 0; draw < 100; ++draw) {
        const double T = d.uniform(0.5, 30.0);
        for (const auto& k : random_kernels(d)) {
            const auto w = location_window(k, T);
            const double x = d.uniform(0.0, w.hi);
            const double y = d.uniform(0.0, w.hi);
            const double qxy = Q_T(k, T, x, y);
            CHECK(qxy == Q_T(k, T, y, x));
            CHECK(qxy >= 0.0);
            CHECK(qxy * qxy <= Q_T(k, T, x, x) * Q_T(k, T, y, y) * (1.0 + 1e-12) + 1e-300);
            CHECK(Q_T(k, T, x, x) <= K_T(k, T, x) * k.peak() * (1.0 + 1e-12));
            if (k.is_indicator()) CHECK(Q_T(k, T, x, x) == doctest::Approx(K_T(k, T, x)).epsilon(1e-14));
            CHECK(K_T(k, T, x) <= K_T(k, T + d.uniform(0.0, 5.0), x) + 1e-15);
        }
    }
}

TEST_CASE("cumulative kernel is continuous in the location") {
    const std::vector<Kernel> kernels{Rectangular{1.3}, DykstraLaud{}, OrnsteinUhlenbeck{2.0}};
    const double T = 12.0;
    const int n = 20000;
    for (const auto& k : kernels) {
        const double h = 1.2 * T / n;
        // K_T is Lipschitz with constant sup_t k(t, x) in x.
        const double bound = k.peak() * h * (1.0 + 1e-9);
        double previous = K_T(k, T, 0.0);
        for (int i = 1; i <= n; ++i) {
            const double v = K_T(k, T, i * h);
            CHECK(std::abs(v - previous) <= bound);
            previous = v;
        }
    }
}
