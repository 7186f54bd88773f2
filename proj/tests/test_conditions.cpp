#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hazardlab/conditions.hpp"
#include "support.hpp"

using namespace hazardlab;
using testing_support::Draws;
using testing_support::rel_err;
using testing_support::Running;

namespace {

const std::vector<double> kGrid{50.0, 100.0, 200.0, 400.0, 800.0};
const int kSamples = 1000000;

template <class V>
bool holds(const Verdict& v) {
    return std::holds_alternative<V>(v);
}

// Jump importance law with density g and Levy density rho written out from the family definitions.
struct JumpImportance {
    JumpIntensity intensity;

    double rho(double s) const {
        const auto& fam = intensity.family();
        if (const auto* gg = std::get_if<GeneralizedGamma>(&fam))
            return std::exp(-gg->gamma * s - (1.0 + gg->sigma) * std::log(s) - std::lgamma(1.0 - gg->sigma));
        if (const auto* eg = std::get_if<ExtendedGamma>(&fam)) return std::exp(-eg->beta_fn(0.0) * s) / s;
        const double c = std::get<Beta>(fam).c_fn(0.0);
        return c * std::pow(1.0 - s, c - 1.0) / s;
    }

    // Gamma(2 - sigma, gamma), Gamma(2, beta) or Beta(2, c).
    double shape() const {
        const auto& fam = intensity.family();
        if (const auto* gg = std::get_if<GeneralizedGamma>(&fam)) return 2.0 - gg->sigma;
        return 2.0;
    }
    double rate() const {
        const auto& fam = intensity.family();
        if (const auto* gg = std::get_if<GeneralizedGamma>(&fam)) return gg->gamma;
        if (const auto* eg = std::get_if<ExtendedGamma>(&fam)) return eg->beta_fn(0.0);
        return std::get<Beta>(fam).c_fn(0.0);
    }
    bool bounded() const { return std::holds_alternative<Beta>(intensity.family()); }

    double density(double s) const {
        const double a = shape();
        const double b = rate();
        if (bounded())
            return std::exp((a - 1.0) * std::log(s) + (b - 1.0) * std::log1p(-s) + std::lgamma(a + b) -
                           std::lgamma(a) - std::lgamma(b));
        return std::exp(a * std::log(b) + (a - 1.0) * std::log(s) - b * s - std::lgamma(a));
    }

    double draw(std::mt19937_64& rng) const {
        std::gamma_distribution<double> ga(shape(), 1.0);
        if (!bounded()) return ga(rng) / rate();
        std::gamma_distribution<double> gb(rate(), 1.0);
        const double x = ga(rng);
        return x / (x + gb(rng));
    }
};

struct Point {
    double s;
    double x;
    double weight;
};

// Importance-sampled estimates of the six norms over the full jump and location space.
std::array<Running, 6> monte_carlo_norms(const Kernel& kernel, const JumpIntensity& intensity, double T, int n,
                                         std::uint64_t seed) {
    const JumpImportance imp{intensity};
    const Interval w = location_window(kernel, T);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> loc(w.lo, w.hi);
    auto point = [&]() {
        const double s = imp.draw(rng);
        const double x = loc(rng);
        return Point{s, x, imp.rho(s) / imp.density(s) * w.length()};
    };
    auto f1 = [&](const Point& a, const Point& b) { return a.s * b.s / T * Q_T(kernel, T, a.x, b.x); };
    std::array<Running, 6> est;
    for (int i = 0; i < n; ++i) {
        const Point z1 = point();
        const Point z2 = point();
        const Point z3 = point();
        const Point z4 = point();
        const double a12 = f1(z1, z2);
        const double a13 = f1(z1, z3);
        const double a23 = f1(z2, z3);
        const double a14 = f1(z1, z4);
        const double a24 = f1(z2, z4);
        est[0].add(a12 * a12 * z1.weight * z2.weight);
        est[1].add(std::pow(a12, 4) * z1.weight * z2.weight);
        est[2].add(a13 * a23 * a14 * a24 * z1.weight * z2.weight * z3.weight * z4.weight);
        est[3].add(a12 * a12 * a13 * a13 * z1.weight * z2.weight * z3.weight);
        const double d = z1.s * z1.s / T * Q_T(kernel, T, z1.x, z1.x) + 2.0 * z1.s * kT3(kernel, intensity, T, z1.x);
        est[4].add(d * d * z1.weight);
        est[5].add(std::abs(d * d * d) * z1.weight);
    }
    return est;
}

}  // namespace

TEST_CASE("fit_slope on exact power laws") {
    std::vector<double> t{50.0, 100.0, 200.0, 400.0, 800.0};
    std::vector<double> y;
    for (double T : t) y.push_back(1.0 / T);
    auto f = fit_slope(t, y);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    y.clear();
    for (double T : t) y.push_back(5.0 * std::sqrt(T));
    f = fit_slope(t, y);
    CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(5.0)).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_slope with a second-order correction") {
    std::vector<double> y;
    for (double T : kGrid) y.push_back(1.0 / T + 10.0 / (T * T));
    const auto f = fit_slope(kGrid, y);
    CHECK(f.slope == doctest::Approx(-1.0592104609692274).epsilon(1e-10));
    CHECK(f.intercept == doctest::Approx(0.3864232203058982).epsilon(1e-10));
    CHECK(f.slope > -1.2);
    CHECK(f.slope < -1.0);
    CHECK(f.r2 > 0.99);
}

TEST_CASE("fit_slope rejects non-positive values") {
    CHECK_THROWS_AS(fit_slope({1.0, 2.0, 3.0, 4.0}, {1.0, 0.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope({1.0, 2.0, 3.0, 4.0}, {1.0, -1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("power-log fit recovers both exponents") {
    std::vector<double> y;
    for (double T : kGrid) y.push_back(3.0 / (T * std::sqrt(std::log(T))));
    const auto f = fit_power_log(kGrid, y);
    CHECK(f.p == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(f.q == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("verdict classification") {
    std::vector<double> vanish;
    std::vector<double> grow;
    std::vector<double> settle;
    std::vector<double> flat;
    for (double T : kGrid) {
        vanish.push_back(2.0 / T);
        grow.push_back(T * T);
        settle.push_back(3.0 + 1.0 / T);
        flat.push_back(0.25);
    }
    CHECK(holds<VanishesWithSlope>(classify(kGrid, vanish)));
    CHECK(holds<Diverges>(classify(kGrid, grow)));
    const auto c = classify(kGrid, settle);
    REQUIRE(holds<ConvergesToPositive>(c));
    CHECK(std::get<ConvergesToPositive>(c).limit == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(holds<ConvergesToPositive>(classify(kGrid, flat)));
    CHECK(holds<Inconclusive>(classify({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0})));
    CHECK(holds<Inconclusive>(classify(kGrid, {1.0, 0.0, 1.0, 1.0, 1.0})));
    CHECK(holds<Inconclusive>(classify(kGrid, {1.0, 5.0, 1.0, 5.0, 1.0})));
    CHECK(matches(VanishesWithSlope{-1.0, 1.0}, Behaviour::Vanishes));
    CHECK(!matches(Diverges{1.0, 1.0}, Behaviour::Vanishes));
    CHECK(!matches(Inconclusive{"x"}, Behaviour::Converges));
}

TEST_CASE("first three cumulative moments") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const double k1 = moment(gg, 1);
    const double k2 = moment(gg, 2);
    for (double T : {3.0, 20.0, 250.0}) {
        CHECK(rel_err(I_moments(DykstraLaud{}, gg, T, 2).value, k2 * T * T * T / 3.0) < 1e-10);
        CHECK(rel_err(I_moments(Rectangular{0.7}, gg, T, 1).value, k1 * (2.0 * T * 0.7 - 0.49 / 2.0)) < 1e-10);
        CHECK(I_moments(DykstraLaud{}, gg, T, 3).converged);
    }
    CHECK_THROWS(I_moments(DykstraLaud{}, gg, 10.0, 4));
}

TEST_CASE("second cumulative moment under a sqrt-growing extended gamma") {
    const JumpIntensity eg = ExtendedGamma{AffineSqrt{1.0, 1.0}};
    // I2 / T^2 - log T tends to -7/2; the ratio to T^2 log T approaches one from below.
    double previous = 0.0;
    for (double T : {1e2, 1e3, 1e4, 1e5, 1e6}) {
        const auto r = I_moments(DykstraLaud{}, eg, T, 2);
        CHECK(r.converged);
        const double ratio = r.value / (T * T * std::log(T));
        CHECK(ratio > previous);
        CHECK(ratio < 1.0);
        previous = ratio;
    }
    const double T = 1e6;
    CHECK(std::abs(I_moments(DykstraLaud{}, eg, T, 2).value / (T * T) - std::log(T) + 3.5) < 0.02);
}

TEST_CASE("derived kernels restrict to the diagonal") {
    Draws d(8);
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    for (int i = 0; i < 200; ++i) {
        const double T = d.uniform(1.0, 50.0);
        const double s = d.uniform(0.01, 5.0);
        for (const Kernel k : {Kernel(Rectangular{d.uniform(0.2, 3.0)}), Kernel(DykstraLaud{}),
                               Kernel(OrnsteinUhlenbeck{d.uniform(0.2, 3.0)}), Kernel(UShaped{d.uniform(0.5, 4.0)})}) {
            const double x = d.uniform(0.0, location_window(k, T).hi);
            CHECK(k2(k, T, s, x) == k1(k, T, s, x, s, x));
            CHECK(k0(k, T, s, x) == s * K_T(k, T, x));
            CHECK(k3(k, gg, T, s, x) == s * kT3(k, gg, T, x));
        }
    }
}

TEST_CASE("rectangular and OU first norm against the symmetric limits") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const double k2 = moment(gg, 2);
    const double T = 400.0;
    const double rect = 2.0 * T * contraction_norms(Rectangular{1.0}, gg, T).value[0];
    CHECK(rel_err(rect, 32.0 * k2 * k2 / 3.0) < 0.02);
    // The one-sided value covers half of the symmetric double integral.
    CHECK(rel_err(rect / 2.0, 16.0 * k2 * k2 / 3.0) < 0.02);
    const double ou = 2.0 * T * contraction_norms(OrnsteinUhlenbeck{1.0}, gg, T).value[0];
    CHECK(rel_err(ou, 2.0 * k2 * k2) < 0.02);
    CHECK(rel_err(ou / 2.0, k2 * k2) < 0.02);
}

TEST_CASE("increasing kernel first norm is scale invariant") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const double k2 = moment(gg, 2);
    for (double T : {5.0, 50.0, 500.0}) {
        const double v = 2.0 / (T * T) * contraction_norms(DykstraLaud{}, gg, T).value[0];
        CHECK(rel_err(v, k2 * k2 / 3.0) < 1e-9);
        CHECK(rel_err(v / 2.0, k2 * k2 / 6.0) < 1e-9);
    }
}

TEST_CASE("norms vanish as the horizon shrinks") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    for (const Kernel k : {Kernel(DykstraLaud{}), Kernel(OrnsteinUhlenbeck{1.0})}) {
        const auto a = contraction_norms(k, gg, 1e-2);
        const auto b = contraction_norms(k, gg, 1e-4);
        for (int i = 0; i < 6; ++i) {
            CHECK(a.converged[i]);
            CHECK(b.converged[i]);
            CHECK(b.value[i] < 0.02 * a.value[i]);
        }
    }
}

TEST_CASE("norms are nonnegative and satisfy Cauchy-Schwarz") {
    Draws d(9);
    const std::vector<JumpIntensity> fs{GeneralizedGamma{0.5, 1.0}, ExtendedGamma{Constant{1.5}},
                                        Beta{Constant{2.0}}, ExtendedGamma{AffineSqrt{1.0, 1.0}}};
    for (int i = 0; i < 6; ++i) {
        const auto& f = fs[i % fs.size()];
        const double T = f.is_homogeneous() ? d.uniform(2.0, 60.0) : d.uniform(2.0, 6.0);
        for (const Kernel k : {Kernel(Rectangular{d.uniform(0.3, 2.0)}), Kernel(DykstraLaud{}),
                               Kernel(OrnsteinUhlenbeck{d.uniform(0.3, 2.0)}), Kernel(UShaped{d.uniform(0.5, 3.0)})}) {
            const auto n = contraction_norms(k, f, T);
            INFO(k.describe(), " ", f.describe(), " T ", T);
            for (int j = 0; j < 6; ++j) {
                CHECK(n.converged[j]);
                CHECK(n.value[j] >= 0.0);
                CHECK(std::isfinite(n.value[j]));
            }
            CHECK(n.value[2] <= n.value[0] * n.value[0] * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("reduced norms agree with full-dimensional Monte Carlo integration") {
    Draws d(10);
    const std::vector<JumpIntensity> fs{GeneralizedGamma{0.5, 1.0}, ExtendedGamma{Constant{1.5}},
                                        Beta{Constant{2.0}}, GeneralizedGamma{0.3, 2.0}, ExtendedGamma{Constant{0.8}}};
    for (int cfg = 0; cfg < 10; ++cfg) {
        const double T = d.uniform(1.0, 6.0);
        const std::vector<Kernel> kernels{Rectangular{d.uniform(0.3, 1.5)}, DykstraLaud{},
                                          OrnsteinUhlenbeck{d.uniform(0.5, 2.0)}, UShaped{d.uniform(0.5, 3.0)}};
        const Kernel& k = kernels[cfg % kernels.size()];
        const JumpIntensity& f = fs[cfg % fs.size()];
        const auto exact = contraction_norms(k, f, T);
        const auto mc = monte_carlo_norms(k, f, T, kSamples, 1000 + cfg);
        for (int j = 0; j < 6; ++j) {
            INFO(k.describe(), " ", f.describe(), " T ", T, " norm ", j + 1, " mc ", mc[j].mean, " se ", mc[j].se());
            CHECK(exact.converged[j]);
            CHECK(std::abs(exact.value[j] - mc[j].mean) <= 3.0 * mc[j].se());
        }
    }
}

TEST_CASE("second-moment conditions for the rectangular kernel") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const auto rep = check_theorem(Rectangular{1.0}, gg, Theorem::Path2nd, Power{0.5}, kGrid);
    REQUIRE(rep.conditions.size() == 6);
    for (int i : {1, 2, 3}) {
        const auto& v = rep.conditions[i].verdict;
        REQUIRE(holds<VanishesWithSlope>(v));
        CHECK(std::abs(std::get<VanishesWithSlope>(v).slope + 1.0) <= 0.15);
    }
    REQUIRE(holds<VanishesWithSlope>(rep.conditions[5].verdict));
    CHECK(std::abs(std::get<VanishesWithSlope>(rep.conditions[5].verdict).slope + 0.5) <= 0.15);
    CHECK(rel_err(rep.conditions[0].values.back(), 8.0 / 3.0) < 0.02);
    CHECK(rel_err(rep.conditions[4].values.back(), 63.5) < 0.02);
    CHECK(rep.all_as_expected());
    for (const auto& c : rep.conditions)
        for (double v : c.values) CHECK(v >= 0.0);
}

TEST_CASE("second-moment conditions fail for the increasing kernel") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const auto rep = check_theorem(DykstraLaud{}, gg, Theorem::Path2nd, Power{-1.0}, kGrid);
    CHECK(holds<ConvergesToPositive>(rep.conditions[2].verdict));
    CHECK(holds<Diverges>(rep.conditions[4].verdict));
    CHECK(holds<Diverges>(rep.conditions[5].verdict));
    CHECK(!rep.all_as_expected());
    const auto expected = check_theorem(DykstraLaud{}, gg, Theorem::Path2nd, Power{-1.0}, kGrid, std::nullopt,
                                        {{3, Behaviour::Converges}, {5, Behaviour::Diverges}, {6, Behaviour::Diverges}});
    for (int i : {2, 4, 5}) CHECK(expected.conditions[i].as_expected);
}

TEST_CASE("path-variance conditions for the OU kernel") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const auto rep = check_theorem(OrnsteinUhlenbeck{1.0}, gg, Theorem::PathVar, Power{0.5}, kGrid);
    REQUIRE(rep.conditions.size() == 3);
    for (std::size_t i = 0; i < kGrid.size(); ++i)
        CHECK(rep.conditions[0].values[i] == doctest::Approx(1.0 / std::sqrt(kGrid[i])).epsilon(1e-12));
    CHECK(rel_err(rep.conditions[1].values.back(), std::pow(2.0, 1.5)) < 0.03);
    REQUIRE(rep.delta.has_value());
    CHECK(rel_err(*rep.delta, std::pow(2.0, 1.5)) < 1e-12);
    CHECK(rep.all_as_expected());
}

TEST_CASE("check_theorem argument errors") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    CHECK_THROWS_AS(check_theorem(DykstraLaud{}, gg, Theorem::CumHaz, Power{-1.5}, {50.0, 100.0, 200.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_theorem(DykstraLaud{}, gg, Theorem::CumHaz, Power{-1.5}, {50.0, 40.0, 200.0, 400.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_theorem(DykstraLaud{}, gg, Theorem::CumHaz, Power{-1.5}, kGrid, std::nullopt,
                                  {{7, Behaviour::Converges}}),
                    std::invalid_argument);
}

TEST_CASE("cumulative-hazard conditions") {
    const auto rep = check_theorem(Rectangular{1.0}, GeneralizedGamma{0.5, 1.0}, Theorem::CumHaz, Power{-0.5}, kGrid);
    CHECK(rel_err(rep.conditions[0].values.back(), 2.0) < 0.01);
    CHECK(rep.all_as_expected());
    // The normalized variance approaches its limit like 1 / log T, so the grid spans four decades.
    const auto eg = check_theorem(DykstraLaud{}, ExtendedGamma{AffineSqrt{1.0, 1.0}}, Theorem::CumHaz,
                                  PowerLog{-1.0, -0.5}, {1e3, 1e4, 1e5, 1e6, 1e7});
    CHECK(holds<ConvergesToPositive>(eg.conditions[0].verdict));
    CHECK(holds<VanishesWithSlope>(eg.conditions[1].verdict));
}

TEST_CASE("sandwich with identical bounds") {
    const JumpIntensity gg = GeneralizedGamma{0.5, 1.0};
    const auto rep = sandwich_compare(OrnsteinUhlenbeck{1.0}, OrnsteinUhlenbeck{1.0}, gg, gg, OrnsteinUhlenbeck{1.0},
                                      gg, kGrid);
    CHECK(rep.all_bracketed);
    CHECK(rep.rates_equivalent);
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
        CHECK(rep.i2_lo[i] == rep.i2_target[i]);
        CHECK(rep.i2_hi[i] == rep.i2_target[i]);
    }
    REQUIRE(rep.variance_interval.has_value());
    CHECK((*rep.variance_interval)[0] == (*rep.variance_interval)[1]);
}

TEST_CASE("sandwich of a monotone extended gamma between constant envelopes") {
    const std::vector<double> grid{10.0, 20.0, 40.0, 80.0};
    const double lo_beta = 1.0;
    const double hi_beta = 1.0 + 0.1 * std::sqrt(81.0);
    const JumpIntensity target = ExtendedGamma{AffineSqrt{1.0, 0.1}};
    const auto rep = sandwich_compare(Rectangular{1.0}, Rectangular{1.0}, ExtendedGamma{Constant{hi_beta}},
                                      ExtendedGamma{Constant{lo_beta}}, Rectangular{1.0}, target, grid);
    CHECK(rep.all_bracketed);
    CHECK(rep.rates_equivalent);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(rep.i2_lo[i] < rep.i2_target[i]);
        CHECK(rep.i2_target[i] < rep.i2_hi[i]);
    }
    CHECK_THROWS_AS(sandwich_compare(Rectangular{1.0}, Rectangular{1.0}, ExtendedGamma{Constant{lo_beta}},
                                     ExtendedGamma{Constant{hi_beta}}, Rectangular{1.0}, target, grid),
                    PreconditionError);
    CHECK_THROWS_AS(sandwich_compare(Rectangular{2.0}, Rectangular{1.0}, target, target, Rectangular{1.0}, target,
                                     grid),
                    PreconditionError);
}
