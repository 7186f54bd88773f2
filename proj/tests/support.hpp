#pragma once

#include <cmath>
#include <limits>
#include <algorithm>
#include <random>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace testing_support {

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Independent oracles: tanh-sinh on finite ranges, exp-sinh on [a, inf).
template <class F>
double finite_integral(F f, double a, double b, double tol = 1e-13) {
    static boost::math::quadrature::tanh_sinh<double> q(15);
    return q.integrate(f, a, b, tol);
}

template <class F>
double tail_integral(F f, double a) {
    static boost::math::quadrature::exp_sinh<double> q(15);
    return q.integrate(f, a, std::numeric_limits<double>::infinity(), 1e-13);
}

// Sum over the pieces of [a, b] cut at the given points; each piece must be smooth.
template <class F>
double piecewise_integral(F f, double a, double b, std::vector<double> cuts, double tol = 1e-12) {
    cuts.push_back(a);
    cuts.push_back(b);
    std::erase_if(cuts, [&](double c) { return !(c >= a && c <= b); });
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i]) total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 12, tol);
    return total;
}

struct Draws {
    std::mt19937_64 engine;
    explicit Draws(std::uint64_t seed) : engine(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
};

struct Running {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double variance() const { return m2 / (n - 1.0); }
    double se() const { return std::sqrt(variance() / n); }
};

}  // namespace testing_support
