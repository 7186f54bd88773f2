#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hazardlab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;

    QuadResult& operator+=(const QuadResult& other) {
        value += other.value;
        error += other.error;
        converged = converged && other.converged;
        return *this;
    }
};

inline constexpr double kDefaultRelTol = 1e-10;
inline constexpr unsigned kDefaultMaxDepth = 18;

// Adaptive 15-point Gauss-Kronrod on [a, b].
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = kDefaultRelTol,
                     unsigned max_depth = kDefaultMaxDepth) {
    if (!(b > a)) return {};
    double error = 0.0;
    double l1 = 0.0;
    double value = 0.0;
    // Boost compares an unscaled error with a scaled tolerance, so integrate over [-1, 1].
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    try {
        value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            [&](double u) { return f(mid + half * u); }, -1.0, 1.0, max_depth, rel_tol, &error, &l1);
    } catch (const std::exception&) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(), false};
    }
    value *= half;
    error *= half;
    l1 *= half;
    const bool ok = std::isfinite(value) && error <= std::max(10.0 * rel_tol * l1, 1e-300);
    return {value, error, ok};
}

// Sorted, deduplicated breakpoints restricted to [a, b], endpoints included.
inline std::vector<double> clip_breaks(std::vector<double> breaks, double a, double b) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::erase_if(breaks, [&](double p) { return !(p >= a && p <= b); });
    std::sort(breaks.begin(), breaks.end());
    const double tol = 1e-14 * std::max(1.0, std::abs(b - a));
    std::vector<double> out;
    for (double p : breaks)
        if (out.empty() || p - out.back() > tol) out.push_back(p);
    if (out.size() == 1) out.push_back(b);
    out.back() = b;
    return out;
}

// Integrates piece by piece between consecutive breakpoints inside [a, b].
template <class F>
QuadResult integrate_pieces(F&& f, double a, double b, std::vector<double> breaks,
                            double rel_tol = kDefaultRelTol, unsigned max_depth = kDefaultMaxDepth) {
    QuadResult total;
    if (!(b > a)) return total;
    const auto pts = clip_breaks(std::move(breaks), a, b);
    const std::size_t n = pts.size() - 1;
    // Coarse L1 per piece sets one absolute budget shared by all pieces.
    std::vector<double> l1(n, 0.0);
    double l1_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double err = 0.0;
        try {
            boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, pts[i], pts[i + 1], 0, 0.0, &err, &l1[i]);
        } catch (const std::exception&) {
            l1[i] = 0.0;
        }
        if (std::isfinite(l1[i])) l1_total += l1[i];
    }
    const double budget = rel_tol * l1_total;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double tol_i = l1[i] > budget ? std::max(rel_tol, budget / l1[i]) : 0.5;
        const auto r = integrate(f, pts[i], pts[i + 1], std::min(tol_i, 0.5), max_depth);
        total.value += r.value;
        total.error += r.error;
        ok = ok && std::isfinite(r.value);
    }
    total.converged = ok && total.error <= std::max(10.0 * budget, 1e-300);
    return total;
}

// Fixed 7-point Gauss-Legendre on each piece: exact for piecewise polynomials of
// degree at most 13 whose kinks are all among the breakpoints.
template <class F>
double integrate_polynomial_pieces(F&& f, double a, double b, std::vector<double> breaks) {
    if (!(b > a)) return 0.0;
    const auto pts = clip_breaks(std::move(breaks), a, b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += boost::math::quadrature::gauss<double, 7>::integrate(f, pts[i], pts[i + 1]);
    return total;
}

// Integral over [lo, inf) via v = lo + w/(1-w), w in (0,1).
template <class F>
QuadResult integrate_to_infinity(F&& f, double lo, double rel_tol = kDefaultRelTol) {
    auto mapped = [&](double w) {
        if (w >= 1.0) return 0.0;
        const double one_minus = 1.0 - w;
        const double v = lo + w / one_minus;
        const double jac = 1.0 / (one_minus * one_minus);
        const double y = f(v) * jac;
        return std::isfinite(y) ? y : 0.0;
    };
    return integrate_pieces(mapped, 0.0, 1.0, {0.5, 0.9, 0.99, 0.999}, rel_tol);
}

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Ordinary least squares of y on the columns of x (each row one observation).
struct LeastSquares {
    std::vector<double> coefficients;
    double r2 = 0.0;
};

LeastSquares least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y);

}  // namespace hazardlab
