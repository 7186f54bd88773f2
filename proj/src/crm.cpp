#include "hazardlab/crm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hazardlab/numeric.hpp"
#include "hazardlab/text.hpp"

namespace hazardlab {

namespace bm = boost::math;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

// ---------------------------------------------------------------- PositiveFunction

PositiveFunction::PositiveFunction(Form form) : form_(form) {
    std::visit(overloaded{
                   [](const Constant& c) {
                       if (!positive_finite(c.a)) throw std::invalid_argument("constant function requires a > 0");
                   },
                   [](const AffineSqrt& f) {
                       if (!(std::isfinite(f.a) && f.a > 0.0))
                           throw std::invalid_argument("affine-sqrt function requires a > 0 (a = 0 vanishes at x = 0)");
                       if (!positive_finite(f.b)) throw std::invalid_argument("affine-sqrt function requires b > 0");
                   },
                   [](const IndicatorSqrt& f) {
                       if (!positive_finite(f.b)) throw std::invalid_argument("indicator-sqrt function requires b > 0");
                   },
               },
               form_);
}

double PositiveFunction::operator()(double x) const {
    const double xp = std::max(x, 0.0);
    return std::visit(overloaded{
                          [](const Constant& c) { return c.a; },
                          [&](const AffineSqrt& f) { return f.a + f.b * std::sqrt(xp); },
                          [&](const IndicatorSqrt& f) { return xp <= f.b ? 1.0 : std::sqrt(xp); },
                      },
                      form_);
}

double PositiveFunction::infimum(const Interval& w) const {
    const double lo = std::max(w.lo, 0.0);
    const double hi = std::max(w.hi, lo);
    return std::visit(overloaded{
                          [](const Constant& c) { return c.a; },
                          [&](const AffineSqrt& f) { return f.a + f.b * std::sqrt(lo); },
                          [&](const IndicatorSqrt& f) {
                              double inf = kInf;
                              if (lo <= f.b) inf = 1.0;
                              if (hi > f.b) inf = std::min(inf, std::sqrt(std::max(lo, f.b)));
                              return inf;
                          },
                      },
                      form_);
}

double PositiveFunction::supremum(const Interval& w) const {
    const double lo = std::max(w.lo, 0.0);
    const double hi = std::max(w.hi, lo);
    return std::visit(overloaded{
                          [](const Constant& c) { return c.a; },
                          [&](const AffineSqrt& f) { return f.a + f.b * std::sqrt(hi); },
                          [&](const IndicatorSqrt& f) {
                              double sup = 0.0;
                              if (lo <= f.b) sup = 1.0;
                              if (hi > f.b) sup = std::max(sup, std::sqrt(hi));
                              return sup;
                          },
                      },
                      form_);
}

std::vector<double> PositiveFunction::kinks() const {
    return std::visit(overloaded{
                          [](const Constant&) { return std::vector<double>{}; },
                          [](const AffineSqrt&) { return std::vector<double>{0.0}; },
                          [](const IndicatorSqrt& f) { return std::vector<double>{0.0, f.b}; },
                      },
                      form_);
}

std::optional<double> PositiveFunction::sqrt_growth() const {
    return std::visit(overloaded{
                          [](const Constant&) { return std::optional<double>{}; },
                          [](const AffineSqrt& f) { return std::optional<double>{f.b}; },
                          [](const IndicatorSqrt&) { return std::optional<double>{1.0}; },
                      },
                      form_);
}

std::string PositiveFunction::describe() const {
    return std::visit(overloaded{
                          [](const Constant& c) { return "constant(a=" + format_double(c.a) + ")"; },
                          [](const AffineSqrt& f) {
                              return "affine-sqrt(a=" + format_double(f.a) + ",b=" + format_double(f.b) + ")";
                          },
                          [](const IndicatorSqrt& f) { return "indicator-sqrt(b=" + format_double(f.b) + ")"; },
                      },
                      form_);
}

// ---------------------------------------------------------------- JumpIntensity

JumpIntensity::JumpIntensity(Family family) : family_(std::move(family)) {
    if (const auto* gg = std::get_if<GeneralizedGamma>(&family_)) {
        if (!(std::isfinite(gg->sigma) && gg->sigma > 0.0 && gg->sigma < 1.0))
            throw std::invalid_argument("generalized gamma requires sigma in (0,1)");
        if (gg->gamma == 0.0)
            throw std::invalid_argument("generalized gamma requires gamma > 0 (gamma = 0 is the stable case, excluded)");
        if (!positive_finite(gg->gamma)) throw std::invalid_argument("generalized gamma requires gamma > 0");
    }
}

bool JumpIntensity::is_homogeneous() const {
    return std::visit(overloaded{
                          [](const GeneralizedGamma&) { return true; },
                          [](const ExtendedGamma& f) { return f.beta_fn.is_constant(); },
                          [](const Beta& f) { return f.c_fn.is_constant(); },
                      },
                      family_);
}

JumpIntensity JumpIntensity::at(double x) const {
    return std::visit(overloaded{
                          [](const GeneralizedGamma& f) { return JumpIntensity{f}; },
                          [&](const ExtendedGamma& f) { return JumpIntensity{ExtendedGamma{Constant{f.beta_fn(x)}}}; },
                          [&](const Beta& f) { return JumpIntensity{Beta{Constant{f.c_fn(x)}}}; },
                      },
                      family_);
}

double JumpIntensity::max_jump() const { return std::holds_alternative<Beta>(family_) ? 1.0 : kInf; }

std::vector<double> JumpIntensity::kinks() const {
    return std::visit(overloaded{
                          [](const GeneralizedGamma&) { return std::vector<double>{}; },
                          [](const ExtendedGamma& f) { return f.beta_fn.kinks(); },
                          [](const Beta& f) { return f.c_fn.kinks(); },
                      },
                      family_);
}

std::string JumpIntensity::describe() const {
    return std::visit(overloaded{
                          [](const GeneralizedGamma& f) {
                              return "generalized-gamma(sigma=" + format_double(f.sigma) +
                                     ",gamma=" + format_double(f.gamma) + ")";
                          },
                          [](const ExtendedGamma& f) { return "extended-gamma(beta=" + f.beta_fn.describe() + ")"; },
                          [](const Beta& f) { return "beta(c=" + f.c_fn.describe() + ")"; },
                      },
                      family_);
}

// ---------------------------------------------------------------- homogeneous laws

namespace {

// A homogeneous law with its parameters resolved.
struct Law {
    enum class Kind { GenGamma, ExtGamma, Beta };

    Law() = default;
    Law(Kind k, double a, double b) : kind(k), p1(a), p2(b) {
        if (kind == Kind::GenGamma) {
            gg_norm = std::pow(p2, p1) / bm::tgamma(1.0 - p1);
            gg_gamma_neg = bm::tgamma(1.0 - p1) / (-p1);
        }
    }

    Kind kind = Kind::GenGamma;
    double p1 = 0.0;  // sigma | beta | c
    double p2 = 0.0;  // gamma
    double gg_norm = 0.0;
    double gg_gamma_neg = 0.0;

    double max_jump() const { return kind == Kind::Beta ? 1.0 : kInf; }
    double moment(double order) const;
    double small_moment(double order, double eps) const;
    // Tail mass and Levy density at v, evaluated together.
    std::pair<double, double> tail_and_density(double v) const;
};

Law resolve(const JumpIntensity& intensity, std::optional<double> x) {
    if (!intensity.is_homogeneous() && !x)
        throw std::invalid_argument("a location x is required for the non-homogeneous intensity " +
                                    intensity.describe());
    const double at = x.value_or(0.0);
    return std::visit(overloaded{
                          [](const GeneralizedGamma& f) { return Law{Law::Kind::GenGamma, f.sigma, f.gamma}; },
                          [&](const ExtendedGamma& f) { return Law{Law::Kind::ExtGamma, f.beta_fn(at), 0.0}; },
                          [&](const Beta& f) { return Law{Law::Kind::Beta, f.c_fn(at), 0.0}; },
                      },
                      intensity.family());
}

double Law::moment(double order) const {
    switch (kind) {
        case Kind::GenGamma: {
            if (!(order > p1)) throw std::domain_error("generalized gamma moment requires order > sigma");
            return bm::tgamma_ratio(order - p1, 1.0 - p1) * std::pow(p2, p1 - order);
        }
        case Kind::ExtGamma:
            return bm::tgamma(order) * std::pow(p1, -order);
        case Kind::Beta:
            return p1 * bm::beta(order, p1);
    }
    return 0.0;
}

double Law::small_moment(double order, double eps) const {
    if (!(eps > 0.0)) return 0.0;
    switch (kind) {
        case Kind::GenGamma:
            return moment(order) * bm::gamma_p(order - p1, p2 * eps);
        case Kind::ExtGamma:
            return moment(order) * bm::gamma_p(order, p1 * eps);
        case Kind::Beta:
            return eps >= 1.0 ? moment(order) : moment(order) * bm::ibeta(order, p1, eps);
    }
    return 0.0;
}

// Upper incomplete gamma at negative order -sigma, scaled: returns Gamma(-sigma, z).
// Uses the power series below z = 1 and the recurrence from Gamma(1-sigma, z) above.
double upper_gamma_negative(double sigma, double gamma_neg, double z, double z_pow_neg_sigma, double exp_neg_z) {
    if (z <= 1.0) {
        double term = 1.0;
        double sum = 1.0 / sigma;
        for (int k = 1; k < 60; ++k) {
            term *= -z / k;
            const double add = term / (k - sigma);
            sum -= add;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        return gamma_neg + z_pow_neg_sigma * sum;
    }
    if (z > 700.0) return 0.0;
    return (z_pow_neg_sigma * exp_neg_z - bm::tgamma(1.0 - sigma, z)) / sigma;
}

// c * sum_n w^(n+c)/(n+c) with w = 1 - v; geometric in w, all terms positive.
double beta_tail_upper(double c, double v) {
    const double w = 1.0 - v;
    double pw = std::pow(w, c);
    double s = 0.0;
    for (int n = 0; n < 100000; ++n) {
        const double add = pw / (n + c);
        s += add;
        if (add < 1e-17 * s) break;
        pw *= w;
    }
    return c * s;
}

double beta_tail(double c, double v) {
    if (v >= 1.0) return 0.0;
    if (v > 0.5) return beta_tail_upper(c, v);
    double a = 1.0 - c;
    double pw = v;
    double s = a * pw;
    for (int k = 1; k < 200; ++k) {
        a *= (k + 1 - c) / (k + 1);
        pw *= v;
        const double add = a * pw / (k + 1);
        s += add;
        if (std::abs(add) < 1e-17 * (1.0 + std::abs(s))) break;
    }
    const double lead = -std::log(v) - bm::digamma(c) - bm::constants::euler<double>();
    const double direct = lead - s;
    // Large c leaves a small difference of large terms; sum the positive series instead.
    if (direct < 1e-4 * (std::abs(lead) + std::abs(s))) return beta_tail_upper(c, v);
    return c * direct;
}

std::pair<double, double> Law::tail_and_density(double v) const {
    switch (kind) {
        case Kind::GenGamma: {
            const double sigma = p1;
            const double z = p2 * v;
            const double zs = std::exp(-sigma * std::log(z));
            const double ez = std::exp(-z);
            const double norm = gg_norm;
            const double tail = norm * upper_gamma_negative(sigma, gg_gamma_neg, z, zs, ez);
            const double dens = norm * zs * ez / v;
            return {std::max(tail, 0.0), dens};
        }
        case Kind::ExtGamma: {
            const double z = p1 * v;
            const double tail = z > 700.0 ? 0.0 : bm::expint(1, z);
            return {tail, std::exp(-z) / v};
        }
        case Kind::Beta: {
            if (v >= 1.0) return {0.0, 0.0};
            return {beta_tail(p1, v), p1 * std::pow(1.0 - v, p1 - 1.0) / v};
        }
    }
    return {0.0, 0.0};
}

}  // namespace

double moment(const JumpIntensity& intensity, int order, std::optional<double> x) {
    if (order < 1 || order > 4) throw std::domain_error("moment order must be in {1,2,3,4}");
    const Law law = resolve(intensity, x);
    const int n = order - 1;
    switch (law.kind) {
        case Law::Kind::GenGamma:
            return (n == 0 ? 1.0 : bm::rising_factorial(1.0 - law.p1, n)) / std::pow(law.p2, order - law.p1);
        case Law::Kind::ExtGamma:
            return bm::factorial<double>(n) / std::pow(law.p1, order);
        case Law::Kind::Beta:
            return bm::factorial<double>(n) / (n == 0 ? 1.0 : bm::rising_factorial(1.0 + law.p1, n));
    }
    return 0.0;
}

double general_moment(const JumpIntensity& intensity, double order, std::optional<double> x) {
    if (!(order > 0.0)) throw std::domain_error("moment order must be positive");
    return resolve(intensity, x).moment(order);
}

double small_jump_moment(const JumpIntensity& intensity, double order, double epsilon, std::optional<double> x) {
    if (!(order > 0.0)) throw std::domain_error("moment order must be positive");
    return resolve(intensity, x).small_moment(order, epsilon);
}

double tail_mass(const JumpIntensity& intensity, double v, std::optional<double> x) {
    if (!(v > 0.0)) throw std::domain_error("tail_mass requires v > 0");
    if (std::isinf(v)) return 0.0;
    return resolve(intensity, x).tail_and_density(v).first;
}

double levy_density(const JumpIntensity& intensity, double v, std::optional<double> x) {
    if (!(v > 0.0)) throw std::domain_error("levy_density requires v > 0");
    if (std::isinf(v)) return 0.0;
    return resolve(intensity, x).tail_and_density(v).second;
}

// ---------------------------------------------------------------- RandomStream

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t index) : seed_(master_seed), index_(index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomStream::exponential() { return -std::log1p(-uniform()); }

// ---------------------------------------------------------------- tail inversion

// Monotone table of (log N, log v) for N(v) = scale * tail(v) on [epsilon, v_top],
// interpolated by cubic Hermite in log N. The table is refined until the interpolant
// alone reproduces log N to kTrustTol; otherwise every lookup is polished by
// safeguarded Newton steps.
class TailTable {
public:
    TailTable(Law law, double scale, double epsilon) : law_(law), scale_(scale), epsilon_(epsilon) {
        top_ = mass(epsilon_);
        if (!(top_ > 0.0)) return;
        const double v_top = find_top();
        if (!(v_top > epsilon_)) return;
        for (int nodes = 2048; nodes <= 65536 && !trusted_; nodes *= 4) {
            build(v_top, nodes);
            trusted_ = verify();
        }
    }

    double mass(double v) const { return scale_ * law_.tail_and_density(v).first; }
    double top() const { return top_; }

    double invert(double g, std::size_t& hint) const {
        if (!(g > 0.0)) return upper_;
        if (g >= top_ || ell_.size() < 2) return epsilon_;
        const double ell = std::log(g);
        const std::size_t n = ell_.size();
        if (ell < ell_.back()) return polish(ell, u_.back(), beyond_top(ell), u_.back());
        std::size_t k = hint;
        if (k + 1 >= n) {
            const auto it = std::lower_bound(ell_.begin(), ell_.end(), ell, std::greater<>());
            k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - ell_.begin() - 1, 0));
        }
        k = std::min(k, n - 2);
        while (k > 0 && ell_[k] < ell) --k;
        while (k + 2 < n && ell_[k + 1] > ell) ++k;
        hint = k;
        const double u = hermite(k, ell);
        if (trusted_) return std::clamp(std::exp(u), epsilon_, upper_);
        return polish(ell, u_[k], u_[k + 1], u);
    }

private:
    static constexpr double kFloor = 1e-10;
    static constexpr double kTrustTol = 1e-12;

    double find_top() const {
        double lo = epsilon_;
        double hi = law_.max_jump();
        if (std::isinf(hi)) {
            hi = std::max(2.0 * epsilon_, 1.0);
            while (mass(hi) > kFloor && hi < 1e300) hi *= 2.0;
        }
        for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (mass(mid) > kFloor ? lo : hi) = mid;
        }
        return lo;
    }

    void build(double v_top, int count) {
        ell_.clear();
        u_.clear();
        slope_.clear();
        std::vector<double> nodes;
        const double a = std::log(epsilon_);
        const double b = std::log(v_top);
        for (int i = 0; i <= count; ++i) nodes.push_back(std::exp(a + (b - a) * i / count));
        if (!std::isinf(law_.max_jump()) && v_top > 0.5) {
            const double wa = std::log(1.0 - std::max(epsilon_, 0.5));
            const double wb = std::log(1.0 - v_top);
            const int extra = count / 4;
            for (int i = 0; i <= extra; ++i) nodes.push_back(1.0 - std::exp(wa + (wb - wa) * i / extra));
        }
        nodes.push_back(epsilon_);
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        std::erase_if(nodes, [&](double v) { return v < epsilon_ || v > v_top; });
        for (double v : nodes) {
            const auto [t, d] = law_.tail_and_density(v);
            const double n = scale_ * t;
            if (!(n > 0.0) || !(d > 0.0)) continue;
            const double ell = std::log(n);
            if (!ell_.empty() && !(ell < ell_.back())) continue;
            ell_.push_back(ell);
            u_.push_back(std::log(v));
            slope_.push_back(-n / (v * scale_ * d));
        }
    }

    bool verify() const {
        if (ell_.size() < 2) return false;
        for (std::size_t k = 0; k + 1 < ell_.size(); ++k) {
            for (double t : {0.2, 0.5, 0.8}) {
                const double ell = ell_[k + 1] + t * (ell_[k] - ell_[k + 1]);
                const double n = mass(std::exp(hermite(k, ell)));
                if (!(n > 0.0) || std::abs(std::log(n) - ell) > kTrustTol) return false;
            }
        }
        return true;
    }

    double hermite(std::size_t k, double ell) const {
        const double a = ell_[k + 1];
        const double h = ell_[k] - a;
        const double t = (ell - a) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * u_[k + 1] + (t3 - 2 * t2 + t) * h * slope_[k + 1] +
               (-2 * t3 + 3 * t2) * u_[k] + (t3 - t2) * h * slope_[k];
    }

    double beyond_top(double ell) const {
        if (!std::isinf(law_.max_jump())) return std::log(law_.max_jump());
        double u = u_.back();
        while (true) {
            u += 0.5;
            const double n = mass(std::exp(u));
            if (!(n > 0.0) || std::log(n) < ell) return u;
        }
    }

    // Safeguarded Newton on f(u) = log N(e^u) - ell, bracket [lo, hi].
    double polish(double ell, double lo, double hi, double u) const {
        if (!(u > lo && u < hi)) u = 0.5 * (lo + hi);
        for (int iter = 0; iter < 200; ++iter) {
            const double v = std::exp(u);
            const auto [t, d] = law_.tail_and_density(v);
            const double n = scale_ * t;
            double next;
            bool newton = false;
            if (!(n > 0.0)) {
                hi = u;
                next = 0.5 * (lo + hi);
            } else {
                const double f = std::log(n) - ell;
                if (f == 0.0) break;
                (f > 0.0 ? lo : hi) = u;
                const double fp = -v * scale_ * d / n;
                next = u - f / fp;
                newton = std::isfinite(next) && next > lo && next < hi;
                if (!newton) next = 0.5 * (lo + hi);
            }
            const double du = next - u;
            u = next;
            if (newton && std::abs(du) <= 1e-8) break;
            if (hi - lo <= 4e-16 * std::max(1.0, std::abs(u))) break;
        }
        return std::clamp(std::exp(u), epsilon_, upper_);
    }

    Law law_;
    double scale_;
    double epsilon_;
    double top_ = 0.0;
    double upper_ = std::nextafter(law_.max_jump(), 0.0);
    bool trusted_ = false;
    std::vector<double> ell_;
    std::vector<double> u_;
    std::vector<double> slope_;
};

// ---------------------------------------------------------------- samplers

CrmSampler::CrmSampler(const JumpIntensity& intensity, const Interval& window, double epsilon)
    : intensity_(intensity), window_(window), epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive");
    if (!(window.lo >= 0.0) || !(window.hi > window.lo) || !std::isfinite(window.hi))
        throw std::invalid_argument("window must be a bounded interval [a, b] with 0 <= a < b");
    const double len = window.length();
    Law base{};
    double scale = len;
    if (intensity.is_homogeneous()) {
        base = resolve(intensity, std::nullopt);
        envelope_ = "exact(" + intensity.describe() + ")";
        mean_deficit_ = len * base.small_moment(1.0, epsilon);
    } else {
        thinning_ = true;
        if (const auto* eg = std::get_if<ExtendedGamma>(&intensity.family())) {
            envelope_rate_ = eg->beta_fn.infimum(window);
            if (!(envelope_rate_ > 0.0)) throw std::invalid_argument("envelope infimum of beta must be positive");
            base = Law{Law::Kind::ExtGamma, envelope_rate_, 0.0};
            envelope_ = "extended-gamma(beta=constant(a=" + format_double(envelope_rate_) + "))";
        } else {
            const auto& beta = std::get<Beta>(intensity.family());
            c_min_ = beta.c_fn.infimum(window);
            c_max_ = beta.c_fn.supremum(window);
            if (!(c_min_ > 0.0)) throw std::invalid_argument("envelope infimum of c must be positive");
            if (c_min_ < 1.0)
                throw UnsupportedEnvelope("beta thinning envelope needs inf c >= 1 on the window; got inf c = " +
                                          format_double(c_min_) + " on [" + format_double(window.lo) + ", " +
                                          format_double(window.hi) + "]");
            base = Law{Law::Kind::Beta, c_min_, 0.0};
            scale *= c_max_ / c_min_;
            envelope_ = format_double(c_max_ / c_min_) + "*beta(c=constant(a=" + format_double(c_min_) + "))";
        }
        auto deficit = [&](double x) { return small_jump_moment(intensity, 1.0, epsilon, x); };
        auto breaks = intensity.kinks();
        const auto r = integrate_pieces(deficit, window.lo, window.hi, breaks, 1e-10);
        mean_deficit_ = r.value;
    }
    table_ = std::make_unique<TailTable>(base, scale, epsilon);
}

CrmSampler::~CrmSampler() = default;
CrmSampler::CrmSampler(CrmSampler&&) noexcept = default;
CrmSampler& CrmSampler::operator=(CrmSampler&&) noexcept = default;

double CrmSampler::envelope_mass() const { return table_->top(); }

double CrmSampler::envelope_tail(double v) const { return table_->mass(v); }

double CrmSampler::invert_envelope_tail(double g) const {
    std::size_t hint = std::numeric_limits<std::size_t>::max();
    return table_->invert(g, hint);
}

CrmSample CrmSampler::draw(RandomStream& rng) const {
    CrmSample out;
    out.window = window_;
    out.epsilon = epsilon_;
    out.mean_deficit = mean_deficit_;
    out.seed = rng.seed();
    out.envelope = envelope_;
    const double top = table_->top();
    out.atoms.reserve(static_cast<std::size_t>(top + 5.0 * std::sqrt(top) + 16.0));
    const double lo = window_.lo;
    const double len = window_.length();
    std::size_t hint = std::numeric_limits<std::size_t>::max();
    double arrival = 0.0;
    double previous = kInf;
    while (true) {
        arrival += rng.exponential();
        if (arrival > top) break;
        double v = table_->invert(arrival, hint);
        v = std::max(std::min(v, previous), epsilon_);
        previous = v;
        const double x = lo + len * rng.uniform();
        if (thinning_) {
            double accept = 1.0;
            if (std::holds_alternative<ExtendedGamma>(intensity_.family())) {
                const double beta = std::get<ExtendedGamma>(intensity_.family()).beta_fn(x);
                accept = std::exp(-(beta - envelope_rate_) * v);
            } else {
                const double c = std::get<Beta>(intensity_.family()).c_fn(x);
                accept = (c / c_max_) * std::pow(1.0 - v, c - c_min_);
            }
            if (rng.uniform() >= accept) continue;
        }
        out.atoms.push_back({v, x});
    }
    return out;
}

CrmSample sample_homogeneous(const JumpIntensity& intensity, const Interval& window, double epsilon,
                             RandomStream& rng) {
    if (!intensity.is_homogeneous())
        throw std::invalid_argument("sample_homogeneous: " + intensity.describe() +
                                    " is location dependent; use sample_nonhomogeneous");
    return CrmSampler(intensity, window, epsilon).draw(rng);
}

CrmSample sample_nonhomogeneous(const JumpIntensity& intensity, const Interval& window, double epsilon,
                                RandomStream& rng) {
    return CrmSampler(intensity, window, epsilon).draw(rng);
}

// ---------------------------------------------------------------- CSV

void write_csv(std::ostream& out, const CrmSample& sample) {
    out << "# epsilon=" << format_double(sample.epsilon) << " window=" << format_double(sample.window.lo) << ','
        << format_double(sample.window.hi) << " mean_deficit=" << format_double(sample.mean_deficit)
        << " seed=" << sample.seed << '\n';
    if (!sample.envelope.empty()) out << "# envelope=" << sample.envelope << '\n';
    out << "jump,location\n";
    for (const auto& a : sample.atoms) out << format_double(a.jump) << ',' << format_double(a.location) << '\n';
}

CrmSample read_csv(std::istream& in) {
    CrmSample s;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# envelope=", 0) == 0) {
            s.envelope = line.substr(11);
            continue;
        }
        if (line.rfind("# ", 0) == 0) {
            std::istringstream fields(line.substr(2));
            std::string field;
            while (fields >> field) {
                const auto eq = field.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = field.substr(0, eq);
                const std::string val = field.substr(eq + 1);
                if (key == "epsilon") {
                    s.epsilon = parse_double(val);
                } else if (key == "window") {
                    const auto comma = val.find(',');
                    if (comma == std::string::npos) throw std::runtime_error("malformed window in sample header");
                    s.window = {parse_double(val.substr(0, comma)), parse_double(val.substr(comma + 1))};
                } else if (key == "mean_deficit") {
                    s.mean_deficit = parse_double(val);
                } else if (key == "seed") {
                    s.seed = std::stoull(val);
                }
            }
            continue;
        }
        if (!header_seen) {
            if (line != "jump,location") throw std::runtime_error("expected header 'jump,location'");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("malformed atom row: " + line);
        s.atoms.push_back({parse_double(line.substr(0, comma)), parse_double(line.substr(comma + 1))});
    }
    if (!header_seen) throw std::runtime_error("missing 'jump,location' header");
    return s;
}

}  // namespace hazardlab
