#include "hazardlab/asymptotics.hpp"

#include <cmath>

#include "hazardlab/text.hpp"

namespace hazardlab {

namespace {

struct Moments {
    double k1, k2, k3, k4;
};

Moments moments_of(const JumpIntensity& intensity) {
    return {moment(intensity, 1), moment(intensity, 2), moment(intensity, 3), moment(intensity, 4)};
}

std::optional<double> growth_of(const JumpIntensity& intensity) {
    if (const auto* eg = std::get_if<ExtendedGamma>(&intensity.family())) return eg->beta_fn.sqrt_growth();
    if (const auto* b = std::get_if<Beta>(&intensity.family())) return b->c_fn.sqrt_growth();
    return std::nullopt;
}

const char* kQuadraticUnsupported =
    "path functional CLT not available for this kernel: the contraction conditions 3, 5 and 6 fail "
    "(condition 3 tends to a positive constant while conditions 5 and 6 diverge under every power rate)";

}  // namespace

std::string to_string(Functional f) {
    switch (f) {
        case Functional::CumulativeHazard:
            return "cumulative-hazard";
        case Functional::PathSecondMoment:
            return "path-second-moment";
        case Functional::PathVariance:
            return "path-variance";
    }
    return "";
}

Functional parse_functional(const std::string& text) {
    if (text == "cumulative-hazard" || text == "cumhaz") return Functional::CumulativeHazard;
    if (text == "path-second-moment" || text == "path2nd") return Functional::PathSecondMoment;
    if (text == "path-variance" || text == "pathvar") return Functional::PathVariance;
    throw std::invalid_argument("unknown functional '" + text +
                                "' (expected cumulative-hazard, path-second-moment or path-variance)");
}

double RateFunction::operator()(double T) const {
    if (const auto* p = std::get_if<Power>(&form_)) return std::pow(T, p->p);
    const auto& pl = std::get<PowerLog>(form_);
    return std::pow(T, pl.p) * std::pow(std::log(T), pl.q);
}

double RateFunction::exponent() const {
    if (const auto* p = std::get_if<Power>(&form_)) return p->p;
    return std::get<PowerLog>(form_).p;
}

std::string RateFunction::describe() const {
    if (const auto* p = std::get_if<Power>(&form_)) return "power:" + format_double(p->p);
    const auto& pl = std::get<PowerLog>(form_);
    return "powerlog:" + format_double(pl.p) + "," + format_double(pl.q);
}

RateFunction RateFunction::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("rate '" + text + "' must be power:<p> or powerlog:<p>,<q>");
    const std::string kind = text.substr(0, colon);
    const std::string args = text.substr(colon + 1);
    if (kind == "power") return Power{parse_double(args)};
    if (kind == "powerlog") {
        const auto comma = args.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("powerlog rate needs two numbers p,q");
        return PowerLog{parse_double(args.substr(0, comma)), parse_double(args.substr(comma + 1))};
    }
    throw std::invalid_argument("unknown rate kind '" + kind + "'");
}

std::optional<double> centering_value(const CenteringRule& rule, double T) {
    if (const auto* m = std::get_if<Monomial>(&rule)) return m->coefficient * std::pow(T, m->exponent);
    return std::nullopt;
}

std::string describe(const CenteringRule& rule) {
    if (const auto* m = std::get_if<Monomial>(&rule)) {
        if (m->exponent == 0.0) return format_double(m->coefficient);
        return format_double(m->coefficient) + "*T^" + format_double(m->exponent);
    }
    return "monte-carlo-mean";
}

RegimeSpec regime_cumhaz(const Kernel& kernel, const JumpIntensity& intensity) {
    const Functional f = Functional::CumulativeHazard;
    if (intensity.is_homogeneous()) {
        const double k1 = moment(intensity, 1);
        const double k2 = moment(intensity, 2);
        auto make = [&](double p, Monomial trend, double var) {
            return RegimeSpec{f, Power{p}, trend, var, {var}, std::nullopt, std::nullopt};
        };
        if (kernel.is<Rectangular>()) {
            const double tau = kernel.as<Rectangular>().tau;
            return make(-0.5, {2.0 * tau * k1, 1.0}, 4.0 * k2 * tau * tau);
        }
        if (kernel.is<DykstraLaud>()) return make(-1.5, {0.5 * k1, 2.0}, k2 / 3.0);
        if (kernel.is<OrnsteinUhlenbeck>()) {
            const double kappa = kernel.as<OrnsteinUhlenbeck>().kappa;
            return make(-0.5, {k1 * std::sqrt(2.0 / kappa), 1.0}, 2.0 * k2 / kappa);
        }
        return make(-1.5, {0.5 * k1, 2.0}, k2 / 3.0);
    }
    const auto s = growth_of(intensity);
    const bool extended = std::holds_alternative<ExtendedGamma>(intensity.family());
    if (s && kernel.is<DykstraLaud>()) {
        if (extended)
            return RegimeSpec{f, PowerLog{-1.0, -0.5}, MonteCarloMean{}, 1.0 / (*s * *s), {1.0 / (*s * *s)},
                              std::nullopt, std::nullopt};
        const double var = 16.0 / (15.0 * *s);
        return RegimeSpec{f, Power{-1.25}, Monomial{0.5, 2.0}, var, {var}, std::nullopt, std::nullopt};
    }
    if (s && kernel.is<Rectangular>()) {
        const double tau = kernel.as<Rectangular>().tau;
        if (extended) {
            const double var = 4.0 * tau * tau / (*s * *s);
            return RegimeSpec{f, PowerLog{0.0, -0.5}, MonteCarloMean{}, var, {var}, std::nullopt, std::nullopt};
        }
        const double var = 8.0 * tau * tau / *s;
        return RegimeSpec{f, Power{-0.25}, Monomial{2.0 * tau, 1.0}, var, {var}, std::nullopt, std::nullopt};
    }
    throw NotCataloged("no cumulative-hazard regime for " + kernel.describe() + " with " + intensity.describe());
}

RegimeResult regime_path2nd(const Kernel& kernel, const JumpIntensity& intensity) {
    if (kernel.is<DykstraLaud>() || kernel.is<UShaped>()) return Unsupported{kQuadraticUnsupported};
    if (!intensity.is_homogeneous())
        return Unsupported{"path functional regimes are cataloged for homogeneous intensities only"};
    const auto [k1, k2, k3, k4] = moments_of(intensity);
    const Functional f = Functional::PathSecondMoment;
    if (kernel.is<Rectangular>()) {
        const double t = kernel.as<Rectangular>().tau;
        const double s1 = 32.0 * t * t * t * k2 * k2 / 3.0;
        const double s2 = 4.0 * t * t * k4 + 32.0 * t * t * t * k3 * k1 + 64.0 * t * t * t * t * k2 * k1 * k1;
        const double published =
            16.0 * t * t * (k4 / 4.0 + t * k3 * k1 + t * k2 * k2 / 3.0 + t * t * k2 * k1 * k1);
        return RegimeSpec{f,  Power{0.5}, Monomial{2.0 * t * k2 + 4.0 * t * t * k1 * k1, 0.0},
                          s1 + s2, {s1, s2}, std::nullopt, published};
    }
    const double kap = kernel.as<OrnsteinUhlenbeck>().kappa;
    const double s1 = 2.0 * k2 * k2 / kap;
    const double s2 = k4 + 8.0 * k3 * k1 / kap + 16.0 * k2 * k1 * k1 / (kap * kap);
    const double published = k4 + 4.0 * k3 * k1 / kap + k2 * k2 / kap + 4.0 * k2 * k1 * k1 / (kap * kap);
    return RegimeSpec{f, Power{0.5}, Monomial{k2 + 2.0 * k1 * k1 / kap, 0.0}, s1 + s2, {s1, s2}, std::nullopt,
                      published};
}

RegimeResult regime_pathvar(const Kernel& kernel, const JumpIntensity& intensity) {
    if (kernel.is<DykstraLaud>() || kernel.is<UShaped>()) return Unsupported{kQuadraticUnsupported};
    if (!intensity.is_homogeneous())
        return Unsupported{"path functional regimes are cataloged for homogeneous intensities only"};
    const auto [k1, k2, k3, k4] = moments_of(intensity);
    const Functional f = Functional::PathVariance;
    if (kernel.is<Rectangular>()) {
        const double t = kernel.as<Rectangular>().tau;
        const double s1 = 32.0 * t * t * t * k2 * k2 / 3.0;
        const double s3 = 4.0 * t * t * k4;
        const double published =
            16.0 * t * t * t * k2 * k2 / 3.0 + 16.0 * t * t * (k4 / 4.0 - t * k3 * k1 + t * t * k2 * k1 * k1);
        return RegimeSpec{f, Power{0.5}, Monomial{2.0 * t * k2, 0.0}, s1 + s3, {s1, s3}, 4.0 * t * k1, published};
    }
    const double kap = kernel.as<OrnsteinUhlenbeck>().kappa;
    const double s1 = 2.0 * k2 * k2 / kap;
    const double s3 = k4;
    const double published = k2 * k2 / kap + k4 - 4.0 * k3 * k1 / kap + 4.0 * k2 * k1 * k1 / (kap * kap);
    return RegimeSpec{f,       Power{0.5}, Monomial{k2, 0.0}, s1 + s3, {s1, s3}, std::pow(2.0, 1.5) * k1 / std::sqrt(kap),
                      published};
}

RegimeResult regime(const Kernel& kernel, const JumpIntensity& intensity, Functional functional) {
    switch (functional) {
        case Functional::CumulativeHazard:
            try {
                return regime_cumhaz(kernel, intensity);
            } catch (const NotCataloged& e) {
                return Unsupported{e.what()};
            }
        case Functional::PathSecondMoment:
            return regime_path2nd(kernel, intensity);
        case Functional::PathVariance:
            return regime_pathvar(kernel, intensity);
    }
    return Unsupported{"unknown functional"};
}

std::vector<CatalogRow> catalog_rows() {
    const std::string hom = "homogeneous";
    const std::string egs = "extended-gamma(beta~s*sqrt(x))";
    const std::string bes = "beta(c~s*sqrt(x))";
    const std::string ch = to_string(Functional::CumulativeHazard);
    const std::string p2 = to_string(Functional::PathSecondMoment);
    const std::string pv = to_string(Functional::PathVariance);
    return {
        {"rectangular", hom, ch, "T^-1/2", "2*tau*K1*T", "4*K2*tau^2", "", true},
        {"dykstra-laud", hom, ch, "T^-3/2", "K1*T^2/2", "K2/3", "", true},
        {"ornstein-uhlenbeck", hom, ch, "T^-1/2", "K1*sqrt(2/kappa)*T", "2*K2/kappa", "", true},
        {"u-shaped", hom, ch, "T^-3/2", "K1*T^2/2", "K2/3", "", true},
        {"dykstra-laud", egs, ch, "(T*sqrt(log T))^-1", "monte-carlo-mean", "1/s^2", "", true},
        {"dykstra-laud", bes, ch, "T^-5/4", "T^2/2", "16/(15*s)", "", true},
        {"rectangular", egs, ch, "(log T)^-1/2", "monte-carlo-mean", "4*tau^2/s^2", "", true},
        {"rectangular", bes, ch, "T^-1/4", "2*tau*T", "8*tau^2/s", "", true},
        {"rectangular", hom, p2, "T^1/2", "2*tau*K2+4*tau^2*K1^2",
         "32*tau^3*K2^2/3 + 4*tau^2*K4 + 32*tau^3*K3*K1 + 64*tau^4*K2*K1^2", "", true},
        {"ornstein-uhlenbeck", hom, p2, "T^1/2", "K2+2*K1^2/kappa",
         "2*K2^2/kappa + K4 + 8*K3*K1/kappa + 16*K2*K1^2/kappa^2", "", true},
        {"dykstra-laud", hom, p2, "", "", "", "", false},
        {"u-shaped", hom, p2, "", "", "", "", false},
        {"rectangular", hom, pv, "T^1/2", "2*tau*K2", "32*tau^3*K2^2/3 + 4*tau^2*K4", "4*tau*K1", true},
        {"ornstein-uhlenbeck", hom, pv, "T^1/2", "K2", "2*K2^2/kappa + K4", "2^(3/2)*K1/sqrt(kappa)", true},
        {"dykstra-laud", hom, pv, "", "", "", "", false},
        {"u-shaped", hom, pv, "", "", "", "", false},
    };
}

}  // namespace hazardlab
