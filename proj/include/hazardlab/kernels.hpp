#pragma once

#include <string>
#include <variant>
#include <vector>

#include "hazardlab/crm.hpp"

namespace hazardlab {

// k(t,x) = 1{|t-x| <= tau}
struct Rectangular {
    double tau;
    bool operator==(const Rectangular&) const = default;
};

// k(t,x) = 1{0 <= x <= t}
struct DykstraLaud {
    bool operator==(const DykstraLaud&) const = default;
};

// k(t,x) = sqrt(2 kappa) exp(-kappa (t-x)) 1{0 <= x <= t}
struct OrnsteinUhlenbeck {
    double kappa;
    bool operator==(const OrnsteinUhlenbeck&) const = default;
};

// k(t,x) = 1{|t-beta| >= x}
struct UShaped {
    double beta_center;
    bool operator==(const UShaped&) const = default;
};

class Kernel {
public:
    using Form = std::variant<Rectangular, DykstraLaud, OrnsteinUhlenbeck, UShaped>;

    Kernel(Form form);
    Kernel(Rectangular k) : Kernel(Form{k}) {}
    Kernel(DykstraLaud k) : Kernel(Form{k}) {}
    Kernel(OrnsteinUhlenbeck k) : Kernel(Form{k}) {}
    Kernel(UShaped k) : Kernel(Form{k}) {}

    const Form& form() const { return form_; }
    template <class K>
    bool is() const { return std::holds_alternative<K>(form_); }
    template <class K>
    const K& as() const { return std::get<K>(form_); }
    // Takes only the values 0 and 1.
    bool is_indicator() const { return !is<OrnsteinUhlenbeck>(); }
    // sup over t of k(t,x) on its support.
    double peak() const;
    std::string name() const;
    std::string describe() const;

    bool operator==(const Kernel&) const = default;

private:
    Form form_;
};

double eval(const Kernel& kernel, double t, double x);

// K_T(x) = int_0^T k(t,x) dt
double K_T(const Kernel& kernel, double T, double x);

// Q_T(x,y) = int_0^T k(t,x) k(t,y) dt
double Q_T(const Kernel& kernel, double T, double x, double y);

// E[h(t)] = int K1(x) k(t,x) dx
double mean_hazard(const Kernel& kernel, const JumpIntensity& intensity, double t);

// (1/T) int_0^T k(t,x) E[h(t)] dt
double kT3(const Kernel& kernel, const JumpIntensity& intensity, double T, double x);

// Support of x -> K_T(x).
Interval location_window(const Kernel& kernel, double T);

// Points where x -> K_T(x) is not smooth.
std::vector<double> mass_breaks(const Kernel& kernel, double T);

// Points where y -> Q_T(x,y) is not smooth, plus scale points for fast decay.
std::vector<double> overlap_breaks(const Kernel& kernel, double T, double x);

// Points where x -> k(t,x) is not smooth or vanishes.
std::vector<double> slice_breaks(const Kernel& kernel, double t);

}  // namespace hazardlab
