#include "hazardlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "hazardlab/text.hpp"

namespace hazardlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const std::set<std::string> kSections{"experiment", "kernel", "crm", "output"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line;
    bool used = false;
};

struct Document {
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::map<std::string, int> section_lines;

    Document(const std::string& text) {
        std::istringstream in(text);
        std::string raw;
        std::string current;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const std::string s = trim(raw);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']') throw ConfigError(line, "", "malformed section header '" + s + "'");
                current = trim(s.substr(1, s.size() - 2));
                if (!kSections.count(current))
                    throw ConfigError(line, current,
                                      "unknown section [" + current + "] (expected experiment, kernel, crm or output)");
                if (section_lines.count(current)) throw ConfigError(line, current, "duplicate section [" + current + "]");
                section_lines[current] = line;
                sections[current];
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError(line, "", "expected 'key = value', got '" + s + "'");
            const std::string key = trim(s.substr(0, eq));
            const std::string value = trim(s.substr(eq + 1));
            if (current.empty()) throw ConfigError(line, key, "key '" + key + "' appears before any section header");
            if (key.empty()) throw ConfigError(line, "", "empty key");
            auto& sec = sections[current];
            if (sec.count(key)) throw ConfigError(line, current + "." + key, "duplicate key");
            sec[key] = {value, line};
        }
    }

    Entry* find(const std::string& section, const std::string& key) {
        const auto s = sections.find(section);
        if (s == sections.end()) return nullptr;
        const auto e = s->second.find(key);
        if (e == s->second.end()) return nullptr;
        e->second.used = true;
        return &e->second;
    }

    int line_of(const std::string& section) const {
        const auto s = section_lines.find(section);
        return s == section_lines.end() ? 0 : s->second;
    }

    const Entry& require(const std::string& section, const std::string& key) {
        if (Entry* e = find(section, key)) return *e;
        throw ConfigError(line_of(section), section + "." + key, "missing required key");
    }

    void reject_unused() const {
        const Entry* first = nullptr;
        std::string name;
        for (const auto& [sec, keys] : sections)
            for (const auto& [key, e] : keys)
                if (!e.used && (!first || e.line < first->line)) {
                    first = &e;
                    name = sec + "." + key;
                }
        if (first) throw ConfigError(first->line, name, "unknown key for this configuration");
    }
};

template <class F>
auto convert(const Entry& e, const std::string& name, F&& f) {
    try {
        return f(e.value);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(e.line, name, ex.what());
    }
}

double number(const Entry& e, const std::string& name) {
    return convert(e, name, [](const std::string& v) { return parse_double(v); });
}

template <class Pred>
double checked(const Entry& e, const std::string& name, Pred&& ok, const std::string& constraint) {
    const double v = number(e, name);
    if (!ok(v)) throw ConfigError(e.line, name, "constraint violated: " + constraint);
    return v;
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

std::uint64_t unsigned_integer(const Entry& e, const std::string& name) {
    std::uint64_t v = 0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || e.value.empty())
        throw ConfigError(e.line, name, "expected a non-negative integer, got '" + e.value + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

std::vector<double> grid(const Entry& e, const std::string& name) {
    std::vector<double> out;
    for (const auto& item : split(e.value, ','))
        out.push_back(convert(e, name, [&](const std::string&) { return parse_double(item); }));
    if (out.size() < 4) throw ConfigError(e.line, name, "constraint violated: at least 4 horizons");
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!positive(out[i])) throw ConfigError(e.line, name, "constraint violated: horizons must be positive");
        if (i > 0 && !(out[i] > out[i - 1]))
            throw ConfigError(e.line, name, "constraint violated: horizons must be strictly increasing");
    }
    return out;
}

std::map<int, Behaviour> expectations(const Entry& e, const std::string& name) {
    std::map<int, Behaviour> out;
    for (const auto& item : split(e.value, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError(e.line, name, "expected '<condition>:<behaviour>', got '" + item + "'");
        const std::string index_text = trim(item.substr(0, colon));
        int index = 0;
        const auto r = std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
        if (r.ec != std::errc() || r.ptr != index_text.data() + index_text.size() || index < 1 || index > 6)
            throw ConfigError(e.line, name, "condition index must be an integer in 1..6, got '" + index_text + "'");
        if (out.count(index)) throw ConfigError(e.line, name, "duplicate expectation for condition " + index_text);
        out[index] = convert(e, name, [&](const std::string&) { return parse_behaviour(trim(item.substr(colon + 1))); });
    }
    return out;
}

Kernel parse_kernel(Document& doc) {
    const Entry& type = doc.require("kernel", "type");
    const std::string& t = type.value;
    if (t == "rectangular")
        return Rectangular{checked(doc.require("kernel", "tau"), "kernel.tau", positive, "tau > 0")};
    if (t == "dykstra-laud") return DykstraLaud{};
    if (t == "ornstein-uhlenbeck")
        return OrnsteinUhlenbeck{checked(doc.require("kernel", "kappa"), "kernel.kappa", positive, "kappa > 0")};
    if (t == "u-shaped") return UShaped{checked(doc.require("kernel", "beta"), "kernel.beta", positive, "beta > 0")};
    throw ConfigError(type.line, "kernel.type",
                      "unknown kernel '" + t + "' (expected rectangular, dykstra-laud, ornstein-uhlenbeck, u-shaped)");
}

PositiveFunction parse_function(Document& doc) {
    const Entry& f = doc.require("crm", "function");
    if (f.value == "constant") return Constant{checked(doc.require("crm", "a"), "crm.a", positive, "a > 0")};
    if (f.value == "affine-sqrt") {
        const double a = checked(doc.require("crm", "a"), "crm.a", positive, "a > 0");
        const double b = checked(doc.require("crm", "b"), "crm.b", positive, "b > 0");
        return AffineSqrt{a, b};
    }
    if (f.value == "indicator-sqrt") return IndicatorSqrt{checked(doc.require("crm", "b"), "crm.b", positive, "b > 0")};
    throw ConfigError(f.line, "crm.function",
                      "unknown function '" + f.value + "' (expected constant, affine-sqrt, indicator-sqrt)");
}

JumpIntensity parse_intensity(Document& doc) {
    const Entry& type = doc.require("crm", "type");
    if (type.value == "generalized-gamma") {
        const double sigma = checked(
            doc.require("crm", "sigma"), "crm.sigma", [](double v) { return v > 0.0 && v < 1.0; }, "sigma in (0,1)");
        const double gamma = checked(doc.require("crm", "gamma"), "crm.gamma", positive, "gamma > 0");
        return GeneralizedGamma{sigma, gamma};
    }
    if (type.value == "extended-gamma") return ExtendedGamma{parse_function(doc)};
    if (type.value == "beta") return Beta{parse_function(doc)};
    throw ConfigError(type.line, "crm.type",
                      "unknown crm '" + type.value + "' (expected generalized-gamma, extended-gamma, beta)");
}

template <class T, class F>
void optional_key(Document& doc, const std::string& section, const std::string& key, T& target, F&& f) {
    if (const Entry* e = doc.find(section, key)) target = f(*e, section + "." + key);
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

}  // namespace

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : key + ": ") + message),
      line_(line),
      key_(std::move(key)) {}

std::string to_string(RunKind kind) {
    switch (kind) {
        case RunKind::Regimes:
            return "regimes";
        case RunKind::CheckConditions:
            return "check-conditions";
        case RunKind::Simulate:
            return "simulate";
        case RunKind::SamplePaths:
            return "sample-paths";
    }
    return "";
}

RunKind parse_run_kind(const std::string& text) {
    for (auto k : {RunKind::Regimes, RunKind::CheckConditions, RunKind::Simulate, RunKind::SamplePaths})
        if (to_string(k) == text) return k;
    throw std::invalid_argument("unknown kind '" + text + "' (expected regimes, check-conditions, simulate, sample-paths)");
}

std::string to_string(OutputFormat format) { return format == OutputFormat::Json ? "json" : "csv"; }

OutputFormat parse_output_format(const std::string& text) {
    if (text == "json") return OutputFormat::Json;
    if (text == "csv") return OutputFormat::Csv;
    throw std::invalid_argument("unknown format '" + text + "' (expected json or csv)");
}

RunConfig parse_config(const std::string& text) {
    Document doc(text);
    RunConfig c;
    const Entry& kind = doc.require("experiment", "kind");
    c.kind = convert(kind, "experiment.kind", parse_run_kind);

    const bool conditions = c.kind == RunKind::CheckConditions;
    const bool simulate = c.kind == RunKind::Simulate;
    const bool paths = c.kind == RunKind::SamplePaths;

    if (conditions || simulate)
        c.functional = convert(doc.require("experiment", "functional"), "experiment.functional", parse_functional);
    if (conditions) {
        auto rate = [](const Entry& e, const std::string& name) {
            return std::optional<RateFunction>(convert(e, name, RateFunction::parse));
        };
        optional_key(doc, "experiment", "rate", c.rate, rate);
        if (c.functional == Functional::PathVariance) optional_key(doc, "experiment", "rate0", c.rate0, rate);
        optional_key(doc, "experiment", "t_grid", c.t_grid, grid);
        optional_key(doc, "experiment", "expect", c.expect, expectations);
    }
    if (simulate || paths) {
        c.horizon = checked(doc.require("experiment", "horizon"), "experiment.horizon", positive, "horizon > 0");
        optional_key(doc, "experiment", "seed", c.seed, unsigned_integer);
        optional_key(doc, "experiment", "epsilon", c.epsilon, [](const Entry& e, const std::string& name) {
            return checked(e, name, positive, "epsilon > 0");
        });
    }
    if (simulate) {
        optional_key(doc, "experiment", "replicates", c.replicates, [](const Entry& e, const std::string& name) {
            const auto v = unsigned_integer(e, name);
            if (v < 100 || v > 100000000) throw ConfigError(e.line, name, "constraint violated: replicates >= 100");
            return static_cast<int>(v);
        });
        optional_key(doc, "experiment", "centering", c.centering, [](const Entry& e, const std::string& name) {
            return convert(e, name, parse_centering_mode);
        });
        optional_key(doc, "experiment", "ks_threshold", c.ks_threshold, [](const Entry& e, const std::string& name) {
            return checked(e, name, [](double v) { return v > 0.0 && v < 1.0; }, "ks_threshold in (0,1)");
        });
    }
    if (c.kind != RunKind::Regimes) {
        c.kernel = parse_kernel(doc);
        c.intensity = parse_intensity(doc);
    }
    optional_key(doc, "output", "path", c.output_path, [](const Entry& e, const std::string&) { return e.value; });
    optional_key(doc, "output", "format", c.format, [](const Entry& e, const std::string& name) {
        return convert(e, name, parse_output_format);
    });
    if (simulate)
        optional_key(doc, "output", "samples_path", c.samples_path,
                     [](const Entry& e, const std::string&) { return e.value; });
    doc.reject_unused();
    if (!conditions && c.kind != RunKind::Regimes) {
        // Sampling needs a representable envelope on the location window.
        try {
            CrmSampler(*c.intensity, location_window(*c.kernel, c.horizon), c.epsilon);
        } catch (const std::exception& ex) {
            throw ConfigError(doc.line_of("crm"), "crm", ex.what());
        }
    }
    return c;
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "[experiment]\n";
    out << "kind = " << to_string(c.kind) << "\n";
    const bool conditions = c.kind == RunKind::CheckConditions;
    const bool simulate = c.kind == RunKind::Simulate;
    const bool paths = c.kind == RunKind::SamplePaths;
    if (conditions || simulate) out << "functional = " << to_string(c.functional) << "\n";
    if (conditions) {
        if (c.rate) out << "rate = " << c.rate->describe() << "\n";
        if (c.rate0 && c.functional == Functional::PathVariance) out << "rate0 = " << c.rate0->describe() << "\n";
        out << "t_grid = " << join(c.t_grid) << "\n";
        if (!c.expect.empty()) {
            out << "expect = ";
            bool first = true;
            for (const auto& [k, b] : c.expect) {
                out << (first ? "" : ",") << k << ":" << to_string(b);
                first = false;
            }
            out << "\n";
        }
    }
    if (simulate || paths) {
        out << "horizon = " << format_double(c.horizon) << "\n";
        out << "seed = " << c.seed << "\n";
        out << "epsilon = " << format_double(c.epsilon) << "\n";
    }
    if (simulate) {
        out << "replicates = " << c.replicates << "\n";
        out << "centering = " << to_string(c.centering) << "\n";
        out << "ks_threshold = " << format_double(c.ks_threshold) << "\n";
    }
    if (c.kind != RunKind::Regimes && c.kernel && c.intensity) {
        out << "\n[kernel]\n";
        std::visit(overloaded{
                       [&](const Rectangular& k) { out << "type = rectangular\ntau = " << format_double(k.tau) << "\n"; },
                       [&](const DykstraLaud&) { out << "type = dykstra-laud\n"; },
                       [&](const OrnsteinUhlenbeck& k) {
                           out << "type = ornstein-uhlenbeck\nkappa = " << format_double(k.kappa) << "\n";
                       },
                       [&](const UShaped& k) { out << "type = u-shaped\nbeta = " << format_double(k.beta_center) << "\n"; },
                   },
                   c.kernel->form());
        out << "\n[crm]\n";
        auto function = [&](const PositiveFunction& f) {
            std::visit(overloaded{
                           [&](const Constant& g) { out << "function = constant\na = " << format_double(g.a) << "\n"; },
                           [&](const AffineSqrt& g) {
                               out << "function = affine-sqrt\na = " << format_double(g.a)
                                   << "\nb = " << format_double(g.b) << "\n";
                           },
                           [&](const IndicatorSqrt& g) {
                               out << "function = indicator-sqrt\nb = " << format_double(g.b) << "\n";
                           },
                       },
                       f.form());
        };
        std::visit(overloaded{
                       [&](const GeneralizedGamma& f) {
                           out << "type = generalized-gamma\nsigma = " << format_double(f.sigma)
                               << "\ngamma = " << format_double(f.gamma) << "\n";
                       },
                       [&](const ExtendedGamma& f) {
                           out << "type = extended-gamma\n";
                           function(f.beta_fn);
                       },
                       [&](const Beta& f) {
                           out << "type = beta\n";
                           function(f.c_fn);
                       },
                   },
                   c.intensity->family());
    }
    out << "\n[output]\n";
    if (!c.output_path.empty()) out << "path = " << c.output_path << "\n";
    out << "format = " << to_string(c.format) << "\n";
    if (simulate && !c.samples_path.empty()) out << "samples_path = " << c.samples_path << "\n";
    return out.str();
}

ExperimentConfig experiment_config(const RunConfig& c) {
    if (!c.kernel || !c.intensity) throw std::invalid_argument("configuration has no kernel or crm section");
    ExperimentConfig e{*c.kernel, *c.intensity};
    e.functional = c.functional;
    e.horizon = c.horizon;
    e.replicates = c.replicates;
    e.seed = c.seed;
    e.epsilon = c.epsilon;
    e.centering = c.centering;
    return e;
}

}  // namespace hazardlab
