#include "hazardlab/app.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "hazardlab/text.hpp"

#ifndef HAZARDLAB_VERSION
#define HAZARDLAB_VERSION "0.0.0"
#endif

namespace hazardlab {

namespace {

using Json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Provenance {
    std::string config;
    std::optional<std::uint64_t> seed;
};

Json provenance_json(const Provenance& p) {
    Json j;
    j["tool"] = "hazardlab";
    j["version"] = tool_version();
    j["seed"] = p.seed ? Json(*p.seed) : Json(nullptr);
    j["config"] = p.config;
    return j;
}

void provenance_csv(std::ostream& out, const Provenance& p) {
    out << "# hazardlab " << tool_version() << "\n";
    out << "# seed=" << (p.seed ? std::to_string(*p.seed) : std::string("none")) << "\n";
    std::istringstream lines(p.config);
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty()) out << "# " << line << "\n";
}

// Writes to path, or to fallback when path is empty.
template <class F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
    if (path.empty()) {
        write(fallback);
        fallback.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    write(file);
    file.flush();
    if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

Json verdict_json(const Verdict& v) {
    Json j;
    j["name"] = verdict_name(v);
    std::visit(overloaded{
                   [&](const ConvergesToPositive& c) { j["limit"] = c.limit; },
                   [&](const VanishesWithSlope& c) {
                       j["slope"] = c.slope;
                       j["r2"] = c.r2;
                   },
                   [&](const Diverges& c) {
                       j["slope"] = c.slope;
                       j["r2"] = c.r2;
                   },
                   [&](const Inconclusive& c) { j["reason"] = c.reason; },
               },
               v);
    return j;
}

Theorem theorem_for(Functional f) {
    switch (f) {
        case Functional::CumulativeHazard:
            return Theorem::CumHaz;
        case Functional::PathSecondMoment:
            return Theorem::Path2nd;
        case Functional::PathVariance:
            return Theorem::PathVar;
    }
    return Theorem::CumHaz;
}

RateFunction default_rate(const RunConfig& c) {
    const auto r = regime(*c.kernel, *c.intensity, c.functional);
    if (const auto* spec = std::get_if<RegimeSpec>(&r)) return spec->rate;
    throw std::invalid_argument("no cataloged rate for " + to_string(c.functional) + " with " + c.kernel->describe() +
                                " and " + c.intensity->describe() + ": " + std::get<Unsupported>(r).reason +
                                "; set experiment.rate");
}

int check_conditions(const RunConfig& c, std::ostream& out, std::ostream& log) {
    const RateFunction rate = c.rate ? *c.rate : default_rate(c);
    const auto report =
        check_theorem(*c.kernel, *c.intensity, theorem_for(c.functional), rate, c.t_grid, c.rate0, c.expect);
    const Provenance prov{serialize_config(c), std::nullopt};
    emit(c.output_path, out, [&](std::ostream& o) {
        if (c.format == OutputFormat::Json) {
            Json j;
            j["provenance"] = provenance_json(prov);
            j["theorem"] = to_string(report.theorem);
            j["kernel"] = report.kernel;
            j["intensity"] = report.intensity;
            j["rate"] = report.rate.describe();
            j["rate0"] = report.rate0 ? Json(report.rate0->describe()) : Json(nullptr);
            j["t_grid"] = report.t_grid;
            j["delta"] = report.delta ? Json(*report.delta) : Json(nullptr);
            j["delta_source"] = report.delta_source;
            Json conds = Json::array();
            for (const auto& s : report.conditions) {
                Json e;
                e["index"] = s.index;
                e["quantity"] = s.quantity;
                e["values"] = s.values;
                e["all_converged"] = s.all_converged;
                e["verdict"] = verdict_json(s.verdict);
                e["expected"] = to_string(s.expected);
                e["as_expected"] = s.as_expected;
                conds.push_back(e);
            }
            j["conditions"] = conds;
            j["all_as_expected"] = report.all_as_expected();
            o << j.dump(2) << "\n";
        } else {
            provenance_csv(o, prov);
            o << "condition,quantity,T,value,converged,verdict,expected,as_expected\n";
            for (const auto& s : report.conditions)
                for (std::size_t i = 0; i < s.values.size(); ++i)
                    o << s.index << "," << csv_field(s.quantity) << "," << format_double(report.t_grid[i]) << ","
                      << format_double(s.values[i]) << "," << (s.all_converged ? "true" : "false") << ","
                      << verdict_name(s.verdict) << "," << to_string(s.expected) << ","
                      << (s.as_expected ? "true" : "false") << "\n";
        }
    });
    for (const auto& s : report.conditions)
        log << "condition " << s.index << " (" << s.quantity << "): " << verdict_name(s.verdict) << ", expected "
            << to_string(s.expected) << (s.as_expected ? "" : "  MISMATCH") << "\n";
    return report.all_as_expected() ? kExitOk : kExitVerdict;
}

void write_samples(std::ostream& o, const CltReport& r, const Provenance& prov) {
    provenance_csv(o, prov);
    o << "replicate,value,standardized\n";
    for (std::size_t i = 0; i < r.values.size(); ++i)
        o << i + 1 << "," << format_double(r.values[i]) << "," << format_double(r.standardized_samples[i]) << "\n";
}

int simulate(const RunConfig& c, std::ostream& out, std::ostream& log) {
    const CltReport r = run_clt(experiment_config(c));
    const Provenance prov{serialize_config(c), c.seed};
    emit(c.output_path, out, [&](std::ostream& o) {
        if (c.format == OutputFormat::Csv) {
            write_samples(o, r, prov);
            return;
        }
        Json j;
        j["provenance"] = provenance_json(prov);
        j["functional"] = to_string(r.functional);
        j["kernel"] = r.kernel;
        j["intensity"] = r.intensity;
        j["horizon"] = r.horizon;
        j["replicates"] = r.replicates;
        j["seed"] = r.seed;
        j["epsilon"] = r.epsilon;
        j["rate"] = r.rate;
        j["centering_mode"] = to_string(r.centering_mode);
        j["centering_source"] = r.centering_source;
        j["centering"] = r.centering;
        j["sample_mean"] = r.sample_mean;
        j["sample_variance"] = r.sample_variance;
        j["target_variance"] = r.target_variance;
        j["ks_statistic"] = r.ks_statistic;
        j["ks_p_value"] = r.ks_p_value;
        j["variance_ratio"] = r.variance_ratio;
        j["truncation_budget_ok"] = r.truncation_budget_ok;
        Json b;
        b["mean_deficit"] = r.budget.mean_deficit;
        b["standardized_shift"] = r.budget.standardized_shift;
        b["standardized_sd"] = r.budget.standardized_sd;
        b["shift_corrected"] = r.budget.shift_corrected;
        b["residual"] = r.budget.residual;
        b["limit"] = r.budget.limit;
        j["truncation_budget"] = b;
        j["standardized_samples"] = r.standardized_samples;
        o << j.dump(2) << "\n";
    });
    if (!c.samples_path.empty())
        emit(c.samples_path, out, [&](std::ostream& o) { write_samples(o, r, prov); });
    log << "ks p-value " << format_double(r.ks_p_value) << ", variance ratio " << format_double(r.variance_ratio)
        << " against " << format_double(r.target_variance) << "\n";
    return r.ks_p_value >= c.ks_threshold ? kExitOk : kExitVerdict;
}

}  // namespace

std::string tool_version() { return HAZARDLAB_VERSION; }

int run_regimes(const std::string& out_path, OutputFormat format, std::ostream& out) {
    const auto rows = catalog_rows();
    const Provenance prov{"regimes --format " + to_string(format), std::nullopt};
    emit(out_path, out, [&](std::ostream& o) {
        if (format == OutputFormat::Json) {
            Json j;
            j["provenance"] = provenance_json(prov);
            Json arr = Json::array();
            for (const auto& r : rows) {
                Json e;
                e["kernel"] = r.kernel;
                e["crm"] = r.crm;
                e["functional"] = r.functional;
                e["rate"] = r.rate;
                e["trend"] = r.trend;
                e["variance"] = r.variance;
                e["delta"] = r.delta;
                e["supported"] = r.supported;
                arr.push_back(e);
            }
            j["regimes"] = arr;
            o << j.dump(2) << "\n";
        } else {
            provenance_csv(o, prov);
            o << "kernel,crm,functional,rate,trend,variance,delta,supported\n";
            for (const auto& r : rows)
                o << csv_field(r.kernel) << "," << csv_field(r.crm) << "," << csv_field(r.functional) << ","
                  << csv_field(r.rate) << "," << csv_field(r.trend) << "," << csv_field(r.variance) << ","
                  << csv_field(r.delta) << "," << (r.supported ? "true" : "false") << "\n";
        }
    });
    return kExitOk;
}

int run_config(const RunConfig& config, std::ostream& out, std::ostream& log) {
    switch (config.kind) {
        case RunKind::Regimes:
            return run_regimes(config.output_path, config.format, out);
        case RunKind::CheckConditions:
            return check_conditions(config, out, log);
        case RunKind::Simulate:
            return simulate(config, out, log);
        case RunKind::SamplePaths:
            throw std::invalid_argument("sample-paths needs a grid size; use run_sample_paths");
    }
    return kExitError;
}

int run_sample_paths(const RunConfig& c, int grid_points, std::ostream& out) {
    if (grid_points < 2) throw std::invalid_argument("--grid must be at least 2");
    if (!c.kernel || !c.intensity) throw std::invalid_argument("configuration has no kernel or crm section");
    const double T = c.horizon;
    const CrmSampler sampler(*c.intensity, location_window(*c.kernel, T), c.epsilon);
    RandomStream rng(c.seed, 1);
    const CrmSample sample = sampler.draw(rng);
    std::vector<double> grid(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) grid[i] = T * i / (grid_points - 1);
    const auto h = hazard_path(sample, *c.kernel, grid);
    const Provenance prov{serialize_config(c), c.seed};
    emit(c.output_path, out, [&](std::ostream& o) {
        provenance_csv(o, prov);
        o << "# grid=" << grid_points << "\n";
        o << "t,hazard\n";
        for (std::size_t i = 0; i < grid.size(); ++i) o << format_double(grid[i]) << "," << format_double(h[i]) << "\n";
    });
    return kExitOk;
}

}  // namespace hazardlab
