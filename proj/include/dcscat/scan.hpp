#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcscat/calibration.hpp"
#include "dcscat/channels.hpp"
#include "dcscat/error.hpp"
#include "dcscat/observables.hpp"
#include "dcscat/potential.hpp"
#include "dcscat/units.hpp"

namespace dcscat {

enum class GridSpacing { linear, log };
enum class OutputFormat { csv, jsonl };

struct FieldGrid {
    double start = 0.0;  // kV/cm
    double stop = 0.0;
    int count = 1;
    GridSpacing spacing = GridSpacing::linear;

    void validate() const
    {
        if (count < 1) throw InvalidArgument("field grid needs at least one point");
        if (!std::isfinite(start) || !std::isfinite(stop) || start < 0.0)
            throw InvalidArgument("field grid bounds must be finite and non-negative");
        if (start > stop) throw InvalidArgument("field grid needs start <= stop");
        if (spacing == GridSpacing::log && !(start > 0.0))
            throw InvalidArgument("logarithmic field grid needs start > 0");
    }

    std::vector<double> values() const
    {
        validate();
        std::vector<double> out(count, start);
        for (int i = 1; i < count; ++i) {
            const double t = static_cast<double>(i) / (count - 1);
            out[i] = spacing == GridSpacing::linear ? start + (stop - start) * t
                                                    : start * std::pow(stop / start, t);
        }
        if (count > 1) out.back() = stop;
        return out;
    }
};

struct ScanConfig {
    PotentialModel model{};
    double alpha_a = units::kDefaultPolarizability;
    double alpha_b = units::kDefaultPolarizability;
    std::optional<double> target_a;        // when set, r_cut is calibrated before use
    Bracket rc_window{21.5, 26.0};          // calibration window (tuned to the default C6 and mu)
    double rc_reference = 23.0;             // preferred R_c when several branches qualify
    FieldGrid grid{};
    Statistics statistics = Statistics::boson;
    NumericalOptions numerics{};
    int workers = 1;                        // 0: one per hardware thread
    std::string output;                     // empty: stdout
    OutputFormat format = OutputFormat::csv;

    void validate() const
    {
        model.validate();
        FieldConfig{0.0, alpha_a, alpha_b}.validate();
        grid.validate();
        numerics.validate();
        if (target_a) rc_window.validate("R_c");
        if (workers < 0) throw InvalidArgument("workers must be >= 0");
    }
};

struct ModelFingerprint {
    double r_cut = 0.0;
    double c6 = 0.0;
    double c8 = 0.0;
    double c10 = 0.0;
    double reduced_mass = 0.0;
    double alpha_a = 0.0;
    double alpha_b = 0.0;
};

struct SweepRecord {
    double field_kvcm = 0.0;
    double field_au = 0.0;
    double c_e = 0.0;
    Statistics statistics = Statistics::boson;
    std::optional<CrossSectionReport> report;  // empty when the point failed
    std::string status;                        // ok | unconverged | cancelled | error: ...
    ModelFingerprint fingerprint;
};

inline std::string_view to_string(GridSpacing s) { return s == GridSpacing::linear ? "linear" : "log"; }
inline std::string_view to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "jsonl"; }

inline OutputFormat parse_format(std::string_view s)
{
    if (s == "csv") return OutputFormat::csv;
    if (s == "jsonl") return OutputFormat::jsonl;
    throw InvalidArgument("unknown output format '" + std::string(s) + "' (expected csv or jsonl)");
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double parse_double(std::string_view text, std::string_view what)
{
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
        throw InvalidArgument(std::string(what) + ": '" + std::string(text) + "' is not a finite number");
    return v;
}

inline int parse_int(std::string_view text, std::string_view what)
{
    text = trim(text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw InvalidArgument(std::string(what) + ": '" + std::string(text) + "' is not an integer");
    return v;
}

inline bool parse_bool(std::string_view text, std::string_view what)
{
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw InvalidArgument(std::string(what) + ": '" + std::string(text) + "' is not a boolean");
}

}  // namespace detail

// "A:B:N" (kV/cm), or a single value "A" for a one-point grid.
inline FieldGrid parse_field_grid(std::string_view text, GridSpacing spacing = GridSpacing::linear)
{
    FieldGrid g;
    g.spacing = spacing;
    const auto c1 = text.find(':');
    if (c1 == std::string_view::npos) {
        g.start = g.stop = detail::parse_double(text, "field");
        g.count = 1;
    } else {
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string_view::npos) throw InvalidArgument("field grid must be A:B:N");
        g.start = detail::parse_double(text.substr(0, c1), "field start");
        g.stop = detail::parse_double(text.substr(c1 + 1, c2 - c1 - 1), "field stop");
        g.count = detail::parse_int(text.substr(c2 + 1), "field count");
    }
    g.validate();
    return g;
}

// Applies one key = value setting. Keys mirror the ScanConfig fields.
inline void apply_setting(ScanConfig& cfg, std::string_view key, std::string_view value)
{
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_int;
    const std::string k(key);
    if (k == "r_cut") cfg.model.r_cut = parse_double(value, k);
    else if (k == "c6") cfg.model.c6 = parse_double(value, k);
    else if (k == "c8") cfg.model.c8 = parse_double(value, k);
    else if (k == "c10") cfg.model.c10 = parse_double(value, k);
    else if (k == "reduced_mass") cfg.model.reduced_mass = parse_double(value, k);
    else if (k == "alpha_a") cfg.alpha_a = parse_double(value, k);
    else if (k == "alpha_b") cfg.alpha_b = parse_double(value, k);
    else if (k == "target_a") cfg.target_a = parse_double(value, k);
    else if (k == "rc_window_lo") cfg.rc_window.lo = parse_double(value, k);
    else if (k == "rc_window_hi") cfg.rc_window.hi = parse_double(value, k);
    else if (k == "rc_reference") cfg.rc_reference = parse_double(value, k);
    else if (k == "field_start") cfg.grid.start = parse_double(value, k);
    else if (k == "field_stop") cfg.grid.stop = parse_double(value, k);
    else if (k == "field_count") cfg.grid.count = parse_int(value, k);
    else if (k == "field_spacing") {
        const auto v = detail::trim(value);
        if (v == "linear") cfg.grid.spacing = GridSpacing::linear;
        else if (v == "log") cfg.grid.spacing = GridSpacing::log;
        else throw InvalidArgument("field_spacing must be linear or log");
    }
    else if (k == "statistics") cfg.statistics = parse_statistics(detail::trim(value));
    else if (k == "l_max") cfg.numerics.l_max = parse_int(value, k);
    else if (k == "m_max") cfg.numerics.m_max = parse_int(value, k);
    else if (k == "k") cfg.numerics.k = parse_double(value, k);
    else if (k == "eta") cfg.numerics.steps.eta = parse_double(value, k);
    else if (k == "escalate") cfg.numerics.escalate = parse_bool(value, k);
    else if (k == "convergence_tol") cfg.numerics.convergence_tol = parse_double(value, k);
    else if (k == "max_escalations") cfg.numerics.max_escalations = parse_int(value, k);
    else if (k == "match_epsilon") cfg.numerics.match.epsilon = parse_double(value, k);
    else if (k == "match_tail_kr") cfg.numerics.match.tail_kr = parse_double(value, k);
    else if (k == "match_zero_field_kr") cfg.numerics.match.zero_field_kr = parse_double(value, k);
    else if (k == "match_tail_correction") cfg.numerics.match.tail_correction = parse_bool(value, k);
    else if (k == "workers") cfg.workers = parse_int(value, k);
    else if (k == "output") cfg.output = std::string(detail::trim(value));
    else if (k == "format") cfg.format = parse_format(detail::trim(value));
    else throw InvalidArgument("unknown config key '" + k + "'");
}

// Flat "key = value" text; '#' starts a comment.
inline ScanConfig parse_config(std::istream& in, ScanConfig cfg = {})
{
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view view(line);
        view = detail::trim(view.substr(0, view.find('#')));
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw InvalidArgument("config line " + std::to_string(number) + ": expected key = value");
        try {
            apply_setting(cfg, detail::trim(view.substr(0, eq)), view.substr(eq + 1));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("config line " + std::to_string(number) + ": " + e.what());
        }
    }
    return cfg;
}

inline ScanConfig load_config(const std::string& path, ScanConfig cfg = {})
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
    return parse_config(in, std::move(cfg));
}

// The model a config describes, calibrated first when target_a is set.
inline PotentialModel resolve_model(const ScanConfig& cfg, std::optional<Calibration>* calibration = nullptr)
{
    cfg.validate();
    PotentialModel model = cfg.model;
    if (cfg.target_a) {
        const auto c = calibrate(model, *cfg.target_a, cfg.rc_window, cfg.rc_reference);
        model.r_cut = c.r_cut;
        if (calibration) *calibration = c;
    }
    return model;
}

inline ModelFingerprint fingerprint_of(const PotentialModel& m, double alpha_a, double alpha_b)
{
    return {m.r_cut, m.c6, m.c8, m.c10, m.reduced_mass, alpha_a, alpha_b};
}

inline SweepRecord evaluate_point(const PotentialModel& model, const ScanConfig& cfg, double field_kvcm)
{
    SweepRecord rec;
    rec.field_kvcm = field_kvcm;
    rec.statistics = cfg.statistics;
    rec.fingerprint = fingerprint_of(model, cfg.alpha_a, cfg.alpha_b);
    try {
        const FieldConfig field{field_to_au(field_kvcm), cfg.alpha_a, cfg.alpha_b};
        rec.field_au = field.field_strength;
        rec.c_e = coupling_coefficient(field);
        rec.report = converged_cross_section(model, rec.c_e, cfg.statistics, cfg.numerics);
        rec.status = rec.report->converged ? "ok" : "unconverged";
    } catch (const std::exception& e) {
        rec.report.reset();
        rec.status = std::string("error: ") + e.what();
    }
    return rec;
}

// One record per grid point, in grid order. Points are independent jobs pulled
// by a pool of workers; a failing point is recorded in its row. Setting
// *cancel stops workers between points; unfinished rows read "cancelled".
inline std::vector<SweepRecord> sweep_field(const ScanConfig& cfg, const PotentialModel& model,
                                            const std::atomic<bool>* cancel = nullptr)
{
    cfg.validate();
    model.validate();
    const auto fields = cfg.grid.values();
    std::vector<SweepRecord> records(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        records[i].field_kvcm = fields[i];
        records[i].statistics = cfg.statistics;
        records[i].fingerprint = fingerprint_of(model, cfg.alpha_a, cfg.alpha_b);
        records[i].status = "cancelled";
    }

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            if (cancel && cancel->load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= fields.size()) return;
            records[i] = evaluate_point(model, cfg, fields[i]);
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_workers =
        std::min<std::size_t>(fields.size(), cfg.workers == 0 ? hw : static_cast<unsigned>(cfg.workers));
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
    }
    return records;
}

inline std::vector<SweepRecord> sweep_field(const ScanConfig& cfg) { return sweep_field(cfg, resolve_model(cfg)); }

// ---- output ----

namespace detail {

inline std::string number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + '"';
}

}  // namespace detail

inline constexpr const char* kCsvColumns =
    "field_kvcm,field_au,c_e_au,statistics,sigma_au,log10_sigma,asymmetry,a_eff_au,k_au,l_max,m_max,r_match_au,status";

inline void write_fingerprint(std::ostream& os, const ScanConfig& cfg, const PotentialModel& model,
                              std::string_view prefix = "# ")
{
    using detail::number;
    os << prefix << "r_cut = " << number(model.r_cut) << '\n'
       << prefix << "c6 = " << number(model.c6) << '\n'
       << prefix << "c8 = " << number(model.c8) << '\n'
       << prefix << "c10 = " << number(model.c10) << '\n'
       << prefix << "reduced_mass = " << number(model.reduced_mass) << '\n'
       << prefix << "alpha_a = " << number(cfg.alpha_a) << '\n'
       << prefix << "alpha_b = " << number(cfg.alpha_b) << '\n';
    if (cfg.target_a) os << prefix << "target_a = " << number(*cfg.target_a) << '\n';
    os << prefix << "statistics = " << to_string(cfg.statistics) << '\n'
       << prefix << "field_start = " << number(cfg.grid.start) << '\n'
       << prefix << "field_stop = " << number(cfg.grid.stop) << '\n'
       << prefix << "field_count = " << cfg.grid.count << '\n'
       << prefix << "field_spacing = " << to_string(cfg.grid.spacing) << '\n'
       << prefix << "k = " << number(cfg.numerics.k) << '\n'
       << prefix << "l_max = " << cfg.numerics.resolved_l_max(cfg.statistics) << '\n'
       << prefix << "m_max = " << cfg.numerics.m_max << '\n'
       << prefix << "eta = " << number(cfg.numerics.steps.eta) << '\n'
       << prefix << "escalate = " << (cfg.numerics.escalate ? "true" : "false") << '\n'
       << prefix << "convergence_tol = " << number(cfg.numerics.convergence_tol) << '\n'
       << prefix << "match_epsilon = " << number(cfg.numerics.match.epsilon) << '\n'
       << prefix << "match_tail_kr = " << number(cfg.numerics.match.tail_kr) << '\n'
       << prefix << "match_zero_field_kr = " << number(cfg.numerics.match.zero_field_kr) << '\n'
       << prefix << "match_tail_correction = " << (cfg.numerics.match.tail_correction ? "true" : "false") << '\n';
}

inline void write_csv(std::ostream& os, const ScanConfig& cfg, const PotentialModel& model,
                      const std::vector<SweepRecord>& records)
{
    using detail::number;
    write_fingerprint(os, cfg, model);
    os << kCsvColumns << '\n';
    for (const auto& r : records) {
        os << number(r.field_kvcm) << ',' << number(r.field_au) << ',' << number(r.c_e) << ','
           << to_string(r.statistics) << ',';
        if (r.report) {
            const auto& rep = *r.report;
            os << number(rep.sigma) << ',' << number(std::log10(rep.sigma)) << ','
               << (rep.asymmetry ? number(*rep.asymmetry) : "") << ',' << (rep.a_eff ? number(*rep.a_eff) : "")
               << ',' << number(rep.k) << ',' << rep.l_max << ',' << rep.m_max << ',' << number(rep.r_match) << ',';
        } else {
            os << ",,,,,,,,";
        }
        os << detail::csv_field(r.status) << '\n';
    }
}

inline nlohmann::json to_json(const SweepRecord& r)
{
    nlohmann::json j;
    j["field_kvcm"] = r.field_kvcm;
    j["field_au"] = r.field_au;
    j["c_e_au"] = r.c_e;
    j["statistics"] = std::string(to_string(r.statistics));
    if (r.report) {
        const auto& rep = *r.report;
        j["sigma_au"] = rep.sigma;
        j["log10_sigma"] = rep.sigma > 0.0 ? nlohmann::json(std::log10(rep.sigma)) : nlohmann::json(nullptr);
        j["asymmetry"] = rep.asymmetry ? nlohmann::json(*rep.asymmetry) : nlohmann::json(nullptr);
        j["a_eff_au"] = rep.a_eff ? nlohmann::json(*rep.a_eff) : nlohmann::json(nullptr);
        j["k_au"] = rep.k;
        j["l_max"] = rep.l_max;
        j["m_max"] = rep.m_max;
        j["r_match_au"] = rep.r_match;
        j["escalation_change"] = rep.escalation_change;
        j["unitarity_defect"] = rep.max_unitarity_defect;
        j["k_symmetry_defect"] = rep.max_k_symmetry_defect;
        j["optical_defect"] = rep.optical_defect;
    }
    j["status"] = r.status;
    const auto& f = r.fingerprint;
    j["model"] = {{"r_cut", f.r_cut},   {"c6", f.c6},           {"c8", f.c8},         {"c10", f.c10},
                  {"reduced_mass", f.reduced_mass}, {"alpha_a", f.alpha_a}, {"alpha_b", f.alpha_b}};
    return j;
}

inline void write_jsonl(std::ostream& os, const std::vector<SweepRecord>& records)
{
    for (const auto& r : records) os << to_json(r).dump() << '\n';
}

}  // namespace dcscat
