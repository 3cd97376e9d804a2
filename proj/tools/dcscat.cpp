// Command-line front end: calibrate, sweep, resonance, xsection.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dcscat/dcscat.hpp"

namespace {

using namespace dcscat;

enum Exit { kOk = 0, kBadConfig = 1, kSolverFailure = 2, kNotFound = 3 };

struct CommonFlags {
    std::string config;
    std::string field;
    std::string statistics;
    std::optional<double> target_a;
    std::optional<int> l_max;
    std::optional<int> m_max;
    std::optional<double> k;
    std::optional<double> temperature_uk;
    std::optional<int> workers;
    std::string out;
    std::string format;
    std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config, "flat key = value config file");
    cmd->add_option("--statistics", f.statistics, "boson | fermion");
    cmd->add_option("--target-a", f.target_a, "calibrate R_c to this zero-field scattering length (a.u.)");
    cmd->add_option("--lmax", f.l_max, "initial partial-wave truncation");
    cmd->add_option("--mmax", f.m_max, "initial |m| truncation");
    auto* k = cmd->add_option("--k", f.k, "collision wavenumber (a.u.)");
    cmd->add_option("--temperature-uk", f.temperature_uk, "set k from a collision energy k_B T, T in microkelvin")
        ->excludes(k);
    cmd->add_option("--out", f.out, "output path (default stdout)");
    cmd->add_option("--set", f.settings, "extra KEY=VALUE config override (repeatable)");
}

ScanConfig build_config(const CommonFlags& f)
{
    ScanConfig cfg;
    if (!f.config.empty()) cfg = load_config(f.config);
    for (const auto& s : f.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw InvalidArgument("--set expects KEY=VALUE, got '" + s + "'");
        apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!f.field.empty()) cfg.grid = parse_field_grid(f.field, cfg.grid.spacing);
    if (!f.statistics.empty()) cfg.statistics = parse_statistics(f.statistics);
    if (f.target_a) cfg.target_a = *f.target_a;
    if (f.l_max) cfg.numerics.l_max = *f.l_max;
    if (f.m_max) cfg.numerics.m_max = *f.m_max;
    if (f.k) cfg.numerics.k = *f.k;
    if (f.temperature_uk)
        cfg.numerics.k = wavenumber(temperature_to_energy(*f.temperature_uk * 1e-6), cfg.model.reduced_mass);
    if (f.workers) cfg.workers = *f.workers;
    if (!f.out.empty()) cfg.output = f.out;
    if (!f.format.empty()) cfg.format = parse_format(f.format);
    cfg.validate();
    return cfg;
}

template <class Writer>
void emit(const std::string& path, Writer&& write)
{
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot open output file '" + path + "'");
    write(os);
}

nlohmann::json model_json(const PotentialModel& m, const ScanConfig& cfg)
{
    return {{"r_cut", m.r_cut}, {"c6", m.c6}, {"c8", m.c8}, {"c10", m.c10},
            {"reduced_mass", m.reduced_mass}, {"alpha_a", cfg.alpha_a}, {"alpha_b", cfg.alpha_b}};
}

int run_calibrate(const CommonFlags& f, const std::string& bracket)
{
    const ScanConfig cfg = build_config(f);
    if (!cfg.target_a) throw InvalidArgument("calibrate needs --target-a (or target_a in the config)");
    Calibration c;
    if (bracket.empty()) {
        c = calibrate(cfg.model, *cfg.target_a, cfg.rc_window, cfg.rc_reference);
    } else {
        const auto g = parse_field_grid(bracket + ":2");
        c = find_rc(cfg.model, *cfg.target_a, {g.start, g.stop});
    }
    PotentialModel model = cfg.model;
    model.r_cut = c.r_cut;
    const nlohmann::json out = {{"target_a", *cfg.target_a},
                                {"r_cut", c.r_cut},
                                {"a_sc", c.a},
                                {"bound_states", c.bound_states},
                                {"branch", {c.branch.lo, c.branch.hi}},
                                {"model", model_json(model, cfg)}};
    emit(cfg.output, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
    return kOk;
}

int run_sweep(const CommonFlags& f)
{
    const ScanConfig cfg = build_config(f);
    const PotentialModel model = resolve_model(cfg);
    const auto records = sweep_field(cfg, model);
    emit(cfg.output, [&](std::ostream& os) {
        if (cfg.format == OutputFormat::csv) write_csv(os, cfg, model, records);
        else write_jsonl(os, records);
    });
    int failed = 0;
    for (const auto& r : records) failed += r.status.rfind("error", 0) == 0;
    if (failed > 0) std::cerr << failed << " of " << records.size() << " grid points failed (see status column)\n";
    return kOk;
}

int run_resonance(const CommonFlags& f, int samples)
{
    ScanConfig cfg = build_config(f);
    if (f.field.empty()) throw InvalidArgument("resonance needs --field-kvcm A:B");
    const PotentialModel model = resolve_model(cfg);
    ResonanceOptions opt;
    opt.numerics = cfg.numerics;
    opt.alpha_a = cfg.alpha_a;
    opt.alpha_b = cfg.alpha_b;
    opt.samples = samples;
    const auto r = find_resonance(model, cfg.statistics, {cfg.grid.start, cfg.grid.stop}, opt);
    auto flank = [](const ResonanceFlank& fl) {
        return nlohmann::json{{"field_kvcm", fl.field_kvcm},
                              {"a_eff_au", fl.a_eff},
                              {"asymmetry", fl.asymmetry},
                              {"bound_states", fl.bound_states}};
    };
    const nlohmann::json out = {{"field_kvcm", r.field_kvcm},
                                {"field_au", field_to_au(r.field_kvcm)},
                                {"below", flank(r.below)},
                                {"above", flank(r.above)},
                                {"model", model_json(model, cfg)}};
    emit(cfg.output, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
    return kOk;
}

int run_xsection(const CommonFlags& f)
{
    ScanConfig cfg = build_config(f);
    if (cfg.grid.count != 1) throw InvalidArgument("xsection takes a single field value");
    const PotentialModel model = resolve_model(cfg);
    const auto rec = evaluate_point(model, cfg, cfg.grid.start);
    if (!rec.report) throw SolverFailure(rec.status);
    nlohmann::json out = to_json(rec);
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : rec.report->per_block) blocks.push_back({{"m", b.m}, {"sigma_au", b.sigma}});
    out["per_block"] = blocks;
    emit(cfg.output, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coupled-channel scattering of two polarizable atoms in a dc electric field"};
    app.require_subcommand(1);

    CommonFlags cal_flags, sweep_flags, res_flags, xs_flags;
    std::string rc_bracket;
    int samples = 33;

    auto* cal = app.add_subcommand("calibrate", "find the cutoff radius giving a target scattering length");
    add_common(cal, cal_flags);
    cal->add_option("--bracket", rc_bracket, "R_lo:R_hi, a single pole-free branch (default: search the window)");

    auto* sweep = app.add_subcommand("sweep", "cross sections over a field grid");
    add_common(sweep, sweep_flags);
    sweep->add_option("--field-kvcm", sweep_flags.field, "A:B:N grid in kV/cm");
    sweep->add_option("--workers", sweep_flags.workers, "worker threads (0: all cores)");
    sweep->add_option("--format", sweep_flags.format, "csv | jsonl");

    auto* res = app.add_subcommand("resonance", "locate a field-induced zero-energy resonance");
    add_common(res, res_flags);
    res->add_option("--field-kvcm", res_flags.field, "A:B bracket in kV/cm");
    res->add_option("--samples", samples, "coarse samples used to bracket sign changes");

    auto* xs = app.add_subcommand("xsection", "cross section report at one field");
    add_common(xs, xs_flags);
    xs->add_option("--field-kvcm", xs_flags.field, "field in kV/cm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadConfig;
    }

    try {
        if (*cal) return run_calibrate(cal_flags, rc_bracket);
        if (*sweep) return run_sweep(sweep_flags);
        if (*res) {
            if (!res_flags.field.empty() && std::count(res_flags.field.begin(), res_flags.field.end(), ':') == 1)
                res_flags.field += ":2";
            return run_resonance(res_flags, samples);
        }
        if (*xs) return run_xsection(xs_flags);
    } catch (const NotFound& e) {
        std::cerr << "not found: " << e.what() << '\n';
        return kNotFound;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kBadConfig;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolverFailure;
    }
    return kOk;
}
