#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "dcscat/calibration.hpp"
#include "dcscat/channels.hpp"
#include "dcscat/error.hpp"
#include "dcscat/matching.hpp"
#include "dcscat/observables.hpp"
#include "dcscat/units.hpp"

namespace dcscat {

struct ResonanceOptions {
    NumericalOptions numerics{};
    double alpha_a = units::kDefaultPolarizability;
    double alpha_b = units::kDefaultPolarizability;
    int samples = 33;             // coarse grid used to bracket sign changes
    double node_radius = 1e4;     // zero-energy node counting radius
    double relative_tol = 1e-12;  // on the field
};

struct ResonanceFlank {
    double field_kvcm = 0.0;
    double a_eff = 0.0;
    double asymmetry = 0.0;
    int bound_states = 0;  // m = 0 block, zero energy
};

struct Resonance {
    double field_kvcm = 0.0;
    ResonanceFlank below;  // 1/a_eff = -k
    ResonanceFlank above;  // 1/a_eff = +k
};

namespace detail {

inline double c_e_at(double field_kvcm, const ResonanceOptions& opt)
{
    return coupling_coefficient({field_to_au(field_kvcm), opt.alpha_a, opt.alpha_b});
}

// Re(-1/t00) = -k cot(delta): equals 1/a_eff at threshold and, unlike a_eff,
// passes smoothly through zero at a zero-energy resonance.
inline double inverse_a_eff(const PotentialModel& model, double field_kvcm, const ResonanceOptions& opt)
{
    const auto& num = opt.numerics;
    const auto basis = build_basis(Statistics::boson, 0, num.resolved_l_max(Statistics::boson));
    const auto sol = solve_block(model, c_e_at(field_kvcm, opt), basis, num.k, num.steps, num.match);
    return (-1.0 / sol.t_reduced(0, 0)).real();
}

}  // namespace detail

// Field at which a new s-wave bound state crosses threshold: a root of
// 1/a_eff where it goes from negative to positive with increasing field.
// Sign changes the other way are zeros of t00 (a_eff passing through 0).
inline Resonance find_resonance(const PotentialModel& model, Statistics statistics, Bracket field_kvcm,
                                const ResonanceOptions& opt = {})
{
    model.validate();
    opt.numerics.validate();
    field_kvcm.validate("field");
    if (field_kvcm.lo < 0.0) throw InvalidArgument("field bracket must be non-negative");
    if (statistics != Statistics::boson)
        throw InvalidArgument("resonance search tracks t00 and needs boson statistics");
    if (opt.samples < 2) throw InvalidArgument("resonance search needs at least 2 samples");

    auto f = [&](double e) { return detail::inverse_a_eff(model, e, opt); };
    const double k = opt.numerics.k;
    double prev_e = field_kvcm.lo;
    double prev_f = f(prev_e);
    for (int i = 1; i < opt.samples; ++i) {
        const double e = field_kvcm.lo + (field_kvcm.hi - field_kvcm.lo) * i / (opt.samples - 1);
        const double fe = f(e);
        if (prev_f < 0.0 && fe >= 0.0) {
            auto solve = [&](double shift, double lo, double hi) {
                auto g = [&](double x) { return f(x) - shift; };
                const double g_lo = g(lo), g_hi = g(hi);
                if (g_lo >= 0.0) return lo;
                if (g_hi <= 0.0) return hi;
                std::uintmax_t iterations = 200;
                auto stop = [&](double a, double b) { return std::abs(b - a) <= opt.relative_tol * std::abs(b); };
                const auto [r1, r2] = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, stop, iterations);
                return 0.5 * (r1 + r2);
            };
            Resonance out;
            out.field_kvcm = solve(0.0, prev_e, e);
            out.below.field_kvcm = solve(-k, prev_e, out.field_kvcm);
            out.above.field_kvcm = solve(k, out.field_kvcm, e);
            for (ResonanceFlank* flank : {&out.below, &out.above}) {
                const double c_e = detail::c_e_at(flank->field_kvcm, opt);
                const auto report = converged_cross_section(model, c_e, Statistics::boson, opt.numerics);
                flank->a_eff = report.a_eff.value();
                flank->asymmetry = report.asymmetry.value();
                const auto basis = build_basis(Statistics::boson, 0, opt.numerics.resolved_l_max(Statistics::boson));
                flank->bound_states =
                    count_bound_states(model, c_e, basis, std::max(opt.node_radius, 4.0 * model.r_cut),
                                       opt.numerics.steps);
            }
            return out;
        }
        prev_e = e;
        prev_f = fe;
    }
    std::ostringstream os;
    os << "no resonance found in field bracket " << to_string(field_kvcm) << " kV/cm";
    throw NotFound(os.str());
}

}  // namespace dcscat
