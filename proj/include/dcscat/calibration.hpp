#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "dcscat/channels.hpp"
#include "dcscat/error.hpp"
#include "dcscat/observables.hpp"
#include "dcscat/potential.hpp"
#include "dcscat/propagator.hpp"

namespace dcscat {

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;

    void validate(const char* what) const
    {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw InvalidArgument(std::string(what) + " bracket needs lo < hi");
    }
};

inline std::string to_string(const Bracket& b)
{
    std::ostringstream os;
    os.precision(10);
    os << '[' << b.lo << ", " << b.hi << ']';
    return os.str();
}

// A zero-field pole of a(R_c): the s-wave bound-state count drops from
// `above` + 1 to `above` somewhere inside `where`.
struct Pole {
    Bracket where;
    int bound_below = 0;  // count at where.lo
    int bound_above = 0;  // count at where.hi
};

// find_rc refused a bracket because a(R_c) has a pole inside it.
class PoleInBracket : public NotFound {
public:
    PoleInBracket(const std::string& what, Bracket sub) : NotFound(what), sub_(sub) {}
    const Bracket& sub_bracket() const noexcept { return sub_; }

private:
    Bracket sub_;
};

struct CalibrationOptions {
    double k = 1e-6;            // threshold wavenumber of the a(k) extrapolation
    StepPolicy steps{};
    double node_radius = 1e4;   // zero-energy node counting is carried out to here
    double pole_width = 1e-6;   // a.u.; width of the sub-bracket reported around a pole
};

struct Calibration {
    double r_cut = 0.0;
    double a = 0.0;             // zero-field scattering length at r_cut
    int bound_states = 0;       // s-wave bound states of the calibrated model
    Bracket branch;             // pole-free bracket that was searched
};

namespace detail {

inline PotentialModel with_cut(PotentialModel model, double r_cut)
{
    model.r_cut = r_cut;
    return model;
}

inline double a_of_rc(const PotentialModel& model, double r_cut, const CalibrationOptions& opt)
{
    return scattering_length_unchecked(with_cut(model, r_cut), opt.k, opt.steps).a;
}

inline int s_wave_bound_states(const PotentialModel& model, double r_cut, const CalibrationOptions& opt)
{
    const auto m = with_cut(model, r_cut);
    return count_bound_states(m, 0.0, build_basis(Statistics::boson, 0, 0), std::max(opt.node_radius, 4.0 * r_cut),
                              opt.steps);
}

// The bound-state count is non-increasing in R_c, so bisection on it isolates
// every pole; equal counts at both ends mean no pole in between.
inline void isolate_poles(const PotentialModel& model, double lo, double hi, int n_lo, int n_hi,
                          const CalibrationOptions& opt, std::vector<Pole>& out)
{
    if (n_lo == n_hi) return;
    if (hi - lo <= opt.pole_width) {
        out.push_back({{lo, hi}, n_lo, n_hi});
        return;
    }
    const double mid = 0.5 * (lo + hi);
    const int n_mid = s_wave_bound_states(model, mid, opt);
    isolate_poles(model, lo, mid, n_lo, n_mid, opt, out);
    isolate_poles(model, mid, hi, n_mid, n_hi, opt, out);
}

}  // namespace detail

// All poles of the zero-field a(R_c) inside the window, in ascending R_c.
inline std::vector<Pole> find_poles(const PotentialModel& model, Bracket window, const CalibrationOptions& opt = {})
{
    window.validate("R_c");
    std::vector<Pole> poles;
    detail::isolate_poles(model, window.lo, window.hi, detail::s_wave_bound_states(model, window.lo, opt),
                          detail::s_wave_bound_states(model, window.hi, opt), opt, poles);
    return poles;
}

// R_c on a single pole-free branch such that the zero-field scattering length
// equals target_a. a(R_c) increases along a branch.
inline Calibration find_rc(const PotentialModel& model, double target_a, Bracket bracket,
                           const CalibrationOptions& opt = {})
{
    model.validate();
    bracket.validate("R_c");
    if (!(bracket.lo > 0.0)) throw InvalidArgument("R_c bracket must be positive");
    if (!std::isfinite(target_a)) throw InvalidArgument("target scattering length must be finite");

    const int n_lo = detail::s_wave_bound_states(model, bracket.lo, opt);
    const int n_hi = detail::s_wave_bound_states(model, bracket.hi, opt);
    if (n_lo != n_hi) {
        std::vector<Pole> poles;
        detail::isolate_poles(model, bracket.lo, bracket.hi, n_lo, n_hi, opt, poles);
        const Bracket sub = poles.front().where;
        throw PoleInBracket("a(R_c) has a pole inside " + to_string(bracket) + ": bound-state count drops from " +
                                std::to_string(poles.front().bound_below) + " to " +
                                std::to_string(poles.front().bound_above) + " within R_c in " + to_string(sub),
                            sub);
    }

    auto f = [&](double r) { return detail::a_of_rc(model, r, opt) - target_a; };
    const double f_lo = f(bracket.lo);
    const double f_hi = f(bracket.hi);
    if (f_lo == 0.0) return {bracket.lo, target_a, n_lo, bracket};
    if (f_hi == 0.0) return {bracket.hi, target_a, n_lo, bracket};
    if ((f_lo > 0.0) == (f_hi > 0.0)) {
        std::ostringstream os;
        os << "target a = " << target_a << " a.u. is outside the branch range [" << f_lo + target_a << ", "
           << f_hi + target_a << "] a.u. reached on R_c in " << to_string(bracket);
        throw NotFound(os.str());
    }

    const double tol_a = std::max(1e-3 * std::abs(target_a), 1e-2);
    std::uintmax_t iterations = 200;
    auto stop = [&](double a, double b) {
        return std::abs(b - a) <= 1e-13 * std::max(std::abs(a), std::abs(b));
    };
    const auto [r1, r2] = boost::math::tools::toms748_solve(f, bracket.lo, bracket.hi, f_lo, f_hi, stop, iterations);
    const double r = 0.5 * (r1 + r2);
    const double a = detail::a_of_rc(model, r, opt);
    if (!(std::abs(a - target_a) <= tol_a)) {
        std::ostringstream os;
        os << "calibration stalled at R_c = " << r << " with a = " << a << " a.u. (target " << target_a << ")";
        throw SolverFailure(os.str());
    }
    return {r, a, n_lo, bracket};
}

// Calibration across a window that may hold several branches: every branch
// whose range contains the target is solved, and the solution closest to
// `reference` wins.
inline Calibration calibrate(const PotentialModel& model, double target_a, Bracket window, double reference,
                             const CalibrationOptions& opt = {})
{
    model.validate();
    window.validate("R_c");
    const auto poles = find_poles(model, window, opt);
    std::vector<Bracket> branches;
    double lo = window.lo;
    for (const auto& p : poles) {
        if (p.where.lo > lo) branches.push_back({lo, p.where.lo});
        lo = p.where.hi;
    }
    if (window.hi > lo) branches.push_back({lo, window.hi});

    std::optional<Calibration> best;
    std::ostringstream ranges;
    for (const auto& b : branches) {
        try {
            const auto c = find_rc(model, target_a, b, opt);
            if (!best || std::abs(c.r_cut - reference) < std::abs(best->r_cut - reference)) best = c;
        } catch (const NotFound& e) {
            ranges << "\n  " << e.what();
        }
    }
    if (!best)
        throw NotFound("no branch in R_c window " + to_string(window) + " reaches a = " + std::to_string(target_a) +
                       " a.u." + ranges.str());
    return *best;
}

}  // namespace dcscat
