#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcscat/channels.hpp"
#include "dcscat/error.hpp"
#include "dcscat/matching.hpp"
#include "dcscat/potential.hpp"
#include "dcscat/propagator.hpp"

namespace dcscat {

inline int default_l_max(Statistics s) { return s == Statistics::boson ? 8 : 9; }

struct NumericalOptions {
    int l_max = -1;  // < 0: default_l_max(statistics)
    int m_max = 4;
    double k = 1e-6;
    StepPolicy steps{};
    MatchRadiusPolicy match{};
    bool escalate = true;
    double convergence_tol = 1e-3;
    int max_escalations = 12;

    int resolved_l_max(Statistics s) const { return l_max < 0 ? default_l_max(s) : l_max; }

    void validate() const
    {
        if (!(k > 0.0)) throw InvalidArgument("wavenumber must be positive");
        if (m_max < 0) throw InvalidArgument("m_max must be non-negative");
        if (!(convergence_tol > 0.0)) throw InvalidArgument("convergence tolerance must be positive");
        steps.validate();
        match.validate();
    }
};

struct BlockContribution {
    int m = 0;
    double sigma = 0.0;
};

struct CrossSectionReport {
    Statistics statistics = Statistics::boson;
    double sigma = 0.0;
    std::optional<double> asymmetry;     // bosons only
    bool asymmetry_defined = true;       // false when sigma == 0 (asymmetry reported as 0)
    std::optional<double> a_eff;         // -Re t00, bosons only
    std::optional<double> a_eff_imag;    // Im t00, diagnostic
    std::vector<BlockContribution> per_block;
    double k = 0.0;
    int l_max = 0;
    int m_max = 0;
    double r_match = 0.0;
    bool converged = true;
    double escalation_change = 0.0;  // relative change of sigma under one more escalation step
    double optical_defect = 0.0;     // |sigma - (8 pi / k) sum Im t_ii| / sigma
    double max_unitarity_defect = 0.0;
    double max_k_symmetry_defect = 0.0;
};

namespace detail {

inline ScatteringSolution mirrored(const ScatteringSolution& sol)
{
    ScatteringSolution out = sol;
    out.basis.m_block = -sol.basis.m_block;
    for (auto& c : out.basis.channels) c.m = -c.m;
    return out;
}

}  // namespace detail

// Solves every block m = -m_max..m_max (ascending). The coupling depends on m
// only through |m|, so each |m| is propagated once and mirrored.
inline std::vector<ScatteringSolution> solve_blocks(const PotentialModel& model, double c_e, Statistics statistics,
                                                    int l_max, int m_max, double k, const StepPolicy& steps = {},
                                                    const MatchRadiusPolicy& match = {})
{
    std::vector<ScatteringSolution> positive;
    for (int m = 0; m <= m_max; ++m)
        positive.push_back(solve_block(model, c_e, build_basis(statistics, m, l_max), k, steps, match));
    std::vector<ScatteringSolution> out;
    for (int m = -m_max; m <= m_max; ++m)
        out.push_back(m < 0 ? detail::mirrored(positive[-m]) : positive[m]);
    return out;
}

// sigma = 8 pi sum_blocks sum_{l,l'} |t_{lm}^{l'm}|^2, blocks summed in ascending m.
inline CrossSectionReport cross_section(std::span<const ScatteringSolution> solutions, Statistics statistics)
{
    if (solutions.empty()) throw InvalidArgument("no m blocks supplied");
    const double k = solutions.front().k;
    std::map<int, const ScatteringSolution*> by_m;
    for (const auto& sol : solutions) {
        if (sol.k != k) throw InvalidArgument("m blocks were solved at different wavenumbers");
        if (!by_m.emplace(sol.basis.m_block, &sol).second)
            throw InvalidArgument("duplicate m block " + std::to_string(sol.basis.m_block));
        if (sol.basis.statistics != statistics)
            throw InvalidArgument("m block statistics do not match the request");
        for (const auto& c : sol.basis.channels)
            if (c.l % 2 != parity_of(statistics) || c.m != sol.basis.m_block)
                throw InvalidArgument("channel (" + std::to_string(c.l) + ", " + std::to_string(c.m) +
                                      ") does not belong to a " + std::string(to_string(statistics)) + " block");
        if (sol.t_reduced.rows() != static_cast<Eigen::Index>(sol.basis.size()))
            throw InvalidArgument("t matrix does not match its basis");
    }
    const int m_max = by_m.rbegin()->first;
    if (by_m.begin()->first != -m_max || static_cast<int>(by_m.size()) != 2 * m_max + 1)
        throw InvalidArgument("m blocks must cover -m_max..m_max without gaps");

    CrossSectionReport report;
    report.statistics = statistics;
    report.k = k;
    report.m_max = m_max;
    double optical = 0.0;
    for (const auto& [m, sol] : by_m) {
        const double block = 8.0 * std::numbers::pi * sol->t_reduced.cwiseAbs2().sum();
        optical += 8.0 * std::numbers::pi / k * sol->t_reduced.diagonal().imag().sum();
        report.per_block.push_back({m, block});
        report.sigma += block;
        report.l_max = std::max(report.l_max, sol->basis.l_max());
        report.r_match = std::max(report.r_match, sol->r_match);
        if (sol->s_matrix.size() > 0)
            report.max_unitarity_defect = std::max(report.max_unitarity_defect, sol->unitarity_defect());
        report.max_k_symmetry_defect = std::max(report.max_k_symmetry_defect, sol->k_symmetry_defect);
    }

    if (report.sigma > 0.0) report.optical_defect = std::abs(report.sigma - optical) / report.sigma;

    if (statistics == Statistics::boson) {
        const auto& s0 = *by_m.at(0);
        if (s0.basis.l(0) != 0) throw InvalidArgument("boson m = 0 block lacks the s wave");
        const auto t00 = s0.t_reduced(0, 0);
        report.a_eff = -t00.real();
        report.a_eff_imag = t00.imag();
        if (report.sigma > 0.0) {
            report.asymmetry = 8.0 * std::numbers::pi * std::norm(t00) / report.sigma;
        } else {
            report.asymmetry = 0.0;
            report.asymmetry_defined = false;
        }
    }
    return report;
}

inline CrossSectionReport solve_cross_section(const PotentialModel& model, double c_e, Statistics statistics,
                                              int l_max, int m_max, const NumericalOptions& options)
{
    const auto blocks = solve_blocks(model, c_e, statistics, l_max, m_max, options.k, options.steps, options.match);
    return cross_section(blocks, statistics);
}

// Cross section with truncation escalation. The truncation (l_max, m_max) is
// raised by (2, 1) until one more step changes sigma by less than
// convergence_tol; the report is the truncation whose next step was checked,
// so escalation_change is an audited bound rather than an extrapolation.
inline CrossSectionReport converged_cross_section(const PotentialModel& model, double c_e, Statistics statistics,
                                                  const NumericalOptions& options)
{
    options.validate();
    int l_max = options.resolved_l_max(statistics);
    int m_max = options.m_max;
    CrossSectionReport current = solve_cross_section(model, c_e, statistics, l_max, m_max, options);
    if (!options.escalate) return current;
    double change = 0.0;
    for (int step = 0; step < options.max_escalations; ++step) {
        l_max += 2;
        m_max += 1;
        CrossSectionReport next = solve_cross_section(model, c_e, statistics, l_max, m_max, options);
        const double scale = std::max(std::abs(next.sigma), std::numeric_limits<double>::min());
        change = std::abs(next.sigma - current.sigma) / scale;
        current.escalation_change = change;
        if (change <= options.convergence_tol) return current;
        current = std::move(next);
    }
    current.converged = false;
    current.escalation_change = change;  // last observed step, not a bound
    return current;
}

struct ScatteringLength {
    double a = 0.0;
    double residual = 0.0;  // |a - a(k2)|
    double a_k1 = 0.0;
    double a_k2 = 0.0;
};

namespace detail {

inline double s_wave_length_at(const PotentialModel& model, double k, const StepPolicy& steps)
{
    const auto sol = solve_block(model, 0.0, build_basis(Statistics::boson, 0, 0), k, steps);
    return -sol.k_matrix(0, 0) / k;
}

// a(k) = -tan(delta_0)/k = a + O(k^2): Richardson-extrapolated from k1 and k1/2.
inline ScatteringLength scattering_length_unchecked(const PotentialModel& model, double k1, const StepPolicy& steps)
{
    ScatteringLength out;
    out.a_k1 = s_wave_length_at(model, k1, steps);
    out.a_k2 = s_wave_length_at(model, 0.5 * k1, steps);
    out.a = (4.0 * out.a_k2 - out.a_k1) / 3.0;
    out.residual = std::abs(out.a - out.a_k2);
    return out;
}

}  // namespace detail

inline constexpr double kResonantScatteringLength = 1e7;

// Zero-field s-wave scattering length of the model.
inline ScatteringLength zero_field_scattering_length(const PotentialModel& model, double k1 = 1e-6,
                                                     const StepPolicy& steps = {})
{
    model.validate();
    if (!(k1 > 0.0)) throw InvalidArgument("wavenumber must be positive");
    const auto out = detail::scattering_length_unchecked(model, k1, steps);
    if (!(std::abs(out.a) <= kResonantScatteringLength))
        throw NearZeroEnergyResonance("|a_sc| = " + std::to_string(std::abs(out.a)) +
                                          " a.u.: model sits on a zero-energy resonance",
                                      out.a);
    return out;
}

}  // namespace dcscat
