#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dcscat/observables.hpp"
#include "dcscat/units.hpp"

using namespace dcscat;

namespace {

std::vector<ScatteringSolution> synthetic(Statistics s, int l_max, int m_max, double k = 1e-6)
{
    std::vector<ScatteringSolution> out;
    for (int m = -m_max; m <= m_max; ++m) {
        ScatteringSolution sol;
        sol.k = k;
        sol.basis = build_basis(s, m, l_max);
        const auto n = static_cast<Eigen::Index>(sol.basis.size());
        sol.t_reduced = ComplexMatrix::Zero(n, n);
        out.push_back(sol);
    }
    return out;
}

ScatteringSolution& block(std::vector<ScatteringSolution>& v, int m)
{
    for (auto& s : v)
        if (s.basis.m_block == m) return s;
    throw std::logic_error("no block");
}

}  // namespace

TEST(CrossSection, SWaveNormalization)
{
    auto v = synthetic(Statistics::boson, 4, 2);
    block(v, 0).t_reduced(0, 0) = -32.0;
    const auto r = cross_section(v, Statistics::boson);
    EXPECT_NEAR(r.sigma, 8.0 * std::numbers::pi * 32.0 * 32.0, 1e-9);
    EXPECT_NEAR(r.sigma / 2.574e4, 1.0, 2e-4);
    EXPECT_DOUBLE_EQ(*r.asymmetry, 1.0);
    EXPECT_DOUBLE_EQ(*r.a_eff, 32.0);

    block(v, 0).t_reduced(0, 0) = -2470.0;
    const auto big = cross_section(v, Statistics::boson);
    EXPECT_NEAR(big.sigma / 1.5333e8, 1.0, 1e-4);
    EXPECT_DOUBLE_EQ(*big.asymmetry, 1.0);
}

TEST(CrossSection, ZeroAndAsymmetryLimits)
{
    auto v = synthetic(Statistics::boson, 4, 2);
    const auto zero = cross_section(v, Statistics::boson);
    EXPECT_EQ(zero.sigma, 0.0);
    EXPECT_EQ(*zero.asymmetry, 0.0);
    EXPECT_FALSE(zero.asymmetry_defined);

    block(v, 1).t_reduced(0, 1) = block(v, 1).t_reduced(1, 0) = {3.0, 0.5};
    block(v, -2).t_reduced(0, 0) = 7.0;
    const auto aniso = cross_section(v, Statistics::boson);
    EXPECT_GT(aniso.sigma, 0.0);
    EXPECT_EQ(*aniso.asymmetry, 0.0);
    EXPECT_TRUE(aniso.asymmetry_defined);
}

TEST(CrossSection, BlockAdditivity)
{
    auto v = synthetic(Statistics::fermion, 7, 3);
    double expected = 0.0;
    for (auto& sol : v)
        for (Eigen::Index i = 0; i < sol.t_reduced.rows(); ++i)
            for (Eigen::Index j = 0; j < sol.t_reduced.cols(); ++j) {
                sol.t_reduced(i, j) = {0.1 * (i + 1) + sol.basis.m_block, 0.01 * j};
                expected += 8.0 * std::numbers::pi * std::norm(sol.t_reduced(i, j));
            }
    const auto r = cross_section(v, Statistics::fermion);
    double sum = 0.0;
    for (const auto& b : r.per_block) sum += b.sigma;
    EXPECT_EQ(sum, r.sigma);
    EXPECT_NEAR(r.sigma, expected, 1e-12 * expected);
    EXPECT_FALSE(r.asymmetry.has_value());
    EXPECT_FALSE(r.a_eff.has_value());
    EXPECT_EQ(r.m_max, 3);
    EXPECT_EQ(r.l_max, 7);
}

TEST(CrossSection, RejectsInconsistentInput)
{
    auto mixed = synthetic(Statistics::boson, 4, 1);
    mixed[0].k = 2e-6;
    EXPECT_THROW(cross_section(mixed, Statistics::boson), InvalidArgument);

    auto gap = synthetic(Statistics::boson, 4, 2);
    gap.erase(gap.begin() + 1);
    EXPECT_THROW(cross_section(gap, Statistics::boson), InvalidArgument);

    auto dup = synthetic(Statistics::boson, 4, 1);
    dup.push_back(dup[1]);
    EXPECT_THROW(cross_section(dup, Statistics::boson), InvalidArgument);

    EXPECT_THROW(cross_section(synthetic(Statistics::fermion, 5, 1), Statistics::boson), InvalidArgument);
    EXPECT_THROW(cross_section(std::vector<ScatteringSolution>{}, Statistics::boson), InvalidArgument);
}

TEST(SolveBlocks, NegativeMMirrorsPositive)
{
    PotentialModel m;
    const auto v = solve_blocks(m, 1e-4, Statistics::boson, 6, 2, 1e-6);
    ASSERT_EQ(v.size(), 5u);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(v[i].basis.m_block, i - 2);
    const auto direct = solve_block(m, 1e-4, build_basis(Statistics::boson, -2, 6), 1e-6);
    EXPECT_LT((direct.t_reduced - v[0].t_reduced).norm(), 1e-12 * direct.t_reduced.norm());
}

TEST(CrossSection, ParityExclusivity)
{
    PotentialModel m;
    for (Statistics s : {Statistics::boson, Statistics::fermion}) {
        const auto v = solve_blocks(m, 1e-4, s, 9, 2, 1e-6);
        for (const auto& sol : v)
            for (const auto& c : sol.basis.channels) EXPECT_EQ(c.l % 2, parity_of(s));
        const auto r = cross_section(v, s);
        EXPECT_LE(r.optical_defect, 1e-6);
        EXPECT_LE(r.max_unitarity_defect, 1e-8);
        if (s == Statistics::boson) {
            EXPECT_GE(*r.asymmetry, 0.0);
            EXPECT_LE(*r.asymmetry, 1.0 + 1e-8);
            // Im t00 = k sum_j |t_j0|^2, bounded by k sigma / 8 pi
            EXPECT_GE(*r.a_eff_imag, 0.0);
            EXPECT_LE(*r.a_eff_imag, r.k * r.sigma / (8.0 * std::numbers::pi) * (1.0 + 1e-6));
        }
    }
}

TEST(ZeroFieldScatteringLength, HardSphere)
{
    for (double rc : {5.0, 23.226, 100.0}) {
        const auto a = zero_field_scattering_length({0.0, 0.0, 0.0, rc, 20962.0});
        EXPECT_NEAR(a.a / rc, 1.0, 1e-6);
        EXPECT_LT(a.residual, 1e-6 * rc);
    }
}

TEST(ZeroFieldScatteringLength, NearResonanceReported)
{
    PotentialModel m;
    m.r_cut = 24.9023057;  // within 1e-6 a.u. of a pole
    try {
        zero_field_scattering_length(m);
        FAIL() << "expected a near-resonance report";
    } catch (const NearZeroEnergyResonance& e) {
        EXPECT_GT(std::abs(e.estimate()), 1e7);
    }
}

TEST(ZeroFieldScatteringLength, PoleAcrossOnePeriod)
{
    // a(R_c) increases along a branch, diverges once per period, and each
    // divergence trades exactly one s-wave bound state
    PotentialModel m;
    const auto basis = build_basis(Statistics::boson, 0, 0);
    int jumps = 0;
    double prev_a = 0.0;
    int prev_n = -1;
    for (double rc = 22.2; rc <= 26.1; rc += 0.05) {
        m.r_cut = rc;
        const double a = detail::scattering_length_unchecked(m, 1e-6, {}).a;
        const int n = count_bound_states(m, 0.0, basis, 1e4);
        if (prev_n >= 0) {
            if (n != prev_n) {
                ++jumps;
                EXPECT_EQ(prev_n - n, 1);
                EXPECT_GT(prev_a, 0.0);
                EXPECT_LT(a, 0.0);
            } else {
                EXPECT_GT(a, prev_a);
            }
        }
        prev_a = a;
        prev_n = n;
    }
    EXPECT_EQ(jumps, 1);
}

TEST(FermionThreshold, SuppressedAtZeroField)
{
    PotentialModel m;
    NumericalOptions o;
    o.escalate = false;
    const auto r = converged_cross_section(m, 0.0, Statistics::fermion, o);
    EXPECT_LT(r.sigma, 1e-2);
    // p-wave Wigner law: sigma ~ k^4
    o.k = 2e-6;
    const auto r2 = converged_cross_section(m, 0.0, Statistics::fermion, o);
    EXPECT_NEAR(r2.sigma / r.sigma, 16.0, 0.2);
}

TEST(Escalation, StopsWhenNextStepIsSmall)
{
    PotentialModel m;
    const double c_e = coupling_coefficient({field_to_au(300.0)});
    NumericalOptions o;
    const auto r = converged_cross_section(m, c_e, Statistics::fermion, o);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.escalation_change, o.convergence_tol);
    EXPECT_GE(r.l_max, 9);
    EXPECT_EQ((r.l_max - 9) / 2, r.m_max - 4);
    const auto next = solve_cross_section(m, c_e, Statistics::fermion, r.l_max + 2, r.m_max + 1, o);
    EXPECT_NEAR(next.sigma / r.sigma - 1.0, 0.0, o.convergence_tol);

    NumericalOptions bad;
    bad.k = 0.0;
    EXPECT_THROW(converged_cross_section(m, c_e, Statistics::boson, bad), InvalidArgument);
}
