#include <cmath>

#include <gtest/gtest.h>

#include "dcscat/potential.hpp"

using namespace dcscat;

TEST(V0, Examples)
{
    PotentialModel m{1.0, 1.0, 1.0, 0.5, 1.0};
    EXPECT_DOUBLE_EQ(v0(m, 1.0), -3.0);
    PotentialModel single{1.0, 0.0, 0.0, 1.0, 1.0};
    EXPECT_NEAR(v0(single, 100.0), -1e-12, 1e-27);
    PotentialModel dflt;
    EXPECT_NEAR(v0(dflt, 60.0) / v0(dflt, 30.0), 1.0 / 64.0, 1e-15);
}

TEST(V0, NegativeAndIncreasing)
{
    PotentialModel m{3000.0, 1e5, 1e7, 10.0, 20962.0};
    double prev = v0(m, 10.01);
    for (double r = 10.5; r < 500.0; r *= 1.1) {
        const double v = v0(m, r);
        EXPECT_LT(v, 0.0);
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(V0, InsideWallRejected)
{
    PotentialModel m;
    EXPECT_THROW(v0(m, m.r_cut), InsideHardWall);
    EXPECT_THROW(v0(m, 1.0), InvalidArgument);
}

TEST(PotentialModel, Validation)
{
    EXPECT_NO_THROW(PotentialModel{}.validate());
    EXPECT_NO_THROW((PotentialModel{0.0, 0.0, 0.0, 5.0, 1.0}.validate()));  // pure hard wall
    EXPECT_THROW((PotentialModel{0.0, 1.0, 0.0, 5.0, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((PotentialModel{-1.0, 0.0, 0.0, 5.0, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((PotentialModel{1.0, -1.0, 0.0, 5.0, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((PotentialModel{1.0, 0.0, 0.0, 0.0, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((PotentialModel{1.0, 0.0, 0.0, 5.0, 0.0}.validate()), InvalidArgument);
}

TEST(CouplingMatrix, DecoupledWithoutField)
{
    PotentialModel m;
    const auto basis = build_basis(Statistics::boson, 0, 6);
    const double r = 31.0;
    const auto w = coupling_matrix(m, 0.0, basis, r);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            if (i != j) {
                EXPECT_EQ(w(i, j), 0.0);
            } else {
                const int l = basis.l(i);
                EXPECT_NEAR(w(i, i), 2.0 * m.reduced_mass * v0(m, r) + l * (l + 1.0) / (r * r), 1e-15);
            }
        }
}

TEST(CouplingMatrix, SWaveDWaveElement)
{
    PotentialModel m;
    const double c_e = 2.0008e-5, r = 40.0;
    const auto w = coupling_matrix(m, c_e, build_basis(Statistics::boson, 0, 2), r);
    EXPECT_NEAR(w(0, 1), -2.0 * m.reduced_mass * c_e / (r * r * r) / std::sqrt(5.0), 1e-18);
    EXPECT_EQ(w(0, 1), w(1, 0));
}

TEST(CouplingMatrix, SymmetricWithSelectionRules)
{
    PotentialModel m;
    for (int mb : {0, 1, 2, -3})
        for (Statistics s : {Statistics::boson, Statistics::fermion}) {
            const auto basis = build_basis(s, mb, 12);
            for (double r : {23.5, 80.0, 1e4}) {
                const auto w = coupling_matrix(m, 3e-5, basis, r);
                EXPECT_EQ((w - w.transpose()).cwiseAbs().maxCoeff(), 0.0);
                for (Eigen::Index i = 0; i < w.rows(); ++i)
                    for (Eigen::Index j = 0; j < w.cols(); ++j)
                        if (std::abs(basis.l(i) - basis.l(j)) > 2) EXPECT_EQ(w(i, j), 0.0);
            }
        }
}

TEST(CouplingMatrix, LongRangeTails)
{
    PotentialModel m;
    const double c_e = 1e-4;
    const auto basis = build_basis(Statistics::boson, 0, 4);
    const double r = 1e5;
    const auto w = coupling_matrix(m, c_e, basis, r);
    // s wave: the field term has no diagonal, so the 1/r^6 tail survives
    EXPECT_NEAR(std::pow(r, 6) * w(0, 0), -2.0 * m.reduced_mass * m.c6, 1e-9 * 2.0 * m.reduced_mass * m.c6);
    for (Eigen::Index i = 1; i < w.rows(); ++i) {
        const int l = basis.l(i);
        const double tail = r * r * r * (w(i, i) - l * (l + 1.0) / (r * r));
        const double expected = -2.0 * m.reduced_mass * c_e * p2_element(l, l, 0);
        EXPECT_NEAR(tail, expected, 1e-6 * std::abs(expected));
    }
}

TEST(CouplingMatrix, InsideWallRejected)
{
    PotentialModel m;
    EXPECT_THROW(coupling_matrix(m, 0.0, build_basis(Statistics::boson, 0, 2), m.r_cut), InsideHardWall);
}
