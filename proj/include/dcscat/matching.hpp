#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "dcscat/channels.hpp"
#include "dcscat/error.hpp"
#include "dcscat/potential.hpp"
#include "dcscat/propagator.hpp"
#include "dcscat/riccati.hpp"

namespace dcscat {

using ComplexMatrix = Eigen::MatrixXcd;

struct ScatteringSolution {
    double k = 0.0;
    ChannelBasis basis;
    Eigen::MatrixXd k_matrix;
    ComplexMatrix s_matrix;
    ComplexMatrix t_reduced;  // t = T / k, length units

    // diagnostics
    double r_match = 0.0;
    double match_ratio = 0.0;
    double k_symmetry_defect = 0.0;
    double y_symmetry_defect = 0.0;
    double match_rcond = 0.0;
    double tail_correction = 0.0;  // max |dK_ll| added for the dispersion tail
    std::size_t sectors = 0;

    double unitarity_defect() const
    {
        const auto n = s_matrix.rows();
        return (s_matrix * s_matrix.adjoint() - ComplexMatrix::Identity(n, n)).norm();
    }
};

struct KMatrix {
    Eigen::MatrixXd k;
    double symmetry_defect = 0.0;  // before symmetrization
    double rcond = 0.0;
};

// psi = J^ - N^ K  (columns are solutions), so with Y psi = psi':
//   K = (Y N^ - N^')^-1 (Y J^ - J^'),  single channel K = tan(delta).
// Derivatives are with respect to r, i.e. k times the x-derivatives.
inline KMatrix extract_k_matrix(const LogDerivative& ld, double k)
{
    if (!(k > 0.0)) throw InvalidArgument("wavenumber must be positive");
    const auto n = static_cast<Eigen::Index>(ld.basis.size());
    if (ld.y.rows() != n || ld.y.cols() != n) throw InvalidArgument("log-derivative does not match its basis");

    const double x = k * ld.r;
    const auto table = riccati_table(ld.basis.l_max(), x);
    Eigen::MatrixXd numer(n, n), denom(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        const RiccatiPair& p = table[ld.basis.l(col)];
        numer.col(col) = ld.y.col(col) * p.j;
        denom.col(col) = ld.y.col(col) * p.n;
        numer(col, col) -= k * p.dj;
        denom(col, col) -= k * p.dn;
    }

    // Column scales of N^ span many decades when k r < l; equilibrate first.
    const Eigen::VectorXd scale = denom.colwise().norm().transpose();
    if (!(scale.array() > 0.0).all()) throw SolverFailure("degenerate matching matrix");
    const Eigen::MatrixXd balanced = denom * scale.cwiseInverse().asDiagonal();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(balanced);
    KMatrix out;
    out.rcond = lu.rcond();
    if (!(out.rcond > 1e-15))
        throw SolverFailure("singular K-matrix solve at r_match = " + std::to_string(ld.r) +
                            " a.u. (reciprocal condition " + std::to_string(out.rcond) + ")");
    Eigen::MatrixXd kmat = scale.cwiseInverse().asDiagonal() * lu.solve(numer);
    const double norm = kmat.norm();
    out.symmetry_defect = norm > 0.0 ? (kmat - kmat.transpose()).norm() / norm : 0.0;
    out.k = 0.5 * (kmat + kmat.transpose());
    return out;
}

struct SAndT {
    ComplexMatrix s;
    ComplexMatrix t_reduced;
};

// S = (I + iK)(I - iK)^-1, T = (S - I)/(2i) = K (I - iK)^-1, t = T/k.
inline SAndT s_and_t(const Eigen::MatrixXd& k_matrix, double k)
{
    if (!(k > 0.0)) throw InvalidArgument("wavenumber must be positive");
    const auto n = k_matrix.rows();
    if (k_matrix.cols() != n) throw InvalidArgument("K matrix must be square");
    const ComplexMatrix identity = ComplexMatrix::Identity(n, n);
    const ComplexMatrix kc = k_matrix.cast<std::complex<double>>();
    const ComplexMatrix denom = identity - std::complex<double>(0.0, 1.0) * kc;
    const Eigen::PartialPivLU<ComplexMatrix> lu(denom);
    if (!(lu.rcond() > 1e-15)) throw SolverFailure("I - iK is singular (exact K-matrix pole); perturb k");
    // K commutes with (I - iK)^-1, so T = K (I - iK)^-1 = (I - iK)^-1 K.
    const ComplexMatrix t_big = lu.solve(kc);
    SAndT out;
    out.t_reduced = t_big / k;
    out.s = identity + std::complex<double>(0.0, 2.0) * t_big;
    return out;
}

// First-order correction for the isotropic dispersion tail beyond r:
//   dK_ll = -(1/k) int_r^inf j^_l(kr)^2 2 mu V0(r) dr,  indexed by l.
// At zero field the match sits at k r ~ 0.2, where the C6 tail still carries
// ~1e-3 of the p-wave K (it only falls off as 1/r there). Free waves are fine
// because the elements it matters for have |K| << 1. The dipole tail is left
// to the k r >= 100 floor.
inline Eigen::VectorXd dispersion_tail(const PotentialModel& model, int l_max, double k, double r)
{
    using Rule = boost::math::quadrature::gauss<double, 20>;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(l_max + 1);
    if (model.c6 == 0.0 && model.c8 == 0.0 && model.c10 == 0.0) return sum;
    const auto& nodes = Rule::abscissa();
    const auto& weights = Rule::weights();
    auto panel = [&](double a, double b) {
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (double x : {mid - half * nodes[i], mid + half * nodes[i]}) {
                const auto t = riccati_table(l_max, x);
                const double w = half * weights[i] * 2.0 * model.reduced_mass * detail::v0_unchecked(model, x / k);
                for (int l = 0; l <= l_max; ++l) sum[l] += w * t[l].j * t[l].j;
            }
    };
    // geometric panels up to the turning region, then panels shorter than a
    // period until the 1/x^6 envelope has died off
    const double x0 = k * r, x_osc = std::max(x0, l_max + 10.0), x_end = 4.0 * x_osc;
    double a = x0;
    for (; a < x_osc; a = std::min(2.0 * a, x_osc)) panel(a, std::min(2.0 * a, x_osc));
    for (; a < x_end; a = std::min(a + 2.0, x_end)) panel(a, std::min(a + 2.0, x_end));
    return -sum / (k * k);
}

// One m block: choose r_match, propagate from the wall, match, build S and t.
inline ScatteringSolution solve_block(const PotentialModel& model, double c_e, const ChannelBasis& basis, double k,
                                      const StepPolicy& steps = {}, const MatchRadiusPolicy& match = {})
{
    const CouplingTable table(basis);
    const MatchRadius radius = choose_match_radius(model, c_e, table, k, match);
    const PropagationSettings settings{model.r_cut, radius.r, steps, k};
    auto ld = propagate(model, c_e, table, settings);
    ld.basis = basis;
    KMatrix km = extract_k_matrix(ld, k);
    const Eigen::VectorXd tail = match.tail_correction ? dispersion_tail(model, basis.l_max(), k, radius.r)
                                                       : Eigen::VectorXd::Zero(basis.l_max() + 1);
    double tail_max = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        km.k(ii, ii) += tail[basis.l(i)];
        tail_max = std::max(tail_max, std::abs(tail[basis.l(i)]));
    }
    SAndT st = s_and_t(km.k, k);

    ScatteringSolution sol;
    sol.k = k;
    sol.basis = basis;
    sol.k_matrix = km.k;
    sol.s_matrix = std::move(st.s);
    sol.t_reduced = std::move(st.t_reduced);
    sol.r_match = radius.r;
    sol.match_ratio = radius.achieved_ratio;
    sol.k_symmetry_defect = km.symmetry_defect;
    sol.y_symmetry_defect = ld.symmetry_defect;
    sol.match_rcond = km.rcond;
    sol.tail_correction = tail_max;
    sol.sectors = ld.sectors;
    return sol;
}

}  // namespace dcscat
