#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "dcscat/channels.hpp"
#include "dcscat/error.hpp"
#include "dcscat/potential.hpp"
#include "dcscat/riccati.hpp"

namespace dcscat {

// Local sector size h(r) = min(max_step, 2 pi / (eta * kappa(r))), where
// kappa^2 = max(max_i |k^2 - W_ii(r)|, 1/r^2). The 1/r^2 floor keeps the steps
// geometric where both the potential and k^2 are negligible (zero energy, s wave).
struct StepPolicy {
    double initial_step = 1e-3;
    double eta = 200.0;
    double max_step = std::numeric_limits<double>::infinity();

    void validate() const
    {
        if (!(initial_step > 0.0)) throw InvalidArgument("initial step must be positive");
        if (!(eta >= 10.0)) throw InvalidArgument("eta must be >= 10");
        if (!(max_step > 0.0)) throw InvalidArgument("max step must be positive");
    }

    StepPolicy halved() const { return {initial_step / 2.0, eta * 2.0, max_step / 2.0}; }
};

struct PropagationSettings {
    double r_start = 0.0;
    double r_match = 0.0;
    StepPolicy steps{};
    double k = 0.0;
};

// Log-derivative matrix Y = psi' psi^-1 at radius r.
struct LogDerivative {
    Eigen::MatrixXd y;
    double r = 0.0;
    ChannelBasis basis;
    std::size_t sectors = 0;
    double symmetry_defect = 0.0;  // ||Y - Y^T|| / ||Y||
    int node_count = 0;            // only filled by count_bound_states
};

inline constexpr double kHardWallLogDerivative = 1e10;
inline constexpr double kMinimumSector = 1e-6;

namespace detail {

inline ChannelBasis basis_of(const CouplingTable& table)
{
    ChannelBasis basis;
    basis.statistics = (table.ls().front() % 2 == 0) ? Statistics::boson : Statistics::fermion;
    basis.m_block = table.m();
    for (int l : table.ls()) basis.channels.push_back({l, table.m()});
    return basis;
}

inline int negative_eigenvalues(const Eigen::MatrixXd& a)
{
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return static_cast<int>((es.eigenvalues().array() < 0.0).count());
}

// Channel-diagonal transfer matrix [[C, S], [C', D]] of a reference problem
// over one half-sector: (psi, psi')(r2) = [[C, S], [C', D]] (psi, psi')(r1).
struct ReferenceTransfer {
    Eigen::VectorXd c, s, cp, d;

    explicit ReferenceTransfer(Eigen::Index n) : c(n), s(n), cp(n), d(n) {}

    // psi'' = 0: free drift of the original log-derivative recursion.
    void set_free(double h)
    {
        c.setOnes();
        s.setConstant(h);
        cp.setZero();
        d.setOnes();
    }

    // psi'' = (l(l+1)/r^2 - k^2) psi, solved exactly by Riccati-Bessel functions.
    void set_riccati(const CouplingTable& table, double k, const std::vector<RiccatiPair>& at1,
                     const std::vector<RiccatiPair>& at2)
    {
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            const RiccatiPair& p = at1[table.ls()[i]];
            const RiccatiPair& q = at2[table.ls()[i]];
            c(i) = q.j * p.dn - q.n * p.dj;
            s(i) = (q.n * p.j - q.j * p.n) / k;
            cp(i) = k * (q.dj * p.dn - q.dn * p.dj);
            d(i) = q.dn * p.j - q.dj * p.n;
        }
    }
};

// Johnson's log-derivative recursion as a symmetric splitting per sector
// [r, r + 2h]: kick h/3 U(r), drift h, kick 4h/3 U~(r + h), drift h,
// kick h/3 U(r + 2h), where U~ = (I - h^2 U/6)^-1 U is the Numerov-corrected
// midpoint. For k > 0 the drift solves the centrifugal + k^2 problem exactly
// and the kicks carry only 2 mu V; at k = 0 it is the plain free drift and the
// kicks carry all of W. The exact reference keeps the long free stretch out
// to k r >> 1 from accumulating phase error.
inline LogDerivative propagate_impl(const PotentialModel& model, double c_e, const CouplingTable& table,
                                    const PropagationSettings& settings, bool count_nodes)
{
    model.validate();
    settings.steps.validate();
    if (!(c_e >= 0.0)) throw InvalidArgument("C_E must be non-negative");
    if (!(settings.k >= 0.0)) throw InvalidArgument("wavenumber must be non-negative");
    if (!(settings.r_start < settings.r_match))
        throw InvalidArgument("r_start must lie below r_match");
    if (settings.r_start < model.r_cut)
        throw InvalidArgument("propagation cannot start inside the hard wall");

    const Eigen::Index n = table.size();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    const double k = settings.k;
    const double k2 = k * k;
    const bool riccati = k > 0.0;
    const StepPolicy& policy = settings.steps;

    Eigen::MatrixXd y = kHardWallLogDerivative * identity;
    Eigen::MatrixXd w_start(n, n), w_mid(n, n), w_end(n, n), u(n, n), a(n, n), b(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(n);
    ReferenceTransfer transfer(n);
    std::vector<RiccatiPair> rb_start, rb_mid, rb_end;

    // W(r) - k^2 for the step policy, and the part left to the kicks.
    auto evaluate = [&](double r, Eigen::MatrixXd& w, double& kappa2) {
        fill_coupling(model, c_e, table, r, w);
        w.diagonal().array() -= k2;
        kappa2 = std::max(w.diagonal().cwiseAbs().maxCoeff(), 1.0 / (r * r));
        if (riccati) {
            w.diagonal() -= table.centrifugal() / (r * r);
            w.diagonal().array() += k2;
        }
    };
    auto local_step = [&](double kappa2) {
        return std::min(policy.max_step, 2.0 * std::numbers::pi / (policy.eta * std::sqrt(kappa2)));
    };

    int nodes = 0;
    // Y <- (C' + D Y)(C + S Y)^-1, evaluated in transposed form.
    auto drift = [&]() {
        a = y * transfer.s.asDiagonal();
        a.diagonal() += transfer.c;
        if (count_nodes) nodes += negative_eigenvalues(0.5 * (a + a.transpose()));
        lu.compute(a);
        const double det = lu.determinant();
        if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return false;
        b = y * transfer.d.asDiagonal();
        b.diagonal() += transfer.cp;
        y = lu.solve(b).transpose();
        return true;
    };

    double r = settings.r_start;
    double kappa2 = 0.0;
    evaluate(r, w_start, kappa2);
    if (riccati) rb_start = riccati_table(table.l_max(), k * r);
    double h = std::min(policy.initial_step, local_step(kappa2));
    std::size_t sectors = 0;

    while (r < settings.r_match) {
        const double remaining = settings.r_match - r;
        const bool last = 2.0 * h >= remaining;
        if (last) h = 0.5 * remaining;
        if (h < kMinimumSector && !last)
            throw SolverFailure("sector size underflow at r = " + std::to_string(r) + " a.u.");

        const double r_mid = r + h;
        const double r_end = last ? settings.r_match : r + 2.0 * h;
        double unused = 0.0, kappa2_end = 0.0;
        evaluate(r_mid, w_mid, unused);
        evaluate(r_end, w_end, kappa2_end);
        u = identity - (h * h / 6.0) * w_mid;
        u = u.partialPivLu().solve(w_mid);
        if (riccati) {
            rb_mid = riccati_table(table.l_max(), k * r_mid);
            rb_end = riccati_table(table.l_max(), k * r_end);
        }

        y.noalias() += (h / 3.0) * w_start;
        if (riccati) transfer.set_riccati(table, k, rb_start, rb_mid);
        else transfer.set_free(h);
        if (!drift())
            throw SolverFailure("singular sector matrix at r = " + std::to_string(r) + " a.u.");
        y.noalias() += (4.0 * h / 3.0) * u;
        if (riccati) transfer.set_riccati(table, k, rb_mid, rb_end);
        if (!drift())
            throw SolverFailure("singular sector matrix at r = " + std::to_string(r_mid) + " a.u.");
        y.noalias() += (h / 3.0) * w_end;
        if (!y.allFinite())
            throw SolverFailure("non-finite log-derivative at r = " + std::to_string(r_end) + " a.u.");

        r = r_end;
        w_start.swap(w_end);
        rb_start.swap(rb_end);
        ++sectors;
        h = std::min(local_step(kappa2_end), 2.0 * h);
    }

    LogDerivative out;
    out.symmetry_defect = (y - y.transpose()).norm() / std::max(y.norm(), std::numeric_limits<double>::min());
    out.y = std::move(y);
    out.r = settings.r_match;
    out.basis = basis_of(table);
    out.sectors = sectors;
    out.node_count = nodes;
    return out;
}

}  // namespace detail

inline LogDerivative propagate(const PotentialModel& model, double c_e, const CouplingTable& table,
                               const PropagationSettings& settings)
{
    return detail::propagate_impl(model, c_e, table, settings, false);
}

inline LogDerivative propagate(const PotentialModel& model, double c_e, const ChannelBasis& basis,
                               const PropagationSettings& settings)
{
    auto out = propagate(model, c_e, CouplingTable(basis), settings);
    out.basis = basis;
    return out;
}

// Number of bound states below threshold in one m block, by zero-energy node
// counting out to r_end. A state whose outermost node lies beyond r_end is
// picked up from Y(r_end) against the decaying zero-energy reference -l/r.
inline int count_bound_states(const PotentialModel& model, double c_e, const ChannelBasis& basis, double r_end,
                              const StepPolicy& steps = {})
{
    const CouplingTable table(basis);
    const PropagationSettings settings{model.r_cut, r_end, steps, 0.0};
    const auto ld = detail::propagate_impl(model, c_e, table, settings, true);
    Eigen::MatrixXd shifted = 0.5 * (ld.y + ld.y.transpose());
    for (Eigen::Index i = 0; i < table.size(); ++i) shifted(i, i) += table.ls()[i] / r_end;
    return ld.node_count + detail::negative_eigenvalues(shifted);
}

}  // namespace dcscat

namespace dcscat {

struct MatchRadiusPolicy {
    double epsilon = 1e-6;  // max |2 mu V_ij(r_match)| <= epsilon k^2
    double tail_kr = 100.0; // k r_match >= tail_kr
    // At zero field K is diagonal and the 1/r^6 tail beyond the match is added
    // in first order (dispersion_tail). Going out towards k r ~ 1 only buries the
    // l >= 1 elements in roundoff, so the floor there is much lower.
    double zero_field_kr = 0.05;
    bool tail_correction = true;  // add the first-order dispersion tail beyond the match
    double cap = 1e10;
    double scale = 1.0;     // extra multiplier, used by convergence audits

    void validate() const
    {
        if (!(epsilon > 0.0)) throw InvalidArgument("match epsilon must be positive");
        if (!(tail_kr > 0.0) || !(zero_field_kr > 0.0)) throw InvalidArgument("tail k*r must be positive");
        if (!(cap > 0.0) || !(scale >= 1.0)) throw InvalidArgument("invalid match radius cap/scale");
    }
};

struct MatchRadius {
    double r = 0.0;
    double achieved_ratio = 0.0;  // max |2 mu V_ij(r)| / k^2 at the chosen radius
};

// The l >= 1 diagonals of the dipole term fall off only as 1/r^3, and their
// phase is built up around r ~ 1/k, so the match has to sit well out in the
// free region (k r >> 1) as well as beyond the epsilon criterion.
inline MatchRadius choose_match_radius(const PotentialModel& model, double c_e, const CouplingTable& table, double k,
                                       const MatchRadiusPolicy& policy = {})
{
    policy.validate();
    if (!(k > 0.0)) throw InvalidArgument("wavenumber must be positive");
    const double target = policy.epsilon * k * k;
    auto magnitude = [&](double r) { return detail::potential_magnitude(model, c_e, table, r); };

    double r = 2.0 * model.r_cut;
    if (magnitude(r) > target) {
        double lo = r, hi = r;
        while (magnitude(hi) > target && hi < policy.cap) {
            lo = hi;
            hi *= 2.0;
        }
        if (magnitude(hi) > target) {
            r = policy.cap;
        } else {
            for (int i = 0; i < 80 && hi / lo - 1.0 > 1e-6; ++i) {
                const double mid = std::sqrt(lo * hi);
                (magnitude(mid) > target ? lo : hi) = mid;
            }
            r = hi;
        }
    }
    r = std::max(r, (c_e > 0.0 ? policy.tail_kr : policy.zero_field_kr) / k);
    r = std::min(r * policy.scale, std::max(policy.cap, 2.0 * model.r_cut));
    return {r, magnitude(r) / (k * k)};
}

}  // namespace dcscat
