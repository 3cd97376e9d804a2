#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcscat/channels.hpp"
#include "dcscat/error.hpp"

namespace dcscat {

// Dispersion tail -C6/R^6 - C8/R^8 - C10/R^10 outside an infinite wall at r_cut.
// Defaults are sodium-like scales; r_cut is normally fixed by calibration.
struct PotentialModel {
    double c6 = 3000.0;
    double c8 = 0.0;
    double c10 = 0.0;
    double r_cut = 23.0;
    double reduced_mass = 20962.0;

    void validate() const
    {
        if (!(c6 > 0.0) && !(c6 == 0.0 && c8 == 0.0 && c10 == 0.0))
            throw InvalidArgument("c6 must be positive (or all dispersion coefficients zero for a pure hard wall)");
        if (!(c8 >= 0.0) || !(c10 >= 0.0))
            throw InvalidArgument("c8 and c10 must be non-negative");
        if (!(r_cut > 0.0) || !std::isfinite(r_cut))
            throw InvalidArgument("r_cut must be positive");
        if (!(reduced_mass > 0.0) || !std::isfinite(reduced_mass))
            throw InvalidArgument("reduced mass must be positive");
    }
};

namespace detail {

inline double v0_unchecked(const PotentialModel& model, double r)
{
    const double inv2 = 1.0 / (r * r);
    const double inv6 = inv2 * inv2 * inv2;
    return -inv6 * (model.c6 + inv2 * (model.c8 + inv2 * model.c10));
}

}  // namespace detail

inline double v0(const PotentialModel& model, double r)
{
    if (!(r > model.r_cut))
        throw InsideHardWall("r = " + std::to_string(r) + " is inside the hard wall at " + std::to_string(model.r_cut));
    return detail::v0_unchecked(model, r);
}

// r-independent part of the coupling: angular P2 elements and centrifugal l(l+1).
// Channels may appear in any order here; ChannelBasis keeps them sorted.
class CouplingTable {
public:
    CouplingTable(std::vector<int> ls, int m) : ls_(std::move(ls)), m_(m)
    {
        if (ls_.empty()) throw InvalidArgument("empty channel list");
        const auto n = static_cast<Eigen::Index>(ls_.size());
        angular_.resize(n, n);
        centrifugal_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            centrifugal_(i) = ls_[i] * (ls_[i] + 1.0);
            for (Eigen::Index j = 0; j < n; ++j) angular_(i, j) = p2_element(ls_[i], ls_[j], m_);
        }
    }

    explicit CouplingTable(const ChannelBasis& basis) : CouplingTable(ls_of(basis), basis.m_block) {}

    Eigen::Index size() const { return static_cast<Eigen::Index>(ls_.size()); }
    int m() const { return m_; }
    const std::vector<int>& ls() const { return ls_; }
    const Eigen::MatrixXd& angular() const { return angular_; }
    const Eigen::VectorXd& centrifugal() const { return centrifugal_; }
    int l_max() const { return *std::max_element(ls_.begin(), ls_.end()); }

private:
    static std::vector<int> ls_of(const ChannelBasis& basis)
    {
        std::vector<int> ls;
        for (const auto& c : basis.channels) ls.push_back(c.l);
        return ls;
    }

    std::vector<int> ls_;
    int m_;
    Eigen::MatrixXd angular_;
    Eigen::VectorXd centrifugal_;
};

namespace detail {

// W(r) without the range check; the propagator evaluates at the wall itself.
inline void fill_coupling(const PotentialModel& model, double c_e, const CouplingTable& table, double r,
                          Eigen::MatrixXd& w)
{
    const double two_mu = 2.0 * model.reduced_mass;
    const double radial = two_mu * v0_unchecked(model, r);
    const double dipole = -two_mu * c_e / (r * r * r);
    w.noalias() = dipole * table.angular();
    w.diagonal().array() += radial + table.centrifugal().array() / (r * r);
}

// Largest |entry| of the potential part 2 mu V(r) (centrifugal excluded).
inline double potential_magnitude(const PotentialModel& model, double c_e, const CouplingTable& table, double r)
{
    const double two_mu = 2.0 * model.reduced_mass;
    const double g_max = table.angular().cwiseAbs().maxCoeff();
    return two_mu * (std::abs(v0_unchecked(model, r)) + c_e * g_max / (r * r * r));
}

}  // namespace detail

// W_ij(r) = 2 mu [V0(r) delta_ij - (C_E/r^3) g_ij] + delta_ij l_i(l_i+1)/r^2, in a.u.^-2.
inline Eigen::MatrixXd coupling_matrix(const PotentialModel& model, double c_e, const CouplingTable& table, double r)
{
    if (!(r > model.r_cut))
        throw InsideHardWall("r = " + std::to_string(r) + " is inside the hard wall at " + std::to_string(model.r_cut));
    if (!(c_e >= 0.0)) throw InvalidArgument("C_E must be non-negative");
    Eigen::MatrixXd w(table.size(), table.size());
    detail::fill_coupling(model, c_e, table, r, w);
    return w;
}

inline Eigen::MatrixXd coupling_matrix(const PotentialModel& model, double c_e, const ChannelBasis& basis, double r)
{
    return coupling_matrix(model, c_e, CouplingTable(basis), r);
}

}  // namespace dcscat
