#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dcscat/error.hpp"

namespace dcscat {

// Riccati-Bessel functions j^(x) = x j_l(x), n^(x) = x y_l(x) and their
// x-derivatives. Convention: j^_0 = sin x, n^_0 = -cos x, so the Wronskian
// j^ n^' - j^' n^ equals +1 for every l and x.
struct RiccatiPair {
    double j = 0.0;
    double n = 0.0;
    double dj = 0.0;
    double dn = 0.0;
};

// All orders 0..l_max at one argument. Upward recurrence for n^ (always
// stable) and for j^ when x > l_max; Miller's downward recurrence otherwise.
inline std::vector<RiccatiPair> riccati_table(int l_max, double x)
{
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("Riccati-Bessel argument must be positive");
    if (l_max < 0) throw InvalidArgument("negative l in Riccati-Bessel evaluation");

    const auto count = static_cast<std::size_t>(l_max) + 1;
    std::vector<double> j(count + 1), n(count + 1);  // index l + 1, slot 0 holds l = -1
    const double s = std::sin(x), c = std::cos(x);

    n[0] = s;
    n[1] = -c;
    for (int l = 1; l <= l_max; ++l) n[l + 1] = (2.0 * l - 1.0) / x * n[l] - n[l - 1];

    if (x > l_max) {
        j[0] = c;
        j[1] = s;
        for (int l = 1; l <= l_max; ++l) j[l + 1] = (2.0 * l - 1.0) / x * j[l] - j[l - 1];
    } else {
        const int start = l_max + 20 + static_cast<int>(std::sqrt(40.0 * (l_max + 1)));
        double above = 0.0, here = 1e-300;
        for (int l = start; l > l_max; --l) {
            const double below = (2.0 * l + 1.0) / x * here - above;
            above = here;
            here = below;
            if (std::abs(here) > 1e250) {
                here *= 1e-250;
                above *= 1e-250;
            }
        }
        // here = f_{l_max}, above = f_{l_max + 1}
        j[l_max + 1] = here;
        double next = above;
        for (int l = l_max; l >= 0; --l) {
            const double below = (2.0 * l + 1.0) / x * j[l + 1] - next;
            next = j[l + 1];
            j[l] = below;
            if (std::abs(below) > 1e250) {
                for (int i = l; i <= l_max + 1; ++i) j[i] *= 1e-250;
                next *= 1e-250;
            }
        }
        // Normalize against whichever of sin x, cos x is better conditioned.
        const double scale = std::abs(s) > std::abs(c) ? s / j[1] : c / j[0];
        for (auto& v : j) v *= scale;
    }

    std::vector<RiccatiPair> out(count);
    for (int l = 0; l <= l_max; ++l) {
        RiccatiPair& p = out[l];
        p.j = j[l + 1];
        p.n = n[l + 1];
        p.dj = j[l] - l / x * p.j;
        p.dn = n[l] - l / x * p.n;
        if (!std::isfinite(p.j) || !std::isfinite(p.n) || !std::isfinite(p.dn))
            throw SolverFailure("Riccati-Bessel overflow at l = " + std::to_string(l) + ", x = " + std::to_string(x) +
                                "; keep k*r_match >~ l");
    }
    return out;
}

inline RiccatiPair riccati_pair(int l, double x) { return riccati_table(l, x).back(); }

}  // namespace dcscat
