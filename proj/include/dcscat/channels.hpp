#pragma once

#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "dcscat/error.hpp"

namespace dcscat {

// Exchange symmetry of the colliding pair: identical bosons keep even l,
// identical fermions (spin-polarized) keep odd l.
enum class Statistics { boson, fermion };

inline std::string_view to_string(Statistics s) { return s == Statistics::boson ? "boson" : "fermion"; }

inline Statistics parse_statistics(std::string_view s)
{
    if (s == "boson") return Statistics::boson;
    if (s == "fermion") return Statistics::fermion;
    throw InvalidArgument("statistics must be 'boson' or 'fermion', got '" + std::string(s) + "'");
}

inline int parity_of(Statistics s) { return s == Statistics::boson ? 0 : 1; }

struct Channel {
    int l = 0;
    int m = 0;

    friend bool operator==(const Channel&, const Channel&) = default;
};

// One conserved-m block of partial waves, sorted ascending in l.
struct ChannelBasis {
    Statistics statistics = Statistics::boson;
    int m_block = 0;
    std::vector<Channel> channels;

    std::size_t size() const { return channels.size(); }
    int l(std::size_t i) const { return channels[i].l; }
    int l_max() const { return channels.empty() ? -1 : channels.back().l; }
};

inline ChannelBasis build_basis(Statistics statistics, int m_block, int l_max)
{
    ChannelBasis basis{statistics, m_block, {}};
    const int l_min = std::abs(m_block);
    for (int l = l_min; l <= l_max; ++l)
        if (l % 2 == parity_of(statistics))
            basis.channels.push_back({l, m_block});
    if (basis.channels.empty())
        throw InvalidArgument("empty channel basis for " + std::string(to_string(statistics)) +
                              ", m=" + std::to_string(m_block) + ", l_max=" + std::to_string(l_max));
    return basis;
}

namespace detail {

inline long double factorial(int n)
{
    long double f = 1.0L;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace detail

// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) for integer arguments, Racah's formula.
inline double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3)
{
    if (m1 + m2 + m3 != 0) return 0.0;
    if (j1 < 0 || j2 < 0 || j3 < 0) return 0.0;
    if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
    if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;

    using detail::factorial;
    const long double triangle = factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3) /
                                 factorial(j1 + j2 + j3 + 1);
    const long double prefactor =
        std::sqrt(triangle * factorial(j1 + m1) * factorial(j1 - m1) * factorial(j2 + m2) * factorial(j2 - m2) *
                  factorial(j3 + m3) * factorial(j3 - m3));

    const int k_min = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
    const int k_max = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
    long double sum = 0.0L;
    for (int k = k_min; k <= k_max; ++k) {
        const long double denom = factorial(k) * factorial(j1 + j2 - j3 - k) * factorial(j1 - m1 - k) *
                                  factorial(j2 + m2 - k) * factorial(j3 - j2 + m1 + k) *
                                  factorial(j3 - j1 - m2 + k);
        sum += ((k % 2) ? -1.0L : 1.0L) / denom;
    }
    const int phase = j1 - j2 - m3;
    return static_cast<double>(((phase % 2) ? -1.0L : 1.0L) * prefactor * sum);
}

// <Y_{l_out,m} | P2(cos theta) | Y_{l_in,m}>.
inline double p2_element(int l_out, int l_in, int m)
{
    if (l_out < 0 || l_in < 0)
        throw InvalidArgument("negative l in p2_element");
    if (std::abs(m) > std::min(l_out, l_in))
        throw InvalidArgument("|m| = " + std::to_string(std::abs(m)) + " exceeds l in p2_element(" +
                              std::to_string(l_out) + ", " + std::to_string(l_in) + ")");
    const int dl = std::abs(l_out - l_in);
    if (dl != 0 && dl != 2) return 0.0;
    const double phase = (m % 2) ? -1.0 : 1.0;
    return phase * std::sqrt((2.0 * l_out + 1.0) * (2.0 * l_in + 1.0)) * wigner_3j(l_out, 2, l_in, 0, 0, 0) *
           wigner_3j(l_out, 2, l_in, -m, 0, m);
}

}  // namespace dcscat
