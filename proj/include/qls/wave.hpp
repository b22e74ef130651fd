#pragma once

#include <cmath>
#include <complex>

#include "qls/types.hpp"

namespace qls {

/// Principal square root, rotated so that Re >= 0 (std::sqrt already does
/// this; the rotation only matters for the signed-zero edge of the cut).
inline complex principal_sqrt(complex z) {
    complex r = std::sqrt(z);
    if (r.real() < 0 || (r.real() == 0 && r.imag() < 0)) r = -r;
    return r;
}

/// k = sqrt(omega^2 + i gamma omega) / c0 with c0 = 1.
inline complex line_wavevector(double omega, double line_damping) {
    return principal_sqrt(complex{omega * omega, line_damping * omega});
}

inline constexpr double kMaxImagArgument = 700.0;

inline void check_trig_argument(complex z) {
    if (std::abs(z.imag()) > kMaxImagArgument)
        throw ArgumentOverflow("complex trigonometric argument has |Im| > 700");
}

// cos and sin of a complex argument through exponentials.
inline complex ccos(complex z) {
    check_trig_argument(z);
    const complex iz{-z.imag(), z.real()};
    return 0.5 * (std::exp(iz) + std::exp(-iz));
}

inline complex csin(complex z) {
    check_trig_argument(z);
    const complex iz{-z.imag(), z.real()};
    return (std::exp(iz) - std::exp(-iz)) / complex{0.0, 2.0};
}

}  // namespace qls
