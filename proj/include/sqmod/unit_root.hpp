#pragma once

#include <complex>
#include <cstdint>
#include <numbers>

namespace sqmod {

using complex = std::complex<double>;

/// e(num/den) = exp(2 pi i num/den) with the angle reduced mod 1 in integer
/// arithmetic first. Multiples of 1/8 come out exact (up to the rounding of
/// sqrt(1/2)), so quarter turns are exactly 1, i, -1, -i.
inline complex unit_root(std::int64_t num, std::int64_t den) {
    std::int64_t r = num % den;
    if (r < 0) r += den;
    // Fold into the first octant and rebuild the value by symmetry.
    const __int128 r8 = static_cast<__int128>(r) * 8;
    if (r8 % den == 0) {
        constexpr double h = std::numbers::sqrt2 / 2;
        switch (static_cast<int>(r8 / den)) {
            case 0: return {1.0, 0.0};
            case 1: return {h, h};
            case 2: return {0.0, 1.0};
            case 3: return {-h, h};
            case 4: return {-1.0, 0.0};
            case 5: return {-h, -h};
            case 6: return {0.0, -1.0};
            default: return {h, -h};
        }
    }
    // Use the angle closest to zero for better relative accuracy.
    double frac = static_cast<double>(r) / static_cast<double>(den);
    if (frac > 0.5) frac -= 1.0;
    const double angle = 2.0 * std::numbers::pi * frac;
    return {std::cos(angle), std::sin(angle)};
}

/// e(theta) for a real angle.
inline complex unit_root(double theta) {
    double frac = theta - std::floor(theta);
    if (frac > 0.5) frac -= 1.0;
    const double angle = 2.0 * std::numbers::pi * frac;
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace sqmod
