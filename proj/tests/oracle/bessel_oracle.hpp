#pragma once

// Independent reference evaluation of the modified Bessel functions
//   I0(x) = (1/pi) int_0^pi e^{x cos th} dth
//   I1(x) = (1/pi) int_0^pi e^{x cos th} cos th dth
// by long double trapezoid sums with node doubling until two levels agree to
// ~1e-16 relatively (the integrand is smooth and periodic, so the trapezoid
// rule converges spectrally). Tests use this as an oracle that shares no
// code path with the library's series and quadratures.

#include <cmath>
#include <stdexcept>

namespace oracle {

inline long double bessel_integral(long double x, bool first_order) {
    const long double pi = 3.14159265358979323846264338327950288L;
    long double prev = 0.0L;
    for (int k = 64; k <= (1 << 24); k *= 2) {
        const long double h = pi / k;
        long double acc = 0.5L * (std::exp(x) + (first_order ? -1.0L : 1.0L) * std::exp(-x));
        for (int j = 1; j < k; ++j) {
            const long double c = std::cos(h * j);
            acc += std::exp(x * c) * (first_order ? c : 1.0L);
        }
        const long double val = acc * h / pi;
        if (k > 64 && std::abs(val - prev) <= 1e-16L * std::abs(val)) return val;
        prev = val;
    }
    throw std::runtime_error("bessel oracle did not converge");
}

inline double bessel_i0(double x) { return double(bessel_integral(x, false)); }
inline double bessel_i1(double x) { return double(bessel_integral(x, true)); }

}  // namespace oracle
