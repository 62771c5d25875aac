#ifndef PROLATES_LEGENDRE_HPP
#define PROLATES_LEGENDRE_HPP

#include <cmath>
#include <utility>

#include "prolates/errors.hpp"

namespace prolates {

// P_n(z) and P_n'(z) on [-1,1] by upward recurrence. The derivative is
// carried through its own recurrence so the endpoints need no special case.
inline std::pair<double, double> legendre_p(int n, double z) {
    if (n < 0) throw invalid_argument("legendre_p: n must be >= 0");
    if (z < -1.0 || z > 1.0) throw domain_error("legendre_p: z outside [-1, 1]");
    if (n == 0) return {1.0, 0.0};
    double pkm1 = 1.0, pk = z;
    double dkm1 = 0.0, dk = 1.0;
    for (int k = 1; k < n; ++k) {
        double pkp1 = ((2 * k + 1) * z * pk - k * pkm1) / (k + 1);
        double dkp1 = dkm1 + (2 * k + 1) * pk;
        pkm1 = pk;
        pk = pkp1;
        dkm1 = dk;
        dk = dkp1;
    }
    return {pk, dk};
}

struct LegendreCentralValues {
    int n;
    double p0;   // P_n(0)
    double dp0;  // P_n'(0)
};

// P_n(0) and P_n'(0) through log-gamma, O(1) in n and overflow-free far past
// the range where the double-factorial form dies (~n=300).
inline LegendreCentralValues legendre_central(int n) {
    if (n < 0) throw invalid_argument("legendre_central: n must be >= 0");
    auto even_p0 = [](int m) {
        // P_m(0) = (-1)^{m/2} m! / (2^m ((m/2)!)^2) for even m
        double lg = std::lgamma(m + 1.0) - 2.0 * std::lgamma(m / 2 + 1.0) - m * std::log(2.0);
        double v = std::exp(lg);
        return (m / 2) % 2 == 0 ? v : -v;
    };
    if (n % 2 == 0) return {n, even_p0(n), 0.0};
    return {n, 0.0, n * even_p0(n - 1)};  // P_n'(0) = n P_{n-1}(0)
}

// L^2(-1,1)-orthonormal Legendre polynomial sqrt(n + 1/2) P_n(z).
inline double legendre_pbar(int n, double z) {
    return legendre_p(n, z).first * std::sqrt(n + 0.5);
}

}  // namespace prolates

#endif
