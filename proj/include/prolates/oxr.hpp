#ifndef PROLATES_OXR_HPP
#define PROLATES_OXR_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "prolates/chebyshev.hpp"
#include "prolates/errors.hpp"
#include "prolates/legendre.hpp"

namespace prolates::oxr {

struct SymTridiagonal {
    int dim = 0;
    std::vector<double> diag;
    std::vector<double> offdiag;  // dim - 1 entries
};

// Matrix of -((1-z^2) y')' + gamma^2 z^2 y in the orthonormal Legendre basis
// Pbar_{2m+p}; row m corresponds to degree kappa = 2m + p.
inline SymTridiagonal build_matrix(double gamma, int parity, int dim) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw invalid_argument("oxr::build_matrix: gamma must be positive and finite");
    if (dim < 4) throw invalid_argument("oxr::build_matrix: dim must be >= 4");
    SymTridiagonal t;
    t.dim = dim;
    t.diag.resize(dim);
    t.offdiag.resize(dim - 1);
    const double g2 = gamma * gamma;
    for (int m = 0; m < dim; ++m) {
        const double k = 2.0 * m + parity;
        t.diag[m] = k * (k + 1.0) + g2 * (2.0 * k * (k + 1.0) - 1.0) / ((2.0 * k + 3.0) * (2.0 * k - 1.0));
        if (m < dim - 1)
            t.offdiag[m] =
                g2 * (k + 2.0) * (k + 1.0) / ((2.0 * k + 3.0) * std::sqrt((2.0 * k + 1.0) * (2.0 * k + 5.0)));
    }
    return t;
}

namespace detail {

// Number of eigenvalues strictly below x (Sturm sequence count).
inline int sturm_count(const SymTridiagonal& t, double x) {
    const double pivmin = 1e-300;
    int count = 0;
    double q = t.diag[0] - x;
    if (std::fabs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    for (int i = 1; i < t.dim; ++i) {
        q = (t.diag[i] - x) - t.offdiag[i - 1] * t.offdiag[i - 1] / q;
        if (std::fabs(q) < pivmin) q = -pivmin;
        if (q < 0.0) ++count;
    }
    return count;
}

inline double gershgorin_upper(const SymTridiagonal& t) {
    double hi = 0.0;
    for (int i = 0; i < t.dim; ++i) {
        double r = t.diag[i];
        if (i > 0) r += std::fabs(t.offdiag[i - 1]);
        if (i < t.dim - 1) r += std::fabs(t.offdiag[i]);
        hi = std::max(hi, r);
    }
    return hi;
}

// index-th smallest eigenvalue (0-based) by bisection. The operator is
// positive semidefinite for gamma >= 0, so 0 is a valid lower bound.
inline double eig_bisect(const SymTridiagonal& t, int index) {
    double lo = 0.0, hi = gershgorin_upper(t);
    for (int it = 0; it < 140; ++it) {
        double mid = 0.5 * (lo + hi);
        if (sturm_count(t, mid) >= index + 1)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, std::fabs(hi)) && it >= 50) break;
    }
    return 0.5 * (lo + hi);
}

// Solves (T - shift I) x = b by Gaussian elimination with partial pivoting on
// the tridiagonal band (one superdiagonal of fill-in).
inline bool shifted_solve(const SymTridiagonal& t, double shift, std::vector<double>& b) {
    const int n = t.dim;
    std::vector<double> d(n), e(n, 0.0), f(n, 0.0), sub(n, 0.0);
    for (int i = 0; i < n; ++i) d[i] = t.diag[i] - shift;
    for (int i = 0; i + 1 < n; ++i) {
        e[i] = t.offdiag[i];
        sub[i] = t.offdiag[i];
    }
    for (int i = 0; i + 1 < n; ++i) {
        if (std::fabs(sub[i]) > std::fabs(d[i])) {
            std::swap(d[i], sub[i]);
            std::swap(e[i], d[i + 1]);
            if (i + 2 < n) std::swap(f[i], e[i + 1]);
            std::swap(b[i], b[i + 1]);
        }
        if (d[i] == 0.0) d[i] = 1e-300;
        const double m = sub[i] / d[i];
        d[i + 1] -= m * e[i];
        if (i + 2 < n) e[i + 1] -= m * f[i];
        b[i + 1] -= m * b[i];
    }
    if (d[n - 1] == 0.0) d[n - 1] = 1e-300;
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        if (i + 1 < n) s -= e[i] * b[i + 1];
        if (i + 2 < n) s -= f[i] * b[i + 2];
        b[i] = s / d[i];
        if (!std::isfinite(b[i])) return false;
    }
    return true;
}

inline void normalize2(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    for (double& x : v) x /= s;
}

inline double rayleigh(const SymTridiagonal& t, const std::vector<double>& v) {
    const int n = t.dim;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        double tv = t.diag[i] * v[i];
        if (i > 0) tv += t.offdiag[i - 1] * v[i - 1];
        if (i + 1 < n) tv += t.offdiag[i] * v[i + 1];
        num += v[i] * tv;
        den += v[i] * v[i];
    }
    return num / den;
}

// Inverse iteration (3 sweeps from a seeded random start) plus one Rayleigh
// quotient refinement pass; retries once with a perturbed shift on breakdown.
inline std::pair<double, std::vector<double>> eig_pair(const SymTridiagonal& t, double approx,
                                                       std::uint64_t seed) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull ^ (seed * 0xbf58476d1ce4e5b9ull) ^ t.dim);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double shift = approx;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<double> v(t.dim);
        for (double& x : v) x = unif(rng);
        normalize2(v);
        bool ok = true;
        for (int it = 0; it < 3 && ok; ++it) {
            ok = shifted_solve(t, shift, v);
            if (ok) normalize2(v);
        }
        if (ok) {
            double lam = rayleigh(t, v);
            // one more refinement from the improved shift
            if (shifted_solve(t, lam, v)) {
                normalize2(v);
                lam = rayleigh(t, v);
            }
            return {lam, std::move(v)};
        }
        shift = approx * (1.0 + 1e-13) + 1e-13;
    }
    throw numerical_error("oxr: inverse iteration breakdown near eigenvalue " +
                          std::to_string(approx));
}

inline int initial_dimension(double gamma, int n) {
    int dim = 50 + static_cast<int>(2.0 * n / std::numbers::pi) +
              static_cast<int>(std::sqrt(gamma * static_cast<double>(n)));
    return std::max(dim, n / 2 + 10);
}

}  // namespace detail

// Sturm-Liouville eigenvalue chi_n(gamma): the floor(n/2)-th smallest
// eigenvalue of the parity(n) matrix, with the dimension doubled until the
// value settles, then polished by inverse iteration + Rayleigh quotient.
inline double chi(double gamma, int n, std::uint64_t seed = 0) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw invalid_argument("oxr::chi: bad gamma");
    if (n < 0) throw invalid_argument("oxr::chi: n must be >= 0");
    const int parity = n % 2, index = n / 2;
    int dim = detail::initial_dimension(gamma, n);
    SymTridiagonal t = build_matrix(gamma, parity, dim);
    double lam = detail::eig_bisect(t, index);
    for (int round = 0; round < 20; ++round) {
        int dim2 = 2 * dim;
        SymTridiagonal t2 = build_matrix(gamma, parity, dim2);
        double lam2 = detail::eig_bisect(t2, index);
        if (std::fabs(lam2 - lam) <= 1e-13 * std::max(1.0, std::fabs(lam2))) {
            lam = lam2;
            t = std::move(t2);
            break;
        }
        lam = lam2;
        t = std::move(t2);
        dim = dim2;
    }
    return detail::eig_pair(t, lam, seed ^ static_cast<std::uint64_t>(n)).first;
}

// Legendre-basis representation of PS_n(z; gamma).
struct LegendreExpansion {
    double gamma = 0.0;
    int n = 0;
    int parity = 0;                // coefficients multiply Pbar_{2m+parity}
    std::vector<double> coeffs;
    double chi = 0.0;
};

inline LegendreExpansion ps_expansion(double gamma, int n, std::uint64_t seed = 0) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw invalid_argument("oxr::ps_expansion: bad gamma");
    if (n < 0) throw invalid_argument("oxr::ps_expansion: n must be >= 0");
    const int parity = n % 2, index = n / 2;
    int dim = detail::initial_dimension(gamma, n);
    double lam = 0.0;
    std::vector<double> vec;
    for (int round = 0; round < 24; ++round) {
        SymTridiagonal t = build_matrix(gamma, parity, dim);
        double approx = detail::eig_bisect(t, index);
        auto [l, v] = detail::eig_pair(t, approx, seed ^ static_cast<std::uint64_t>(n));
        lam = l;
        vec = std::move(v);
        // trailing-coefficient mass of the last 10% must be at round-off level
        const int tail_start = dim - std::max(1, dim / 10);
        double total = 0.0, tail = 0.0;
        for (int i = 0; i < dim; ++i) {
            total += vec[i] * vec[i];
            if (i >= tail_start) tail += vec[i] * vec[i];
        }
        if (std::sqrt(tail / total) <= 100.0 * eps0) break;
        dim *= 2;
    }

    // scale so the expansion matches P_n at 0 (value for even n, slope for odd)
    const int dimf = static_cast<int>(vec.size());
    double at0 = 0.0;
    if (parity == 0) {
        double p = 1.0;  // P_0(0), then ratio recurrence P_{k+2}(0) = -P_k(0) (k+1)/(k+2)
        for (int m = 0; m < dimf; ++m) {
            const double k = 2.0 * m;
            at0 += vec[m] * p * std::sqrt(k + 0.5);
            p *= -(k + 1.0) / (k + 2.0);
        }
        const double target = legendre_central(n).p0;
        for (double& c : vec) c *= target / at0;
    } else {
        double dp = 1.0;  // P_1'(0), then P'_{k+2}(0) = -P'_k(0) (k+2)/(k+1)
        for (int m = 0; m < dimf; ++m) {
            const double k = 2.0 * m + 1.0;
            at0 += vec[m] * dp * std::sqrt(k + 0.5);
            dp *= -(k + 2.0) / (k + 1.0);
        }
        const double target = legendre_central(n).dp0;
        for (double& c : vec) c *= target / at0;
    }

    LegendreExpansion e;
    e.gamma = gamma;
    e.n = n;
    e.parity = parity;
    e.coeffs = std::move(vec);
    e.chi = lam;
    return e;
}

// sum_m c_m Pbar_{2m+p}(z) in one upward recurrence pass.
inline double eval_ps_oxr(const LegendreExpansion& e, double z) {
    if (z < -1.0 || z > 1.0) throw domain_error("oxr::eval_ps_oxr: z outside [-1, 1]");
    const int kmax = 2 * (static_cast<int>(e.coeffs.size()) - 1) + e.parity;
    double acc = 0.0;
    double pkm1 = 1.0, pk = z;
    if (e.parity == 0) acc += e.coeffs[0] * std::sqrt(0.5);
    else acc += e.coeffs[0] * z * std::sqrt(1.5);
    for (int k = 1; k < kmax; ++k) {
        double pkp1 = ((2 * k + 1) * z * pk - k * pkm1) / (k + 1);
        pkm1 = pk;
        pk = pkp1;
        const int deg = k + 1;
        if (deg % 2 == e.parity) {
            const int m = (deg - e.parity) / 2;
            acc += e.coeffs[m] * pk * std::sqrt(deg + 0.5);
        }
    }
    return acc;
}

// Euclidean residual ||T c - chi c|| / ||c|| of the stored pair.
inline double eig_residual(const LegendreExpansion& e) {
    SymTridiagonal t = build_matrix(e.gamma, e.parity, static_cast<int>(e.coeffs.size()));
    const auto& c = e.coeffs;
    double r2 = 0.0, c2 = 0.0;
    for (int i = 0; i < t.dim; ++i) {
        double tv = t.diag[i] * c[i];
        if (i > 0) tv += t.offdiag[i - 1] * c[i - 1];
        if (i + 1 < t.dim) tv += t.offdiag[i] * c[i + 1];
        double r = tv - e.chi * c[i];
        r2 += r * r;
        c2 += c[i] * c[i];
    }
    return std::sqrt(r2 / c2);
}

}  // namespace prolates::oxr

#endif
