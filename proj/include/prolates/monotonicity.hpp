#ifndef PROLATES_MONOTONICITY_HPP
#define PROLATES_MONOTONICITY_HPP

#include <cmath>
#include <string>
#include <vector>

#include "prolates/chebyshev.hpp"
#include "prolates/errors.hpp"
#include "prolates/phase.hpp"

namespace prolates::monotonicity {

enum class Verdict { pass, fail, indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
    }
    return "indeterminate";
}

struct OrderResult {
    int order = 0;
    double min_value = 0.0;  // min of f^(j) (absolute) or (-1)^j f^(j) (multiply monotone)
    double scale = 0.0;      // max |f^(j)| on the grid
    Verdict verdict = Verdict::indeterminate;
};

struct MonotonicityReport {
    double gamma = 0.0;
    int n = 0;
    double lo = 0.0, hi = 0.0;
    int orders_requested = 0;
    int grid_size = 0;
    bool absolute = true;  // sign convention used for min_value
    std::vector<OrderResult> results;
};

namespace detail {

constexpr int kMaxOrder = 8;          // past this, spectral differentiation is noise
constexpr double kNoiseFloor = 1e-8;  // |min| < floor * scale -> indeterminate

// Differentiates a piecewise fit j times in coefficient space and records the
// per-order grid minima. alternate=true checks (-1)^j f^(j) >= 0.
inline void scan_orders(const PiecewiseChebyshev& fit, int orders, bool alternate,
                        MonotonicityReport& rep, int samples_per_piece = 64) {
    PiecewiseChebyshev cur = fit;
    rep.grid_size = static_cast<int>(fit.size()) * samples_per_piece;
    for (int j = 0; j <= orders; ++j) {
        OrderResult r;
        r.order = j;
        if (j > kMaxOrder) {
            r.verdict = Verdict::indeterminate;
            rep.results.push_back(r);
            continue;
        }
        double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
        const double sign = (alternate && j % 2 == 1) ? -1.0 : 1.0;
        for (const auto& piece : cur.pieces()) {
            for (int s = 0; s < samples_per_piece; ++s) {
                double x = piece.lo() + (piece.hi() - piece.lo()) * (s + 0.5) / samples_per_piece;
                double v = sign * piece.eval(x);
                mn = std::min(mn, v);
                mx = std::max(mx, std::fabs(v));
            }
        }
        r.min_value = mn;
        r.scale = mx;
        if (std::fabs(mn) < kNoiseFloor * mx)
            r.verdict = Verdict::indeterminate;
        else
            r.verdict = mn >= 0.0 ? Verdict::pass : Verdict::fail;
        rep.results.push_back(r);

        // differentiate in place for the next order
        std::vector<ChebyshevCoeffs> dp;
        dp.reserve(cur.size());
        for (const auto& piece : cur.pieces()) {
            auto d = ChebyshevCoeffs::derivative_coeffs(piece.coeffs());
            d.resize(piece.coeffs().size(), 0.0);
            const double chain = 2.0 / (piece.hi() - piece.lo());
            for (double& c : d) c *= chain;
            dp.emplace_back(std::move(d), piece.lo(), piece.hi());
        }
        cur = PiecewiseChebyshev(cur.breakpoints(), std::move(dp));
    }
}

}  // namespace detail

// Conjectured absolute monotonicity of M_n(z; gamma) = w(-log(1-z)) / (1+z)
// on (0,1): re-expands in z on (lo, hi), hi capped at 1 - 1e-6 to stay clear
// of the logarithmic blow-up at z = 1.
inline MonotonicityReport check_absolute_monotone(const phase::ProlateEvaluator& ev, double lo,
                                                  double hi, int orders) {
    if (!(ev.params.gamma > 0.0))
        throw invalid_argument("monotonicity: gamma = 0 not supported (Legendre Q route not built)");
    if (orders < 0) throw invalid_argument("monotonicity: orders must be >= 0");
    const double delta = 1e-6;
    hi = std::min(hi, 1.0 - delta);
    if (!(0.0 <= lo && lo < hi)) throw invalid_argument("monotonicity: bad interval");

    auto modulus = [&](double z) {
        const double x = -std::log1p(-z);
        return ev.phase.w.eval(std::min(x, ev.phase.x_end)) / (1.0 + z);
    };
    PiecewiseChebyshev fit = fit_adaptive(modulus, lo, hi, 29, 1e-12, 40);

    MonotonicityReport rep;
    rep.gamma = ev.params.gamma;
    rep.n = ev.params.n;
    rep.lo = lo;
    rep.hi = hi;
    rep.orders_requested = orders;
    rep.absolute = true;
    detail::scan_orders(fit, orders, /*alternate=*/false, rep);
    return rep;
}

// Conjectured (2+n)-times monotonicity of the imaginary-axis profile: checks
// (-1)^j g^(j) >= 0 for g(t) = exp(int_{t0}^t s) / sqrt(1+t^2), which is the
// decaying solution up to one positive factor. Orders are capped at
// min(orders, 2+n, 6).
inline MonotonicityReport check_imaginary_axis_monotone(double gamma, int n, int orders,
                                                        const phase::PhaseOptions& opts = {}) {
    if (!(gamma > 0.0))
        throw invalid_argument("monotonicity: gamma = 0 not supported (Legendre Q route not built)");
    const double chi = oxr::chi(gamma, n);
    phase::ProlateParams params(gamma, n, chi);
    auto ric = phase::solve_imag_riccati(params, opts);
    PiecewiseChebyshev integral = antiderivative(ric.s, /*anchor_left=*/true);

    const double t_lo = 1e-3;
    const double shift = integral.eval(t_lo);
    // keep exp() in range: stop where the exponent has dropped by ~600
    double t_hi = 1e3;
    while (t_hi > 10.0 * t_lo && integral.eval(t_hi) - shift < -600.0) t_hi *= 0.5;

    auto g = [&](double t) {
        return std::exp(integral.eval(t) - shift) / std::sqrt(1.0 + t * t);
    };
    PiecewiseChebyshev fit = fit_adaptive(g, t_lo, t_hi, 29, 1e-12, 40);

    MonotonicityReport rep;
    rep.gamma = gamma;
    rep.n = n;
    rep.lo = t_lo;
    rep.hi = t_hi;
    rep.orders_requested = orders;
    rep.absolute = false;
    const int j_max = std::min(orders, std::min(2 + n, 6));
    detail::scan_orders(fit, j_max, /*alternate=*/true, rep);
    return rep;
}

}  // namespace prolates::monotonicity

#endif
