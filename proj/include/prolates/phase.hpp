#ifndef PROLATES_PHASE_HPP
#define PROLATES_PHASE_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "prolates/chebyshev.hpp"
#include "prolates/errors.hpp"
#include "prolates/legendre.hpp"
#include "prolates/ode_solver.hpp"
#include "prolates/oxr.hpp"

namespace prolates::phase {

struct ProlateParams {
    double gamma = 0.0;
    int n = 0;
    double chi = 0.0;
    int parity = 0;
    double sigma = 0.0;  // n / gamma, reporting only

    ProlateParams() = default;
    ProlateParams(double gamma_, int n_, double chi_)
        : gamma(gamma_), n(n_), chi(chi_), parity(n_ % 2), sigma(n_ / gamma_) {
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw invalid_argument("ProlateParams: gamma must be positive");
        if (n < 0) throw invalid_argument("ProlateParams: n must be >= 0");
        if (!(chi > 0.0)) throw invalid_argument("ProlateParams: chi must be positive");
    }
};

// Coefficient of the imaginary-axis form: y'' + q1(t) y = 0 on (0, inf),
// q1 < 0 throughout (the nonoscillatory regime).
struct CoefficientQ1 {
    double gamma = 0.0;
    double chi = 0.0;
    double operator()(double t) const {
        const double t2 = t * t;
        const double r = t2 / (1.0 + t2);  // stable for huge t
        const double inv = 1.0 / (1.0 + t2);
        return -(inv * inv + chi * inv + gamma * gamma * r);
    }
};

// Coefficient of the exponential form y'' + q2(x) y = 0, evaluated through
// u = exp(-x):
//   q2 = (u - u^2/4)/(u-2)^2 + chi u(2-u)/(u-2)^2 - gamma^2 u(1-u)^2/(2-u).
// Every term carries a factor u, so q2 and q2' underflow to exactly 0 once
// exp(-x) does (x >~ 745), which is the correct limit; nothing overflows for
// x up to 1e120 and beyond.
struct CoefficientQ2 {
    double gamma = 0.0;
    double chi = 0.0;

    void eval(double x, double& q, double& qp) const {
        const double u = std::exp(-x);
        const double g2 = gamma * gamma;
        const double den = (u - 2.0) * (u - 2.0);
        q = (u - 0.25 * u * u) / den + chi * u * (2.0 - u) / den -
            g2 * u * (1.0 - u) * (1.0 - u) / (2.0 - u);
        const double t1p = (1.0 - 0.5 * u) / den - 2.0 * (u - 0.25 * u * u) / ((u - 2.0) * den);
        const double t2p =
            chi * ((2.0 - 2.0 * u) / den - 2.0 * (2.0 * u - u * u) / ((u - 2.0) * den));
        const double t3p = -g2 * ((1.0 - u) * (1.0 - 3.0 * u) / (2.0 - u) +
                                  u * (1.0 - u) * (1.0 - u) / ((2.0 - u) * (2.0 - u)));
        qp = -u * (t1p + t2p + t3p);
    }
    double value(double x) const {
        double q, qp;
        eval(x, q, qp);
        return q;
    }
    double derivative(double x) const {
        double q, qp;
        eval(x, q, qp);
        return qp;
    }
};

// Piecewise representation of the phase Psi and the modulus w = gamma / Psi'.
struct PhaseFunction {
    PiecewiseChebyshev psi;
    PiecewiseChebyshev w;
    double beta = 0.0;    // requested right endpoint of the x-domain
    double x_end = 0.0;   // where the expansions actually stop (== beta unless truncated)
    bool truncated = false;
    double gamma = 0.0;
    double chi = 0.0;
    double w0 = 0.0, w0p = 0.0, w0pp = 0.0;  // Appell data at x = 0
};

struct BuildStats {
    int riccati_intervals = 0;
    int appell_intervals = 0;
    long newton_iterations = 0;
    bool truncated = false;
};

struct ProlateEvaluator {
    ProlateParams params;
    PhaseFunction phase;
    double c_n = 0.0;
    double psi0 = 0.0;  // Psi(0)
    BuildStats stats;
};

// Externally supplied data replacing the Riccati stage (e.g. from asymptotic
// expansions of chi and Psi(0)).
struct AcceleratedSeed {
    double chi = 0.0;
    double psi0 = 0.0;
    double w0 = 0.0, w0p = 0.0, w0pp = 0.0;
};

struct PhaseOptions {
    int order = 29;
    double beta = 1e120;
    double c = 1e30;
    double tail_factor = 100.0;
    // bisection from beta = 1e120 to unit scale alone needs ~log2(1e120) = 399 levels
    int max_depth = 600;
    int max_intervals = 20000;
    int newton_max_iter = 8;
    double newton_tol = 1e-13;
    // stop extending the Appell solve once w exceeds this; the neglected
    // phase tail is below gamma * x / w_cap
    double w_cap = 1e250;

    SolverOptions solver() const {
        SolverOptions s;
        s.order = order;
        s.tail_factor = tail_factor;
        s.max_depth = max_depth;
        s.max_intervals = max_intervals;
        s.newton_max_iter = newton_max_iter;
        s.newton_tol = newton_tol;
        return s;
    }
};

struct RiccatiSolution {
    double s0 = 0.0;
    double s0p = 0.0;
    PiecewiseChebyshev s;
    SolveStats stats;
};

// Terminal value problem s' = -s^2 - q1 on (0, c), s(c) = -gamma, solved
// backward (the decaying branch is the attractor in that direction).
// s'(0) is evaluated from the equation itself rather than by differentiating
// the expansion.
inline RiccatiSolution solve_imag_riccati(const ProlateParams& params, const PhaseOptions& opts = {}) {
    CoefficientQ1 q1{params.gamma, params.chi};
    OdeProblem prob;
    prob.dim = 1;
    prob.a = 0.0;
    prob.b = opts.c;
    prob.direction = Direction::terminal_value;
    prob.linear = false;
    prob.boundary = {-params.gamma};
    prob.rhs = [q1](double t, const double* y, double* dy) { dy[0] = -y[0] * y[0] - q1(t); };
    prob.jacobian = [](double, const double* y, double* j) { j[0] = -2.0 * y[0]; };

    OdeSolution sol;
    try {
        sol = solve_adaptive(prob, opts.solver());
    } catch (const numerical_error& e) {
        throw numerical_error("riccati stage (gamma=" + std::to_string(params.gamma) + ", chi=" +
                              std::to_string(params.chi) + "): " + e.what());
    }
    RiccatiSolution r;
    r.s = std::move(sol.components.front());
    r.stats = sol.stats;
    r.s0 = r.s.eval(0.0);
    r.s0p = -r.s0 * r.s0 - q1(0.0);
    if (!(r.s0 < 0.0))
        throw numerical_error("riccati stage: s(0) >= 0, decaying branch lost (gamma=" +
                              std::to_string(params.gamma) + ")");
    return r;
}

// Modulus data at x = 0 from the Riccati output. These are the gamma-scaled
// values for which w w'' - w'^2/2 + 2 q2 w^2 = 2 gamma^2, the condition under
// which gamma / w integrates to a phase for the exponential form.
inline std::array<double, 3> appell_initial_values(double s0, double s0p, double gamma) {
    if (s0 == 0.0) throw invalid_argument("appell_initial_values: s(0) must be nonzero");
    const double w0 = -gamma / s0;
    return {w0, w0, gamma * (-1.0 / s0 + 2.0 * s0p / s0)};
}

struct AppellResult {
    PiecewiseChebyshev w;
    SolveStats stats;
    bool truncated = false;
};

// w''' + 4 q2 w' + 2 q2' w = 0 as a linear first-order system, solved forward
// from x = 0. Positivity of w is asserted at the accepted node values.
inline AppellResult solve_appell(const ProlateParams& params, double w0, double w0p, double w0pp,
                                 double beta, const PhaseOptions& opts = {}) {
    if (!(w0 > 0.0)) throw invalid_argument("solve_appell: w(0) must be positive");
    CoefficientQ2 q2{params.gamma, params.chi};
    OdeProblem prob;
    prob.dim = 3;
    prob.a = 0.0;
    prob.b = beta;
    prob.direction = Direction::initial_value;
    prob.linear = true;
    prob.boundary = {w0, w0p, w0pp};
    prob.rhs = [q2](double x, const double* y, double* dy) {
        double q, qp;
        q2.eval(x, q, qp);
        dy[0] = y[1];
        dy[1] = y[2];
        dy[2] = -4.0 * q * y[1] - 2.0 * qp * y[0];
    };
    prob.jacobian = [q2](double x, const double*, double* j) {
        double q, qp;
        q2.eval(x, q, qp);
        j[0] = 0.0; j[1] = 1.0; j[2] = 0.0;
        j[3] = 0.0; j[4] = 0.0; j[5] = 1.0;
        j[6] = -2.0 * qp; j[7] = -4.0 * q; j[8] = 0.0;
    };
    const double cap = opts.w_cap;
    prob.stop_when = [cap](double, std::span<const double> y) { return y[0] >= cap; };

    OdeSolution sol;
    try {
        sol = solve_adaptive(prob, opts.solver());
    } catch (const numerical_error& e) {
        throw numerical_error("appell stage (gamma=" + std::to_string(params.gamma) + ", chi=" +
                              std::to_string(params.chi) + "): " + e.what());
    }
    AppellResult res;
    res.w = std::move(sol.components.front());
    res.stats = sol.stats;
    res.truncated = sol.stats.truncated;
    for (const auto& piece : res.w.pieces()) {
        for (double v : coeffs_to_vals(piece))
            if (!(v > 0.0))
                throw numerical_error("appell stage: modulus not positive on [" +
                                      std::to_string(piece.lo()) + ", " + std::to_string(piece.hi()) +
                                      "]; phase function undefined");
    }
    return res;
}

// Psi(x) = -int_x^{end} gamma / w, assembled by refitting gamma / w on each
// piece and applying the spectral integration matrix, traversing the pieces
// in decreasing order so that Psi(end) = 0 exactly.
inline PiecewiseChebyshev integrate_phase(const PiecewiseChebyshev& w, double gamma) {
    PiecewiseChebyshev recip =
        transform_nodewise(w, [gamma](double, double v) { return gamma / v; });
    return antiderivative(recip, /*anchor_left=*/false);
}

// Accelerated variant: Psi(x) = psi0 + int_0^x gamma / w.
inline PiecewiseChebyshev integrate_phase_from(const PiecewiseChebyshev& w, double gamma,
                                               double psi0) {
    PiecewiseChebyshev recip =
        transform_nodewise(w, [gamma](double, double v) { return gamma / v; });
    PiecewiseChebyshev psi = antiderivative(recip, /*anchor_left=*/true);
    for (auto& piece : psi.pieces()) piece.coeffs()[0] += psi0;
    return psi;
}

// Normalization constant C_n matching PS_n to the Legendre function at z = 0:
// the value for even n, the z-derivative for odd n (both vanish at 0 in the
// odd case).
inline double normalize(const ProlateParams& params, const PhaseFunction& phase) {
    const double psi0 = phase.psi.eval(0.0);
    const double psip0 = params.gamma / phase.w0;
    const auto central = legendre_central(params.n);
    double denom;
    if (params.parity == 0) {
        denom = std::sin(psi0) / std::sqrt(psip0);
    } else {
        const double psipp0 = -params.gamma * phase.w0p / (phase.w0 * phase.w0);
        const double f0 = std::sin(psi0) / std::sqrt(psip0);
        const double fp0 =
            std::cos(psi0) * std::sqrt(psip0) - std::sin(psi0) * psipp0 / (2.0 * psip0 * std::sqrt(psip0));
        denom = fp0 - 0.5 * f0;  // full z-derivative at 0: dx/dz = 1, d/dz (1+z)^{-1/2} = -1/2
    }
    if (denom == 0.0)
        throw numerical_error("normalize: degenerate normalization at z=0 (gamma=" +
                              std::to_string(params.gamma) + ", n=" + std::to_string(params.n) + ")");
    return (params.parity == 0 ? central.p0 : central.dp0) / denom;
}

inline ProlateEvaluator build_evaluator(double gamma, int n, std::optional<double> chi_in = {},
                                        const PhaseOptions& opts = {}) {
    const double chi = chi_in ? *chi_in : oxr::chi(gamma, n);
    ProlateParams params(gamma, n, chi);

    RiccatiSolution ric = solve_imag_riccati(params, opts);
    auto ivs = appell_initial_values(ric.s0, ric.s0p, gamma);
    AppellResult app = solve_appell(params, ivs[0], ivs[1], ivs[2], opts.beta, opts);

    ProlateEvaluator ev;
    ev.params = params;
    ev.phase.w = std::move(app.w);
    ev.phase.psi = integrate_phase(ev.phase.w, gamma);
    ev.phase.beta = opts.beta;
    ev.phase.x_end = ev.phase.w.hi();
    ev.phase.truncated = app.truncated;
    ev.phase.gamma = gamma;
    ev.phase.chi = chi;
    ev.phase.w0 = ivs[0];
    ev.phase.w0p = ivs[1];
    ev.phase.w0pp = ivs[2];
    ev.psi0 = ev.phase.psi.eval(0.0);
    ev.c_n = normalize(params, ev.phase);
    ev.stats.riccati_intervals = ric.stats.intervals;
    ev.stats.appell_intervals = app.stats.intervals;
    ev.stats.newton_iterations = ric.stats.newton_iterations;
    ev.stats.truncated = app.truncated;
    return ev;
}

inline ProlateEvaluator build_evaluator_accelerated(double gamma, int n, const AcceleratedSeed& seed,
                                                    double beta = 30.0, PhaseOptions opts = {}) {
    if (!(seed.w0 > 0.0)) throw invalid_argument("accelerated build: seed w(0) must be positive");
    ProlateParams params(gamma, n, seed.chi);
    opts.beta = beta;
    AppellResult app = solve_appell(params, seed.w0, seed.w0p, seed.w0pp, beta, opts);

    ProlateEvaluator ev;
    ev.params = params;
    ev.phase.w = std::move(app.w);
    ev.phase.psi = integrate_phase_from(ev.phase.w, gamma, seed.psi0);
    ev.phase.beta = beta;
    ev.phase.x_end = ev.phase.w.hi();
    ev.phase.truncated = app.truncated;
    ev.phase.gamma = gamma;
    ev.phase.chi = seed.chi;
    ev.phase.w0 = seed.w0;
    ev.phase.w0p = seed.w0p;
    ev.phase.w0pp = seed.w0pp;
    ev.psi0 = seed.psi0;
    ev.c_n = normalize(params, ev.phase);
    ev.stats.riccati_intervals = 0;
    ev.stats.appell_intervals = app.stats.intervals;
    ev.stats.truncated = app.truncated;
    return ev;
}

inline AcceleratedSeed harvest_seed(const ProlateEvaluator& ev) {
    return AcceleratedSeed{ev.params.chi, ev.psi0, ev.phase.w0, ev.phase.w0p, ev.phase.w0pp};
}

namespace detail {

// x = -log(1-z) for z in [0, 1); the evaluator's domain check.
inline double map_z(const ProlateEvaluator& ev, double z) {
    if (!(z > -1.0 && z < 1.0))
        throw domain_error("eval_ps: z=" + std::to_string(z) + " outside (-1, 1)");
    const double x = -std::log1p(-z);
    if (x >= ev.phase.beta)
        throw domain_error("eval_ps: z=" + std::to_string(z) +
                           " outside the evaluator's domain (beta=" + std::to_string(ev.phase.beta) +
                           ")");
    return x;
}

}  // namespace detail

// PS_n(z; gamma) = C_n sin(Psi(x)) / sqrt((1+z) Psi'(x)), x = -log(1-z);
// negative z by parity. Psi' is taken as gamma / w rather than by
// differentiating the Psi expansion. Beyond a truncated modulus the true
// value is below ~1e-240 and 0 is returned.
inline double eval_ps(const ProlateEvaluator& ev, double z) {
    if (z < 0.0) return (ev.params.parity == 0 ? 1.0 : -1.0) * eval_ps(ev, -z);
    const double x = detail::map_z(ev, z);
    if (x >= ev.phase.x_end) return 0.0;
    const double w = ev.phase.w.eval(x);
    const double psi = ev.phase.psi.eval(x);
    const double psip = ev.params.gamma / w;
    return ev.c_n * std::sin(psi) / std::sqrt((1.0 + z) * psip);
}

inline double eval_ps_derivative(const ProlateEvaluator& ev, double z) {
    if (z < 0.0)
        return (ev.params.parity == 0 ? -1.0 : 1.0) * eval_ps_derivative(ev, -z);
    const double x = detail::map_z(ev, z);
    if (x >= ev.phase.x_end) return 0.0;
    const double w = ev.phase.w.eval(x);
    const double wp = ev.phase.w.eval_d(x);
    const double psi = ev.phase.psi.eval(x);
    const double g = ev.params.gamma;
    const double psip = g / w;
    const double psipp = -g * wp / (w * w);
    const double xprime = 1.0 / (1.0 - z);
    const double a = (1.0 + z) * psip;
    const double aprime = psip + (1.0 + z) * psipp * xprime;
    return ev.c_n * (std::cos(psi) * psip * xprime / std::sqrt(a) -
                     0.5 * std::sin(psi) * aprime / (a * std::sqrt(a)));
}

// Coefficients carried by Psi's pieces meeting [0, 30), the paper's
// reporting convention for representation cost.
inline size_t psi_coefficient_count(const ProlateEvaluator& ev, double window = 30.0) {
    return ev.phase.psi.coeffs_in(0.0, window);
}

}  // namespace prolates::phase

#endif
