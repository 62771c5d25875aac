#ifndef PROLATES_ODE_SOLVER_HPP
#define PROLATES_ODE_SOLVER_HPP

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prolates/chebyshev.hpp"
#include "prolates/errors.hpp"
#include "prolates/linalg.hpp"

namespace prolates {

enum class Direction { initial_value, terminal_value };

// First-order system y' = F(t, y) with data at one end of (a, b).
struct OdeProblem {
    int dim = 1;
    // rhs(t, y[dim], dy[dim])
    std::function<void(double, const double*, double*)> rhs;
    // jacobian(t, y[dim], J[dim*dim] row-major); required for the Newton path
    std::function<void(double, const double*, double*)> jacobian;
    double a = 0.0;
    double b = 1.0;
    std::vector<double> boundary;
    Direction direction = Direction::initial_value;
    bool linear = false;
    // Optional early-stop test, checked at the forward end of each accepted
    // piece. Returning true truncates the solve there (used when a component
    // saturates the representable range and the remainder is negligible).
    std::function<bool(double, std::span<const double>)> stop_when;
};

struct SolverOptions {
    int order = 29;
    double tail_factor = 100.0;      // accept when tail_ratio <= tail_factor * eps0
    double eps0 = prolates::eps0;
    int max_depth = 200;
    int max_intervals = 20000;
    int newton_max_iter = 8;
    double newton_tol = 1e-13;
};

struct SolveStats {
    int intervals = 0;
    int deepest_level = 0;
    long newton_iterations = 0;
    bool truncated = false;  // stop_when fired before the far boundary
};

struct OdeSolution {
    std::vector<PiecewiseChebyshev> components;  // share one partition
    SolveStats stats;
};

namespace detail {

// Samples the affine structure F(t,y) = A(t) y + g(t) at one node. Uses the
// jacobian callback when present; otherwise recovers columns from rhs calls
// (exact for affine F).
inline void affine_at(const OdeProblem& p, double t, Mat& a, std::vector<double>& g) {
    const int n = p.dim;
    std::vector<double> y0(n, 0.0);
    g.assign(n, 0.0);
    p.rhs(t, y0.data(), g.data());
    if (p.jacobian) {
        std::vector<double> jac(n * n);
        p.jacobian(t, y0.data(), jac.data());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = jac[i * n + j];
        return;
    }
    std::vector<double> e(n, 0.0), col(n);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        p.rhs(t, e.data(), col.data());
        for (int i = 0; i < n; ++i) a(i, j) = col[i] - g[i];
        e[j] = 0.0;
    }
}

}  // namespace detail

// Chebyshev collocation solve of an affine system on (c, d); one collocation
// row per component is replaced by the boundary condition. Returns the node
// values laid out as y[comp * (k+1) + node].
inline std::vector<double> local_linear_values(const OdeProblem& p, double c, double d,
                                               std::span<const double> bdata, int k) {
    const int n = p.dim, m = k + 1, dimsys = n * m;
    const auto& tables = detail::cheb_tables(k);
    const Mat& dref = tables.deriv_vals;
    const double h = 0.5 * (d - c);
    auto nodes = cheb_nodes(k, c, d);
    const int brow = (p.direction == Direction::initial_value) ? 0 : k;

    Mat sys(dimsys, dimsys);
    std::vector<double> rhs(dimsys, 0.0);
    Mat a(n, n);
    std::vector<double> g;
    for (int i = 0; i <= k; ++i) {
        detail::affine_at(p, nodes[i], a, g);
        for (int comp = 0; comp < n; ++comp) {
            const int row = comp * m + i;
            if (i == brow) {
                sys(row, row) = 1.0;
                rhs[row] = bdata[comp];
                continue;
            }
            for (int j = 0; j <= k; ++j) sys(row, comp * m + j) += dref(i, j);
            for (int c2 = 0; c2 < n; ++c2) sys(row, c2 * m + i) -= h * a(comp, c2);
            rhs[row] = h * g[comp];
        }
    }
    lu_solve_inplace(sys, rhs);
    return rhs;
}

inline std::vector<ChebyshevCoeffs> local_linear_solve(const OdeProblem& p, double c, double d,
                                                       std::span<const double> bdata, int k) {
    auto vals = local_linear_values(p, c, d, bdata, k);
    const int m = k + 1;
    std::vector<ChebyshevCoeffs> out;
    out.reserve(p.dim);
    for (int comp = 0; comp < p.dim; ++comp)
        out.push_back(vals_to_coeffs(std::span(vals).subspan(comp * m, m), c, d));
    return out;
}

// Trapezoidal march over the collocation nodes followed by Newton on the
// collocation system. Returns node values as in local_linear_values.
inline std::vector<double> local_nonlinear_values(const OdeProblem& p, double c, double d,
                                                  std::span<const double> bdata, int k,
                                                  const SolverOptions& opts, long& newton_total) {
    if (!p.jacobian) throw invalid_argument("nonlinear solve requires a jacobian callback");
    const int n = p.dim, m = k + 1, dimsys = n * m;
    const auto& tables = detail::cheb_tables(k);
    const Mat& dref = tables.deriv_vals;
    const double h = 0.5 * (d - c);
    auto nodes = cheb_nodes(k, c, d);
    const bool forward = (p.direction == Direction::initial_value);
    const int brow = forward ? 0 : k;

    // trapezoidal initializer on the (nonuniform) node grid
    std::vector<double> y(dimsys, 0.0);
    auto node_val = [&](int comp, int node) -> double& { return y[comp * m + node]; };
    std::vector<double> fprev(n), fcur(n), cur(n), trial(n), resid(n), jac(n * n);
    for (int comp = 0; comp < n; ++comp) node_val(comp, brow) = bdata[comp];
    for (int comp = 0; comp < n; ++comp) cur[comp] = bdata[comp];
    p.rhs(nodes[brow], cur.data(), fprev.data());
    const int step = forward ? 1 : -1;
    for (int i = brow + step; i >= 0 && i <= k; i += step) {
        const double dt = nodes[i] - nodes[i - step];
        // implicit trapezoid step solved by a few Newton corrections
        for (int comp = 0; comp < n; ++comp) trial[comp] = cur[comp] + dt * fprev[comp];
        for (int it = 0; it < 4; ++it) {
            p.rhs(nodes[i], trial.data(), fcur.data());
            for (int comp = 0; comp < n; ++comp)
                resid[comp] = trial[comp] - cur[comp] - 0.5 * dt * (fprev[comp] + fcur[comp]);
            p.jacobian(nodes[i], trial.data(), jac.data());
            Mat a(n, n);
            for (int r = 0; r < n; ++r)
                for (int c2 = 0; c2 < n; ++c2) a(r, c2) = (r == c2 ? 1.0 : 0.0) - 0.5 * dt * jac[r * n + c2];
            lu_solve_inplace(a, resid);
            double delta = 0.0;
            for (int comp = 0; comp < n; ++comp) {
                trial[comp] -= resid[comp];
                delta = std::max(delta, std::fabs(resid[comp]));
            }
            if (!(delta > 1e-12 * (1.0 + norm_inf(trial)))) break;
        }
        for (int comp = 0; comp < n; ++comp) {
            node_val(comp, i) = trial[comp];
            cur[comp] = trial[comp];
            fprev[comp] = fcur[comp];
        }
        p.rhs(nodes[i], cur.data(), fprev.data());
    }

    // Newton on the full collocation system
    std::vector<double> history;
    for (int it = 0; it < opts.newton_max_iter; ++it) {
        Mat sys(dimsys, dimsys);
        std::vector<double> res(dimsys, 0.0);
        for (int i = 0; i <= k; ++i) {
            for (int comp = 0; comp < n; ++comp) cur[comp] = node_val(comp, i);
            p.rhs(nodes[i], cur.data(), fcur.data());
            p.jacobian(nodes[i], cur.data(), jac.data());
            for (int comp = 0; comp < n; ++comp) {
                const int row = comp * m + i;
                if (i == brow) {
                    sys(row, row) = 1.0;
                    res[row] = node_val(comp, i) - bdata[comp];
                    continue;
                }
                double dcomp = 0.0;
                for (int j = 0; j <= k; ++j) {
                    sys(row, comp * m + j) += dref(i, j);
                    dcomp += dref(i, j) * node_val(comp, j);
                }
                for (int c2 = 0; c2 < n; ++c2) sys(row, c2 * m + i) -= h * jac[comp * n + c2];
                res[row] = dcomp - h * fcur[comp];
            }
        }
        lu_solve_inplace(sys, res);
        double delta = 0.0, scale = 1.0 + norm_inf(y);
        for (int idx = 0; idx < dimsys; ++idx) {
            y[idx] -= res[idx];
            delta = std::max(delta, std::fabs(res[idx]));
        }
        ++newton_total;
        history.push_back(delta);
        if (!std::isfinite(delta))
            throw newton_error("newton: non-finite correction", std::move(history));
        if (delta <= opts.newton_tol * scale) return y;
    }
    throw newton_error("newton: iteration cap reached", std::move(history));
}

inline std::vector<ChebyshevCoeffs> local_nonlinear_solve(const OdeProblem& p, double c, double d,
                                                          std::span<const double> bdata, int k,
                                                          const SolverOptions& opts,
                                                          long& newton_total) {
    auto vals = local_nonlinear_values(p, c, d, bdata, k, opts, newton_total);
    const int m = k + 1;
    std::vector<ChebyshevCoeffs> out;
    out.reserve(p.dim);
    for (int comp = 0; comp < p.dim; ++comp)
        out.push_back(vals_to_coeffs(std::span(vals).subspan(comp * m, m), c, d));
    return out;
}

// Adaptive driver. Pending intervals are processed in order of the marching
// direction (smallest left endpoint for initial-value problems, largest right
// endpoint for terminal-value problems), so the boundary data for each piece
// is always the already-accepted neighbor's end value.
inline OdeSolution solve_adaptive(const OdeProblem& p, const SolverOptions& opts = {}) {
    if (!(p.a < p.b)) throw invalid_argument("solve_adaptive: need a < b");
    if (static_cast<int>(p.boundary.size()) != p.dim)
        throw invalid_argument("solve_adaptive: boundary size != dim");
    const bool forward = (p.direction == Direction::initial_value);
    const int k = opts.order, m = k + 1, n = p.dim;
    const double tol = opts.tail_factor * opts.eps0;

    struct Accepted {
        double c, d;
        std::vector<double> values;  // node values, comp-major
    };
    struct Pending {
        double c, d;
        int depth;
    };
    // key = left endpoint (forward) or -right endpoint (backward): begin() is next
    std::map<double, Pending> pending;
    auto key_of = [&](double c, double d) { return forward ? c : -d; };
    pending.emplace(key_of(p.a, p.b), Pending{p.a, p.b, 0});

    std::vector<Accepted> accepted;
    std::vector<double> frontier = p.boundary;
    SolveStats stats;

    while (!pending.empty()) {
        Pending cur = pending.begin()->second;
        pending.erase(pending.begin());

        bool ok = true;
        std::vector<double> vals;
        double worst = 0.0;
        std::optional<newton_error> nonlinear_failure;
        try {
            vals = p.linear
                       ? local_linear_values(p, cur.c, cur.d, frontier, k)
                       : local_nonlinear_values(p, cur.c, cur.d, frontier, k, opts,
                                                stats.newton_iterations);
            for (int comp = 0; comp < n && ok; ++comp) {
                ChebyshevCoeffs cc =
                    vals_to_coeffs(std::span(vals).subspan(comp * m, m), cur.c, cur.d);
                worst = std::max(worst, cc.tail_ratio());
            }
            ok = worst <= tol;
        } catch (const newton_error& ne) {
            ok = false;
            worst = std::numeric_limits<double>::infinity();
            nonlinear_failure = ne;
        } catch (const numerical_error&) {
            ok = false;
            worst = std::numeric_limits<double>::infinity();
        }

        if (!ok) {
            if (cur.depth >= opts.max_depth) {
                if (nonlinear_failure) throw *nonlinear_failure;
                throw solver_error("solve_adaptive: max depth reached (tail ratio " +
                                       std::to_string(worst) + ")",
                                   cur.c, cur.d, worst);
            }
            const double mid = 0.5 * (cur.c + cur.d);
            pending.emplace(key_of(cur.c, mid), Pending{cur.c, mid, cur.depth + 1});
            pending.emplace(key_of(mid, cur.d), Pending{mid, cur.d, cur.depth + 1});
            if (static_cast<int>(pending.size() + accepted.size()) > opts.max_intervals)
                throw solver_error("solve_adaptive: max interval count exceeded", cur.c, cur.d,
                                   worst);
            continue;
        }

        stats.deepest_level = std::max(stats.deepest_level, cur.depth);
        accepted.push_back(Accepted{cur.c, cur.d, std::move(vals)});
        if (static_cast<int>(accepted.size()) > opts.max_intervals)
            throw solver_error("solve_adaptive: max interval count exceeded", cur.c, cur.d, worst);
        const int fnode = forward ? k : 0;
        for (int comp = 0; comp < n; ++comp) frontier[comp] = accepted.back().values[comp * m + fnode];
        const double fpoint = forward ? cur.d : cur.c;
        if (p.stop_when && p.stop_when(fpoint, frontier)) {
            stats.truncated = true;
            break;
        }
    }

    if (!forward) std::reverse(accepted.begin(), accepted.end());
    stats.intervals = static_cast<int>(accepted.size());

    std::vector<double> breaks;
    breaks.reserve(accepted.size() + 1);
    breaks.push_back(accepted.front().c);
    for (const auto& acc : accepted) breaks.push_back(acc.d);
    OdeSolution sol;
    sol.stats = stats;
    for (int comp = 0; comp < n; ++comp) {
        std::vector<ChebyshevCoeffs> pieces;
        pieces.reserve(accepted.size());
        for (const auto& acc : accepted)
            pieces.push_back(
                vals_to_coeffs(std::span(acc.values).subspan(comp * m, m), acc.c, acc.d));
        sol.components.emplace_back(breaks, std::move(pieces));
    }
    return sol;
}

}  // namespace prolates

#endif
