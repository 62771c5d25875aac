#ifndef PROLATES_CHEBYSHEV_HPP
#define PROLATES_CHEBYSHEV_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "prolates/errors.hpp"
#include "prolates/linalg.hpp"

namespace prolates {

inline constexpr double eps0 = std::numeric_limits<double>::epsilon();

// Chebyshev extreme points (Gauss-Lobatto family) mapped to [lo, hi],
// ascending, endpoints included.
inline std::vector<double> cheb_nodes(int k, double lo, double hi) {
    if (k < 1) throw invalid_argument("cheb_nodes: order must be >= 1");
    std::vector<double> x(k + 1);
    const double mid = 0.5 * (lo + hi),half = 0.5 * (hi - lo);
    for (int j = 0; j <= k; ++j) {
        // tau_j = -cos(pi j / k), ascending from -1 to 1
        double tau = -std::cos(std::numbers::pi * j / k);
        x[j] = mid + half * tau;
    }
    x.front() = lo;
    x.back() = hi;
    return x;
}

namespace detail {

// Value<->coefficient transforms for the Lobatto grid, cached per order.
struct ChebTables {
    Mat coeffs_to_vals;  // V[i][m] = T_m(tau_i)
    Mat vals_to_coeffs;
    Mat diff;            // coefficient-space d/dtau on [-1,1]
    Mat integ;           // coefficient-space antiderivative vanishing at tau=-1
    Mat deriv_vals;      // value-space d/dtau = V * diff * V^{-1}
};

inline const ChebTables& cheb_tables(int k) {
    static std::map<int, ChebTables> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;

    ChebTables t;
    const int m = k + 1;
    t.coeffs_to_vals = Mat(m, m);
    t.vals_to_coeffs = Mat(m, m);
    for (int i = 0; i <= k; ++i) {
        const double theta = std::numbers::pi * (k - i) / k;  // tau_i = cos(theta)
        for (int j = 0; j <= k; ++j) t.coeffs_to_vals(i, j) = std::cos(j * theta);
    }
    for (int r = 0; r <= k; ++r) {
        const double cr = (r == 0 || r == k) ? 2.0 : 1.0;
        for (int j = 0; j <= k; ++j) {
            const double cj = (j == 0 || j == k) ? 2.0 : 1.0;
            t.vals_to_coeffs(r, j) = 2.0 / (k * cr * cj) * t.coeffs_to_vals(j, r);
        }
    }
    t.diff = Mat(m, m);
    for (int j = 1; j <= k; ++j) {
        for (int i = j - 1; i >= 0; i -= 2) t.diff(i, j) = 2.0 * j;
    }
    for (int j = 0; j <= k; ++j) t.diff(0, j) *= 0.5;

    t.integ = Mat(m, m);
    for (int j = 1; j <= k; ++j) {
        // A_j = (a_{j-1} - a_{j+1}) / (2j); the degree-(k+1) overflow term is dropped
        t.integ(j, j - 1) += 1.0 / (2.0 * j);
        if (j + 1 <= k) t.integ(j, j + 1) -= 1.0 / (2.0 * j);
    }
    for (int j = 1; j <= k; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;  // T_j(-1) = (-1)^j
        for (int c = 0; c <= k; ++c) t.integ(0, c) -= sign * t.integ(j, c);
    }
    t.deriv_vals = Mat::product(t.coeffs_to_vals, Mat::product(t.diff, t.vals_to_coeffs));
    return cache.emplace(k, std::move(t)).first->second;
}

}  // namespace detail

// One Chebyshev expansion sum_{j=0}^{k} a_j T_j on an interval.
class ChebyshevCoeffs {
  public:
    ChebyshevCoeffs() = default;
    ChebyshevCoeffs(std::vector<double> coeffs, double lo, double hi)
        : a_(std::move(coeffs)), lo_(lo), hi_(hi) {
        if (a_.empty()) throw invalid_argument("ChebyshevCoeffs: empty coefficient vector");
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw invalid_argument("ChebyshevCoeffs: bad interval");
    }

    int order() const { return static_cast<int>(a_.size()) - 1; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<double>& coeffs() const { return a_; }
    std::vector<double>& coeffs() { return a_; }

    double to_reference(double x) const { return (2.0 * x - lo_ - hi_) / (hi_ - lo_); }

    double eval(double x) const {
        if (x < lo_ || x > hi_)
            throw domain_error("ChebyshevCoeffs::eval: point outside [" + std::to_string(lo_) +
                               ", " + std::to_string(hi_) + "]");
        return clenshaw(a_, to_reference(x));
    }

    // d/dx, including the affine chain factor 2/(hi-lo).
    double eval_d(double x) const {
        if (x < lo_ || x > hi_) throw domain_error("ChebyshevCoeffs::eval_d: point outside interval");
        std::vector<double> d = derivative_coeffs(a_);
        return clenshaw(d, to_reference(x)) * 2.0 / (hi_ - lo_);
    }

    // sqrt(sum_{j>=ceil(k/2)} a_j^2 / sum a_j^2); 0 for the all-zero vector,
    // +inf when any coefficient is not finite (forces a split upstream).
    double tail_ratio() const {
        const int k = order();
        double amax = 0.0;
        for (double c : a_) {
            if (!std::isfinite(c)) return std::numeric_limits<double>::infinity();
            amax = std::max(amax, std::fabs(c));
        }
        if (amax == 0.0) return 0.0;
        const int start = (k + 1) / 2;  // ceil(k/2)
        double total = 0.0, tail = 0.0;
        for (int j = 0; j <= k; ++j) {
            double s = a_[j] / amax;
            total += s * s;
            if (j >= start) tail += s * s;
        }
        return std::sqrt(tail / total);
    }

    static double clenshaw(std::span<const double> a, double u) {
        const int k = static_cast<int>(a.size()) - 1;
        double b1 = 0.0, b2 = 0.0;
        for (int j = k; j >= 1; --j) {
            double b = a[j] + 2.0 * u * b1 - b2;
            b2 = b1;
            b1 = b;
        }
        return a[0] + u * b1 - b2;
    }

    static std::vector<double> derivative_coeffs(std::span<const double> a) {
        const int k = static_cast<int>(a.size()) - 1;
        std::vector<double> d(std::max(k, 1), 0.0);
        double next = 0.0, next2 = 0.0;  // d_{j+1}, d_{j+2} during the downward recurrence
        for (int j = k; j >= 1; --j) {
            double dj = next2 + 2.0 * j * a[j];
            if (j - 1 < static_cast<int>(d.size())) d[j - 1] = dj;
            next2 = next;
            next = dj;
        }
        d[0] *= 0.5;
        return d;
    }

  private:
    std::vector<double> a_;
    double lo_ = 0.0, hi_ = 1.0;
};

// values sampled at cheb_nodes(order, lo, hi), ascending
inline ChebyshevCoeffs vals_to_coeffs(std::span<const double> values, double lo, double hi) {
    const int k = static_cast<int>(values.size()) - 1;
    if (k < 1) throw invalid_argument("vals_to_coeffs: need at least 2 samples");
    const auto& t = detail::cheb_tables(k);
    std::vector<double> a = t.vals_to_coeffs.apply(values);
    return ChebyshevCoeffs(std::move(a), lo, hi);
}

inline std::vector<double> coeffs_to_vals(const ChebyshevCoeffs& c) {
    const auto& t = detail::cheb_tables(c.order());
    return t.coeffs_to_vals.apply(c.coeffs());
}

// Coefficient-space spectral operators on the reference interval [-1,1].
// diff must be scaled by 2/(hi-lo) and integ by (hi-lo)/2 for a general interval.
struct SpectralMatrices {
    int order;
    Mat integ;
    Mat diff;
};

inline SpectralMatrices spectral_matrices(int k) {
    const auto& t = detail::cheb_tables(k);
    return SpectralMatrices{k, t.integ, t.diff};
}

// A partition x_0 < ... < x_m with one expansion per subinterval; lookup uses
// the half-open convention [x_{i-1}, x_i), with the global right endpoint
// mapped to the last piece.
class PiecewiseChebyshev {
  public:
    PiecewiseChebyshev() = default;
    PiecewiseChebyshev(std::vector<double> breakpoints, std::vector<ChebyshevCoeffs> pieces)
        : breaks_(std::move(breakpoints)), pieces_(std::move(pieces)) {
        if (breaks_.size() != pieces_.size() + 1 || pieces_.empty())
            throw invalid_argument("PiecewiseChebyshev: breakpoints/pieces mismatch");
        for (size_t i = 0; i < pieces_.size(); ++i) {
            if (pieces_[i].lo() != breaks_[i] || pieces_[i].hi() != breaks_[i + 1])
                throw invalid_argument("PiecewiseChebyshev: piece interval disagrees with partition");
            if (!(breaks_[i] < breaks_[i + 1]))
                throw invalid_argument("PiecewiseChebyshev: breakpoints not increasing");
        }
    }

    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<ChebyshevCoeffs>& pieces() const { return pieces_; }
    std::vector<ChebyshevCoeffs>& pieces() { return pieces_; }
    int order() const { return pieces_.front().order(); }
    double lo() const { return breaks_.front(); }
    double hi() const { return breaks_.back(); }
    size_t size() const { return pieces_.size(); }

    int piece_index(double x) const {
        if (x < lo() || x > hi())
            throw domain_error("PiecewiseChebyshev: x=" + std::to_string(x) + " outside [" +
                               std::to_string(lo()) + ", " + std::to_string(hi()) + ")");
        if (x >= breaks_[breaks_.size() - 2]) return static_cast<int>(pieces_.size()) - 1;
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
        return static_cast<int>(it - breaks_.begin()) - 1;
    }

    double eval(double x) const { return pieces_[piece_index(x)].eval(x); }
    double eval_d(double x) const { return pieces_[piece_index(x)].eval_d(x); }

    size_t total_coeffs() const { return pieces_.size() * (order() + 1); }

    // Number of coefficients carried by pieces intersecting [a, b).
    size_t coeffs_in(double a, double b) const {
        size_t count = 0;
        for (const auto& p : pieces_)
            if (p.lo() < b && p.hi() > a) count += p.coeffs().size();
        return count;
    }

  private:
    std::vector<double> breaks_;
    std::vector<ChebyshevCoeffs> pieces_;
};

// Applies fn to the sampled node values of every piece and refits; returns a
// piecewise expansion on the same partition.
inline PiecewiseChebyshev transform_nodewise(const PiecewiseChebyshev& f,
                                             const std::function<double(double, double)>& fn) {
    std::vector<ChebyshevCoeffs> out;
    out.reserve(f.size());
    for (const auto& p : f.pieces()) {
        auto nodes = cheb_nodes(p.order(), p.lo(), p.hi());
        auto vals = coeffs_to_vals(p);
        for (size_t j = 0; j < vals.size(); ++j) vals[j] = fn(nodes[j], vals[j]);
        out.push_back(vals_to_coeffs(vals, p.lo(), p.hi()));
    }
    return PiecewiseChebyshev(f.breakpoints(), std::move(out));
}

// Antiderivative of f on its partition. anchor_left: F(x_0) = 0 accumulated
// left-to-right; otherwise F(x_m) = 0, accumulated from the last piece down
// (per-piece integrals summed smallest-first).
inline PiecewiseChebyshev antiderivative(const PiecewiseChebyshev& f, bool anchor_left) {
    const auto& t = detail::cheb_tables(f.order());
    const size_t m = f.size();
    std::vector<ChebyshevCoeffs> locals;
    locals.reserve(m);
    std::vector<double> full(m);  // integral over each piece
    for (size_t i = 0; i < m; ++i) {
        const auto& p = f.pieces()[i];
        std::vector<double> A = t.integ.apply(p.coeffs());
        const double scale = 0.5 * (p.hi() - p.lo());
        double right = 0.0;
        for (double& c : A) c *= scale;
        for (double c : A) right += c;  // T_j(1) = 1
        full[i] = right;
        locals.emplace_back(std::move(A), p.lo(), p.hi());
    }
    if (anchor_left) {
        double shift = 0.0;
        for (size_t i = 0; i < m; ++i) {
            locals[i].coeffs()[0] += shift;
            shift += full[i];
        }
    } else {
        double suffix = 0.0;
        for (size_t i = m; i-- > 0;) {
            suffix += full[i];
            locals[i].coeffs()[0] -= suffix;
        }
    }
    return PiecewiseChebyshev(f.breakpoints(), std::move(locals));
}

// Adaptive fit of a scalar function by bisection until every piece's
// tail_ratio is below tol.
inline PiecewiseChebyshev fit_adaptive(const std::function<double(double)>& fn, double lo,
                                       double hi, int k, double tol, int max_depth = 60,
                                       int max_pieces = 100000) {
    struct Item {
        double a, b;
        int depth;
    };
    std::vector<Item> stack{{lo, hi, 0}};
    std::vector<double> breaks{lo};
    std::vector<ChebyshevCoeffs> pieces;
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        auto nodes = cheb_nodes(k, it.a, it.b);
        std::vector<double> vals(nodes.size());
        for (size_t j = 0; j < nodes.size(); ++j) vals[j] = fn(nodes[j]);
        ChebyshevCoeffs c = vals_to_coeffs(vals, it.a, it.b);
        if (c.tail_ratio() > tol && it.depth < max_depth) {
            double mid = 0.5 * (it.a + it.b);
            stack.push_back({mid, it.b, it.depth + 1});
            stack.push_back({it.a, mid, it.depth + 1});
            continue;
        }
        if (c.tail_ratio() > tol)
            throw solver_error("fit_adaptive: depth exhausted", it.a, it.b, c.tail_ratio());
        pieces.push_back(std::move(c));
        breaks.push_back(it.b);
        if (static_cast<int>(pieces.size()) > max_pieces)
            throw solver_error("fit_adaptive: too many pieces", it.a, it.b, 0.0);
    }
    return PiecewiseChebyshev(std::move(breaks), std::move(pieces));
}

}  // namespace prolates

#endif
