#ifndef PROLATES_LINALG_HPP
#define PROLATES_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "prolates/errors.hpp"

namespace prolates {

// Dense row-major matrix, sized for the small collocation systems this
// library solves (tens of rows).
class Mat {
  public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(rows_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            const double* row = a_.data() + static_cast<size_t>(i) * cols_;
            for (int j = 0; j < cols_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    static Mat product(const Mat& a, const Mat& b) {
        Mat c(a.rows(), b.cols());
        for (int i = 0; i < a.rows(); ++i)
            for (int k = 0; k < a.cols(); ++k) {
                double aik = a(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

// Solves A x = b in place by LU with partial pivoting; A is destroyed.
// Throws numerical_error on an exactly singular system.
inline void lu_solve_inplace(Mat& a, std::vector<double>& b) {
    const int n = a.rows();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::fabs(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(a(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw numerical_error("lu_solve: singular collocation matrix");
        if (piv != col) {
            for (int j = col; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        const double d = a(col, col);
        for (int r = col + 1; r < n; ++r) {
            double f = a(r, col) / d;
            if (f == 0.0) continue;
            a(r, col) = 0.0;
            for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a(i, j) * b[j];
        b[i] = s / a(i, i);
    }
}

inline double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace prolates

#endif
