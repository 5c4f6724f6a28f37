#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sdq/errors.hpp"

namespace sdq {

using Vec = std::vector<double>;

// Small dense row-major matrix; everything in this library is K x K with tiny K.
class Mat {
public:
    Mat() : rows_(0), cols_(0) {}
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    Mat transposed() const {
        Mat t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend Mat operator*(const Mat& x, const Mat& y) {
        if (x.cols_ != y.rows_) throw std::invalid_argument("matrix size mismatch");
        Mat r(x.rows_, y.cols_);
        for (std::size_t i = 0; i < x.rows_; ++i)
            for (std::size_t k = 0; k < x.cols_; ++k) {
                double v = x(i, k);
                if (v == 0.0) continue;
                for (std::size_t j = 0; j < y.cols_; ++j) r(i, j) += v * y(k, j);
            }
        return r;
    }

    friend Vec operator*(const Mat& x, const Vec& v) {
        if (x.cols_ != v.size()) throw std::invalid_argument("matrix/vector size mismatch");
        Vec r(x.rows_, 0.0);
        for (std::size_t i = 0; i < x.rows_; ++i)
            for (std::size_t j = 0; j < x.cols_; ++j) r[i] += x(i, j) * v[j];
        return r;
    }

    friend Mat operator-(const Mat& x, const Mat& y) {
        if (x.rows_ != y.rows_ || x.cols_ != y.cols_)
            throw std::invalid_argument("matrix size mismatch");
        Mat r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] -= y.a_[i];
        return r;
    }

    friend Mat operator+(const Mat& x, const Mat& y) {
        if (x.rows_ != y.rows_ || x.cols_ != y.cols_)
            throw std::invalid_argument("matrix size mismatch");
        Mat r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] += y.a_[i];
        return r;
    }

    Mat scaled(double c) const {
        Mat r = *this;
        for (double& v : r.a_) v *= c;
        return r;
    }

    double trace() const {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> a_;
};

inline double inf_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Gaussian elimination with partial pivoting.
inline Vec solve_linear(Mat a, Vec b) {
    if (!a.square() || a.rows() != b.size())
        throw std::invalid_argument("solve_linear: size mismatch");
    const std::size_t n = a.rows();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
        if (std::fabs(a(piv, col)) < 1e-300)
            throw IllConditioned("solve_linear: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    Vec x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

namespace detail {

// Characteristic polynomial of a small matrix via Faddeev-LeVerrier.
// Returns monic coefficients c so that p(x) = x^n + c[n-1] x^(n-1) + ... + c[0].
inline std::vector<double> char_poly(const Mat& a) {
    const std::size_t n = a.rows();
    std::vector<double> c(n, 0.0);
    Mat m = Mat::identity(n);
    double ck = 1.0; // coefficient of x^n
    Mat am = a;
    for (std::size_t k = 1; k <= n; ++k) {
        if (k > 1) am = a * m;
        ck = -am.trace() / static_cast<double>(k);
        c[n - k] = ck;
        m = am;
        for (std::size_t i = 0; i < n; ++i) m(i, i) += ck;
    }
    return c;
}

// All roots of a monic polynomial by Durand-Kerner; fine for degree <= 4.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeff) {
    using cd = std::complex<double>;
    const std::size_t n = coeff.size();
    auto eval = [&](cd x) {
        cd p(1.0, 0.0);
        for (std::size_t k = n; k-- > 0;) p = p * x + coeff[k];
        return p;
    };
    std::vector<cd> z(n);
    cd seed(0.4, 0.9);
    z[0] = seed;
    for (std::size_t i = 1; i < n; ++i) z[i] = z[i - 1] * seed;
    for (int it = 0; it < 1000; ++it) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cd denom(1.0, 0.0);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) denom *= z[i] - z[j];
            cd step = eval(z[i]) / denom;
            z[i] -= step;
            delta = std::max(delta, std::abs(step));
        }
        if (delta < 1e-15) break;
    }
    return z;
}

inline double rho_char_poly(const Mat& a) {
    auto roots = poly_roots(char_poly(a));
    double r = 0.0;
    for (auto z : roots) r = std::max(r, std::abs(z));
    return r;
}

// Deterministic power iteration on A + I (the shift breaks the period-2
// oscillation of e.g. [[0,b],[c,0]]), with Collatz-Wielandt bounds as the
// stopping rule. Start vector e/n; no randomness.
inline bool power_iteration_rho(const Mat& a, double& rho_out, long long cap = 100000) {
    const std::size_t n = a.rows();
    Vec x(n, 1.0 / static_cast<double>(n));
    for (long long it = 0; it < cap; ++it) {
        Vec y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = x[i]; // the +I shift
            for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] <= 0.0) continue;
            double r = y[i] / x[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if (hi - lo <= 2e-13 * (1.0 + hi)) {
            rho_out = 0.5 * (hi + lo) - 1.0;
            return true;
        }
        double norm = 0.0;
        for (double v : y) norm += v;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    }
    return false;
}

} // namespace detail

// Perron root of a non-negative matrix to ~1e-12 absolute. K=1 and K=2 are
// closed-form; otherwise power iteration with a characteristic-polynomial
// fallback for K <= 4 (reducible matrices with tied moduli stall the iteration).
inline double spectral_radius(const Mat& m) {
    if (!m.square() || m.rows() == 0)
        throw std::invalid_argument("spectral_radius: matrix must be square and non-empty");
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!(m(i, j) >= 0.0) || !std::isfinite(m(i, j)))
                throw std::invalid_argument("spectral_radius: entries must be finite and >= 0");
    if (n == 1) return m(0, 0);
    if (n == 2) {
        double a = m(0, 0), d = m(1, 1), bc = m(0, 1) * m(1, 0);
        double disc = (a - d) * (a - d) + 4.0 * bc;
        return 0.5 * (a + d + std::sqrt(disc));
    }
    double rho = 0.0;
    if (detail::power_iteration_rho(m, rho)) return rho;
    if (n <= 4) return detail::rho_char_poly(m);
    throw IllConditioned("spectral_radius: power iteration did not converge");
}

// Non-negative right Perron vector of a non-negative matrix, normalized to
// sum 1. Power iteration on A + I; requires a well-separated dominant
// eigenvector (guaranteed for irreducible matrices).
inline Vec perron_vector(const Mat& a, long long cap = 200000) {
    const std::size_t n = a.rows();
    const double rho = spectral_radius(a);
    Vec x(n, 1.0 / static_cast<double>(n));
    for (long long it = 0; it < cap; ++it) {
        Vec y(n, 0.0);
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = x[i];
            for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
        double norm = 0.0;
        for (double v : y) norm += v;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] /= norm;
            delta = std::max(delta, std::fabs(y[i] - x[i]));
        }
        x = y;
        if (delta < 1e-14) break;
    }
    // Accept only if x is actually an eigenvector for rho.
    Vec ax = a * x;
    double defect = 0.0;
    for (std::size_t i = 0; i < n; ++i) defect = std::max(defect, std::fabs(ax[i] - rho * x[i]));
    if (defect > 1e-8 * (1.0 + rho))
        throw IllConditioned("perron_vector: iteration did not converge to an eigenvector");
    for (double& v : x) v = std::max(v, 0.0);
    return x;
}

} // namespace sdq
