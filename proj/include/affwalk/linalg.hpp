#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "affwalk/common.hpp"

namespace affwalk {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

// ---------------------------------------------------------------------------
// Dense row-major matrix. Small sizes only (d <= 10, exterior blocks <= 252).
// ---------------------------------------------------------------------------

class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}
    Matrix(int rows, int cols, std::initializer_list<double> entries) : Matrix(rows, cols) {
        std::size_t i = 0;
        for (double v : entries) a_[i++] = v;
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(const Vec& d) {
        Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return a_; }

    Matrix operator*(const Matrix& rhs) const {
        Matrix out(rows_, rhs.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                double v = (*this)(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < rhs.cols_; ++j) out(i, j) += v * rhs(k, j);
            }
        return out;
    }

    Matrix operator+(const Matrix& rhs) const {
        Matrix out = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] += rhs.a_[i];
        return out;
    }

    Matrix operator-(const Matrix& rhs) const {
        Matrix out = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] -= rhs.a_[i];
        return out;
    }

    Matrix& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }

    friend Matrix operator*(double s, Matrix m) {
        m *= s;
        return m;
    }

    Vec apply(const Vec& x) const {
        Vec y(static_cast<std::size_t>(rows_), 0.0);
        for (int i = 0; i < rows_; ++i) {
            double s = 0;
            for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s;
        }
        return y;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double frobenius() const { return norm2(a_); }

    double max_abs() const {
        double m = 0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    Vec col(int j) const {
        Vec c(static_cast<std::size_t>(rows_));
        for (int i = 0; i < rows_; ++i) c[static_cast<std::size_t>(i)] = (*this)(i, j);
        return c;
    }

    void set_col(int j, const Vec& c) {
        for (int i = 0; i < rows_; ++i) (*this)(i, j) = c[static_cast<std::size_t>(i)];
    }

    bool operator==(const Matrix& rhs) const = default;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

// ---------------------------------------------------------------------------
// Determinant and inverse (partial-pivot elimination; sizes are tiny)
// ---------------------------------------------------------------------------

inline double determinant(Matrix a) {
    const int n = a.rows();
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int pivot = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
        if (a(pivot, c) == 0.0) return 0.0;
        if (pivot != c) {
            for (int j = 0; j < n; ++j) std::swap(a(pivot, j), a(c, j));
            det = -det;
        }
        det *= a(c, c);
        for (int r = c + 1; r < n; ++r) {
            double f = a(r, c) / a(c, c);
            for (int j = c; j < n; ++j) a(r, j) -= f * a(c, j);
        }
    }
    return det;
}

inline Matrix inverse(Matrix a) {
    const int n = a.rows();
    Matrix inv = Matrix::identity(n);
    for (int c = 0; c < n; ++c) {
        int pivot = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
        if (std::abs(a(pivot, c)) < 1e-300) throw singular_input("inverse: singular matrix");
        if (pivot != c)
            for (int j = 0; j < n; ++j) {
                std::swap(a(pivot, j), a(c, j));
                std::swap(inv(pivot, j), inv(c, j));
            }
        double p = a(c, c);
        for (int j = 0; j < n; ++j) {
            a(c, j) /= p;
            inv(c, j) /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = a(r, c);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Singular values via one-sided Jacobi. Quadratically convergent and
// accurate to ~1e-14 relative on the well-conditioned inputs we feed it.
// ---------------------------------------------------------------------------

inline Vec singular_values(const Matrix& m) {
    Matrix a = m.rows() >= m.cols() ? m : m.transposed();
    const int rows = a.rows(), n = a.cols();
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (int i = 0; i < rows; ++i) {
                    app += a(i, p) * a(i, p);
                    aqq += a(i, q) * a(i, q);
                    apq += a(i, p) * a(i, q);
                }
                if (std::abs(apq) <= 1e-15 * std::sqrt(app * aqq) + 1e-280) continue;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double cs = 1.0 / std::sqrt(1.0 + t * t);
                double sn = cs * t;
                for (int i = 0; i < rows; ++i) {
                    double vp = a(i, p), vq = a(i, q);
                    a(i, p) = cs * vp - sn * vq;
                    a(i, q) = sn * vp + cs * vq;
                }
                rotated = true;
            }
        if (!rotated) break;
    }
    Vec s(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        double sq = 0;
        for (int i = 0; i < rows; ++i) sq += a(i, j) * a(i, j);
        s[static_cast<std::size_t>(j)] = std::sqrt(sq);
    }
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

inline double operator_norm(const Matrix& m) { return singular_values(m)[0]; }

// ---------------------------------------------------------------------------
// Cartan vector: sorted log singular values. The non-increasing order is
// the positive-chamber normalization for products of GL blocks.
// ---------------------------------------------------------------------------

struct CartanVector {
    Vec kappa; // non-increasing

    bool operator==(const CartanVector&) const = default;
};

inline CartanVector cartan_vector(const Matrix& g) {
    if (g.rows() != g.cols()) throw singular_input("cartan_vector: matrix must be square");
    Vec s = singular_values(g);
    if (!(s.back() > 1e-12 * s.front())) throw singular_input("cartan_vector: singular input");
    Vec kappa(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) kappa[i] = std::log(s[i]);
    return CartanVector{std::move(kappa)};
}

// ---------------------------------------------------------------------------
// Exterior powers on the lexicographic wedge basis
// ---------------------------------------------------------------------------

/// All p-element subsets of {0,...,n-1} in lexicographic order. This order
/// is normative for every serialized exterior-power matrix.
inline std::vector<std::vector<int>> lex_subsets(int n, int p) {
    std::vector<std::vector<int>> out;
    if (p < 0 || p > n) return out;
    std::vector<int> idx(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (;;) {
        out.push_back(idx);
        int i = p - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - p + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < p; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

/// Matrix of the induced action on p-fold wedges; entry (I,J) is the minor
/// of g with rows I and columns J. Operator norm equals the product of the
/// top p singular values of g.
inline Matrix exterior_power(const Matrix& g, int p) {
    const int d = g.rows();
    if (g.cols() != d) throw bad_degree("exterior_power: matrix must be square");
    if (p < 1 || p > d) throw bad_degree("exterior_power: degree out of range");
    if (p == 1) return g;
    auto subs = lex_subsets(d, p);
    const int n = static_cast<int>(subs.size());
    Matrix out(n, n);
    Matrix minor(p, p);
    for (int bi = 0; bi < n; ++bi)
        for (int bj = 0; bj < n; ++bj) {
            for (int r = 0; r < p; ++r)
                for (int c = 0; c < p; ++c)
                    minor(r, c) = g(subs[static_cast<std::size_t>(bi)][static_cast<std::size_t>(r)],
                                    subs[static_cast<std::size_t>(bj)][static_cast<std::size_t>(c)]);
            out(bi, bj) = determinant(minor);
        }
    return out;
}

// ---------------------------------------------------------------------------
// QR re-orthonormalization step for Lyapunov accumulation
// ---------------------------------------------------------------------------

struct QrStep {
    Matrix q;     // orthonormal columns spanning the same flag
    Vec log_diag; // logs of the R-diagonal magnitudes
};

inline QrStep qr_step(const Matrix& frame) {
    const int m = frame.rows(), k = frame.cols();
    Matrix q = frame;
    Vec logd(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        // modified Gram-Schmidt with one re-orthogonalization pass
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < j; ++i) {
                double proj = 0;
                for (int r = 0; r < m; ++r) proj += q(r, i) * q(r, j);
                for (int r = 0; r < m; ++r) q(r, j) -= proj * q(r, i);
            }
        double nrm = 0;
        for (int r = 0; r < m; ++r) nrm += q(r, j) * q(r, j);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-300) throw rank_deficient("qr_step: rank-deficient frame");
        for (int r = 0; r < m; ++r) q(r, j) /= nrm;
        logd[static_cast<std::size_t>(j)] = std::log(nrm);
    }
    return QrStep{std::move(q), std::move(logd)};
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi); used for covariance
// tensors and plot ellipses.
// ---------------------------------------------------------------------------

struct SymEigen {
    Vec values;     // descending
    Matrix vectors; // columns
};

inline SymEigen sym_eigen(Matrix a) {
    const int n = a.rows();
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-28) break;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                double cs = 1.0 / std::sqrt(1.0 + t * t);
                double sn = cs * t;
                for (int i = 0; i < n; ++i) {
                    double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = cs * aip - sn * aiq;
                    a(i, q) = sn * aip + cs * aiq;
                }
                for (int j = 0; j < n; ++j) {
                    double apj = a(p, j), aqj = a(q, j);
                    a(p, j) = cs * apj - sn * aqj;
                    a(q, j) = sn * apj + cs * aqj;
                }
                for (int i = 0; i < n; ++i) {
                    double vip = v(i, p), viq = v(i, q);
                    v(i, p) = cs * vip - sn * viq;
                    v(i, q) = sn * vip + cs * viq;
                }
            }
    }
    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < n; ++i) order.emplace_back(a(i, i), i);
    std::sort(order.begin(), order.end(), [](auto& x, auto& y) { return x.first > y.first; });
    SymEigen out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
        out.values[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)].first;
        int src = order[static_cast<std::size_t>(i)].second;
        for (int r = 0; r < n; ++r) out.vectors(r, i) = v(r, src);
    }
    return out;
}

} // namespace affwalk
