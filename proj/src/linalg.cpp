#include "dpca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dpca/error.hpp"

namespace dpca {

std::vector<double> Matrix::column(int j) const {
    std::vector<double> out(rows_);
    for (int i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

std::vector<double> Matrix::row(int i) const {
    std::vector<double> out(cols_);
    for (int j = 0; j < cols_; ++j) out[j] = (*this)(i, j);
    return out;
}

SymMatrix SymMatrix::from_matrix(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) throw DataError("matrix is not square");
    SymMatrix s(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = i; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > tol) {
                throw DataError("matrix is not symmetric at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
            }
            s.set(i, j, m(i, j));
        }
    }
    return s;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

double SymMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
}

SymMatrix covariance(const Matrix& x, bool centered) {
    const int n = x.rows();
    const int p = x.cols();
    if (n < 2) throw DataError("covariance needs at least 2 rows, got " + std::to_string(n));

    std::vector<double> means(p, 0.0);
    if (!centered) {
        for (int j = 0; j < p; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += x(i, j);
            means[j] = s / n;
        }
    }

    SymMatrix cov(p);
    for (int a = 0; a < p; ++a) {
        for (int b = a; b < p; ++b) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += (x(i, a) - means[a]) * (x(i, b) - means[b]);
            cov.set(a, b, s / (n - 1));
        }
    }
    return cov;
}

Standardized standardize_columns(const Matrix& x) {
    const int n = x.rows();
    const int p = x.cols();
    if (n < 2) throw DataError("standardize needs at least 2 rows, got " + std::to_string(n));

    constexpr double kSdEps = 1e-12;
    Standardized out;
    out.values = Matrix(n, p);
    out.means.resize(p);
    out.sds.resize(p);
    for (int j = 0; j < p; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += x(i, j);
        const double mean = s / n;
        double ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = x(i, j) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / (n - 1));
        if (!(sd > kSdEps)) {
            throw DegenerateColumnError(j, "degenerate column " + std::to_string(j) +
                                               ": sd=" + std::to_string(sd));
        }
        out.means[j] = mean;
        out.sds[j] = sd;
        for (int i = 0; i < n; ++i) out.values(i, j) = (x(i, j) - mean) / sd;
    }
    return out;
}

namespace {

// One cyclic Jacobi sweep over the upper triangle; rotations accumulate in v.
void jacobi_sweep(Matrix& a, Matrix& v) {
    const int n = a.rows();
    for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
            const double apq = a(p, q);
            if (apq == 0.0) continue;
            const double app = a(p, p);
            const double aqq = a(q, q);
            const double theta = (aqq - app) / (2.0 * apq);
            double t;
            if (std::abs(theta) > 1e150) {
                t = 1.0 / (2.0 * theta); // avoid overflow in theta*theta
            } else {
                t = ((theta >= 0.0) ? 1.0 : -1.0) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            }
            const double c = 1.0 / std::sqrt(t * t + 1.0);
            const double s = t * c;
            const double tau = s / (1.0 + c);

            a(p, p) = app - t * apq;
            a(q, q) = aqq + t * apq;
            a(p, q) = 0.0;
            a(q, p) = 0.0;
            for (int k = 0; k < n; ++k) {
                if (k == p || k == q) continue;
                const double akp = a(k, p);
                const double akq = a(k, q);
                a(k, p) = akp - s * (akq + tau * akp);
                a(p, k) = a(k, p);
                a(k, q) = akq + s * (akp - tau * akq);
                a(q, k) = a(k, q);
            }
            for (int k = 0; k < n; ++k) {
                const double vkp = v(k, p);
                const double vkq = v(k, q);
                v(k, p) = vkp - s * (vkq + tau * vkp);
                v(k, q) = vkq + s * (vkp - tau * vkq);
            }
        }
    }
}

double max_offdiag(const Matrix& a) {
    double m = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

} // namespace

EigenResult eigen_sym(const SymMatrix& m) {
    const int n = m.dim();
    if (n < 1) throw DataError("eigen_sym: empty matrix");
    if (n > 64) throw DataError("eigen_sym: dim " + std::to_string(n) + " exceeds 64");
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!std::isfinite(m(i, j))) throw DataError("eigen_sym: non-finite entry");
        }
    }

    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = m(i, j);
    Matrix v(n, n);
    for (int i = 0; i < n; ++i) v(i, i) = 1.0;

    const double threshold = 1e-12 * m.frobenius_norm();
    for (int sweep = 0; sweep < 100; ++sweep) {
        if (max_offdiag(a) <= threshold) break;
        jacobi_sweep(a, v);
    }

    // Sort by exact value descending, original diagonal index ascending;
    // then restore diagonal order inside clusters of values < 1e-12 apart.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return a(x, x) > a(y, y); });
    for (int lo = 0; lo < n;) {
        int hi = lo + 1;
        while (hi < n && a(order[hi - 1], order[hi - 1]) - a(order[hi], order[hi]) < 1e-12) ++hi;
        std::sort(order.begin() + lo, order.begin() + hi);
        lo = hi;
    }

    EigenResult res;
    res.values.resize(n);
    res.vectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        const int src = order[k];
        res.values[k] = a(src, src);
        double sign = 1.0;
        for (int i = 0; i < n; ++i) {
            if (v(i, src) != 0.0) {
                sign = v(i, src) > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (int i = 0; i < n; ++i) res.vectors(i, k) = sign * v(i, src);
    }
    return res;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DataError("matmul: dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

} // namespace dpca
