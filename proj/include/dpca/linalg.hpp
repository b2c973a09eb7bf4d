#ifndef DPCA_LINALG_HPP
#define DPCA_LINALG_HPP

#include <cstddef>
#include <vector>

namespace dpca {

// Dense row-major matrix of doubles. Small: the pipeline works with
// window-by-pollutant blocks (45 x 5) and their covariances (5 x 5).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    std::vector<double> column(int j) const;
    std::vector<double> row(int i) const;

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Symmetric matrix stored mirrored; set() writes both triangles so the
// symmetry invariant holds exactly by construction.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim, 0.0) {}

    // Validates |m(i,j) - m(j,i)| <= tol and symmetrizes exactly.
    static SymMatrix from_matrix(const Matrix& m, double tol = 0.0);

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * dim_ + j]; }
    void set(int i, int j, double v) {
        a_[static_cast<size_t>(i) * dim_ + j] = v;
        a_[static_cast<size_t>(j) * dim_ + i] = v;
    }

    double trace() const;
    double frobenius_norm() const;

private:
    int dim_ = 0;
    std::vector<double> a_;
};

struct EigenResult {
    std::vector<double> values; // descending
    Matrix vectors;             // columns are unit eigenvectors, same order
};

struct Standardized {
    Matrix values;
    std::vector<double> means;
    std::vector<double> sds;
};

// Unbiased sample covariance (divisor n-1). If `centered` the column means
// are assumed zero and not subtracted. Throws DataError for n < 2.
SymMatrix covariance(const Matrix& x, bool centered = false);

// Center to mean 0 and scale to sample sd 1 per column. A column with
// sd <= 1e-12 raises DegenerateColumnError carrying the column index.
Standardized standardize_columns(const Matrix& x);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Converges when every off-diagonal magnitude is < 1e-12 * ||M||_F, at most
// 100 sweeps. Eigenvalues are sorted descending; ties closer than 1e-12 keep
// the solver's diagonal order. Each eigenvector's first nonzero component is
// made positive so output is deterministic. Designed for dim <= 64.
EigenResult eigen_sym(const SymMatrix& m);

// Helpers shared across the pipeline.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

} // namespace dpca

#endif
