#pragma once

#include "spanpca/common.hpp"

#include <Eigen/SparseCore>

#include <span>
#include <utility>

namespace spanpca {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Sparse feature-by-sample matrix S (n features, m samples). The covariance
/// it induces is covariance_scale * S * S^T.
struct DataMatrix {
    SparseRows values;
    double covariance_scale = 1.0;

    Index features() const { return values.rows(); }
    Index samples() const { return values.cols(); }
};

/// Symmetric PSD matrix, stored either densely or implicitly as
/// scale * F F^T with F = S - U W^T (S sparse, U W^T a low-rank correction
/// accumulated by projection deflation).
class SymmetricMatrixView {
public:
    SymmetricMatrixView() = default;

    /// Dense storage; only the upper triangle of `a` is read.
    static SymmetricMatrixView dense(const Matrix& a);
    /// Implicit storage of scale * S S^T.
    static SymmetricMatrixView implicit(SparseRows s, double scale = 1.0);
    static SymmetricMatrixView covariance(const DataMatrix& data) {
        return implicit(data.values, data.covariance_scale);
    }

    Index dim() const { return n_; }
    bool is_dense() const { return dense_; }
    /// Number of columns of the implicit factor; 0 for dense storage.
    Index factor_cols() const { return dense_ ? 0 : s_.cols(); }
    bool has_projections() const { return u_.cols() > 0; }

    Vector apply(const Vector& x) const;
    double entry(Index i, Index j) const;
    Vector diagonal() const;
    /// Principal submatrix on `rows` (in the given order).
    Matrix submatrix(std::span<const Index> rows) const;
    /// Full dense copy.
    Matrix to_dense() const;
    /// Entrywise nonnegativity: scanned for dense storage; for implicit storage
    /// it holds when S >= 0 and no projection has been applied (sufficient).
    bool is_entrywise_nonnegative() const;

    /// Dense rows of the implicit factor F restricted to `rows`.
    Matrix factor_rows(std::span<const Index> rows) const;
    /// scale * F^T F (m x m).
    Matrix gram() const;
    /// F y for an m-vector y.
    Vector factor_times(const Vector& y) const { return factor_apply(y); }
    double scale() const { return scale_; }

    /// (I - x x^T) A (I - x x^T). Dense storage is materialised; implicit
    /// storage stays implicit.
    SymmetricMatrixView project_out(const Vector& x) const;

private:
    Vector factor_transpose_apply(const Vector& x) const;  // F^T x
    Vector factor_apply(const Vector& y) const;            // F y

    Index n_ = 0;
    bool dense_ = true;
    Matrix a_;
    SparseRows s_;
    Matrix u_;  // n x L
    Matrix w_;  // m x L
    double scale_ = 1.0;
};

/// Leading eigenpairs, values descending, vectors as orthonormal columns.
struct EigenPairs {
    Vector values;
    Matrix vectors;
    /// Fewer pairs than requested were returned because the rest vanish.
    bool truncated = false;

    Index count() const { return values.size(); }
};

/// Eigenvalues in [-kPsdTolerance * lambda_1, 0] are treated as zero.
inline constexpr double kPsdTolerance = 1e-10;

/// Dense direct solve up to this dimension, iterative above it.
inline constexpr Index kDenseSolveLimit = 512;

/// Flip `v` so its largest-magnitude entry (first on ties) is positive.
void normalize_sign(Eigen::Ref<Vector> v);

/// The d leading eigenpairs of A. Pairs whose eigenvalue is numerically zero
/// are dropped and `truncated` is set.
EigenPairs top_eigenpairs(const SymmetricMatrixView& a, Index d);

/// The `count` largest eigenvalues (zeros included, clamped at 0).
Vector leading_eigenvalues(const SymmetricMatrixView& a, Index count);

/// Largest eigenvalue of the principal submatrix on `support` and its unit
/// eigenvector zero-extended to length n.
std::pair<double, Vector> leading_eigenpair_on_support(const SymmetricMatrixView& a,
                                                       std::span<const Index> support);

/// Largest eigenvalue of a small dense symmetric matrix.
double max_eigenvalue(const Matrix& symmetric);

double quadratic_form(const SymmetricMatrixView& a, const Vector& x);

}  // namespace spanpca
