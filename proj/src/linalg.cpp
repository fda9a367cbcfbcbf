#include "spanpca/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace spanpca {

// ---------------------------------------------------------------------------
// SymmetricMatrixView

SymmetricMatrixView SymmetricMatrixView::dense(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("dense matrix must be square");
    SymmetricMatrixView view;
    view.n_ = a.rows();
    view.dense_ = true;
    view.a_ = a.selfadjointView<Eigen::Upper>();
    return view;
}

SymmetricMatrixView SymmetricMatrixView::implicit(SparseRows s, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("covariance scale must be positive");
    SymmetricMatrixView view;
    view.n_ = s.rows();
    view.dense_ = false;
    s.makeCompressed();
    view.s_ = std::move(s);
    view.u_.resize(view.n_, 0);
    view.w_.resize(view.s_.cols(), 0);
    view.scale_ = scale;
    return view;
}

Vector SymmetricMatrixView::factor_transpose_apply(const Vector& x) const {
    Vector y = s_.transpose() * x;
    if (u_.cols() > 0) y.noalias() -= w_ * (u_.transpose() * x);
    return y;
}

Vector SymmetricMatrixView::factor_apply(const Vector& y) const {
    Vector x = s_ * y;
    if (u_.cols() > 0) x.noalias() -= u_ * (w_.transpose() * y);
    return x;
}

Vector SymmetricMatrixView::apply(const Vector& x) const {
    if (x.size() != n_) throw std::invalid_argument("apply: dimension mismatch");
    if (dense_) return a_ * x;
    return scale_ * factor_apply(factor_transpose_apply(x));
}

Matrix SymmetricMatrixView::factor_rows(std::span<const Index> rows) const {
    if (dense_) throw std::logic_error("factor_rows on dense storage");
    const Index r = static_cast<Index>(rows.size());
    Matrix f = Matrix::Zero(r, s_.cols());
    for (Index a = 0; a < r; ++a) {
        for (SparseRows::InnerIterator it(s_, rows[a]); it; ++it) f(a, it.col()) = it.value();
        if (u_.cols() > 0) f.row(a).noalias() -= u_.row(rows[a]) * w_.transpose();
    }
    return f;
}

double SymmetricMatrixView::entry(Index i, Index j) const {
    if (dense_) return a_(i, j);
    const Index rows[2] = {i, j};
    const Matrix f = factor_rows(rows);
    return scale_ * f.row(0).dot(f.row(1));
}

Vector SymmetricMatrixView::diagonal() const {
    if (dense_) return a_.diagonal();
    Vector d(n_);
    for (Index i = 0; i < n_; ++i) d(i) = s_.row(i).squaredNorm();
    if (u_.cols() > 0) {
        const Matrix sw = s_ * w_;                  // n x L
        const Matrix wtw = w_.transpose() * w_;     // L x L
        for (Index i = 0; i < n_; ++i) {
            const auto ui = u_.row(i);
            d(i) += -2.0 * sw.row(i).dot(ui) + ui * wtw * ui.transpose();
        }
    }
    return scale_ * d;
}

Matrix SymmetricMatrixView::submatrix(std::span<const Index> rows) const {
    const Index r = static_cast<Index>(rows.size());
    for (Index idx : rows)
        if (idx < 0 || idx >= n_) throw std::out_of_range("submatrix index out of range");
    if (dense_) {
        Matrix sub(r, r);
        for (Index a = 0; a < r; ++a)
            for (Index b = 0; b < r; ++b) sub(a, b) = a_(rows[a], rows[b]);
        return sub;
    }
    const Matrix f = factor_rows(rows);
    Matrix sub = scale_ * (f * f.transpose());
    // exact symmetry
    sub = sub.selfadjointView<Eigen::Upper>();
    return sub;
}

Matrix SymmetricMatrixView::gram() const {
    if (dense_) throw std::logic_error("gram on dense storage");
    Matrix g = Matrix(s_.transpose() * s_);
    if (u_.cols() > 0) {
        const Matrix stu = s_.transpose() * u_;  // m x L
        const Matrix cross = stu * w_.transpose();
        g -= cross + cross.transpose();
        g.noalias() += w_ * (u_.transpose() * u_) * w_.transpose();
    }
    g *= scale_;
    return g.selfadjointView<Eigen::Upper>();
}

Matrix SymmetricMatrixView::to_dense() const {
    if (dense_) return a_;
    std::vector<Index> all(static_cast<std::size_t>(n_));
    for (Index i = 0; i < n_; ++i) all[i] = i;
    return submatrix(all);
}

bool SymmetricMatrixView::is_entrywise_nonnegative() const {
    if (dense_) return (a_.array() >= 0.0).all();
    if (u_.cols() > 0) return false;
    for (Index k = 0; k < s_.outerSize(); ++k)
        for (SparseRows::InnerIterator it(s_, k); it; ++it)
            if (it.value() < 0.0) return false;
    return true;
}

SymmetricMatrixView SymmetricMatrixView::project_out(const Vector& x) const {
    if (x.size() != n_) throw std::invalid_argument("project_out: dimension mismatch");
    if (dense_) {
        const Vector y = a_ * x;
        const double xay = x.dot(y);
        Matrix b = a_;
        b.noalias() -= x * y.transpose();
        b.noalias() -= y * x.transpose();
        b.noalias() += xay * (x * x.transpose());
        return dense(b);
    }
    SymmetricMatrixView out = *this;
    const Vector w = factor_transpose_apply(x);
    out.u_.conservativeResize(n_, u_.cols() + 1);
    out.u_.col(u_.cols()) = x;
    out.w_.conservativeResize(s_.cols(), w_.cols() + 1);
    out.w_.col(w_.cols()) = w;
    return out;
}

// ---------------------------------------------------------------------------
// Eigen-solvers

void normalize_sign(Eigen::Ref<Vector> v) {
    if (v.size() == 0) return;
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(best))) best = i;
    if (v(best) < 0.0) v = -v;
}

namespace {

struct RawEigen {
    Vector values;   // descending, length `count` (may include zeros)
    Matrix vectors;  // n x (number of available vectors)
};

RawEigen dense_top(const Matrix& a, Index count) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    const Index n = a.rows();
    RawEigen out;
    out.values.resize(count);
    out.vectors.resize(n, count);
    for (Index i = 0; i < count; ++i) {
        out.values(i) = solver.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

RawEigen gram_top(const SymmetricMatrixView& a, Index count) {
    const Matrix g = a.gram();
    const Index m = g.rows();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(g);
    if (solver.info() != Eigen::Success) throw NumericError("gram eigensolver failed");
    const Index available = std::min(count, m);
    RawEigen out;
    out.values = Vector::Zero(count);
    out.vectors.resize(a.dim(), available);
    for (Index i = 0; i < available; ++i) {
        out.values(i) = solver.eigenvalues()(m - 1 - i);
        // A (F u) = scale F (F^T F) u = lambda F u
        out.vectors.col(i) = a.factor_times(solver.eigenvectors().col(m - 1 - i)).normalized();
    }
    return out;
}

// Lanczos with full reorthogonalisation and explicit restarts.
RawEigen lanczos_top(const SymmetricMatrixView& a, Index count) {
    const Index n = a.dim();
    const Index max_basis = std::min<Index>(n, std::max<Index>(200, 20 * count));
    constexpr int kMaxRestarts = 20;
    constexpr double kTarget = 1e-10;

    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> normal;
    auto random_vector = [&] {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v(i) = normal(rng);
        return v;
    };

    Vector start = random_vector();
    double best_residual = std::numeric_limits<double>::infinity();

    for (int restart = 0; restart <= kMaxRestarts; ++restart) {
        Matrix q(n, max_basis);
        std::vector<double> alpha, beta;
        q.col(0) = start.normalized();
        Index dim = 0;
        for (Index j = 0; j < max_basis; ++j) {
            Vector w = a.apply(q.col(j));
            alpha.push_back(q.col(j).dot(w));
            for (int pass = 0; pass < 2; ++pass)
                w.noalias() -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
            dim = j + 1;
            if (j + 1 == max_basis) break;
            double b = w.norm();
            const double scale = std::max(1.0, std::abs(alpha.front()));
            if (b < 1e-12 * scale) {
                // invariant subspace: continue with a fresh orthogonal direction
                w = random_vector();
                for (int pass = 0; pass < 2; ++pass)
                    w.noalias() -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
                if (w.norm() < 1e-12) break;
                b = 0.0;
                w.normalize();
                q.col(j + 1) = w;
            } else {
                q.col(j + 1) = w / b;
            }
            beta.push_back(b);
        }

        Matrix t = Matrix::Zero(dim, dim);
        for (Index i = 0; i < dim; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < dim) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(t);
        const Index take = std::min(count, dim);
        RawEigen out;
        out.values = Vector::Zero(count);
        out.vectors.resize(n, take);
        for (Index i = 0; i < take; ++i) {
            out.values(i) = solver.eigenvalues()(dim - 1 - i);
            out.vectors.col(i) = q.leftCols(dim) * solver.eigenvectors().col(dim - 1 - i);
            out.vectors.col(i).normalize();
        }
        const double lambda1 = std::max(1.0, std::abs(out.values(0)));
        double worst = 0.0;
        for (Index i = 0; i < take; ++i) {
            const Vector r = a.apply(out.vectors.col(i)) - out.values(i) * out.vectors.col(i);
            worst = std::max(worst, r.norm() / lambda1);
        }
        best_residual = std::min(best_residual, worst);
        if (worst <= kTarget || dim == n) return out;
        start = out.vectors.rowwise().sum();
    }
    std::ostringstream msg;
    msg << "Lanczos did not converge; best relative residual " << best_residual;
    throw ConvergenceError(msg.str(), best_residual);
}

RawEigen compute_top(const SymmetricMatrixView& a, Index count) {
    const Index n = a.dim();
    if (n <= kDenseSolveLimit) return dense_top(a.to_dense(), count);
    if (!a.is_dense() && a.factor_cols() <= kDenseSolveLimit) return gram_top(a, count);
    return lanczos_top(a, count);
}

}  // namespace

EigenPairs top_eigenpairs(const SymmetricMatrixView& a, Index d) {
    const Index n = a.dim();
    if (d < 1 || d > n) throw std::invalid_argument("top_eigenpairs: need 1 <= d <= n");
    RawEigen raw = compute_top(a, d);
    const double lambda1 = raw.values.size() > 0 ? raw.values(0) : 0.0;
    Index keep = 0;
    while (keep < std::min<Index>(d, raw.vectors.cols()) && lambda1 > 0.0 &&
           raw.values(keep) > kPsdTolerance * lambda1)
        ++keep;
    EigenPairs out;
    out.values = raw.values.head(keep);
    out.vectors = raw.vectors.leftCols(keep);
    for (Index i = 0; i < keep; ++i) normalize_sign(out.vectors.col(i));
    out.truncated = keep < d;
    return out;
}

Vector leading_eigenvalues(const SymmetricMatrixView& a, Index count) {
    if (count < 1) throw std::invalid_argument("leading_eigenvalues: count must be >= 1");
    const Index n = a.dim();
    Vector values = Vector::Zero(count);
    if (n == 0) return values;
    const RawEigen raw = compute_top(a, std::min(count, n));
    const double lambda1 = std::max(0.0, raw.values(0));
    for (Index i = 0; i < raw.values.size(); ++i)
        values(i) = raw.values(i) <= kPsdTolerance * lambda1 ? 0.0 : raw.values(i);
    return values;
}

double max_eigenvalue(const Matrix& symmetric) {
    if (symmetric.rows() == 1) return symmetric(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(symmetric.rows() - 1);
}

std::pair<double, Vector> leading_eigenpair_on_support(const SymmetricMatrixView& a,
                                                       std::span<const Index> support) {
    if (support.empty()) throw std::invalid_argument("support must be nonempty");
    const Index n = a.dim();
    std::vector<Index> sorted(support.begin(), support.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("support indices must be distinct");
    if (sorted.front() < 0 || sorted.back() >= n)
        throw std::out_of_range("support index out of range");

    const Matrix sub = a.submatrix(support);
    const Index r = sub.rows();
    Vector local(r);
    double value;
    if (r == 1) {
        value = sub(0, 0);
        local(0) = 1.0;
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(sub);
        if (solver.info() != Eigen::Success) throw NumericError("submatrix eigensolve failed");
        value = solver.eigenvalues()(r - 1);
        local = solver.eigenvectors().col(r - 1);
    }
    normalize_sign(local);
    Vector x = Vector::Zero(n);
    for (Index i = 0; i < r; ++i) x(support[i]) = local(i);
    return {value, x};
}

double quadratic_form(const SymmetricMatrixView& a, const Vector& x) {
    if (x.size() != a.dim()) throw std::invalid_argument("quadratic_form: dimension mismatch");
    if (!x.allFinite()) throw std::invalid_argument("quadratic_form: non-finite vector");
    return x.dot(a.apply(x));
}

}  // namespace spanpca
