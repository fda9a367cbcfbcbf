#pragma once

// Generators and independent reference computations shared by the tests.
// Nothing here calls into the library's solvers.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace testutil {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

/// B B^T with B n x rank Gaussian.
inline Matrix random_psd(Index n, Index rank, std::mt19937_64& rng) {
    const Matrix b = gaussian(n, rank, rng);
    return b * b.transpose();
}

/// PSD with a geometric spectrum so every rank-d cut is well separated.
inline Matrix random_psd_decaying(Index n, std::mt19937_64& rng, double ratio = 0.7) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, rng));
    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    Vector lambda(n);
    for (Index i = 0; i < n; ++i) lambda(i) = 10.0 * std::pow(ratio, static_cast<double>(i));
    return q * lambda.asDiagonal() * q.transpose();
}

inline Vector random_unit(Index n, std::mt19937_64& rng) {
    Vector v = gaussian(n, 1, rng).col(0);
    return v / v.norm();
}

/// Entrywise absolute value of a Gaussian factor: V V^T is nonnegative.
inline Matrix random_nonnegative_factor(Index n, Index d, std::mt19937_64& rng) {
    return gaussian(n, d, rng).cwiseAbs();
}

/// Visits every k-subset of {0..n-1} (plain recursion, independent of the
/// library's combination iterator).
inline void each_subset(Index n, Index k, const std::function<void(const std::vector<Index>&)>& fn) {
    std::vector<Index> cur;
    std::function<void(Index)> rec = [&](Index start) {
        if (static_cast<Index>(cur.size()) == k) {
            fn(cur);
            return;
        }
        for (Index i = start; i <= n - (k - static_cast<Index>(cur.size())); ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
}

inline double lambda_max_dense(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(a.rows() - 1);
}

inline Matrix principal(const Matrix& a, const std::vector<Index>& s) {
    Matrix sub(s.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) sub(i, j) = a(s[i], s[j]);
    return sub;
}

struct Exhaustive {
    double value = -1.0;
    std::vector<Index> support;
};

/// max over k-subsets of lambda_max(A_SS).
inline Exhaustive exhaustive_sparse_pca(const Matrix& a, Index k) {
    Exhaustive best;
    each_subset(a.rows(), k, [&](const std::vector<Index>& s) {
        const double v = lambda_max_dense(principal(a, s));
        if (v > best.value) {
            best.value = v;
            best.support = s;
        }
    });
    return best;
}

/// Best rank-d approximation sum_{i<=d} lambda_i u_i u_i^T.
inline Matrix truncate_rank(const Matrix& a, Index d) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    const Index n = a.rows();
    Matrix out = Matrix::Zero(n, n);
    for (Index i = 0; i < d; ++i) {
        const double l = es.eigenvalues()(n - 1 - i);
        const Vector u = es.eigenvectors().col(n - 1 - i);
        out += l * u * u.transpose();
    }
    return out;
}

inline Vector descending_eigenvalues(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

inline std::uint64_t binomial(Index n, Index k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (Index i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

}  // namespace testutil
