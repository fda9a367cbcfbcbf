#pragma once

#include "spanpca/elimination.hpp"
#include "spanpca/linalg.hpp"
#include "spanpca/spannogram.hpp"

#include <optional>
#include <span>
#include <variant>

namespace spanpca {

/// Worst-case accuracy certificate for a rank-d run.
struct BoundReport {
    double epsilon_d = 0.0;
    double ratio_lower = 1.0;       // clamp(1 - epsilon_d, 0, 1)
    double term_spectral = 0.0;     // (n/k) lambda_{d+1} / lambda_1
    double term_diagonal = 0.0;     // lambda_{d+1} / max_i A_ii
    double lambda_d_plus_1 = 0.0;
    double lambda_1 = 0.0;
    double lambda_1_diag = 0.0;
};

/// `spectrum` holds at least d+1 leading eigenvalues, non-increasing.
BoundReport approximation_bound(std::span<const double> spectrum, Index d, double lambda_1_diag,
                                Index n, Index k);

struct RankPlan {
    Index d = 1;
    bool exceeds_cap = false;  // d > kMaxRank: the search would be impractical
};

/// Smallest d >= 1 with (d+1)^-alpha <= epsilon * delta, i.e. the rank whose
/// spectral error term meets epsilon when lambda_i = C i^-alpha and k = delta n.
RankPlan required_rank_for_accuracy(double alpha, double epsilon, double delta);

enum class NonnegMode { Auto, Off, On };

struct SolveOptions {
    NonnegMode nonneg = NonnegMode::Auto;
    bool eliminate = true;
    std::uint64_t seed = 0;
};

struct SparsePrincipalComponent {
    Support support;
    Vector loadings;
    double value = 0.0;
    Index rank_used = 0;
    BoundReport bound;
    std::size_t candidate_count = 0;
    std::size_t retained_features = 0;
    bool nonnegative_mode = false;
    bool perturbed = false;
};

/// k-sparse leading component of A from the spannogram of its rank-d
/// approximation; every candidate support is re-scored on A itself.
SparsePrincipalComponent sparse_pca(const SymmetricMatrixView& a, Index k, Index d,
                                    const SolveOptions& options = {});

/// (I - x x^T) A (I - x x^T) for unit x.
SymmetricMatrixView deflate_projection(const SymmetricMatrixView& a, const Vector& x);

/// Zeroes the rows of S on `support`; dimensions are preserved.
DataMatrix deflate_strip(const DataMatrix& s, std::span<const Index> support);

enum class Deflation { Projection, Strip };

struct MultiComponentResult {
    std::vector<SparsePrincipalComponent> components;
    /// sum_i x_i^T A x_i / sum_i lambda_i over the original A.
    double explained_variance_ratio = 0.0;
    Vector leading_eigenvalues;
};

using MatrixSource = std::variant<DataMatrix, SymmetricMatrixView>;

MultiComponentResult multi_component(const MatrixSource& source, Index k, Index components,
                                     Index d, Deflation deflation, const SolveOptions& options = {});

}  // namespace spanpca
