#pragma once

#include "spanpca/baselines.hpp"
#include "spanpca/solver.hpp"

#include <cstdint>
#include <string>

namespace spanpca {

/// Covariance with two planted sparse eigenvectors over a flat unit bulk.
struct SpikedModel {
    Index n = 0;
    double lambda1 = 400.0;
    double lambda2 = 300.0;
    Vector v1;
    Vector v2;
    Support support1;
    Support support2;

    /// Sigma = lambda1 v1 v1^T + lambda2 v2 v2^T + (I - v1 v1^T - v2 v2^T).
    Matrix covariance() const;
    /// Orthonormal basis (n x (n-2)) of the nullspace of [v1 v2].
    Matrix completion_basis() const;
};

inline constexpr Index kPlantedSparsity = 10;

/// Planted eigenvectors have entries of magnitude 1/sqrt(10) with random
/// signs on two disjoint random 10-sets.
SpikedModel make_spiked_model(Index n, std::uint64_t seed);

/// m zero-mean Gaussian samples with covariance Sigma as the columns of an
/// n x m data matrix; covariance_scale = 1/m.
DataMatrix sample_gaussian(const SpikedModel& model, Index m, std::uint64_t seed);

enum class RecoveryMethod { Thresholding, TPower, Spannogram2 };

std::string method_name(RecoveryMethod method);
RecoveryMethod parse_method(const std::string& name);

struct RecoveryConfig {
    Index n = 500;
    Index m = 50;
    Index trials = 200;
    Index k = 10;
    std::uint64_t seed = 0;
    Index tpower_iters = kDefaultPowerIterations;
    std::vector<RecoveryMethod> methods{RecoveryMethod::Thresholding, RecoveryMethod::TPower,
                                        RecoveryMethod::Spannogram2};
};

struct RecoveryRow {
    std::string method;
    Index n = 0;
    Index m = 0;
    Index k = 0;
    Index trials = 0;
    Index successes = 0;
    double p_rec = 0.0;
    /// Mean approximation lower bound over trials (spannogram only; 0 otherwise).
    double mean_ratio_lower = 0.0;
};

/// Support-recovery study: per trial, sample, estimate two components with
/// projection deflation in between, and count a success when the two
/// estimated supports equal the two planted supports (as an unordered pair).
std::vector<RecoveryRow> recovery_experiment(const RecoveryConfig& config);

struct PowerLawFit {
    double c = 0.0;
    double alpha = 0.0;
    double r2 = 0.0;
    Index points_used = 0;
    Index points_excluded = 0;
};

/// Least squares of ln(lambda_i) on ln(i) over 1-based indices [first, last];
/// nonpositive eigenvalues are excluded.
PowerLawFit fit_power_law(const Vector& eigenvalues, Index first, Index last);

struct SpectrumReport {
    Vector eigenvalues;
    PowerLawFit fit;
    double lambda_1_diag = 0.0;
};

SpectrumReport spectrum_report(const SymmetricMatrixView& a, Index count, Index fit_first,
                               Index fit_last);

struct BoundCurveRow {
    Index d = 0;
    BoundReport bound;
};

/// approximation_bound for d = 1..d_max.
std::vector<BoundCurveRow> bound_curve(const SymmetricMatrixView& a, Index k, Index d_max);

/// Binary document-term corpus (features = words) whose word probabilities
/// follow p_w ~ (w+1)^-zipf. Each document draws `words_per_doc` tokens.
DataMatrix synthetic_corpus(Index words, Index documents, Index words_per_doc, double zipf,
                            std::uint64_t seed);

/// splitmix64 step, used to derive independent per-trial seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace spanpca
