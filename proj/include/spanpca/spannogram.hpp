#pragma once

#include "spanpca/common.hpp"
#include "spanpca/linalg.hpp"

#include <cstdint>
#include <span>

namespace spanpca {

/// n x d factor V with columns sqrt(lambda_i) v_i, so that A_d = V V^T.
/// Row i is the curve [V c]_i over unit vectors c.
struct LowRankFactor {
    Matrix v;
    /// Source matrix is entrywise nonnegative: only same-sign curve
    /// intersections are enumerated and supports come from signed rankings.
    bool nonnegative = false;

    Index rows() const { return v.rows(); }
    Index rank() const { return v.cols(); }
    /// Largest eigenvalue of V V^T.
    double lambda_max() const;
};

LowRankFactor make_low_rank_factor(const EigenPairs& pairs, bool nonnegative);

/// Deduplicated candidate supports, each sorted ascending, the list ordered
/// lexicographically.
struct CandidateSupportSet {
    Index k = 0;
    std::vector<Support> supports;
    /// Intersection systems solved (C(n,d) tuples times active sign patterns).
    std::uint64_t systems_solved = 0;
    /// The factor was perturbed once to escape a degenerate intersection.
    bool perturbed = false;

    std::size_t size() const { return supports.size(); }
};

/// Indices of the k largest |v_i| (ties to the smaller index).
Support top_k_by_magnitude(const Vector& v, Index k);

/// d = 1 candidates: top-k by magnitude, or (nonnegative) the top-k and
/// bottom-k of the signed ordering.
CandidateSupportSet rank1_candidates(const Vector& v, Index k, bool nonnegative);

/// Unit c spanning the nullspace of rows V[t0] - signs[j] * V[t(j+1)],
/// first nonzero entry positive. Throws DegenerateIntersection when the
/// nullspace is not one-dimensional.
Vector intersection_vector(const Matrix& v, std::span<const Index> tuple,
                           std::span<const int> signs);

/// Supports around a point where the `tuple` entries of `w` tie: the top-k
/// of w with the tie resolved every way that changes which tuple members
/// make the cut.
std::vector<Support> expand_tie_supports(const Vector& w, std::span<const Index> tuple,
                                         Index k);

/// All candidate supports of the rank-d spannogram of `factor`. A degenerate
/// intersection triggers one global perturbation (seeded) and a retry.
CandidateSupportSet enumerate_candidates(const LowRankFactor& factor, Index k,
                                         std::uint64_t seed = 0);

/// Uniform entrywise perturbation in [-eps, eps] with
/// eps = min(1 / (sqrt(lambda_1 n d) ln n), 1e-8 sqrt(lambda_1)).
LowRankFactor perturb(const LowRankFactor& factor, std::uint64_t seed);
double perturbation_epsilon(double lambda1, Index n, Index d);

struct RankDSolution {
    Support support;
    Vector x;
    double value = 0.0;
    CandidateSupportSet candidates;
};

/// Exact k-sparse PCA of V V^T by scoring every spannogram candidate.
RankDSolution solve_rank_d_exact(const LowRankFactor& factor, Index k, std::uint64_t seed = 0);

/// Index of the best score; values within 1e-12 (relative) of the maximum
/// are tied and resolved towards the lexicographically smallest support.
std::size_t select_best(std::span<const double> values, std::span<const Support> supports);

}  // namespace spanpca
