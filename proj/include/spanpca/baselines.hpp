#pragma once

#include "spanpca/linalg.hpp"

#include <optional>
#include <string>

namespace spanpca {

struct BaselineResult {
    std::string method;
    Support support;
    Vector loadings;
    double value = 0.0;
    Index iterations_used = 0;
    /// Objective x^T A x after each truncated power step (empty for other methods).
    std::vector<double> value_trace;
    /// The iterate vanished and the initial vector was returned instead.
    bool fell_back = false;
};

/// Leading eigenvector, keep its k largest-magnitude entries, re-score the
/// support on A.
BaselineResult thresholding_pc(const SymmetricMatrixView& a, Index k);

/// Default iteration budget of the truncated power method.
inline constexpr Index kDefaultPowerIterations = 10000;

/// x <- normalize(truncate_k(A x)) from `init`, or from the indicator of the
/// k largest diagonal entries when no init is given. Stops when the support
/// is unchanged and the objective moves by less than 1e-10 (relative).
BaselineResult truncated_power_method(const SymmetricMatrixView& a, Index k,
                                      Index max_iters = kDefaultPowerIterations,
                                      const std::optional<Vector>& init = std::nullopt);

/// Largest C(n, k) the exhaustive search accepts.
inline constexpr double kOracleLimit = 1e6;

/// Exact optimum by scanning every k-subset.
BaselineResult brute_force_oracle(const SymmetricMatrixView& a, Index k);

}  // namespace spanpca
