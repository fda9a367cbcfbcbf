#pragma once

#include "spanpca/spannogram.hpp"

namespace spanpca {

struct EliminationResult {
    /// Original row indices kept, ascending.
    std::vector<Index> retained;
    /// The factor restricted to `retained` (same row order).
    LowRankFactor reduced;
    /// Amplitudes of the final boundary points: intersections with exactly
    /// k-1 working curves strictly above them. Ascending.
    std::vector<double> boundary_amplitudes;
    /// Elimination was abandoned because an intersection was degenerate.
    bool gave_up = false;
};

/// Discards rows of V that can never enter a top-k support of V c for any
/// unit c, scanning rows by decreasing norm and stopping at the first row
/// whose norm falls below every boundary intersection amplitude.
EliminationResult eliminate_features(const LowRankFactor& factor, Index k);

/// Maps a support over the reduced rows back to original indices.
Support lift_support(const EliminationResult& result, const Support& reduced_support);

}  // namespace spanpca
