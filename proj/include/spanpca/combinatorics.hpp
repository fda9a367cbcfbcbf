#pragma once

#include "spanpca/common.hpp"

#include <cstdint>
#include <limits>

namespace spanpca {

/// C(n, r), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
    if (r > n) return 0;
    if (r > n - r) r = n - r;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= r; ++i) {
        const std::uint64_t num = n - r + i;
        // result * num / i is exact at every step; guard the multiply
        if (result > std::numeric_limits<std::uint64_t>::max() / num)
            return std::numeric_limits<std::uint64_t>::max();
        result = result * num / i;
    }
    return result;
}

/// Advance `comb` (strictly increasing, values in [0, n)) to the next
/// combination in lexicographic order. Returns false after the last one.
inline bool next_combination(std::vector<Index>& comb, Index n) {
    const Index r = static_cast<Index>(comb.size());
    Index i = r - 1;
    while (i >= 0 && comb[i] == n - r + i) --i;
    if (i < 0) return false;
    ++comb[i];
    for (Index j = i + 1; j < r; ++j) comb[j] = comb[j - 1] + 1;
    return true;
}

/// Calls fn(comb) for every r-subset of [0, n) in lexicographic order.
template <class Fn>
void for_each_combination(Index n, Index r, Fn&& fn) {
    if (r < 0 || r > n) return;
    std::vector<Index> comb(static_cast<std::size_t>(r));
    for (Index i = 0; i < r; ++i) comb[i] = i;
    do {
        fn(static_cast<const std::vector<Index>&>(comb));
    } while (r > 0 && next_combination(comb, n));
}

}  // namespace spanpca
