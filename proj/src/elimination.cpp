#include "spanpca/elimination.hpp"

#include "spanpca/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spanpca {

namespace {

struct IntersectionPoint {
    Vector c;
    double amplitude;
    std::vector<Index> tuple;  // original row ids
    Index above;               // working curves strictly above the amplitude
};

bool strictly_above(double value, double amplitude) {
    // Ambiguous comparisons count as "not above", which only lowers the boundary.
    return value > amplitude * (1.0 + 1e-9) + std::numeric_limits<double>::min();
}

EliminationResult keep_prefix(const LowRankFactor& factor, const std::vector<Index>& order,
                              std::size_t length) {
    EliminationResult out;
    out.retained.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(length));
    std::sort(out.retained.begin(), out.retained.end());
    out.reduced.nonnegative = factor.nonnegative;
    out.reduced.v.resize(static_cast<Index>(length), factor.rank());
    for (std::size_t i = 0; i < length; ++i)
        out.reduced.v.row(static_cast<Index>(i)) = factor.v.row(out.retained[i]);
    return out;
}

}  // namespace

EliminationResult eliminate_features(const LowRankFactor& factor, Index k) {
    const Index n = factor.rows();
    const Index d = factor.rank();
    if (k < 1 || k > n) throw std::invalid_argument("sparsity k out of range");
    if (d < 1) throw std::invalid_argument("rank d must be >= 1");

    const Vector norms = factor.v.rowwise().norm();
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return norms(a) > norms(b); });
    std::vector<Index> position(static_cast<std::size_t>(n));
    for (Index p = 0; p < n; ++p) position[order[p]] = p;

    if (d == 1) {
        // Only the rank-1 candidates can ever be selected.
        std::size_t length = 0;
        for (const auto& s : rank1_candidates(factor.v.col(0), k, factor.nonnegative).supports)
            for (Index i : s) length = std::max(length, static_cast<std::size_t>(position[i] + 1));
        return keep_prefix(factor, order, length);
    }
    if (k + d >= n) return keep_prefix(factor, order, static_cast<std::size_t>(n));

    // All sign patterns regardless of the nonnegativity flag: the unsigned
    // boundary is a superset certificate for the signed enumeration too.
    std::vector<std::vector<int>> patterns;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (d - 1)); ++mask) {
        std::vector<int> b(static_cast<std::size_t>(d - 1));
        for (Index j = 0; j + 1 < d; ++j) b[j] = (mask >> j) & 1U ? -1 : 1;
        patterns.push_back(std::move(b));
    }

    std::vector<Index> working(order.begin(), order.begin() + (k + d));
    std::vector<IntersectionPoint> live;

    auto add_points = [&](const std::vector<Index>& tuple) {
        for (const auto& signs : patterns) {
            IntersectionPoint p;
            p.c = intersection_vector(factor.v, tuple, signs);
            p.amplitude = std::abs(factor.v.row(tuple[0]).dot(p.c));
            p.tuple = tuple;
            p.above = 0;
            for (Index j : working) {
                if (std::find(tuple.begin(), tuple.end(), j) != tuple.end()) continue;
                if (strictly_above(std::abs(factor.v.row(j).dot(p.c)), p.amplitude)) ++p.above;
            }
            if (p.above <= k - 1) live.push_back(std::move(p));
        }
    };

    try {
        std::vector<Index> tuple(static_cast<std::size_t>(d));
        for_each_combination(static_cast<Index>(working.size()), d, [&](const std::vector<Index>& comb) {
            for (Index j = 0; j < d; ++j) tuple[j] = working[comb[j]];
            add_points(tuple);
        });

        for (Index next = k + d; next < n; ++next) {
            double boundary = std::numeric_limits<double>::infinity();
            for (const auto& p : live)
                if (p.above == k - 1) boundary = std::min(boundary, p.amplitude);
            const Index row = order[next];
            // Admit on equality; an empty boundary cannot reject anything.
            if (std::isfinite(boundary) && norms(row) < boundary) {
                EliminationResult out = keep_prefix(factor, order, static_cast<std::size_t>(next));
                for (const auto& p : live)
                    if (p.above == k - 1) out.boundary_amplitudes.push_back(p.amplitude);
                std::sort(out.boundary_amplitudes.begin(), out.boundary_amplitudes.end());
                return out;
            }

            for (auto& p : live)
                if (strictly_above(std::abs(factor.v.row(row).dot(p.c)), p.amplitude)) ++p.above;
            std::erase_if(live, [&](const IntersectionPoint& p) { return p.above > k - 1; });

            const std::vector<Index> previous = working;
            working.push_back(row);
            for_each_combination(static_cast<Index>(previous.size()), d - 1,
                                 [&](const std::vector<Index>& comb) {
                                     tuple[0] = row;
                                     for (Index j = 0; j + 1 < d; ++j) tuple[j + 1] = previous[comb[j]];
                                     add_points(tuple);
                                 });
        }
    } catch (const DegenerateIntersection&) {
        EliminationResult out = keep_prefix(factor, order, static_cast<std::size_t>(n));
        out.gave_up = true;
        return out;
    }

    EliminationResult out = keep_prefix(factor, order, static_cast<std::size_t>(n));
    for (const auto& p : live)
        if (p.above == k - 1) out.boundary_amplitudes.push_back(p.amplitude);
    std::sort(out.boundary_amplitudes.begin(), out.boundary_amplitudes.end());
    return out;
}

Support lift_support(const EliminationResult& result, const Support& reduced_support) {
    Support s;
    s.reserve(reduced_support.size());
    for (Index i : reduced_support) s.push_back(result.retained.at(static_cast<std::size_t>(i)));
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace spanpca
