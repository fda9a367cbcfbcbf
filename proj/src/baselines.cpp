#include "spanpca/baselines.hpp"

#include "spanpca/combinatorics.hpp"
#include "spanpca/parallel.hpp"
#include "spanpca/spannogram.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace spanpca {

namespace {

void check_k(Index k, Index n) {
    if (k < 1 || k > n) throw std::invalid_argument("sparsity k must be in [1, n]");
}

BaselineResult rescored(std::string method, const SymmetricMatrixView& a, Support support) {
    BaselineResult r;
    r.method = std::move(method);
    auto [value, x] = leading_eigenpair_on_support(a, support);
    r.support = std::move(support);
    r.value = value;
    r.loadings = std::move(x);
    return r;
}

Vector truncate_to_k(const Vector& y, Index k, Support* support) {
    Support s = top_k_by_magnitude(y, k);
    Vector x = Vector::Zero(y.size());
    for (Index i : s) x(i) = y(i);
    if (support) *support = std::move(s);
    return x;
}

}  // namespace

BaselineResult thresholding_pc(const SymmetricMatrixView& a, Index k) {
    check_k(k, a.dim());
    const EigenPairs pairs = top_eigenpairs(a, 1);
    Support s;
    if (pairs.count() == 0) {
        for (Index i = 0; i < k; ++i) s.push_back(i);
    } else {
        s = top_k_by_magnitude(pairs.vectors.col(0), k);
    }
    BaselineResult r = rescored("thresholding", a, std::move(s));
    r.iterations_used = 1;
    return r;
}

BaselineResult truncated_power_method(const SymmetricMatrixView& a, Index k, Index max_iters,
                                      const std::optional<Vector>& init) {
    const Index n = a.dim();
    check_k(k, n);
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");

    Support support;
    Vector x;
    if (init) {
        if (init->size() != n) throw std::invalid_argument("init vector has wrong length");
        x = truncate_to_k(*init, k, &support);
    } else {
        x = truncate_to_k(a.diagonal(), k, &support);
        for (Index i : support) x(i) = 1.0;
    }
    if (x.norm() == 0.0) throw std::invalid_argument("initial vector is zero on its support");
    x.normalize();
    const Vector start = x;

    BaselineResult r;
    r.method = "tpower";
    double value = quadratic_form(a, x);
    r.value_trace.push_back(value);
    Index iter = 0;
    for (; iter < max_iters; ++iter) {
        const Vector y = a.apply(x);
        Support next_support;
        Vector next = truncate_to_k(y, k, &next_support);
        const double norm = next.norm();
        if (norm == 0.0) {
            std::cerr << "warning: truncated power iterate vanished; returning the initial vector\n";
            r.fell_back = true;
            x = start;
            break;
        }
        next /= norm;
        const double next_value = quadratic_form(a, next);
        r.value_trace.push_back(next_value);
        const bool same_support = next_support == support;
        const bool settled =
            std::abs(next_value - value) <= 1e-10 * std::max(std::abs(next_value), 1e-300);
        x = std::move(next);
        support = std::move(next_support);
        value = next_value;
        if (same_support && settled) {
            ++iter;
            break;
        }
    }
    BaselineResult out = rescored("tpower", a, top_k_by_magnitude(x, k));
    out.iterations_used = iter;
    out.value_trace = std::move(r.value_trace);
    out.fell_back = r.fell_back;
    return out;
}

BaselineResult brute_force_oracle(const SymmetricMatrixView& a, Index k) {
    const Index n = a.dim();
    check_k(k, n);
    const std::uint64_t total = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k));
    if (static_cast<double>(total) > kOracleLimit)
        throw std::invalid_argument("exhaustive search exceeds the C(n,k) <= 1e6 guard");

    const Matrix dense = a.to_dense();
    // partition over the first index; each block keeps its lexicographically first maximum
    struct Best {
        double value = -std::numeric_limits<double>::infinity();
        Support support;
    };
    std::vector<Best> per_first(static_cast<std::size_t>(n - k + 1));
    parallel_chunks(per_first.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t f = begin; f < end; ++f) {
            const Index first = static_cast<Index>(f);
            Best& best = per_first[f];
            Support s(static_cast<std::size_t>(k));
            for_each_combination(n - first - 1, k - 1, [&](const std::vector<Index>& tail) {
                s[0] = first;
                for (Index j = 0; j + 1 < k; ++j) s[j + 1] = first + 1 + tail[j];
                Matrix sub(k, k);
                for (Index p = 0; p < k; ++p)
                    for (Index q = 0; q < k; ++q) sub(p, q) = dense(s[p], s[q]);
                const double value = max_eigenvalue(sub);
                if (value > best.value) {
                    best.value = value;
                    best.support = s;
                }
            });
        }
    });
    std::vector<double> values;
    std::vector<Support> supports;
    for (auto& b : per_first) {
        values.push_back(b.value);
        supports.push_back(std::move(b.support));
    }
    const std::size_t best = select_best(values, supports);
    BaselineResult r = rescored("oracle", a, supports[best]);
    r.iterations_used = static_cast<Index>(total);
    return r;
}

}  // namespace spanpca
