#include "spanpca/spannogram.hpp"

#include "spanpca/combinatorics.hpp"
#include "spanpca/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>

namespace spanpca {

double LowRankFactor::lambda_max() const {
    if (v.size() == 0) return 0.0;
    return max_eigenvalue(v.transpose() * v);
}

LowRankFactor make_low_rank_factor(const EigenPairs& pairs, bool nonnegative) {
    LowRankFactor f;
    f.v = pairs.vectors;
    for (Index i = 0; i < pairs.count(); ++i)
        f.v.col(i) *= std::sqrt(std::max(0.0, pairs.values(i)));
    f.nonnegative = nonnegative;
    return f;
}

namespace {

// Orders by value descending, index ascending.
struct ByValueDesc {
    const Vector& w;
    bool operator()(Index a, Index b) const {
        if (w(a) != w(b)) return w(a) > w(b);
        return a < b;
    }
};

void sort_unique(std::vector<Support>& supports) {
    std::sort(supports.begin(), supports.end());
    supports.erase(std::unique(supports.begin(), supports.end()), supports.end());
}

void validate_k(Index k, Index n) {
    if (k < 1) throw std::invalid_argument("sparsity k must be >= 1");
    if (k > n) throw std::invalid_argument("sparsity k exceeds dimension");
}

}  // namespace

Support top_k_by_magnitude(const Vector& v, Index k) {
    validate_k(k, v.size());
    const Vector mag = v.cwiseAbs();
    std::vector<Index> idx(static_cast<std::size_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) idx[i] = i;
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), ByValueDesc{mag});
    Support s(idx.begin(), idx.begin() + k);
    std::sort(s.begin(), s.end());
    return s;
}

CandidateSupportSet rank1_candidates(const Vector& v, Index k, bool nonnegative) {
    validate_k(k, v.size());
    CandidateSupportSet out;
    out.k = k;
    if (!nonnegative) {
        out.supports.push_back(top_k_by_magnitude(v, k));
        return out;
    }
    for (const Vector& w : {Vector(v), Vector(-v)}) {
        std::vector<Index> idx(static_cast<std::size_t>(w.size()));
        for (Index i = 0; i < w.size(); ++i) idx[i] = i;
        std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), ByValueDesc{w});
        Support s(idx.begin(), idx.begin() + k);
        std::sort(s.begin(), s.end());
        out.supports.push_back(std::move(s));
    }
    sort_unique(out.supports);
    return out;
}

Vector intersection_vector(const Matrix& v, std::span<const Index> tuple,
                           std::span<const int> signs) {
    const Index d = v.cols();
    if (static_cast<Index>(tuple.size()) != d)
        throw std::invalid_argument("intersection tuple must have d indices");
    if (static_cast<Index>(signs.size()) != d - 1)
        throw std::invalid_argument("intersection needs d-1 signs");
    if (d == 1) return Vector::Ones(1);

    Matrix system(d - 1, d);
    double scale = 0.0;
    for (Index t : tuple) scale = std::max(scale, v.row(t).norm());
    for (Index j = 0; j + 1 < d; ++j)
        system.row(j) = v.row(tuple[0]) - static_cast<double>(signs[j]) * v.row(tuple[j + 1]);

    Eigen::JacobiSVD<Matrix> svd(system, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double largest = sv(0);
    const double smallest = sv(d - 2);
    if (largest <= 1e-13 * scale || smallest < 1e-10 * largest)
        throw DegenerateIntersection("curve intersection system is rank deficient");

    Vector c = svd.matrixV().col(d - 1);
    c.normalize();
    for (Index i = 0; i < d; ++i) {
        if (std::abs(c(i)) > 1e-14) {
            if (c(i) < 0.0) c = -c;
            break;
        }
    }
    return c;
}

std::vector<Support> expand_tie_supports(const Vector& w, std::span<const Index> tuple, Index k) {
    const Index n = w.size();
    const Index d = static_cast<Index>(tuple.size());
    validate_k(k, n);
    if (d < 1 || d > n) throw std::invalid_argument("tie tuple size out of range");

    std::vector<char> in_tuple(static_cast<std::size_t>(n), 0);
    double tied = 0.0;
    for (Index t : tuple) {
        if (t < 0 || t >= n) throw std::out_of_range("tie index out of range");
        if (in_tuple[t]) throw std::invalid_argument("tie indices must be distinct");
        in_tuple[t] = 1;
        tied += w(t);
    }
    tied /= static_cast<double>(d);
    const double scale = std::max(w.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    for (Index t : tuple)
        if (std::abs(w(t) - tied) > 1e-8 * scale)
            throw std::invalid_argument("tuple entries are not tied");

    std::vector<Index> rest;
    rest.reserve(static_cast<std::size_t>(n - d));
    Index above = 0;
    for (Index i = 0; i < n; ++i) {
        if (in_tuple[i]) continue;
        rest.push_back(i);
        if (w(i) > tied) ++above;
    }
    const Index r = std::clamp<Index>(k - above, 0, d);
    const Index from_rest = k - r;
    std::partial_sort(rest.begin(), rest.begin() + from_rest, rest.end(), ByValueDesc{w});
    const Support base(rest.begin(), rest.begin() + from_rest);

    std::vector<Support> out;
    std::vector<Index> sorted_tuple(tuple.begin(), tuple.end());
    std::sort(sorted_tuple.begin(), sorted_tuple.end());
    for_each_combination(d, r, [&](const std::vector<Index>& pick) {
        Support s = base;
        for (Index p : pick) s.push_back(sorted_tuple[p]);
        std::sort(s.begin(), s.end());
        out.push_back(std::move(s));
    });
    return out;
}

double perturbation_epsilon(double lambda1, Index n, Index d) {
    if (n < 2) throw std::invalid_argument("perturbation needs n >= 2");
    const double nd = static_cast<double>(n) * static_cast<double>(d);
    const double theory = 1.0 / (std::sqrt(lambda1 * nd) * std::log(static_cast<double>(n)));
    return std::min(theory, 1e-8 * std::sqrt(lambda1));
}

LowRankFactor perturb(const LowRankFactor& factor, std::uint64_t seed) {
    const Index n = factor.rows();
    const Index d = factor.rank();
    const double eps = perturbation_epsilon(factor.lambda_max(), n, d);
    std::mt19937_64 rng(seed);
    LowRankFactor out = factor;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
            out.v(i, j) += eps * (2.0 * u - 1.0);
        }
    }
    return out;
}

namespace {

std::vector<std::vector<int>> sign_patterns(Index d, bool nonnegative) {
    std::vector<std::vector<int>> patterns;
    const Index free = d - 1;
    const std::uint64_t count = nonnegative ? 1 : (std::uint64_t{1} << free);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        std::vector<int> b(static_cast<std::size_t>(free));
        for (Index j = 0; j < free; ++j) b[j] = (mask >> j) & 1U ? -1 : 1;
        patterns.push_back(std::move(b));
    }
    return patterns;
}

CandidateSupportSet enumerate_once(const LowRankFactor& factor, Index k) {
    const Index n = factor.rows();
    const Index d = factor.rank();
    const auto patterns = sign_patterns(d, factor.nonnegative);

    CandidateSupportSet out;
    out.k = k;
    out.systems_solved = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(d)) *
                         patterns.size();

    std::mutex merge_mutex;
    std::vector<Support> merged;
    const std::size_t first_count = static_cast<std::size_t>(n - d + 1);

    parallel_chunks(first_count, [&](std::size_t begin, std::size_t end) {
        std::vector<Support> local;
        std::vector<Index> tuple(static_cast<std::size_t>(d));
        for (std::size_t first = begin; first < end; ++first) {
            const Index i1 = static_cast<Index>(first);
            // remaining d-1 indices drawn from (i1, n)
            for_each_combination(n - i1 - 1, d - 1, [&](const std::vector<Index>& tail) {
                tuple[0] = i1;
                for (Index j = 0; j + 1 < d; ++j) tuple[j + 1] = i1 + 1 + tail[j];
                for (const auto& signs : patterns) {
                    const Vector c = intersection_vector(factor.v, tuple, signs);
                    const Vector vc = factor.v * c;
                    if (factor.nonnegative) {
                        for (const Vector& w : {vc, Vector(-vc)}) {
                            auto s = expand_tie_supports(w, tuple, k);
                            local.insert(local.end(), s.begin(), s.end());
                        }
                    } else {
                        auto s = expand_tie_supports(vc.cwiseAbs(), tuple, k);
                        local.insert(local.end(), s.begin(), s.end());
                    }
                }
            });
            if (local.size() > 4096) sort_unique(local);
        }
        sort_unique(local);
        std::lock_guard lock(merge_mutex);
        merged.insert(merged.end(), local.begin(), local.end());
    });
    sort_unique(merged);
    out.supports = std::move(merged);
    return out;
}

}  // namespace

CandidateSupportSet enumerate_candidates(const LowRankFactor& factor, Index k, std::uint64_t seed) {
    const Index n = factor.rows();
    const Index d = factor.rank();
    validate_k(k, n);
    if (d < 1) throw std::invalid_argument("rank d must be >= 1");
    if (d > kMaxRank) throw std::invalid_argument("rank d exceeds the supported maximum of 6");
    if (d > n) throw std::invalid_argument("rank d exceeds the number of rows");
    if (d == 1) {
        auto out = rank1_candidates(factor.v.col(0), k, factor.nonnegative);
        out.systems_solved = static_cast<std::uint64_t>(n);
        return out;
    }
    try {
        return enumerate_once(factor, k);
    } catch (const DegenerateIntersection&) {
        CandidateSupportSet out = enumerate_once(perturb(factor, seed), k);
        out.perturbed = true;
        return out;
    }
}

std::size_t select_best(std::span<const double> values, std::span<const Support> supports) {
    if (values.empty()) throw std::invalid_argument("select_best: no candidates");
    const double top = *std::max_element(values.begin(), values.end());
    const double tol = 1e-12 * std::max(std::abs(top), std::numeric_limits<double>::min());
    std::size_t best = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < top - tol) continue;
        if (best == values.size() || supports[i] < supports[best]) best = i;
    }
    return best;
}

RankDSolution solve_rank_d_exact(const LowRankFactor& factor, Index k, std::uint64_t seed) {
    RankDSolution out;
    out.candidates = enumerate_candidates(factor, k, seed);
    const auto& supports = out.candidates.supports;
    const Index d = factor.rank();

    auto score = [&](const Support& s, Vector* x) {
        Matrix rows(static_cast<Index>(s.size()), d);
        for (std::size_t a = 0; a < s.size(); ++a) rows.row(static_cast<Index>(a)) = factor.v.row(s[a]);
        // x_I is proportional to V_I u with u the top eigenvector of V_I^T V_I
        Eigen::SelfAdjointEigenSolver<Matrix> solver(rows.transpose() * rows);
        const double value = solver.eigenvalues()(d - 1);
        if (x) {
            Vector local = rows * solver.eigenvectors().col(d - 1);
            const double norm = local.norm();
            if (norm > 0.0) local /= norm;
            else local = Vector::Unit(local.size(), 0);
            normalize_sign(local);
            *x = Vector::Zero(factor.rows());
            for (std::size_t a = 0; a < s.size(); ++a) (*x)(s[a]) = local(static_cast<Index>(a));
        }
        return value;
    };

    std::vector<double> values(supports.size());
    parallel_chunks(supports.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) values[i] = score(supports[i], nullptr);
    });
    const std::size_t best = select_best(values, supports);
    out.support = supports[best];
    out.value = score(out.support, &out.x);
    return out;
}

}  // namespace spanpca
