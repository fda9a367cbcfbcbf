#include "spanpca/solver.hpp"

#include "spanpca/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spanpca {

BoundReport approximation_bound(std::span<const double> spectrum, Index d, double lambda_1_diag,
                                Index n, Index k) {
    if (d < 1) throw std::invalid_argument("approximation_bound: d must be >= 1");
    if (static_cast<Index>(spectrum.size()) < d + 1)
        throw std::invalid_argument("approximation_bound: need the first d+1 eigenvalues");
    if (k < 1 || k > n) throw std::invalid_argument("approximation_bound: k out of range");
    if (lambda_1_diag < 0.0) throw std::invalid_argument("approximation_bound: negative diagonal");

    BoundReport b;
    b.lambda_1 = std::max(0.0, spectrum[0]);
    b.lambda_d_plus_1 = std::max(0.0, spectrum[static_cast<std::size_t>(d)]);
    b.lambda_1_diag = lambda_1_diag;
    if (b.lambda_1 <= 0.0 || lambda_1_diag <= 0.0 || b.lambda_d_plus_1 == 0.0) {
        // zero matrix or exact rank <= d: nothing is lost
        b.epsilon_d = 0.0;
        b.ratio_lower = 1.0;
        return b;
    }
    b.term_spectral = static_cast<double>(n) / static_cast<double>(k) * b.lambda_d_plus_1 / b.lambda_1;
    b.term_diagonal = b.lambda_d_plus_1 / lambda_1_diag;
    b.epsilon_d = std::min(b.term_spectral, b.term_diagonal);
    b.ratio_lower = std::clamp(1.0 - b.epsilon_d, 0.0, 1.0);
    return b;
}

RankPlan required_rank_for_accuracy(double alpha, double epsilon, double delta) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0,1)");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in (0,1]");
    const double target = epsilon * delta;
    auto meets = [&](double d) { return std::pow(d + 1.0, -alpha) <= target; };
    double d = std::max(1.0, std::ceil(std::pow(target, -1.0 / alpha)) - 1.0);
    // the closed form can be off by one in floating point
    while (d > 1.0 && meets(d - 1.0)) d -= 1.0;
    while (!meets(d)) d += 1.0;
    RankPlan plan;
    plan.d = static_cast<Index>(d);
    plan.exceeds_cap = plan.d > kMaxRank;
    return plan;
}

namespace {

bool resolve_nonneg(const SymmetricMatrixView& a, NonnegMode mode) {
    switch (mode) {
        case NonnegMode::Off:
            return false;
        case NonnegMode::On:
            if (a.is_dense() && !a.is_entrywise_nonnegative())
                throw std::invalid_argument("nonnegative mode requested for a matrix with negative entries");
            return true;
        case NonnegMode::Auto:
        default:
            return a.is_entrywise_nonnegative();
    }
}

}  // namespace

SparsePrincipalComponent sparse_pca(const SymmetricMatrixView& a, Index k, Index d,
                                    const SolveOptions& options) {
    const Index n = a.dim();
    if (k < 1 || k > n) throw std::invalid_argument("sparsity k must be in [1, n]");
    if (d < 1 || d > kMaxRank) throw std::invalid_argument("rank d must be in [1, 6]");
    if (d > n) throw std::invalid_argument("rank d exceeds the dimension");

    SparsePrincipalComponent pc;
    pc.nonnegative_mode = resolve_nonneg(a, options.nonneg);

    const EigenPairs pairs = top_eigenpairs(a, std::min(d + 1, n));
    const Index d_eff = std::min(d, pairs.count());
    std::vector<double> spectrum(static_cast<std::size_t>(d_eff + 1), 0.0);
    for (Index i = 0; i < std::min<Index>(d_eff + 1, pairs.count()); ++i) spectrum[i] = pairs.values(i);
    const double diag_max = std::max(0.0, a.diagonal().maxCoeff());

    if (d_eff == 0) {
        // zero matrix
        pc.support.resize(static_cast<std::size_t>(k));
        std::iota(pc.support.begin(), pc.support.end(), Index{0});
        pc.loadings = Vector::Unit(n, 0);
        pc.value = 0.0;
        pc.rank_used = 0;
        return pc;
    }
    pc.rank_used = d_eff;
    pc.bound = approximation_bound(spectrum, d_eff, diag_max, n, k);

    EigenPairs leading;
    leading.values = pairs.values.head(d_eff);
    leading.vectors = pairs.vectors.leftCols(d_eff);
    const LowRankFactor factor = make_low_rank_factor(leading, pc.nonnegative_mode);

    std::vector<Support> supports;
    if (options.eliminate && d_eff >= 2) {
        const EliminationResult elim = eliminate_features(factor, k);
        pc.retained_features = elim.retained.size();
        CandidateSupportSet cands = enumerate_candidates(elim.reduced, k, options.seed);
        pc.perturbed = cands.perturbed;
        supports.reserve(cands.size());
        for (const auto& s : cands.supports) supports.push_back(lift_support(elim, s));
    } else {
        pc.retained_features = static_cast<std::size_t>(n);
        CandidateSupportSet cands = enumerate_candidates(factor, k, options.seed);
        pc.perturbed = cands.perturbed;
        supports = std::move(cands.supports);
    }
    pc.candidate_count = supports.size();

    std::vector<double> values(supports.size());
    parallel_chunks(supports.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) values[i] = max_eigenvalue(a.submatrix(supports[i]));
    });
    const std::size_t best = select_best(values, supports);
    pc.support = supports[best];
    auto [value, x] = leading_eigenpair_on_support(a, pc.support);
    pc.value = value;
    pc.loadings = std::move(x);
    return pc;
}

SymmetricMatrixView deflate_projection(const SymmetricMatrixView& a, const Vector& x) {
    if (x.size() != a.dim()) throw std::invalid_argument("deflation vector has wrong length");
    if (std::abs(x.norm() - 1.0) > 1e-8) throw std::invalid_argument("deflation vector must be unit norm");
    return a.project_out(x);
}

DataMatrix deflate_strip(const DataMatrix& s, std::span<const Index> support) {
    Vector keep = Vector::Ones(s.features());
    for (Index i : support) {
        if (i < 0 || i >= s.features()) throw std::out_of_range("strip index out of range");
        keep(i) = 0.0;
    }
    DataMatrix out;
    out.covariance_scale = s.covariance_scale;
    out.values = keep.asDiagonal() * s.values;
    out.values.prune(0.0);
    out.values.makeCompressed();
    return out;
}

namespace {

DataMatrix select_rows(const DataMatrix& s, const std::vector<Index>& rows) {
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (SparseRows::InnerIterator it(s.values, rows[r]); it; ++it)
            triplets.emplace_back(static_cast<Index>(r), it.col(), it.value());
    DataMatrix out;
    out.covariance_scale = s.covariance_scale;
    out.values.resize(static_cast<Index>(rows.size()), s.samples());
    out.values.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

}  // namespace

MultiComponentResult multi_component(const MatrixSource& source, Index k, Index components,
                                     Index d, Deflation deflation, const SolveOptions& options) {
    if (components < 1) throw std::invalid_argument("component count must be >= 1");
    const SymmetricMatrixView original = std::holds_alternative<DataMatrix>(source)
                                             ? SymmetricMatrixView::covariance(std::get<DataMatrix>(source))
                                             : std::get<SymmetricMatrixView>(source);
    const Index n = original.dim();

    MultiComponentResult out;
    out.leading_eigenvalues = leading_eigenvalues(original, std::min(components, n));

    if (deflation == Deflation::Projection) {
        SymmetricMatrixView current = original;
        for (Index l = 0; l < components; ++l) {
            SparsePrincipalComponent pc = sparse_pca(current, k, d, options);
            if (l + 1 < components) current = deflate_projection(current, pc.loadings);
            out.components.push_back(std::move(pc));
        }
    } else {
        if (!std::holds_alternative<DataMatrix>(source))
            throw std::invalid_argument("strip deflation needs the data matrix");
        if (components * k > n) throw std::invalid_argument("strip deflation needs L*k <= n");
        DataMatrix data = std::get<DataMatrix>(source);
        std::vector<char> stripped(static_cast<std::size_t>(n), 0);
        for (Index l = 0; l < components; ++l) {
            // solve over the surviving features only, so supports stay disjoint
            std::vector<Index> active;
            for (Index i = 0; i < n; ++i)
                if (!stripped[i]) active.push_back(i);
            const DataMatrix sub = select_rows(data, active);
            const Index d_here = std::min<Index>(d, static_cast<Index>(active.size()));
            SparsePrincipalComponent pc = sparse_pca(SymmetricMatrixView::covariance(sub), k, d_here, options);
            Support lifted;
            for (Index i : pc.support) lifted.push_back(active[i]);
            Vector loadings = Vector::Zero(n);
            for (std::size_t i = 0; i < active.size(); ++i) loadings(active[i]) = pc.loadings(static_cast<Index>(i));
            pc.support = std::move(lifted);
            pc.loadings = std::move(loadings);
            for (Index i : pc.support) stripped[i] = 1;
            data = deflate_strip(data, pc.support);
            out.components.push_back(std::move(pc));
        }
    }

    double explained = 0.0;
    for (const auto& pc : out.components) explained += quadratic_form(original, pc.loadings);
    const double total = out.leading_eigenvalues.sum();
    out.explained_variance_ratio = total > 0.0 ? explained / total : 0.0;
    return out;
}

}  // namespace spanpca
