#include "spanpca/experiments.hpp"

#include "spanpca/parallel.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

namespace spanpca {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Matrix SpikedModel::covariance() const {
    Matrix sigma = Matrix::Identity(n, n);
    sigma.noalias() += (lambda1 - 1.0) * v1 * v1.transpose();
    sigma.noalias() += (lambda2 - 1.0) * v2 * v2.transpose();
    return sigma;
}

Matrix SpikedModel::completion_basis() const {
    Matrix planted(n, 2);
    planted.col(0) = v1;
    planted.col(1) = v2;
    Eigen::HouseholderQR<Matrix> qr(planted);
    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return q.rightCols(n - 2);
}

SpikedModel make_spiked_model(Index n, std::uint64_t seed) {
    if (n < 2 * kPlantedSparsity + 1) throw std::invalid_argument("spiked model needs n >= 21");
    std::mt19937_64 rng(seed);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    SpikedModel model;
    model.n = n;
    model.support1.assign(perm.begin(), perm.begin() + kPlantedSparsity);
    model.support2.assign(perm.begin() + kPlantedSparsity, perm.begin() + 2 * kPlantedSparsity);
    std::sort(model.support1.begin(), model.support1.end());
    std::sort(model.support2.begin(), model.support2.end());

    const double magnitude = 1.0 / std::sqrt(static_cast<double>(kPlantedSparsity));
    model.v1 = Vector::Zero(n);
    model.v2 = Vector::Zero(n);
    for (Index i : model.support1) model.v1(i) = (rng() & 1U) ? magnitude : -magnitude;
    for (Index i : model.support2) model.v2(i) = (rng() & 1U) ? magnitude : -magnitude;
    return model;
}

DataMatrix sample_gaussian(const SpikedModel& model, Index m, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("need at least one sample");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix x(model.n, m);
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < model.n; ++i) x(i, j) = normal(rng);
    // Sigma^{1/2} z = z + (sqrt(l1)-1) v1 v1^T z + (sqrt(l2)-1) v2 v2^T z
    const Eigen::RowVectorXd p1 = model.v1.transpose() * x;
    const Eigen::RowVectorXd p2 = model.v2.transpose() * x;
    x.noalias() += (std::sqrt(model.lambda1) - 1.0) * model.v1 * p1;
    x.noalias() += (std::sqrt(model.lambda2) - 1.0) * model.v2 * p2;

    DataMatrix data;
    data.values = x.sparseView();
    data.values.makeCompressed();
    data.covariance_scale = 1.0 / static_cast<double>(m);
    return data;
}

std::string method_name(RecoveryMethod method) {
    switch (method) {
        case RecoveryMethod::Thresholding: return "thresholding";
        case RecoveryMethod::TPower: return "tpower";
        case RecoveryMethod::Spannogram2: return "spannogram-d2";
    }
    return "unknown";
}

RecoveryMethod parse_method(const std::string& name) {
    if (name == "thresholding") return RecoveryMethod::Thresholding;
    if (name == "tpower") return RecoveryMethod::TPower;
    if (name == "spannogram-d2") return RecoveryMethod::Spannogram2;
    throw std::invalid_argument("unknown method '" + name + "'");
}

namespace {

struct Estimate {
    Support support;
    Vector loadings;
    double ratio_lower = 0.0;
};

Estimate estimate(RecoveryMethod method, const SymmetricMatrixView& a, Index k, Index tpower_iters) {
    switch (method) {
        case RecoveryMethod::Thresholding: {
            auto r = thresholding_pc(a, k);
            return {std::move(r.support), std::move(r.loadings), 0.0};
        }
        case RecoveryMethod::TPower: {
            auto r = truncated_power_method(a, k, tpower_iters);
            return {std::move(r.support), std::move(r.loadings), 0.0};
        }
        case RecoveryMethod::Spannogram2: {
            auto r = sparse_pca(a, k, 2);
            return {std::move(r.support), std::move(r.loadings), r.bound.ratio_lower};
        }
    }
    throw std::logic_error("unhandled method");
}

}  // namespace

std::vector<RecoveryRow> recovery_experiment(const RecoveryConfig& config) {
    if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
    const std::size_t methods = config.methods.size();
    const std::size_t trials = static_cast<std::size_t>(config.trials);
    std::vector<char> success(trials * methods, 0);
    std::vector<double> ratio(trials * methods, 0.0);

    parallel_chunks(trials, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const std::uint64_t trial_seed = derive_seed(config.seed, t);
            const SpikedModel model = make_spiked_model(config.n, derive_seed(trial_seed, 0));
            const DataMatrix data = sample_gaussian(model, config.m, derive_seed(trial_seed, 1));
            const SymmetricMatrixView a = SymmetricMatrixView::covariance(data);
            for (std::size_t mi = 0; mi < methods; ++mi) {
                const Estimate first = estimate(config.methods[mi], a, config.k, config.tpower_iters);
                const SymmetricMatrixView deflated = deflate_projection(a, first.loadings);
                const Estimate second = estimate(config.methods[mi], deflated, config.k, config.tpower_iters);
                const bool hit = (first.support == model.support1 && second.support == model.support2) ||
                                 (first.support == model.support2 && second.support == model.support1);
                success[t * methods + mi] = hit ? 1 : 0;
                ratio[t * methods + mi] = first.ratio_lower;
            }
        }
    });

    std::vector<RecoveryRow> rows;
    for (std::size_t mi = 0; mi < methods; ++mi) {
        RecoveryRow row;
        row.method = method_name(config.methods[mi]);
        row.n = config.n;
        row.m = config.m;
        row.k = config.k;
        row.trials = config.trials;
        double ratio_sum = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            row.successes += success[t * methods + mi];
            ratio_sum += ratio[t * methods + mi];
        }
        row.p_rec = static_cast<double>(row.successes) / static_cast<double>(row.trials);
        row.mean_ratio_lower = ratio_sum / static_cast<double>(trials);
        rows.push_back(std::move(row));
    }
    return rows;
}

PowerLawFit fit_power_law(const Vector& eigenvalues, Index first, Index last) {
    if (first < 1 || last < first) throw std::invalid_argument("invalid fit index range");
    last = std::min<Index>(last, eigenvalues.size());
    std::vector<double> xs, ys;
    PowerLawFit fit;
    for (Index i = first; i <= last; ++i) {
        const double lambda = eigenvalues(i - 1);
        if (!(lambda > 0.0)) {
            ++fit.points_excluded;
            continue;
        }
        xs.push_back(std::log(static_cast<double>(i)));
        ys.push_back(std::log(lambda));
    }
    if (fit.points_excluded > 0)
        std::cerr << "warning: " << fit.points_excluded
                  << " nonpositive eigenvalues excluded from the power-law fit\n";
    if (xs.size() < 3) throw std::invalid_argument("power-law fit needs >= 3 positive eigenvalues");

    const double count = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ss_res += r * r;
    }
    fit.alpha = -slope;
    fit.c = std::exp(intercept);
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.points_used = static_cast<Index>(xs.size());
    return fit;
}

SpectrumReport spectrum_report(const SymmetricMatrixView& a, Index count, Index fit_first,
                               Index fit_last) {
    SpectrumReport report;
    report.eigenvalues = leading_eigenvalues(a, std::min(count, a.dim()));
    report.fit = fit_power_law(report.eigenvalues, fit_first, fit_last);
    report.lambda_1_diag = std::max(0.0, a.diagonal().maxCoeff());
    return report;
}

std::vector<BoundCurveRow> bound_curve(const SymmetricMatrixView& a, Index k, Index d_max) {
    if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
    if (d_max + 1 > a.dim()) throw std::invalid_argument("d_max exceeds the available spectrum");
    const Vector values = leading_eigenvalues(a, d_max + 1);
    const std::vector<double> spectrum(values.data(), values.data() + values.size());
    const double diag_max = std::max(0.0, a.diagonal().maxCoeff());
    std::vector<BoundCurveRow> rows;
    for (Index d = 1; d <= d_max; ++d)
        rows.push_back({d, approximation_bound(spectrum, d, diag_max, a.dim(), k)});
    return rows;
}

DataMatrix synthetic_corpus(Index words, Index documents, Index words_per_doc, double zipf,
                            std::uint64_t seed) {
    if (words < 1 || documents < 1 || words_per_doc < 1)
        throw std::invalid_argument("corpus dimensions must be positive");
    std::vector<double> weights(static_cast<std::size_t>(words));
    for (Index w = 0; w < words; ++w) weights[w] = std::pow(static_cast<double>(w + 1), -zipf);
    std::discrete_distribution<Index> draw(weights.begin(), weights.end());
    std::mt19937_64 rng(seed);

    std::vector<Eigen::Triplet<double>> triplets;
    for (Index doc = 0; doc < documents; ++doc) {
        std::vector<Index> tokens;
        for (Index t = 0; t < words_per_doc; ++t) tokens.push_back(draw(rng));
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (Index w : tokens) triplets.emplace_back(w, doc, 1.0);
    }
    DataMatrix data;
    data.values.resize(words, documents);
    data.values.setFromTriplets(triplets.begin(), triplets.end());
    data.values.makeCompressed();
    return data;
}

}  // namespace spanpca
