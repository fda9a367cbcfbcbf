#include "spanpca/experiments.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace spanpca;

TEST_CASE("spiked model construction") {
    const auto model = make_spiked_model(60, 5);
    const Matrix sigma = model.covariance();
    CHECK((sigma - sigma.transpose()).norm() == 0.0);
    CHECK((sigma * model.v1 - 400.0 * model.v1).norm() <= 1e-9);
    CHECK((sigma * model.v2 - 300.0 * model.v2).norm() <= 1e-9);
    CHECK(sigma.trace() == doctest::Approx(400 + 300 + 58));
    const Vector lambda = testutil::descending_eigenvalues(sigma);
    CHECK(std::abs(lambda(0) - 400) <= 1e-9);
    CHECK(std::abs(lambda(1) - 300) <= 1e-9);
    for (Index i = 2; i < 60; ++i) CHECK(std::abs(lambda(i) - 1) <= 1e-9);
    // diagonal on the first support: 1 + 399 / 10
    CHECK(sigma.diagonal().maxCoeff() == doctest::Approx(40.9));

    CHECK(model.support1.size() == 10);
    CHECK(model.support2.size() == 10);
    for (Index i : model.support1)
        CHECK(std::find(model.support2.begin(), model.support2.end(), i) == model.support2.end());
    CHECK(model.v1.norm() == doctest::Approx(1.0));

    const Matrix q = model.completion_basis();
    CHECK(q.cols() == 58);
    CHECK((q.transpose() * q - Matrix::Identity(58, 58)).norm() <= 1e-10);
    CHECK((q.transpose() * model.v1).norm() <= 1e-10);
    CHECK((q.transpose() * model.v2).norm() <= 1e-10);
    CHECK_THROWS_AS(make_spiked_model(20, 1), std::invalid_argument);
}

TEST_CASE("Gaussian samples") {
    const auto model = make_spiked_model(50, 6);
    const auto a = sample_gaussian(model, 30, 9);
    const auto b = sample_gaussian(model, 30, 9);
    CHECK(Matrix(a.values) == Matrix(b.values));
    CHECK(a.covariance_scale == doctest::Approx(1.0 / 30));

    const auto many = sample_gaussian(model, 10000, 10);
    const Matrix x(many.values);
    const double mean_sq = x.colwise().squaredNorm().mean();
    CHECK(mean_sq == doctest::Approx(model.covariance().trace()).epsilon(0.05));
}

TEST_CASE("recovery experiment schema and determinism") {
    RecoveryConfig cfg;
    cfg.n = 100;
    cfg.m = 40;
    cfg.trials = 6;
    cfg.seed = 3;
    cfg.tpower_iters = 200;
    const auto a = recovery_experiment(cfg);
    const auto b = recovery_experiment(cfg);
    REQUIRE(a.size() == 3);
    CHECK(a[0].method == "thresholding");
    CHECK(a[1].method == "tpower");
    CHECK(a[2].method == "spannogram-d2");
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].successes == b[i].successes);
        CHECK(a[i].p_rec == static_cast<double>(a[i].successes) / 6.0);
        CHECK(a[i].mean_ratio_lower == b[i].mean_ratio_lower);
    }
    CHECK(parse_method("tpower") == RecoveryMethod::TPower);
    CHECK_THROWS_AS(parse_method("pca"), std::invalid_argument);
}

TEST_CASE("power-law fit") {
    Vector exact(40);
    for (Index i = 0; i < 40; ++i) exact(i) = 7.0 * std::pow(i + 1.0, -1.5);
    const auto fit = fit_power_law(exact, 1, 40);
    CHECK(fit.c == doctest::Approx(7.0).epsilon(1e-6));
    CHECK(fit.alpha == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));

    const auto flat = fit_power_law(Vector::Constant(20, 2.0), 1, 20);
    CHECK(std::abs(flat.alpha) < 1e-12);

    const auto model = make_spiked_model(500, 1);
    Vector spiked = Vector::Ones(500);
    spiked(0) = 400;
    spiked(1) = 300;
    CHECK(std::abs(fit_power_law(spiked, 3, 500).alpha) < 1e-12);
    CHECK(fit_power_law(spiked, 1, 500).alpha > 0.1);

    Vector holes = exact;
    holes(5) = 0.0;
    const auto skipped = fit_power_law(holes, 1, 40);
    CHECK(skipped.points_excluded == 1);
    CHECK(skipped.points_used == 39);
    CHECK(skipped.alpha == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("bound curve") {
    std::mt19937_64 rng(81);
    const Matrix low = testutil::random_psd(12, 3, rng);
    const auto rows = bound_curve(SymmetricMatrixView::dense(low), 4, 5);
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows)
        if (r.d >= 3) CHECK(r.bound.epsilon_d == 0.0);

    const Matrix full = testutil::random_psd(15, 15, rng);
    const auto curve = bound_curve(SymmetricMatrixView::dense(full), 3, 6);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].bound.epsilon_d <= curve[i - 1].bound.epsilon_d);
    CHECK_THROWS_AS(bound_curve(SymmetricMatrixView::dense(full), 3, 15), std::invalid_argument);
}

TEST_CASE("synthetic corpus") {
    const auto data = synthetic_corpus(200, 500, 5, 1.0, 2);
    CHECK(data.features() == 200);
    CHECK(data.samples() == 500);
    const Matrix s(data.values);
    CHECK((s.array() == 0.0 || s.array() == 1.0).all());
    CHECK(s.colwise().sum().maxCoeff() <= 5.0);
    // word 0 is the most frequent
    const Vector freq = s.rowwise().sum();
    Index top = 0;
    freq.maxCoeff(&top);
    CHECK(top == 0);
}
