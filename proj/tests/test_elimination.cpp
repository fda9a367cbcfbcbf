#include "spanpca/elimination.hpp"
#include "spanpca/experiments.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace spanpca;
using testutil::gaussian;

namespace {

LowRankFactor factor_of(const Matrix& v, bool nonneg = false) {
    LowRankFactor f;
    f.v = v;
    f.nonnegative = nonneg;
    return f;
}

// Rows ordered by norm descending, ties by index.
std::vector<Index> norm_order(const Matrix& v) {
    const Vector norms = v.rowwise().norm();
    std::vector<Index> order(static_cast<std::size_t>(v.rows()));
    for (Index i = 0; i < v.rows(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return norms(a) > norms(b); });
    return order;
}

// Factor with a few heavy rows and a light bulk, like a sample covariance
// with sparse planted directions.
Matrix heavy_light(Index n, Index d, Index heavy, std::mt19937_64& rng) {
    Matrix v = 0.05 * gaussian(n, d, rng);
    v.topRows(heavy) = gaussian(heavy, d, rng);
    return v;
}

void check_safety(const Matrix& v, Index k, bool nonneg = false) {
    const auto f = factor_of(v, nonneg);
    const auto reduced = eliminate_features(f, k);
    const auto full = solve_rank_d_exact(f, k);
    const auto small = solve_rank_d_exact(reduced.reduced, k);
    CHECK(std::abs(full.value - small.value) <= 1e-9 * std::max(1.0, full.value));
    CHECK(lift_support(reduced, small.support) == full.support);
    for (Index i : full.support)
        CHECK(std::binary_search(reduced.retained.begin(), reduced.retained.end(), i));

    // retained set is a prefix of the norm ordering
    const auto order = norm_order(v);
    std::vector<Index> prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(reduced.retained.size()));
    std::sort(prefix.begin(), prefix.end());
    CHECK(prefix == reduced.retained);

    // the first discarded row lies below every boundary amplitude
    if (reduced.retained.size() < static_cast<std::size_t>(v.rows())) {
        REQUIRE_FALSE(reduced.boundary_amplitudes.empty());
        const double cut = v.row(order[reduced.retained.size()]).norm();
        CHECK(cut < reduced.boundary_amplitudes.front());
    }
}

}  // namespace

TEST_CASE("one dominant row") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> radius(0.01, 0.1);
    std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
    Matrix v(30, 2);
    for (Index i = 0; i < 30; ++i) {
        const double r = radius(rng), t = angle(rng);
        v.row(i) << r * std::cos(t), r * std::sin(t);
    }
    v.row(7) << 6.0, 8.0;
    const auto r = eliminate_features(factor_of(v), 1);

    // In the plane the intersection of rows a and s*b is orthogonal to a - s*b.
    const auto order = norm_order(v);
    double lowest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            for (double s : {1.0, -1.0}) {
                const Eigen::Vector2d diff = v.row(order[i]) - s * v.row(order[j]);
                const Eigen::Vector2d c = Eigen::Vector2d(-diff(1), diff(0)).normalized();
                const double amp = std::abs(v.row(order[i]).dot(c));
                const int other = 3 - i - j;
                if (std::abs(v.row(order[other]).dot(c)) <= amp) lowest = std::min(lowest, amp);
            }
    REQUIRE(std::isfinite(lowest));
    // the three seed rows are always kept
    for (std::size_t p = 3; p < order.size(); ++p)
        if (v.row(order[p]).norm() < lowest)
            CHECK_FALSE(std::binary_search(r.retained.begin(), r.retained.end(), order[p]));
    CHECK(std::binary_search(r.retained.begin(), r.retained.end(), Index{7}));
    CHECK(r.retained.size() < 30);
    check_safety(v, 1);
}

TEST_CASE("safety on random factors") {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 10; ++trial) check_safety(gaussian(50, 2, rng), 5);
}

TEST_CASE("safety on heavy/light factors") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix v = heavy_light(60, 2, 12, rng);
        check_safety(v, 5);
        const auto r = eliminate_features(factor_of(v), 5);
        CHECK(r.retained.size() < 60);
    }
    for (int trial = 0; trial < 3; ++trial) check_safety(heavy_light(40, 3, 10, rng), 4);
}

TEST_CASE("safety in nonnegative mode") {
    std::mt19937_64 rng(54);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix v = heavy_light(40, 2, 10, rng).cwiseAbs();
        const auto f = factor_of(v, true);
        const auto reduced = eliminate_features(f, 4);
        const auto full = solve_rank_d_exact(factor_of(v, false), 4);
        const auto small = solve_rank_d_exact(reduced.reduced, 4);
        CHECK(std::abs(full.value - small.value) <= 1e-9 * full.value);
    }
}

TEST_CASE("rank-one elimination keeps the candidate prefix") {
    std::mt19937_64 rng(55);
    const Matrix v = gaussian(20, 1, rng);
    const auto r = eliminate_features(factor_of(v), 3);
    CHECK(r.retained.size() == 3);
    CHECK(lift_support(r, {0, 1, 2}) == top_k_by_magnitude(v.col(0), 3));
}

TEST_CASE("elimination is idempotent") {
    std::mt19937_64 rng(56);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix v = heavy_light(50, 2, 10, rng);
        const auto once = eliminate_features(factor_of(v), 4);
        const auto twice = eliminate_features(once.reduced, 4);
        CHECK(twice.retained.size() == once.retained.size());
    }
}

TEST_CASE("small problems keep everything") {
    std::mt19937_64 rng(57);
    const Matrix v = gaussian(6, 2, rng);
    CHECK(eliminate_features(factor_of(v), 4).retained.size() == 6);
    CHECK_THROWS_AS(eliminate_features(factor_of(v), 0), std::invalid_argument);
}

TEST_CASE("spiked factor shrinks and stays safe") {
    const auto model = make_spiked_model(200, 3);
    const auto data = sample_gaussian(model, 50, 4);
    const auto a = SymmetricMatrixView::covariance(data);
    const auto f = make_low_rank_factor(top_eigenpairs(a, 2), false);
    const auto r = eliminate_features(f, 10);
    MESSAGE("retained " << r.retained.size() << " of 200");
    check_safety(f.v, 10);
}
