#include "spanpca/io.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace spanpca;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("spanpca-io-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name, const std::string& contents) const {
        const fs::path p = path / name;
        std::ofstream(p) << contents;
        return p;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Message of the ParseError thrown by `fn`, empty if none.
template <class Fn>
std::string parse_error(Fn&& fn) {
    try {
        fn();
    } catch (const ParseError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("coo input") {
    TempDir tmp;
    const auto src = read_matrix(tmp.file("a.coo", "2 2 1\n1 1 3.0\n"), MatrixFormat::Coo);
    const auto& data = std::get<DataMatrix>(src);
    CHECK(data.features() == 2);
    CHECK(data.samples() == 2);
    CHECK(data.values.nonZeros() == 1);
    CHECK(data.values.coeff(0, 0) == 3.0);

    const std::string bad = parse_error([&] { read_matrix(tmp.file("b.coo", "2 2 2\n1 1 1\n1 x 2\n"), MatrixFormat::Coo); });
    CHECK(bad.find(":3:") != std::string::npos);
    CHECK_FALSE(parse_error([&] { read_matrix(tmp.file("c.coo", "2 2 1\n3 1 1\n"), MatrixFormat::Coo); }).empty());
    CHECK_FALSE(parse_error([&] { read_matrix(tmp.file("d.coo", "2 2 2\n1 1 1\n"), MatrixFormat::Coo); }).empty());
    CHECK_FALSE(parse_error([&] { read_matrix(tmp.file("e.coo", "2 2\n"), MatrixFormat::Coo); }).empty());
    CHECK_THROWS_AS(read_matrix(tmp.path / "missing.coo", MatrixFormat::Coo), ParseError);
}

TEST_CASE("dense csv input") {
    TempDir tmp;
    const auto src = read_matrix(tmp.file("a.csv", "1,0\n0,2\n"), MatrixFormat::DenseCsv);
    const auto& view = std::get<SymmetricMatrixView>(src);
    CHECK(view.dim() == 2);
    CHECK(leading_eigenvalues(view, 1)(0) == doctest::Approx(2.0));

    const std::string asym = parse_error([&] { read_matrix(tmp.file("b.csv", "1,0.5\n0.4,2\n"), MatrixFormat::DenseCsv); });
    CHECK(asym.find("symmetric") != std::string::npos);
    CHECK_NOTHROW(read_matrix(tmp.file("c.csv", "1,0.5\n0.5000000000001,2\n"), MatrixFormat::DenseCsv));
    CHECK_FALSE(parse_error([&] { read_matrix(tmp.file("d.csv", "1,0,0\n0,2,0\n"), MatrixFormat::DenseCsv); }).empty());
    CHECK_FALSE(parse_error([&] { read_matrix(tmp.file("e.csv", "1,0\n0\n"), MatrixFormat::DenseCsv); }).empty());
}

TEST_CASE("docword input") {
    TempDir tmp;
    // 3 documents, 2 words; word 1 in docs 1 and 3, word 2 in doc 2
    const std::string text = "3\n2\n3\n1 1 1\n2 2 5\n3 1 2\n";
    const auto src = read_matrix(tmp.file("docword.txt", text), MatrixFormat::Docword);
    const auto& data = std::get<DataMatrix>(src);
    CHECK(data.features() == 2);
    CHECK(data.samples() == 3);
    const Matrix s(data.values);
    CHECK((s.array() == 0.0 || s.array() == 1.0).all());
    const Matrix cov = SymmetricMatrixView::covariance(data).to_dense();
    CHECK(cov(0, 0) == 2.0);
    CHECK(cov(1, 1) == 1.0);
    CHECK(cov(0, 1) == 0.0);

    ReadOptions counts;
    counts.keep_counts = true;
    const auto raw = std::get<DataMatrix>(read_matrix(tmp.path / "docword.txt", MatrixFormat::Docword, counts));
    CHECK(raw.values.coeff(1, 1) == 5.0);
    CHECK(raw.values.coeff(0, 2) == 2.0);

    CHECK_FALSE(parse_error([&] { read_matrix(tmp.file("bad.txt", "1\n2\n1\n2 1 1\n"), MatrixFormat::Docword); }).empty());
}

TEST_CASE("coo writer round trip") {
    TempDir tmp;
    std::mt19937_64 rng(91);
    const Matrix dense = testutil::gaussian(7, 5, rng);
    DataMatrix data;
    data.values = (dense.array() > 0.3).select(dense, 0.0).sparseView();
    write_coo(data, tmp.path / "out.coo");
    const auto back = std::get<DataMatrix>(read_matrix(tmp.path / "out.coo", MatrixFormat::Coo));
    CHECK(back.values.nonZeros() == data.values.nonZeros());
    CHECK(Matrix(back.values) == Matrix(data.values));
}

TEST_CASE("shortest round-trip number formatting") {
    std::mt19937_64 rng(92);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("result record round trip") {
    TempDir tmp;
    ResultRecord r;
    r.explained_variance_ratio = 0.8123456789012345;
    ComponentRecord c;
    c.rank_used = 2;
    c.k = 2;
    c.support = {1, 4};
    c.loadings = Vector::Zero(6);
    c.loadings(1) = 0.6;
    c.loadings(4) = -0.8;
    c.value = 3.141592653589793;
    c.epsilon_d = 1.0 / 3.0;
    c.ratio_lower = 2.0 / 3.0;
    r.components = {c, c};
    r.components[1].support = {0, 2};

    const fs::path out = tmp.path / "result.txt";
    write_result(r, out);
    CHECK(fs::exists(tmp.path / "result.txt.csv"));
    CHECK(slurp(out).rfind("spanpca-result 1\n", 0) == 0);
    CHECK(slurp(out).find("support 2 5\n") != std::string::npos);

    const auto back = read_result(out);
    CHECK(back.explained_variance_ratio == r.explained_variance_ratio);
    REQUIRE(back.components.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.components[i].support == r.components[i].support);
        CHECK(back.components[i].value == r.components[i].value);
        CHECK(back.components[i].epsilon_d == r.components[i].epsilon_d);
        CHECK(back.components[i].ratio_lower == r.components[i].ratio_lower);
        CHECK(back.components[i].loadings == r.components[i].loadings);
        CHECK(back.components[i].rank_used == 2);
    }

    const std::string csv = slurp(tmp.path / "result.txt.csv");
    CHECK(csv.find("component,rank_used,k,value") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    r.explained_variance_ratio = 1.5;
    CHECK_THROWS_AS(write_result(r, out), std::domain_error);
    r.explained_variance_ratio = -0.1;
    CHECK_THROWS_AS(render_result(r), std::domain_error);
}

TEST_CASE("experiment table schema") {
    std::vector<RecoveryRow> rows;
    for (Index m : {50, 5})
        for (const char* method : {"thresholding", "tpower", "spannogram-d2"}) {
            RecoveryRow row;
            row.method = method;
            row.n = 500;
            row.m = m;
            row.k = 10;
            row.trials = 4;
            row.successes = 3;
            row.p_rec = 0.75;
            rows.push_back(row);
        }
    const std::string table = render_recovery_table(rows);
    CHECK(table.rfind("method,n,m,k,trials,successes,p_rec,mean_ratio_lower\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 7);
    CHECK(table.find("tpower,500,5,10,4,3,0.75,0\n") != std::string::npos);
}

TEST_CASE("format names") {
    CHECK(parse_format("coo") == MatrixFormat::Coo);
    CHECK(parse_format("dense-csv") == MatrixFormat::DenseCsv);
    CHECK(parse_format("docword") == MatrixFormat::Docword);
    CHECK_THROWS_AS(parse_format("mtx"), std::invalid_argument);
}
