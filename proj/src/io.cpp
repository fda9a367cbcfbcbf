#include "spanpca/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spanpca {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << path.string() << ":" << line << ": " << what;
    throw ParseError(msg.str());
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return in;
}

bool is_skippable(const std::string& line) {
    const auto first = line.find_first_not_of(" \t\r");
    return first == std::string::npos || line[first] == '%' || line[first] == '#';
}

// Reads the next meaningful line; false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        if (!is_skippable(line)) return true;
    }
    return false;
}

double parse_real(std::string_view token, const std::filesystem::path& path, std::size_t line_no) {
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
        token.remove_suffix(1);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value))
        fail(path, line_no, "invalid number '" + std::string(token) + "'");
    return value;
}

long long parse_count(const std::string& token, const std::filesystem::path& path, std::size_t line_no) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        fail(path, line_no, "invalid integer '" + token + "'");
    return value;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

DataMatrix read_coo(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    if (!next_line(in, line, line_no)) fail(path, line_no, "missing header 'n m nnz'");
    auto header = split_ws(line);
    if (header.size() != 3) fail(path, line_no, "header must be 'n m nnz'");
    const long long n = parse_count(header[0], path, line_no);
    const long long m = parse_count(header[1], path, line_no);
    const long long nnz = parse_count(header[2], path, line_no);
    if (n < 1 || m < 1 || nnz < 0) fail(path, line_no, "header values out of range");

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    while (next_line(in, line, line_no)) {
        auto tok = split_ws(line);
        if (tok.size() != 3) fail(path, line_no, "expected 'i j value'");
        const long long i = parse_count(tok[0], path, line_no);
        const long long j = parse_count(tok[1], path, line_no);
        const double v = parse_real(tok[2], path, line_no);
        if (i < 1 || i > n || j < 1 || j > m) fail(path, line_no, "index out of range");
        triplets.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
    }
    if (static_cast<long long>(triplets.size()) != nnz)
        fail(path, line_no, "expected " + std::to_string(nnz) + " entries, found " +
                                std::to_string(triplets.size()));
    DataMatrix data;
    data.values.resize(static_cast<Index>(n), static_cast<Index>(m));
    data.values.setFromTriplets(triplets.begin(), triplets.end());
    data.values.makeCompressed();
    return data;
}

SymmetricMatrixView read_dense_csv(const std::filesystem::path& path, double tolerance) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    while (next_line(in, line, line_no)) {
        std::vector<double> row;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            row.push_back(parse_real(rest.substr(0, comma), path, line_no));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            fail(path, line_no, "row length differs from the first row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(path, line_no, "empty matrix");
    const Index n = static_cast<Index>(rows.size());
    if (static_cast<Index>(rows.front().size()) != n)
        fail(path, line_no, "matrix is not square");
    Matrix a(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) a(i, j) = rows[i][j];
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > tolerance * scale)
                fail(path, static_cast<std::size_t>(i + 1),
                     "matrix is not symmetric at (" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ")");
    return SymmetricMatrixView::dense(a);
}

DataMatrix read_docword(const std::filesystem::path& path, bool keep_counts) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    long long header[3];
    const char* names[3] = {"D", "W", "NNZ"};
    for (int h = 0; h < 3; ++h) {
        if (!next_line(in, line, line_no)) fail(path, line_no, std::string("missing header ") + names[h]);
        auto tok = split_ws(line);
        if (tok.size() != 1) fail(path, line_no, std::string("header ") + names[h] + " must be one integer");
        header[h] = parse_count(tok[0], path, line_no);
    }
    const long long docs = header[0], words = header[1], nnz = header[2];
    if (docs < 1 || words < 1 || nnz < 0) fail(path, line_no, "header values out of range");

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    while (next_line(in, line, line_no)) {
        auto tok = split_ws(line);
        if (tok.size() != 3) fail(path, line_no, "expected 'docID wordID count'");
        const long long doc = parse_count(tok[0], path, line_no);
        const long long word = parse_count(tok[1], path, line_no);
        const double count = parse_real(tok[2], path, line_no);
        if (doc < 1 || doc > docs || word < 1 || word > words) fail(path, line_no, "index out of range");
        if (count < 0.0) fail(path, line_no, "negative count");
        triplets.emplace_back(static_cast<Index>(word - 1), static_cast<Index>(doc - 1), count);
    }
    if (static_cast<long long>(triplets.size()) != nnz)
        fail(path, line_no, "expected " + std::to_string(nnz) + " entries, found " +
                                std::to_string(triplets.size()));
    DataMatrix data;
    data.values.resize(static_cast<Index>(words), static_cast<Index>(docs));
    data.values.setFromTriplets(triplets.begin(), triplets.end());
    if (!keep_counts) {
        for (Index r = 0; r < data.values.outerSize(); ++r)
            for (SparseRows::InnerIterator it(data.values, r); it; ++it)
                it.valueRef() = it.value() > 0.0 ? 1.0 : 0.0;
    }
    data.values.prune(0.0);
    data.values.makeCompressed();
    return data;
}

}  // namespace

MatrixFormat parse_format(const std::string& name) {
    if (name == "coo") return MatrixFormat::Coo;
    if (name == "dense-csv") return MatrixFormat::DenseCsv;
    if (name == "docword") return MatrixFormat::Docword;
    throw std::invalid_argument("unknown matrix format '" + name + "'");
}

MatrixSource read_matrix(const std::filesystem::path& path, MatrixFormat format,
                         const ReadOptions& options) {
    switch (format) {
        case MatrixFormat::Coo: return read_coo(path);
        case MatrixFormat::DenseCsv: return read_dense_csv(path, options.symmetry_tolerance);
        case MatrixFormat::Docword: return read_docword(path, options.keep_counts);
    }
    throw std::logic_error("unhandled format");
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << contents;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_coo(const DataMatrix& data, const std::filesystem::path& path) {
    std::ostringstream out;
    out << data.features() << ' ' << data.samples() << ' ' << data.values.nonZeros() << '\n';
    for (Index r = 0; r < data.values.outerSize(); ++r)
        for (SparseRows::InnerIterator it(data.values, r); it; ++it)
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value()) << '\n';
    write_text(path, out.str());
}

ComponentRecord to_record(const SparsePrincipalComponent& pc, Index k) {
    ComponentRecord r;
    r.rank_used = pc.rank_used;
    r.k = k;
    r.support = pc.support;
    r.loadings = pc.loadings;
    r.value = pc.value;
    r.epsilon_d = pc.bound.epsilon_d;
    r.ratio_lower = pc.bound.ratio_lower;
    return r;
}

ComponentRecord to_record(const BaselineResult& result) {
    ComponentRecord r;
    r.rank_used = 0;
    r.k = static_cast<Index>(result.support.size());
    r.support = result.support;
    r.loadings = result.loadings;
    r.value = result.value;
    return r;
}

namespace {

void check_ratio(double ratio) {
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw std::domain_error("explained_variance_ratio " + format_double(ratio) + " outside [0, 1]");
}

}  // namespace

std::string render_result(const ResultRecord& result) {
    check_ratio(result.explained_variance_ratio);
    std::ostringstream out;
    out << "spanpca-result 1\n";
    out << "components " << result.components.size() << '\n';
    out << "explained_variance_ratio " << format_double(result.explained_variance_ratio) << '\n';
    for (std::size_t c = 0; c < result.components.size(); ++c) {
        const auto& r = result.components[c];
        out << "component " << c + 1 << '\n';
        out << "rank_used " << r.rank_used << '\n';
        out << "k " << r.k << '\n';
        out << "support";
        for (Index i : r.support) out << ' ' << i + 1;
        out << '\n';
        out << "value " << format_double(r.value) << '\n';
        out << "epsilon_d " << format_double(r.epsilon_d) << '\n';
        out << "ratio_lower " << format_double(r.ratio_lower) << '\n';
        out << "loadings " << r.loadings.size();
        for (Index i = 0; i < r.loadings.size(); ++i) out << ' ' << format_double(r.loadings(i));
        out << '\n';
        out << "end\n";
    }
    return out.str();
}

std::string render_result_csv(const ResultRecord& result) {
    check_ratio(result.explained_variance_ratio);
    std::ostringstream out;
    out << "component,rank_used,k,value,epsilon_d,ratio_lower,explained_variance_ratio,support\n";
    for (std::size_t c = 0; c < result.components.size(); ++c) {
        const auto& r = result.components[c];
        out << c + 1 << ',' << r.rank_used << ',' << r.k << ',' << format_double(r.value) << ','
            << format_double(r.epsilon_d) << ',' << format_double(r.ratio_lower) << ','
            << format_double(result.explained_variance_ratio) << ',';
        for (std::size_t i = 0; i < r.support.size(); ++i) out << (i ? " " : "") << r.support[i] + 1;
        out << '\n';
    }
    return out.str();
}

void write_result(const ResultRecord& result, const std::filesystem::path& path) {
    const std::string text = render_result(result);
    const std::string csv = render_result_csv(result);
    write_text(path, text);
    std::filesystem::path twin = path;
    twin += ".csv";
    write_text(twin, csv);
}

ResultRecord read_result(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    auto expect = [&](const std::string& key) {
        if (!next_line(in, line, line_no)) fail(path, line_no, "unexpected end, wanted '" + key + "'");
        auto tok = split_ws(line);
        if (tok.empty() || tok[0] != key) fail(path, line_no, "expected '" + key + "'");
        tok.erase(tok.begin());
        return tok;
    };
    auto single = [&](const std::string& key) {
        auto tok = expect(key);
        if (tok.size() != 1) fail(path, line_no, "'" + key + "' takes one value");
        return tok[0];
    };

    ResultRecord result;
    if (single("spanpca-result") != "1") fail(path, line_no, "unsupported result version");
    const long long count = parse_count(single("components"), path, line_no);
    result.explained_variance_ratio = parse_real(single("explained_variance_ratio"), path, line_no);
    for (long long c = 0; c < count; ++c) {
        ComponentRecord r;
        single("component");
        r.rank_used = static_cast<Index>(parse_count(single("rank_used"), path, line_no));
        r.k = static_cast<Index>(parse_count(single("k"), path, line_no));
        for (const auto& tok : expect("support"))
            r.support.push_back(static_cast<Index>(parse_count(tok, path, line_no) - 1));
        r.value = parse_real(single("value"), path, line_no);
        r.epsilon_d = parse_real(single("epsilon_d"), path, line_no);
        r.ratio_lower = parse_real(single("ratio_lower"), path, line_no);
        auto load = expect("loadings");
        if (load.empty()) fail(path, line_no, "loadings need a length");
        const long long n = parse_count(load[0], path, line_no);
        if (static_cast<long long>(load.size()) != n + 1) fail(path, line_no, "loadings length mismatch");
        r.loadings.resize(static_cast<Index>(n));
        for (long long i = 0; i < n; ++i) r.loadings(static_cast<Index>(i)) = parse_real(load[i + 1], path, line_no);
        expect("end");
        result.components.push_back(std::move(r));
    }
    return result;
}

std::string render_recovery_table(const std::vector<RecoveryRow>& rows) {
    std::ostringstream out;
    out << "method,n,m,k,trials,successes,p_rec,mean_ratio_lower\n";
    for (const auto& r : rows)
        out << r.method << ',' << r.n << ',' << r.m << ',' << r.k << ',' << r.trials << ','
            << r.successes << ',' << format_double(r.p_rec) << ',' << format_double(r.mean_ratio_lower)
            << '\n';
    return out.str();
}

std::string render_bound_table(const std::vector<BoundCurveRow>& rows) {
    std::ostringstream out;
    out << "d,lambda_1,lambda_d_plus_1,lambda_1_diag,term_spectral,term_diagonal,epsilon_d,ratio_lower\n";
    for (const auto& r : rows) {
        const auto& b = r.bound;
        out << r.d << ',' << format_double(b.lambda_1) << ',' << format_double(b.lambda_d_plus_1) << ','
            << format_double(b.lambda_1_diag) << ',' << format_double(b.term_spectral) << ','
            << format_double(b.term_diagonal) << ',' << format_double(b.epsilon_d) << ','
            << format_double(b.ratio_lower) << '\n';
    }
    return out.str();
}

std::string render_spectrum(const SpectrumReport& report, Index fit_first, Index fit_last) {
    std::ostringstream out;
    out << "lambda_1_diag " << format_double(report.lambda_1_diag) << '\n';
    out << "powerlaw_C " << format_double(report.fit.c) << '\n';
    out << "powerlaw_alpha " << format_double(report.fit.alpha) << '\n';
    out << "fit_r2 " << format_double(report.fit.r2) << '\n';
    out << "fit_range " << fit_first << ' ' << fit_last << '\n';
    out << "eigenvalues " << report.eigenvalues.size() << '\n';
    for (Index i = 0; i < report.eigenvalues.size(); ++i)
        out << i + 1 << ' ' << format_double(report.eigenvalues(i)) << '\n';
    return out.str();
}

}  // namespace spanpca
