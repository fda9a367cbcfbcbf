#pragma once

#include "spanpca/experiments.hpp"
#include "spanpca/solver.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace spanpca {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MatrixFormat { Coo, DenseCsv, Docword };

MatrixFormat parse_format(const std::string& name);

struct ReadOptions {
    /// docword: keep raw counts instead of 0/1 indicators.
    bool keep_counts = false;
    /// dense-csv: allowed |a_ij - a_ji| relative to max(1, max |a|).
    double symmetry_tolerance = 1e-9;
};

/// coo:       header "n m nnz", then nnz lines "i j value" (1-based)
/// dense-csv: n lines of n comma-separated reals, must be symmetric
/// docword:   three header lines D, W, NNZ, then "docID wordID count"; the
///            result has words as features (n = W) and documents as samples
MatrixSource read_matrix(const std::filesystem::path& path, MatrixFormat format,
                         const ReadOptions& options = {});

/// Writes S in the coo format (values at full precision).
void write_coo(const DataMatrix& data, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

struct ComponentRecord {
    Index rank_used = 0;
    Index k = 0;
    Support support;  // 0-based in memory, 1-based on disk
    Vector loadings;
    double value = 0.0;
    double epsilon_d = 0.0;
    double ratio_lower = 1.0;
};

struct ResultRecord {
    std::vector<ComponentRecord> components;
    double explained_variance_ratio = 0.0;
};

ComponentRecord to_record(const SparsePrincipalComponent& pc, Index k);
ComponentRecord to_record(const BaselineResult& result);

/// Structured text record plus a CSV twin at `path` + ".csv". Throws if the
/// explained-variance ratio lies outside [0, 1].
void write_result(const ResultRecord& result, const std::filesystem::path& path);
std::string render_result(const ResultRecord& result);
std::string render_result_csv(const ResultRecord& result);
ResultRecord read_result(const std::filesystem::path& path);

std::string render_recovery_table(const std::vector<RecoveryRow>& rows);
std::string render_bound_table(const std::vector<BoundCurveRow>& rows);
std::string render_spectrum(const SpectrumReport& report, Index fit_first, Index fit_last);

void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace spanpca
