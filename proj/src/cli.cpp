#include "spanpca/cli.hpp"

#include "spanpca/baselines.hpp"
#include "spanpca/elimination.hpp"
#include "spanpca/experiments.hpp"
#include "spanpca/io.hpp"
#include "spanpca/solver.hpp"

#include <CLI11.hpp>

#include <sstream>

namespace spanpca {

namespace {

struct RunConfig {
    std::string input;
    std::string format = "coo";
    bool keep_counts = false;
    double tol = 1e-9;
    Index k = 0;
    Index d = 2;
    std::string p = "auto";
    bool no_eliminate = false;
    Index components = 3;
    std::string deflation = "projection";
    std::uint64_t seed = 0;
    Index trials = 200;
    std::vector<Index> m;
    Index n = 500;
    std::string methods = "thresholding,tpower,spannogram-d2";
    Index dmax = 5;
    Index count = 100;
    Index fit_first = 1;
    Index fit_last = 0;
    Index max_iters = kDefaultPowerIterations;
    std::string output;
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

SymmetricMatrixView as_view(const MatrixSource& source) {
    if (const auto* data = std::get_if<DataMatrix>(&source)) return SymmetricMatrixView::covariance(*data);
    return std::get<SymmetricMatrixView>(source);
}

MatrixSource load(const RunConfig& cfg) {
    ReadOptions options;
    options.keep_counts = cfg.keep_counts;
    options.symmetry_tolerance = cfg.tol;
    return read_matrix(cfg.input, parse_format(cfg.format), options);
}

SolveOptions solve_options(const RunConfig& cfg) {
    SolveOptions options;
    options.seed = cfg.seed;
    options.eliminate = !cfg.no_eliminate;
    if (cfg.p == "auto") options.nonneg = NonnegMode::Auto;
    else if (cfg.p == "0") options.nonneg = NonnegMode::Off;
    else if (cfg.p == "1") options.nonneg = NonnegMode::On;
    else throw UsageError("--p must be auto, 0 or 1");
    return options;
}

void check_k(const RunConfig& cfg, Index n) {
    if (cfg.k < 1 || cfg.k > n)
        throw UsageError("--k must lie in [1, " + std::to_string(n) + "]");
}

// Writes to --output when given, else to the console.
void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
    if (cfg.output.empty()) out << text;
    else write_text(cfg.output, text);
}

std::string join_support(const Support& s) {
    std::ostringstream o;
    for (std::size_t i = 0; i < s.size(); ++i) o << (i ? " " : "") << s[i] + 1;
    return o.str();
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const SymmetricMatrixView a = as_view(load(cfg));
    check_k(cfg, a.dim());
    const auto pc = sparse_pca(a, cfg.k, cfg.d, solve_options(cfg));
    ResultRecord record;
    record.components.push_back(to_record(pc, cfg.k));
    const double lambda1 = pc.bound.lambda_1;
    record.explained_variance_ratio = lambda1 > 0.0 ? std::clamp(pc.value / lambda1, 0.0, 1.0) : 0.0;
    if (cfg.output.empty()) {
        out << render_result(record);
    } else {
        write_result(record, cfg.output);
        out << "value " << format_double(pc.value) << "\nsupport " << join_support(pc.support)
            << "\nrank_used " << pc.rank_used << "\nratio_lower " << format_double(pc.bound.ratio_lower)
            << "\ncandidates " << pc.candidate_count << "\nretained_features " << pc.retained_features
            << '\n';
    }
    return 0;
}

int cmd_multi(const RunConfig& cfg, std::ostream& out) {
    const MatrixSource source = load(cfg);
    const Index n = std::holds_alternative<DataMatrix>(source) ? std::get<DataMatrix>(source).features()
                                                               : std::get<SymmetricMatrixView>(source).dim();
    check_k(cfg, n);
    Deflation deflation;
    if (cfg.deflation == "projection") deflation = Deflation::Projection;
    else if (cfg.deflation == "strip") deflation = Deflation::Strip;
    else throw UsageError("--deflation must be projection or strip");
    const auto result = multi_component(source, cfg.k, cfg.components, cfg.d, deflation, solve_options(cfg));
    ResultRecord record;
    for (const auto& pc : result.components) record.components.push_back(to_record(pc, cfg.k));
    record.explained_variance_ratio = result.explained_variance_ratio;
    if (cfg.output.empty()) {
        out << render_result(record);
    } else {
        write_result(record, cfg.output);
        for (std::size_t c = 0; c < result.components.size(); ++c)
            out << "component " << c + 1 << " value " << format_double(result.components[c].value)
                << " support " << join_support(result.components[c].support) << '\n';
        out << "explained_variance_ratio " << format_double(record.explained_variance_ratio) << '\n';
    }
    return 0;
}

int cmd_bound(const RunConfig& cfg, std::ostream& out) {
    const SymmetricMatrixView a = as_view(load(cfg));
    check_k(cfg, a.dim());
    if (cfg.dmax < 1) throw UsageError("--dmax must be >= 1");
    if (cfg.dmax + 1 > a.dim()) throw UsageError("--dmax must be below the matrix dimension");
    emit(cfg, render_bound_table(bound_curve(a, cfg.k, cfg.dmax)), out);
    return 0;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
    const SymmetricMatrixView a = as_view(load(cfg));
    check_k(cfg, a.dim());
    const auto best = brute_force_oracle(a, cfg.k);
    ResultRecord record;
    record.components.push_back(to_record(best));
    const double lambda1 = leading_eigenvalues(a, 1)(0);
    record.explained_variance_ratio = lambda1 > 0.0 ? std::clamp(best.value / lambda1, 0.0, 1.0) : 0.0;
    if (cfg.output.empty()) {
        out << render_result(record);
    } else {
        write_result(record, cfg.output);
        out << "value " << format_double(best.value) << "\nsupport " << join_support(best.support) << '\n';
    }
    return 0;
}

int cmd_spiked(const RunConfig& cfg, std::ostream& out) {
    std::vector<Index> ms = cfg.m.empty() ? std::vector<Index>{50, 5} : cfg.m;
    std::vector<RecoveryMethod> methods;
    std::stringstream list(cfg.methods);
    for (std::string name; std::getline(list, name, ',');)
        if (!name.empty()) methods.push_back(parse_method(name));
    if (methods.empty()) throw UsageError("--methods is empty");
    if (cfg.trials < 1) throw UsageError("--trials must be >= 1");

    std::vector<RecoveryRow> rows;
    for (Index m : ms) {
        if (m < 1) throw UsageError("--m must be >= 1");
        RecoveryConfig rc;
        rc.n = cfg.n;
        rc.m = m;
        rc.k = cfg.k > 0 ? cfg.k : kPlantedSparsity;
        rc.trials = cfg.trials;
        rc.seed = cfg.seed;
        rc.tpower_iters = cfg.max_iters;
        rc.methods = methods;
        for (auto& row : recovery_experiment(rc)) rows.push_back(std::move(row));
    }
    emit(cfg, render_recovery_table(rows), out);
    return 0;
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
    const SymmetricMatrixView a = as_view(load(cfg));
    const Index count = std::min(cfg.count, a.dim());
    const Index last = cfg.fit_last > 0 ? cfg.fit_last : count;
    emit(cfg, render_spectrum(spectrum_report(a, count, cfg.fit_first, last), cfg.fit_first, last), out);
    return 0;
}

int cmd_eliminate(const RunConfig& cfg, std::ostream& out) {
    const SymmetricMatrixView a = as_view(load(cfg));
    check_k(cfg, a.dim());
    if (cfg.d < 1 || cfg.d > kMaxRank) throw UsageError("--d must lie in [1, 6]");
    const SolveOptions options = solve_options(cfg);
    bool nonneg = options.nonneg == NonnegMode::On ||
                  (options.nonneg == NonnegMode::Auto && a.is_entrywise_nonnegative());
    const auto pairs = top_eigenpairs(a, std::min(cfg.d, a.dim()));
    const auto result = eliminate_features(make_low_rank_factor(pairs, nonneg), cfg.k);
    std::ostringstream text;
    text << "features " << a.dim() << "\nretained " << result.retained.size() << "\ngave_up "
         << (result.gave_up ? 1 : 0) << '\n';
    emit(cfg, text.str(), out);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Sparse principal components from low-rank spannograms", "spca"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    auto add_input = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "Matrix file")->required()->check(CLI::ExistingFile);
        sub->add_option("--format", cfg.format, "coo | dense-csv | docword")
            ->check(CLI::IsMember({"coo", "dense-csv", "docword"}))
            ->capture_default_str();
        sub->add_flag("--keep-counts", cfg.keep_counts, "docword: keep counts instead of 0/1");
        sub->add_option("--tol", cfg.tol, "dense-csv symmetry tolerance")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
    };
    auto add_output = [&](CLI::App* sub) {
        sub->add_option("--output", cfg.output, "Result file (console when omitted)");
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--k", cfg.k, "Sparsity")->required()->check(CLI::PositiveNumber);
        sub->add_option("--d", cfg.d, "Approximation rank")->check(CLI::Range(1, 6))->capture_default_str();
        sub->add_option("--p", cfg.p, "Nonnegative mode: auto | 0 | 1")
            ->check(CLI::IsMember({"auto", "0", "1"}))
            ->capture_default_str();
        sub->add_flag("--no-eliminate", cfg.no_eliminate, "Skip feature elimination");
        sub->add_option("--seed", cfg.seed, "Perturbation seed")->capture_default_str();
    };

    auto* solve = app.add_subcommand("solve", "Leading sparse component");
    add_input(solve);
    add_solver(solve);
    add_output(solve);

    auto* multi = app.add_subcommand("multi", "Several components with deflation");
    add_input(multi);
    add_solver(multi);
    multi->add_option("--L", cfg.components, "Component count")->check(CLI::PositiveNumber)->capture_default_str();
    multi->add_option("--deflation", cfg.deflation, "projection | strip")
        ->check(CLI::IsMember({"projection", "strip"}))
        ->capture_default_str();
    add_output(multi);

    auto* bound = app.add_subcommand("bound", "Approximation guarantee for d = 1..dmax");
    add_input(bound);
    bound->add_option("--k", cfg.k, "Sparsity")->required()->check(CLI::PositiveNumber);
    bound->add_option("--dmax", cfg.dmax, "Largest rank")->check(CLI::PositiveNumber)->capture_default_str();
    add_output(bound);

    auto* oracle = app.add_subcommand("oracle", "Exhaustive search (small instances only)");
    add_input(oracle);
    oracle->add_option("--k", cfg.k, "Sparsity")->required()->check(CLI::PositiveNumber);
    add_output(oracle);

    auto* spiked = app.add_subcommand("spiked", "Support recovery on the spiked covariance model");
    spiked->add_option("--m", cfg.m, "Sample count (repeatable; default 50 and 5)")->check(CLI::PositiveNumber);
    spiked->add_option("--n", cfg.n, "Dimension")->check(CLI::Range(21, 1 << 20))->capture_default_str();
    spiked->add_option("--k", cfg.k, "Sparsity (default 10)")->check(CLI::PositiveNumber);
    spiked->add_option("--trials", cfg.trials, "Trials per sample count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    spiked->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    spiked->add_option("--methods", cfg.methods, "Comma-separated methods")->capture_default_str();
    spiked->add_option("--max-iters", cfg.max_iters, "Truncated power iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_output(spiked);

    auto* spectrum = app.add_subcommand("spectrum", "Leading eigenvalues and power-law fit");
    add_input(spectrum);
    spectrum->add_option("--count", cfg.count, "Eigenvalues to compute")->check(CLI::PositiveNumber)->capture_default_str();
    spectrum->add_option("--fit-first", cfg.fit_first, "First index of the fit (1-based)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    spectrum->add_option("--fit-last", cfg.fit_last, "Last index of the fit (default: --count)")
        ->check(CLI::PositiveNumber);
    add_output(spectrum);

    auto* eliminate = app.add_subcommand("eliminate", "Count features surviving elimination");
    add_input(eliminate);
    eliminate->add_option("--k", cfg.k, "Sparsity")->required()->check(CLI::PositiveNumber);
    eliminate->add_option("--d", cfg.d, "Approximation rank")->check(CLI::Range(1, 6))->capture_default_str();
    eliminate->add_option("--p", cfg.p, "Nonnegative mode: auto | 0 | 1")
        ->check(CLI::IsMember({"auto", "0", "1"}))
        ->capture_default_str();
    add_output(eliminate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (solve->parsed()) return cmd_solve(cfg, out);
        if (multi->parsed()) return cmd_multi(cfg, out);
        if (bound->parsed()) return cmd_bound(cfg, out);
        if (oracle->parsed()) return cmd_oracle(cfg, out);
        if (spiked->parsed()) return cmd_spiked(cfg, out);
        if (spectrum->parsed()) return cmd_spectrum(cfg, out);
        if (eliminate->parsed()) return cmd_eliminate(cfg, out);
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        err << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace spanpca
