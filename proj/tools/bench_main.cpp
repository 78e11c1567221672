#include "kboost/bench.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <string>

namespace {

using namespace kboost;

// In-order protocol blocks: first half trains, next quarter validates, the
// rest is held out for testing.
SplitData blocks_of(const EstimationProblem& prob) {
    const Index size = prob.inputs.rows();
    if (size < 4) throw DataError("tune: at least 4 rows are needed to split");
    const Index tr = size / 2;
    const Index va = size / 4;
    SplitData s;
    s.x_train = prob.inputs.topRows(tr);
    s.y_train = prob.y.head(tr);
    s.x_val = prob.inputs.middleRows(tr, va);
    s.y_val = prob.y.segment(tr, va);
    s.x_test = prob.inputs.bottomRows(size - tr - va);
    s.labels = prob.labels;
    return s;
}

struct TuneArgs {
    std::string csv;
    std::string schema;
    std::string strategy = "sure";
    std::string loss = "quadratic";
    double sigma2 = 0.0;  // 0 = estimate from the data (sure) or 1 (holdout)
    double gamma = 1000.0;
    double bandwidth = 10.0;
    double nu_max = 0.0;  // 0 = strategy default
    bool exhaustive = false;
    bool detrend = false;
};

int do_tune(const TuneArgs& a) {
    const EstimationProblem prob =
        ingest_csv(read_csv(a.csv), parse_schema(a.schema), a.detrend);
    if (a.strategy == "sure") {
        if (a.loss != "quadratic")
            throw ConfigError("tune: the risk-based strategy is quadratic-loss only");
        if (prob.design.size() == 0)
            throw ConfigError("tune: the risk-based strategy needs U columns in the schema");
        const double sigma2 =
            a.sigma2 > 0.0 ? a.sigma2 : estimate_sigma2(prob.design, prob.y);
        const Matrix kernel = Matrix::Identity(prob.design.cols(), prob.design.cols());
        const SpectralModel model = factorize(prob.design, kernel, sigma2);
        SureSurface surface = make_surface(model, prob.y);
        surface.nu_max = a.nu_max > 0.0 ? a.nu_max : 500.0;
        const TuneResult res = tune_sure(surface);
        std::cout << "strategy  sure\n"
                  << "sigma2    " << sigma2 << (a.sigma2 > 0.0 ? "" : " (estimated)") << "\n"
                  << "lambda    " << res.lambda << "\n"
                  << "nu        " << res.nu
                  << (res.diagnostics.diverging_nu ? " (at the search bound)" : "") << "\n"
                  << "risk      " << res.objective << "\n"
                  << "evals     " << res.diagnostics.grid_evaluations << " grid, "
                  << res.diagnostics.local_search_iterations << " local\n";
        return 0;
    }
    if (a.strategy != "holdout") throw ConfigError("tune: unknown strategy \"" + a.strategy + "\"");
    if (prob.inputs.size() == 0)
        throw ConfigError("tune: the holdout strategy needs x columns in the schema");
    EstimatorSpec spec;
    spec.name = "boostker";
    spec.kind = EstimatorSpec::Kind::RkhsBoost;
    spec.loss = parse_loss(a.loss);
    spec.bandwidth = a.bandwidth;
    spec.sigma2 = a.sigma2 > 0.0 ? a.sigma2 : 1.0;
    spec.gamma = a.gamma;
    spec.nu_max = a.nu_max > 0.0 ? a.nu_max : 600.0;
    spec.exhaustive_nu = a.exhaustive;
    spec.solve_tol = 1e-6;
    spec.solve_max_iter = 20000;
    const KernelFitResult res = run_kernel_estimator(spec, blocks_of(prob));
    std::cout << "strategy  holdout:" << (a.exhaustive ? "grid" : "golden") << "\n"
              << "gamma     " << res.gamma << "\n"
              << "nu        " << res.nu << "\n"
              << "score     " << res.val_score << "\n"
              << "evals     " << res.candidates << "\n"
              << "solves    " << res.usage.calls << " (" << res.usage.iterations
              << " iterations)\n";
    return 0;
}

int do_ingest(const std::string& csv, const std::string& schema_text, bool detrend) {
    const CsvTable table = read_csv(csv);
    const ColumnSchema schema = parse_schema(schema_text);
    const EstimationProblem prob = ingest_csv(table, schema, detrend);
    std::cout << csv << ": " << table.values.rows() << " rows, " << table.values.cols()
              << " columns\n";
    if (prob.design.size() > 0)
        std::cout << "observation model: y (" << prob.y.size() << ") = U ("
                  << prob.design.rows() << " x " << prob.design.cols() << ") theta + noise\n";
    else
        std::cout << "pointwise model: " << prob.inputs.rows() << " points in "
                  << prob.inputs.cols() << " dimensions\n";
    if (prob.labels) {
        Index plus = 0;
        for (Index i = 0; i < prob.y.size(); ++i)
            if (prob.y[i] > 0) ++plus;
        std::cout << "labels: " << plus << " positive, " << prob.y.size() - plus
                  << " negative\n";
    } else {
        const double mean = prob.y.mean();
        const double sd = std::sqrt((prob.y.array() - mean).square().sum() /
                                    double(std::max<Index>(1, prob.y.size() - 1)));
        std::cout << "output: mean " << mean << ", sd " << sd << "\n";
    }
    if (detrend) std::cout << "columns de-trended\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boosting-kernel estimation benchmarks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    long long runs_override = 0;
    long long seed_override = -1;
    bool run_exhaustive = false;
    CLI::App* run = app.add_subcommand("run", "Run a configured Monte Carlo experiment");
    run->add_option("config", config_path, "JSON experiment configuration")->required();
    run->add_option("--runs", runs_override, "override the Monte Carlo run count");
    run->add_option("--seed", seed_override, "override the base seed");
    run->add_option("--out", out_override, "override the output directory");
    run->add_flag("--exhaustive-nu", run_exhaustive,
                  "step scan over nu instead of golden sections, for every estimator");

    TuneArgs targs;
    CLI::App* tune = app.add_subcommand("tune", "Tune hyperparameters on one dataset");
    tune->add_option("csv", targs.csv, "data file")->required();
    tune->add_option("--schema", targs.schema, "column mapping, e.g. \"y=obs;x=x0,x1\"")
        ->required();
    tune->add_option("--strategy", targs.strategy, "sure (risk) or holdout (validation split)")
        ->check(CLI::IsMember({"sure", "holdout"}));
    tune->add_option("--loss", targs.loss, "loss name, holdout only");
    tune->add_option("--sigma2", targs.sigma2, "noise variance (default: estimated / 1)");
    tune->add_option("--gamma", targs.gamma, "weak-learner regularization, holdout only");
    tune->add_option("--bandwidth", targs.bandwidth, "gaussian kernel bandwidth, holdout only");
    tune->add_option("--nu-max", targs.nu_max, "upper bound of the nu search");
    tune->add_flag("--exhaustive-nu", targs.exhaustive, "step scan instead of golden sections");
    tune->add_flag("--detrend", targs.detrend, "subtract column means first");

    std::string ingest_csv_path;
    std::string ingest_schema;
    bool ingest_detrend = false;
    CLI::App* ingest = app.add_subcommand("ingest", "Validate and summarize a CSV dataset");
    ingest->add_option("csv", ingest_csv_path, "data file")->required();
    ingest->add_option("--schema", ingest_schema, "column mapping")->required();
    ingest->add_flag("--detrend", ingest_detrend, "subtract column means first");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            kboost::ExperimentConfig config = kboost::load_config(config_path);
            if (runs_override > 0) config.runs = kboost::Index(runs_override);
            if (seed_override >= 0) config.seed = std::uint64_t(seed_override);
            if (!out_override.empty()) config.out = out_override;
            if (run_exhaustive)
                for (auto& est : config.estimators) est.exhaustive_nu = true;
            kboost::run_experiment(config);
            return 0;
        }
        if (*tune) return do_tune(targs);
        return do_ingest(ingest_csv_path, ingest_schema, ingest_detrend);
    } catch (const kboost::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const kboost::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const kboost::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
