#include "kboost/bench.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace kboost {

namespace {

constexpr double kPi = 3.14159265358979323846;

using nlohmann::json;

}  // namespace

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
}

Index Rng::integer(Index n) {
    if (n < 1) throw ConfigError("rng: integer range must be positive");
    const std::uint64_t un = std::uint64_t(n);
    const std::uint64_t limit = ~std::uint64_t(0) - ~std::uint64_t(0) % un;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return Index(v % un);
}

InverseProblem gen_inverse_problem(std::uint64_t seed, DesignMode mode, Index n, Index m) {
    if (n <= m) throw ConfigError("inverse problem: need more rows than columns");
    Rng rng(seed);
    InverseProblem p;

    p.theta_true = Vector(m);
    for (Index t = 0; t < m; ++t) {
        const double s = double(t) / double(m);
        p.theta_true[t] = std::sin(2.0 * kPi * s) + 0.5 * std::sin(4.0 * kPi * s);
    }

    p.design = Matrix::Zero(n, m);
    if (mode == DesignMode::White) {
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < m; ++j) p.design(i, j) = rng.normal();
    } else {
        // Hamming windowed-sinc taps; cutoff expressed as a fraction of the
        // Nyquist frequency, so 0.95 rad/sample = 0.95/pi.
        const Index order = 6;
        const double cutoff = 0.95 / kPi;
        Vector h(order + 1);
        for (Index j = 0; j <= order; ++j) {
            const double x = cutoff * (double(j) - double(order) / 2.0);
            const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
            h[j] = cutoff * sinc * (0.54 - 0.46 * std::cos(2.0 * kPi * double(j) / double(order)));
        }
        h /= h.sum();

        Vector e(n);
        for (Index i = 0; i < n; ++i) e[i] = rng.normal();
        Vector g = Vector::Zero(n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j <= std::min<Index>(order, i); ++j) g[i] += h[j] * e[i - j];

        // causal convolution design: column j applies a j-sample delay
        for (Index j = 0; j < m; ++j)
            for (Index i = j; i < n; ++i) p.design(i, j) = g[i - j];
    }

    const Vector w = p.design * p.theta_true;
    const double mean = w.mean();
    p.sigma2 = (w.array() - mean).square().sum() / double(n) / 10.0;
    const double sd = std::sqrt(p.sigma2);
    p.y = Vector(n);
    for (Index i = 0; i < n; ++i) p.y[i] = w[i] + sd * rng.normal();
    return p;
}

namespace {

BenchSplit cut_blocks(const Matrix& x, const Vector& y, const Vector& truth_source, bool labels) {
    const Index size = x.rows();
    const Index tr = size / 2;
    const Index va = size / 4;
    const Index te = size - tr - va;
    BenchSplit b;
    b.split.x_train = x.topRows(tr);
    b.split.y_train = y.head(tr);
    b.split.x_val = x.middleRows(tr, va);
    b.split.y_val = y.segment(tr, va);
    b.split.x_test = x.bottomRows(te);
    b.split.labels = labels;
    b.truth = truth_source.tail(te);
    return b;
}

}  // namespace

BenchSplit gen_classify_mixture(std::uint64_t seed, Index size) {
    if (size < 4) throw ConfigError("classify: at least 4 points are needed to split");
    Rng rng(seed);
    Matrix mplus(10, 2), mminus(10, 2);
    for (Index r = 0; r < 10; ++r) {
        mplus(r, 0) = 1.0 + rng.normal();
        mplus(r, 1) = rng.normal();
    }
    for (Index r = 0; r < 10; ++r) {
        mminus(r, 0) = rng.normal();
        mminus(r, 1) = 1.0 + rng.normal();
    }
    Vector labels(size);
    for (Index i = 0; i < size; ++i) labels[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
    std::vector<Index> cluster(size);
    for (Index i = 0; i < size; ++i) cluster[i] = rng.integer(10);
    Matrix x(size, 2);
    const double sd = std::sqrt(1.0 / 5.0);
    for (Index i = 0; i < size; ++i) {
        const Matrix& means = labels[i] > 0 ? mplus : mminus;
        x(i, 0) = means(cluster[i], 0) + sd * rng.normal();
        x(i, 1) = means(cluster[i], 1) + sd * rng.normal();
    }
    return cut_blocks(x, labels, labels, true);
}

double franke_function(double x, double y) {
    const double t1 = 0.75 * std::exp(-((9 * x - 2) * (9 * x - 2) + (9 * y - 2) * (9 * y - 2)) / 4.0);
    const double t2 = 0.75 * std::exp(-(9 * x + 1) * (9 * x + 1) / 49.0 - (9 * y + 1) / 10.0);
    const double t3 = 0.5 * std::exp(-((9 * x - 7) * (9 * x - 7) + (9 * y - 3) * (9 * y - 3)) / 4.0);
    const double t4 = -0.2 * std::exp(-((9 * x - 4) * (9 * x - 4) + (9 * y - 7) * (9 * y - 7)));
    return t1 + t2 + t3 + t4;
}

BenchSplit gen_franke(std::uint64_t seed, Index size) {
    if (size < 4) throw ConfigError("franke: at least 4 points are needed to split");
    Rng rng(seed);
    Matrix x(size, 2);
    for (Index i = 0; i < size; ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = rng.uniform();
    }
    Vector f(size);
    for (Index i = 0; i < size; ++i) f[i] = franke_function(x(i, 0), x(i, 1));
    std::vector<bool> wide(size);
    for (Index i = 0; i < size; ++i) wide[i] = rng.uniform() < 0.1;
    Vector wide_noise(size), narrow_noise(size);
    for (Index i = 0; i < size; ++i) wide_noise[i] = rng.normal();
    for (Index i = 0; i < size; ++i) narrow_noise[i] = rng.normal();
    Vector y(size);
    for (Index i = 0; i < size; ++i)
        y[i] = f[i] + (wide[i] ? wide_noise[i] : 0.1 * narrow_noise[i]);
    return cut_blocks(x, y, f, false);
}

double fit_theta(const Vector& theta_true, const Vector& theta_hat) {
    if (theta_true.size() != theta_hat.size()) throw DataError("fit: lengths disagree");
    const double denom = theta_true.norm();
    if (denom == 0.0) throw DataError("fit: reference signal is zero");
    return 100.0 * (1.0 - (theta_true - theta_hat).norm() / denom);
}

double fit_regression(const Vector& y_test, const Vector& prediction) {
    if (y_test.size() != prediction.size()) throw DataError("fit: lengths disagree");
    const double denom = (y_test.array() - y_test.mean()).matrix().norm();
    if (denom == 0.0) throw DataError("fit: reference signal is constant");
    return 100.0 * (1.0 - (y_test - prediction).norm() / denom);
}

double fit_classification(const Vector& labels, const Vector& predictions) {
    if (labels.size() != predictions.size()) throw DataError("fit: lengths disagree");
    if (labels.size() == 0) throw DataError("fit: empty test block");
    Index correct = 0;
    for (Index i = 0; i < labels.size(); ++i)
        if (predictions[i] * labels[i] > 0.0) ++correct;
    return 100.0 * double(correct) / double(labels.size());
}

// ---- configuration ----

std::vector<EstimatorSpec> default_estimators(const std::string& experiment) {
    std::vector<EstimatorSpec> out;
    if (experiment == "inverse_mc") {
        EstimatorSpec ridge;
        ridge.name = "ridge";
        ridge.kind = EstimatorSpec::Kind::LinearSure;
        ridge.fix_nu = true;
        ridge.nu = 1.0;
        ridge.nu_max = 500.0;
        EstimatorSpec boost = ridge;
        boost.name = "boost";
        boost.fix_nu = false;
        out = {ridge, boost};
    } else if (experiment == "classify_mixture") {
        EstimatorSpec svc;
        svc.name = "svc";
        svc.kind = EstimatorSpec::Kind::RkhsWeak;
        svc.loss = LossSpec::hinge();
        svc.fix_gamma = false;
        svc.solve_tol = 1e-6;
        svc.solve_max_iter = 20000;
        EstimatorSpec classic;
        classic.name = "classic";
        classic.kind = EstimatorSpec::Kind::RkhsClassic;
        classic.loss = LossSpec::l1();
        classic.gamma = 1000.0;
        classic.rounds_cap = 400;
        classic.solve_tol = 1e-6;
        classic.solve_max_iter = 20000;
        EstimatorSpec boostker = classic;
        boostker.name = "boostker";
        boostker.kind = EstimatorSpec::Kind::RkhsBoost;
        boostker.nu_max = 600.0;
        boostker.bracket_tol = 1e-2;
        out = {svc, classic, boostker};
    } else if (experiment == "franke" || experiment == "custom_csv") {
        EstimatorSpec gauss;
        gauss.name = "gauss";
        gauss.kind = EstimatorSpec::Kind::RkhsWeak;
        gauss.loss = LossSpec::l1();
        gauss.fix_gamma = false;
        gauss.solve_tol = 1e-7;
        gauss.solve_max_iter = 20000;
        EstimatorSpec boostker = gauss;
        boostker.name = "boostker";
        boostker.kind = EstimatorSpec::Kind::RkhsBoost;
        boostker.nu_max = 3000.0;
        boostker.bracket_tol = 0.05;
        boostker.parsimony = true;
        out = {gauss, boostker};
    } else {
        throw ConfigError("config: unknown experiment \"" + experiment + "\"");
    }
    return out;
}

namespace {

void expect_keys(const json& obj, std::initializer_list<const char*> known,
                 const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
    }
}

double to_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

Index to_count(const json& v, const std::string& where) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError(where + ": expected a whole number");
    const auto n = v.get<long long>();
    if (n < 1) throw ConfigError(where + ": must be at least 1");
    return Index(n);
}

std::string to_text(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + ": expected a string");
    return v.get<std::string>();
}

bool to_flag(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
    return v.get<bool>();
}

EstimatorSpec parse_estimator(const json& e, const std::string& where) {
    if (!e.is_object()) throw ConfigError(where + ": expected an object");
    expect_keys(e,
                {"name", "scheme", "loss", "bandwidth", "sigma2", "gamma", "gamma_grid", "nu",
                 "nu_max", "rounds_cap", "bracket_tol", "tuning", "parsimony", "solve_tol",
                 "solve_max_iter"},
                where);
    EstimatorSpec s;
    if (!e.contains("name")) throw ConfigError(where + ": estimator needs a name");
    s.name = to_text(e["name"], where + ".name");
    if (!e.contains("scheme")) throw ConfigError(where + ": estimator needs a scheme");
    const std::string scheme = to_text(e["scheme"], where + ".scheme");
    if (scheme == "ridge") {
        s.kind = EstimatorSpec::Kind::LinearSure;
        s.fix_nu = true;
        s.nu = 1.0;
        s.nu_max = 500.0;
    } else if (scheme == "boost-sure") {
        s.kind = EstimatorSpec::Kind::LinearSure;
        s.nu_max = 500.0;
    } else if (scheme == "weak") {
        s.kind = EstimatorSpec::Kind::RkhsWeak;
    } else if (scheme == "classic") {
        s.kind = EstimatorSpec::Kind::RkhsClassic;
    } else if (scheme == "boost-kernel") {
        s.kind = EstimatorSpec::Kind::RkhsBoost;
    } else {
        throw ConfigError(where + ": unknown scheme \"" + scheme + "\"");
    }
    if (e.contains("loss")) s.loss = parse_loss(to_text(e["loss"], where + ".loss"));
    if (e.contains("bandwidth")) s.bandwidth = to_number(e["bandwidth"], where + ".bandwidth");
    if (e.contains("sigma2")) s.sigma2 = to_number(e["sigma2"], where + ".sigma2");
    if (e.contains("gamma") && e.contains("gamma_grid"))
        throw ConfigError(where + ": give gamma or gamma_grid, not both");
    if (e.contains("gamma")) s.gamma = to_number(e["gamma"], where + ".gamma");
    if (e.contains("gamma_grid")) {
        const json& g = e["gamma_grid"];
        if (!g.is_object()) throw ConfigError(where + ".gamma_grid: expected an object");
        expect_keys(g, {"lo", "hi", "count"}, where + ".gamma_grid");
        s.fix_gamma = false;
        if (g.contains("lo")) s.grid_lo = to_number(g["lo"], where + ".gamma_grid.lo");
        if (g.contains("hi")) s.grid_hi = to_number(g["hi"], where + ".gamma_grid.hi");
        if (g.contains("count")) s.grid_count = to_count(g["count"], where + ".gamma_grid.count");
    }
    if (e.contains("nu")) {
        s.fix_nu = true;
        s.nu = to_number(e["nu"], where + ".nu");
    }
    if (e.contains("nu_max")) s.nu_max = to_number(e["nu_max"], where + ".nu_max");
    if (e.contains("rounds_cap")) s.rounds_cap = to_count(e["rounds_cap"], where + ".rounds_cap");
    if (e.contains("bracket_tol"))
        s.bracket_tol = to_number(e["bracket_tol"], where + ".bracket_tol");
    if (e.contains("tuning")) {
        const std::string t = to_text(e["tuning"], where + ".tuning");
        if (t == "sure") {
            if (s.kind != EstimatorSpec::Kind::LinearSure)
                throw ConfigError(where + ": tuning \"sure\" needs a ridge or boost-sure scheme");
        } else if (t == "holdout:golden") {
            s.exhaustive_nu = false;
        } else if (t == "holdout:grid") {
            s.exhaustive_nu = true;
        } else {
            throw ConfigError(where + ": unknown tuning strategy \"" + t + "\"");
        }
    }
    if (e.contains("parsimony")) s.parsimony = to_flag(e["parsimony"], where + ".parsimony");
    if (e.contains("solve_tol")) s.solve_tol = to_number(e["solve_tol"], where + ".solve_tol");
    if (e.contains("solve_max_iter"))
        s.solve_max_iter = to_count(e["solve_max_iter"], where + ".solve_max_iter");
    return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(origin + ": not valid JSON");
    if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
    expect_keys(j,
                {"schema_version", "experiment", "mode", "runs", "seed", "out", "estimators",
                 "csv", "schema", "detrend"},
                origin);
    ExperimentConfig c;
    if (j.contains("schema_version")) {
        c.schema_version = to_count(j["schema_version"], origin + ".schema_version");
        if (c.schema_version != 1)
            throw ConfigError(origin + ": unsupported schema_version");
    }
    if (!j.contains("experiment")) throw ConfigError(origin + ": missing experiment");
    c.experiment = to_text(j["experiment"], origin + ".experiment");
    if (c.experiment != "inverse_mc" && c.experiment != "classify_mixture" &&
        c.experiment != "franke" && c.experiment != "custom_csv")
        throw ConfigError(origin + ": unknown experiment \"" + c.experiment + "\"");
    if (j.contains("mode")) {
        c.mode = to_text(j["mode"], origin + ".mode");
        if (c.mode != "lowpass" && c.mode != "white")
            throw ConfigError(origin + ": mode must be lowpass or white");
    }
    if (j.contains("runs")) c.runs = to_count(j["runs"], origin + ".runs");
    if (j.contains("seed")) {
        const json& s = j["seed"];
        if (!s.is_number_integer() && !s.is_number_unsigned())
            throw ConfigError(origin + ".seed: expected a whole number");
        c.seed = s.get<std::uint64_t>();
    }
    if (j.contains("out")) c.out = to_text(j["out"], origin + ".out");
    if (j.contains("csv")) c.csv = to_text(j["csv"], origin + ".csv");
    if (j.contains("schema")) c.schema = to_text(j["schema"], origin + ".schema");
    if (j.contains("detrend")) c.detrend = to_flag(j["detrend"], origin + ".detrend");
    if (j.contains("estimators")) {
        const json& list = j["estimators"];
        if (!list.is_array()) throw ConfigError(origin + ".estimators: expected an array");
        for (std::size_t i = 0; i < list.size(); ++i)
            c.estimators.push_back(
                parse_estimator(list[i], origin + ".estimators[" + std::to_string(i) + "]"));
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot read config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

// ---- experiment harness ----

namespace {

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * double(v.size() - 1);
    const Index i = Index(pos);
    const double frac = pos - double(i);
    if (i + 1 >= Index(v.size())) return v.back();
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

std::string iso_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string format_cell(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct RunContext {
    const ExperimentConfig* config = nullptr;
    const EstimationProblem* custom = nullptr;
};

RunRecord fit_one(const RunContext& ctx, const EstimatorSpec& spec, Index run) {
    const ExperimentConfig& config = *ctx.config;
    const std::uint64_t seed = run_seed(config.seed, std::uint64_t(run));
    RunRecord rec;
    rec.run = run;
    rec.estimator = spec.name;
    rec.kind = spec.kind;

    if (config.experiment == "inverse_mc") {
        const DesignMode mode =
            config.mode == "white" ? DesignMode::White : DesignMode::Lowpass;
        const InverseProblem prob = gen_inverse_problem(seed, mode);
        const Matrix kernel = Matrix::Identity(prob.design.cols(), prob.design.cols());
        const LinearFitResult res =
            run_linear_sure(spec, prob.design, kernel, prob.y, prob.sigma2);
        rec.fit = fit_theta(prob.theta_true, res.theta);
        rec.lambda = res.tune.lambda;
        rec.nu = res.tune.nu;
        rec.val_score = res.tune.objective;
        rec.candidates = res.tune.diagnostics.grid_evaluations;
        return rec;
    }

    if (config.experiment == "custom_csv" && ctx.custom->design.size() > 0) {
        const EstimationProblem& prob = *ctx.custom;
        const Matrix kernel = Matrix::Identity(prob.design.cols(), prob.design.cols());
        const double sigma2 = estimate_sigma2(prob.design, prob.y);
        const LinearFitResult res = run_linear_sure(spec, prob.design, kernel, prob.y, sigma2);
        rec.fit = fit_regression(prob.y, res.fitted);
        rec.lambda = res.tune.lambda;
        rec.nu = res.tune.nu;
        rec.val_score = res.tune.objective;
        rec.candidates = res.tune.diagnostics.grid_evaluations;
        return rec;
    }

    BenchSplit data;
    if (config.experiment == "classify_mixture") {
        data = gen_classify_mixture(seed);
    } else if (config.experiment == "franke") {
        data = gen_franke(seed);
    } else {
        const EstimationProblem& prob = *ctx.custom;
        Matrix x = prob.inputs;
        Vector y = prob.y;
        data = cut_blocks(x, y, y, prob.labels);
    }

    const KernelFitResult res = run_kernel_estimator(spec, data.split);
    rec.fit = data.split.labels ? fit_classification(data.truth, res.test_prediction)
                                : fit_regression(data.truth, res.test_prediction);
    rec.gamma = res.gamma;
    rec.nu = res.nu;
    rec.val_score = res.val_score;
    rec.candidates = res.candidates;
    rec.solver_calls = res.usage.calls;
    rec.solver_iterations = res.usage.iterations;
    return rec;
}

}  // namespace

FitReport run_experiment(const ExperimentConfig& config) {
    if (config.runs < 1) throw ConfigError("config: runs must be at least 1");
    std::vector<EstimatorSpec> estimators = config.estimators;

    EstimationProblem custom;
    if (config.experiment == "custom_csv") {
        if (config.csv.empty() || config.schema.empty())
            throw ConfigError("config: custom_csv needs csv and schema");
        custom = ingest_csv(read_csv(config.csv), parse_schema(config.schema), config.detrend);
        if (estimators.empty())
            estimators = default_estimators(custom.design.size() > 0 ? "inverse_mc" : "franke");
    } else if (estimators.empty()) {
        estimators = default_estimators(config.experiment);
    }
    if (estimators.empty()) throw ConfigError("config: no estimators");
    for (std::size_t i = 0; i < estimators.size(); ++i)
        for (std::size_t k = i + 1; k < estimators.size(); ++k)
            if (estimators[i].name == estimators[k].name)
                throw ConfigError("config: duplicate estimator name \"" + estimators[i].name +
                                  "\"");
    const bool linear_experiment =
        config.experiment == "inverse_mc" ||
        (config.experiment == "custom_csv" && custom.design.size() > 0);
    for (const EstimatorSpec& s : estimators) {
        const bool linear = s.kind == EstimatorSpec::Kind::LinearSure;
        if (linear != linear_experiment)
            throw ConfigError(linear_experiment
                                  ? "config: this experiment needs ridge or boost-sure schemes"
                                  : "config: ridge and boost-sure schemes need a design matrix");
    }

    const Index n_est = Index(estimators.size());
    std::vector<RunRecord> records(std::size_t(config.runs * n_est));
    RunContext ctx{&config, &custom};

    const auto t_start = std::chrono::steady_clock::now();
    std::atomic<Index> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        for (;;) {
            const Index r = next.fetch_add(1);
            if (r >= config.runs) return;
            try {
                for (Index e = 0; e < n_est; ++e) {
                    const auto t0 = std::chrono::steady_clock::now();
                    RunRecord rec = fit_one(ctx, estimators[std::size_t(e)], r);
                    rec.seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                    records[std::size_t(r * n_est + e)] = std::move(rec);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> guard(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    const Index hw = Index(std::max(1u, std::thread::hardware_concurrency()));
    const Index n_workers = std::min(hw, config.runs);
    std::vector<std::thread> pool;
    for (Index w = 0; w + 1 < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    // ---- assembly, order-stable ----
    json payload;
    payload["schema_version"] = 1;
    payload["experiment"] = config.experiment;
    if (config.experiment == "inverse_mc") payload["mode"] = config.mode;
    payload["runs"] = config.runs;
    payload["seed"] = config.seed;
    json names = json::array();
    for (const EstimatorSpec& s : estimators) names.push_back(s.name);
    payload["estimators"] = names;

    json per_run = json::array();
    for (const RunRecord& rec : records) {
        json row;
        row["run"] = rec.run;
        row["estimator"] = rec.estimator;
        row["fit"] = rec.fit;
        row["nu"] = rec.nu;
        if (rec.kind == EstimatorSpec::Kind::LinearSure) {
            row["lambda"] = rec.lambda;
            row["risk"] = rec.val_score;
            row["risk_evaluations"] = rec.candidates;
        } else {
            row["gamma"] = rec.gamma;
            row["val_score"] = rec.val_score;
            row["candidates"] = rec.candidates;
            row["solver_calls"] = rec.solver_calls;
            row["solver_iterations"] = rec.solver_iterations;
        }
        per_run.push_back(row);
    }
    payload["per_run"] = per_run;

    json summary;
    double classic_calls = -1.0, boost_calls = -1.0;
    for (Index e = 0; e < n_est; ++e) {
        const EstimatorSpec& spec = estimators[std::size_t(e)];
        std::vector<double> fits;
        double sum_fit = 0.0, sum_calls = 0.0, sum_nu = 0.0;
        for (Index r = 0; r < config.runs; ++r) {
            const RunRecord& rec = records[std::size_t(r * n_est + e)];
            fits.push_back(rec.fit);
            sum_fit += rec.fit;
            sum_calls += double(rec.solver_calls);
            sum_nu += rec.nu;
        }
        json s;
        s["mean_fit"] = sum_fit / double(config.runs);
        s["median_fit"] = quantile(fits, 0.5);
        s["q1_fit"] = quantile(fits, 0.25);
        s["q3_fit"] = quantile(fits, 0.75);
        s["mean_nu"] = sum_nu / double(config.runs);
        s["mean_solver_calls"] = sum_calls / double(config.runs);
        summary[spec.name] = s;
        if (spec.kind == EstimatorSpec::Kind::RkhsClassic)
            classic_calls = sum_calls / double(config.runs);
        if (spec.kind == EstimatorSpec::Kind::RkhsBoost)
            boost_calls = sum_calls / double(config.runs);
    }
    if (classic_calls > 0.0 && boost_calls >= 0.0)
        payload["call_ratio"] = boost_calls / classic_calls;
    payload["summary"] = summary;

    json meta;
    meta["created"] = iso_now();
    meta["wall_seconds"] = wall;
    json run_seconds = json::array();
    for (Index r = 0; r < config.runs; ++r) {
        double s = 0.0;
        for (Index e = 0; e < n_est; ++e) s += records[std::size_t(r * n_est + e)].seconds;
        run_seconds.push_back(s);
    }
    meta["run_seconds"] = run_seconds;

    FitReport report;
    report.payload = payload.dump(2);
    report.meta = meta.dump(2);
    report.records = std::move(records);

    // ---- console summary ----
    std::cout << config.experiment;
    if (config.experiment == "inverse_mc") std::cout << " (" << config.mode << ")";
    std::cout << ": " << config.runs << " runs, seed " << config.seed << "\n";
    for (Index e = 0; e < n_est; ++e) {
        const std::string& name = estimators[std::size_t(e)].name;
        const json& s = summary[name];
        std::cout << "  " << std::left << std::setw(12) << name << std::right
                  << " median fit " << std::fixed << std::setprecision(2)
                  << s["median_fit"].get<double>() << "  mean fit "
                  << s["mean_fit"].get<double>() << "  mean solver calls "
                  << std::setprecision(1) << s["mean_solver_calls"].get<double>()
                  << std::defaultfloat << std::setprecision(6) << "\n";
    }
    if (classic_calls > 0.0 && boost_calls >= 0.0)
        std::cout << "  solver calls, one-shot over iterative: " << std::fixed
                  << std::setprecision(3) << boost_calls / classic_calls << std::defaultfloat
                  << std::setprecision(6) << "\n";

    // ---- files ----
    if (!config.out.empty()) {
        std::filesystem::create_directories(config.out);
        const std::filesystem::path dir(config.out);
        {
            std::ofstream f(dir / "report.json");
            if (!f) throw DataError(config.out + ": cannot write report.json");
            json full;
            full["meta"] = json::parse(report.meta);
            full["payload"] = json::parse(report.payload);
            f << full.dump(2) << "\n";
        }
        {
            std::ofstream f(dir / "runs.csv");
            if (!f) throw DataError(config.out + ": cannot write runs.csv");
            f << "run,estimator,fit,lambda,gamma,nu,val_score,candidates,solver_calls,"
                 "solver_iterations\n";
            for (const RunRecord& rec : report.records) {
                const bool linear = rec.kind == EstimatorSpec::Kind::LinearSure;
                f << rec.run << ',' << rec.estimator << ',' << format_cell(rec.fit) << ',';
                f << (linear ? format_cell(rec.lambda) : std::string()) << ',';
                f << (linear ? std::string() : format_cell(rec.gamma)) << ',';
                f << format_cell(rec.nu) << ',' << format_cell(rec.val_score) << ','
                  << rec.candidates << ',' << rec.solver_calls << ',' << rec.solver_iterations
                  << "\n";
            }
        }
    }
    return report;
}

}  // namespace kboost
