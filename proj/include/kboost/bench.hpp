#pragma once

#include "kboost/csv.hpp"
#include "kboost/estimators.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kboost {

// Deterministic generator: a splitmix64 counter stream mapped to doubles.
// Identical seeds give identical draw sequences on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_++); }

    // uniform on [0, 1) with 53 random bits
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double normal();

    // uniform on {0, ..., n-1}, rejection sampled so every value is equally
    // likely
    Index integer(Index n);

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ---- synthetic problems ----

enum class DesignMode { White, Lowpass };

struct InverseProblem {
    Matrix design;      // n x m
    Vector theta_true;  // fixed smooth test signal
    Vector y;           // noisy outputs
    double sigma2 = 0.0;  // true noise variance, variance of U*theta over 10
};

// White mode fills the design with iid standard normals; lowpass builds a
// causal convolution design whose columns are shifts of one low-pass-filtered
// normal draw (band edge 0.95 rad/sample, windowed-sinc of order 6).
InverseProblem gen_inverse_problem(std::uint64_t seed, DesignMode mode, Index n = 200,
                                   Index m = 50);

// Dataset already cut into the 50/25/25 protocol blocks. truth belongs to the
// test block: its labels for classification, noiseless values for regression.
struct BenchSplit {
    SplitData split;
    Vector truth;
};

// Two-class mixture in the plane: 10 cluster means per class from N([1 0], I)
// and N([0 1], I), labels +-1 with probability 1/2, points from the picked
// cluster with covariance I/5.
BenchSplit gen_classify_mixture(std::uint64_t seed, Index size = 500);

// Bivariate four-exponential test surface on the unit square.
double franke_function(double x, double y);

// Uniform inputs on [0,1]^2; outputs carry mixture noise, 0.9 N(0, 0.1^2) +
// 0.1 N(0, 1); the test block keeps the noiseless surface values.
BenchSplit gen_franke(std::uint64_t seed, Index size = 1000);

// ---- fit metrics ----

// 100 * (1 - |truth - estimate| / |truth|)
double fit_theta(const Vector& theta_true, const Vector& theta_hat);

// 100 * (1 - |truth - prediction| / |truth - mean(truth)|)
double fit_regression(const Vector& y_test, const Vector& prediction);

// percent of matching signs; a prediction of exactly zero matches neither
// label
double fit_classification(const Vector& labels, const Vector& predictions);

// ---- experiment harness ----

struct ExperimentConfig {
    Index schema_version = 1;
    std::string experiment;        // inverse_mc | classify_mixture | franke | custom_csv
    std::string mode = "lowpass";  // inverse_mc only: lowpass | white
    Index runs = 20;
    std::uint64_t seed = 1;
    std::string out;  // directory for report.json and runs.csv; empty writes nothing
    std::vector<EstimatorSpec> estimators;  // empty picks the experiment defaults
    std::string csv;     // custom_csv: data file
    std::string schema;  // custom_csv: column mapping
    bool detrend = false;
};

// The canonical contender list of each experiment.
std::vector<EstimatorSpec> default_estimators(const std::string& experiment);

ExperimentConfig parse_config(const std::string& text, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

struct RunRecord {
    Index run = 0;
    std::string estimator;
    EstimatorSpec::Kind kind = EstimatorSpec::Kind::RkhsWeak;
    double fit = 0.0;
    double lambda = 0.0;  // risk-tuned scheme only
    double gamma = 0.0;
    double nu = 1.0;
    double val_score = 0.0;
    Index candidates = 0;
    Index solver_calls = 0;
    Index solver_iterations = 0;
    double seconds = 0.0;  // reported in the metadata block only
};

// payload holds the deterministic report body, byte for byte as written to
// report.json; meta holds timing and is allowed to differ between repeats.
struct FitReport {
    std::string payload;
    std::string meta;
    std::vector<RunRecord> records;
};

// Runs the configured Monte Carlo, prints the per-estimator summary, and
// emits report.json plus runs.csv under config.out when set.
FitReport run_experiment(const ExperimentConfig& config);

}  // namespace kboost
