#pragma once

#include "kboost/rkhs.hpp"
#include "kboost/tuning.hpp"

#include <string>

namespace kboost {

// One benchmark contender: which estimation scheme to run plus every knob it
// needs. Grid fields drive gamma cross-validation, nu fields the search over
// boosting rounds; schemes ignore the fields that do not apply to them.
struct EstimatorSpec {
    enum class Kind {
        LinearSure,   // observation-model smoother tuned by unbiased risk
        RkhsWeak,     // one round of the kernel weak learner
        RkhsClassic,  // iterative boosting, integer rounds picked on holdout
        RkhsBoost,    // one-shot boosting kernel, continuous nu on holdout
    };

    std::string name;
    Kind kind = Kind::RkhsWeak;
    LossSpec loss;

    double bandwidth = 10.0;  // gaussian kernel width on the inputs
    double sigma2 = 1.0;
    double gamma = 1000.0;    // sigma2/lambda when fixed
    bool fix_gamma = true;    // false: cross-validate gamma on the log grid
    double grid_lo = 0.01;
    double grid_hi = 100.0;
    Index grid_count = 20;

    bool fix_nu = false;
    double nu = 1.0;
    double nu_max = 600.0;      // search box for the one-shot scheme
    Index rounds_cap = 400;     // exploration budget of the iterative scheme
    double bracket_tol = 1e-3;  // golden-section tolerance on log nu
    bool exhaustive_nu = false; // step scan instead of golden section
    bool parsimony = false;     // prefer the fewest rounds within one SE

    double solve_tol = 1e-8;
    Index solve_max_iter = 50000;
};

// Train fits, validation selects, train+validation refits; the test block
// stays out of every decision.
struct SplitData {
    Matrix x_train;
    Vector y_train;
    Matrix x_val;
    Vector y_val;
    Matrix x_test;
    bool labels = false;  // +-1 classes; selection counts sign errors
};

struct KernelFitResult {
    Vector test_prediction;
    double gamma = 0.0;
    double nu = 1.0;
    double val_score = 0.0;  // selection score of the chosen candidate
    Index candidates = 0;    // hyperparameter points scored on validation
    SolverUsage usage;
};

KernelFitResult run_kernel_estimator(const EstimatorSpec& spec, const SplitData& data);

// Observation-model path: tune (lambda, nu) by unbiased risk on the spectral
// model, smooth y in one shot, and pull the coefficient estimate back through
// the design pseudo-inverse.
struct LinearFitResult {
    Vector theta;
    Vector fitted;
    TuneResult tune;
};

LinearFitResult run_linear_sure(const EstimatorSpec& spec, const Matrix& design,
                                const Matrix& kernel, const Vector& y, double sigma2);

}  // namespace kboost
