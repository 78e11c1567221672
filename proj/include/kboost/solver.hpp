#pragma once

#include "kboost/kernels.hpp"
#include "kboost/losses.hpp"

#include <vector>

namespace kboost {

// min over x of loss(residuals or margins of design*x) + regularizer.
// weight empty means the regularizer is x'x; otherwise it is x'*weight*x
// with weight PSD. For hinge the data vector holds the +-1 labels and the
// loss sees margins y_i*(design*x)_i; every other loss sees y - design*x.
struct CompositeProblem {
    LossSpec loss;
    Matrix design;
    Matrix weight;
    Vector y;
};

struct SolveOptions {
    double tol = 1e-8;
    Index max_iter = 50000;
    bool force_iterative = false;    // skip the quadratic closed form
    const Vector* warm_start = nullptr;  // dual vector from a related solve
    double split_rho = 1.0;          // coupling weight of the splitting method
};

struct SolveResult {
    Vector minimizer;
    Vector fitted;                   // design * minimizer
    double objective = 0.0;
    Index iterations = 0;
    double optimality_residual = 0.0;
    bool converged = false;
    bool warm_started = false;
    Vector dual;                     // enables warm starts across grids
    std::vector<double> objective_trace;  // best value seen, per check
};

SolveResult solve(const CompositeProblem& problem, const SolveOptions& opts = {});

// Same objective with the design given in factored form q*diag(s), q with
// orthonormal columns. The splitting method used here solves its quadratic
// subproblem exactly per component, so entries of s spanning hundreds of
// orders of magnitude (boosting factors at large nu) cost nothing, where a
// gradient step sized by max(s)^2 would stall.
SolveResult solve_factored(const LossSpec& loss, const Matrix& q, const Vector& s,
                           const Vector& y, const SolveOptions& opts = {});

// Change of variables turning min loss(y - G b) + b'*M*b into the canonical
// min loss(y - design*a) + a'a. Minimum-norm back-map b = back*a. Requires
// row(G) inside range(M); throws otherwise since the objective would be
// unbounded below along the uncovered directions.
struct Reduction {
    Matrix design;
    Matrix back;
};
Reduction reduce_weighted(const Matrix& G, const Matrix& M);

// Linear-model boosting estimate with a general loss: factor the boosting
// kernel, solve the canonical problem, back-map theta through the
// pseudo-inverse of U. Rank-zero kernels (or lambda = 0) give the zero
// estimate with the degenerate flag set.
struct ThetaEstimate {
    Vector theta;
    Vector fitted;
    bool degenerate = false;
    SolveResult stats;
};
ThetaEstimate estimate_theta(const BoostingKernel& bk, const LossSpec& loss, const Vector& y,
                             const SolveOptions& opts = {});

}  // namespace kboost
