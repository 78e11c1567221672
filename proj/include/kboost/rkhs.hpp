#pragma once

#include <functional>

#include "kboost/kernels.hpp"
#include "kboost/losses.hpp"
#include "kboost/solver.hpp"

namespace kboost {

// Function estimation over the span of the kernel sections at the training
// inputs. gamma plays the role of sigma^2/lambda for the weak learner.
struct RkhsProblem {
    Matrix gram;
    KernelSpec kernel;  // carries the inputs when pointwise-evaluable
    Vector y;           // outputs, or +-1 labels for hinge
    LossSpec loss;
    double gamma = 1.0;

    static RkhsProblem make(const KernelSpec& kernel, Vector y, LossSpec loss, double gamma) {
        RkhsProblem p;
        p.gram = build_kernel(kernel);
        p.kernel = kernel;
        p.y = std::move(y);
        p.loss = loss;
        p.gamma = gamma;
        return p;
    }
};

// f(x) = sum_i coefficients_i * kernel(x_i, x)
struct FunctionEstimate {
    Vector coefficients;
    KernelSpec kernel;
};

// Spectral factorization of the gram matrix, reusable across a whole
// hyperparameter sweep. Only directions above the rank cutoff are kept.
struct GramFactor {
    Matrix w;    // retained eigenvectors
    Vector mu;   // matching eigenvalues, ascending
    static GramFactor make(const Matrix& gram);
};

// Aggregated solver accounting across one estimation workflow; benchmarks
// compare these counts between the iterative and the one-shot path.
struct SolverUsage {
    Index calls = 0;
    Index iterations = 0;
    bool all_converged = true;
};

// min sum_i loss(y_i - (K c)_i) + gamma c' K c; closed form (K + gamma I)^{-1} y
// for the quadratic loss. The GramFactor overloads take a precomputed
// factorization of p.gram; keeping it consistent is the caller's job.
FunctionEstimate weak_learner_rkhs(const RkhsProblem& p, SolverUsage* usage = nullptr,
                                   const SolveOptions& opts = {});
FunctionEstimate weak_learner_rkhs(const RkhsProblem& p, const GramFactor& fac,
                                   SolverUsage* usage = nullptr, const SolveOptions& opts = {});

// Iterative boosting with the RKHS weak learner on running residuals.
// Rejects hinge: residuals after the first round are no longer +-1 labels.
// on_round, when set, sees (rounds done so far, accumulated coefficients)
// after every round, starting at 1.
FunctionEstimate boost_rkhs_classic(const RkhsProblem& p, Index rounds,
                                    SolverUsage* usage = nullptr, const SolveOptions& opts = {},
                                    const std::function<void(Index, const Vector&)>& on_round = {});

// One-shot boosting through the boosting kernel built from lambda*K: solve
// for b with the boosting-kernel regularizer, then back-map the coefficients
// through the kernel pseudo-inverse, c = K^+ yfit. nu = 1 is handed to the
// weak learner so the two agree exactly. dual_state, when set, warm-starts
// the solver from its contents (empty means cold) and receives this solve's
// dual back; a hyperparameter sweep chains solves through it.
FunctionEstimate boost_rkhs_kernel(const RkhsProblem& p, double lambda, double sigma2, double nu,
                                   SolverUsage* usage = nullptr, const SolveOptions& opts = {});
FunctionEstimate boost_rkhs_kernel(const RkhsProblem& p, const GramFactor& fac, double lambda,
                                   double sigma2, double nu, SolverUsage* usage = nullptr,
                                   const SolveOptions& opts = {}, Vector* dual_state = nullptr);

// Same construction with the hinge loss on margins; p.y holds the labels.
FunctionEstimate boost_svc(const RkhsProblem& p, double lambda, double sigma2, double nu,
                           SolverUsage* usage = nullptr, const SolveOptions& opts = {});
FunctionEstimate boost_svc(const RkhsProblem& p, const GramFactor& fac, double lambda,
                           double sigma2, double nu, SolverUsage* usage = nullptr,
                           const SolveOptions& opts = {}, Vector* dual_state = nullptr);

Vector predict(const FunctionEstimate& f, const Matrix& points);

}  // namespace kboost
