#include "kboost/rkhs.hpp"

#include <cmath>
#include <sstream>

namespace kboost {

namespace {

void check_problem(const RkhsProblem& p) {
    const Index n = p.gram.rows();
    if (n == 0 || p.gram.cols() != n) throw ConfigError("rkhs: gram matrix must be square");
    if (p.y.size() != n) throw ConfigError("rkhs: data length must match the gram size");
    if (!(p.gamma > 0.0)) throw ConfigError("rkhs: gamma must be positive");
    const double scale = p.gram.cwiseAbs().maxCoeff();
    if ((p.gram - p.gram.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale && scale > 0.0)
        throw ConfigError("rkhs: gram matrix is not symmetric");
}

void track(SolverUsage* usage, const SolveResult& res) {
    if (usage == nullptr) return;
    ++usage->calls;
    usage->iterations += res.iterations;
    usage->all_converged = usage->all_converged && res.converged;
}

// canonical design factor for the weak learner: gram column space scaled so
// the regularizer gamma c'Kc becomes a'a
Vector weak_scales(const GramFactor& ge, double gamma) {
    return (ge.mu.array() / gamma).sqrt();
}

Vector weak_back(const GramFactor& ge, double gamma, const Vector& a) {
    return ge.w * ((ge.mu.array() * gamma).rsqrt() * a.array()).matrix();
}

}  // namespace

GramFactor GramFactor::make(const Matrix& gram) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (gram + gram.transpose()));
    if (eig.info() != Eigen::Success) throw NumericError("rkhs: eigendecomposition failed");
    const Vector& mu = eig.eigenvalues();
    const Index n = mu.size();
    const double top = std::max(mu[n - 1], 0.0);
    if (mu[0] < -1e-10 * top) {
        std::ostringstream os;
        os << "rkhs: gram matrix is not positive semidefinite (most negative eigenvalue "
           << mu[0] << ")";
        throw ConfigError(os.str());
    }
    Index first = 0;
    while (first < n && mu[first] <= kRankTol * top) ++first;
    GramFactor out;
    out.w = eig.eigenvectors().rightCols(n - first);
    out.mu = mu.tail(n - first);
    return out;
}

FunctionEstimate weak_learner_rkhs(const RkhsProblem& p, SolverUsage* usage,
                                   const SolveOptions& opts) {
    check_problem(p);
    if (p.loss.kind == LossKind::Quadratic && !opts.force_iterative) {
        FunctionEstimate f;
        f.kernel = p.kernel;
        const Index n = p.gram.rows();
        Matrix shifted = p.gram + p.gamma * Matrix::Identity(n, n);
        f.coefficients = shifted.ldlt().solve(p.y);
        if (usage != nullptr) ++usage->calls;
        return f;
    }
    return weak_learner_rkhs(p, GramFactor::make(p.gram), usage, opts);
}

FunctionEstimate weak_learner_rkhs(const RkhsProblem& p, const GramFactor& fac,
                                   SolverUsage* usage, const SolveOptions& opts) {
    check_problem(p);
    FunctionEstimate f;
    f.kernel = p.kernel;
    const SolveResult res = solve_factored(p.loss, fac.w, weak_scales(fac, p.gamma), p.y, opts);
    track(usage, res);
    f.coefficients = weak_back(fac, p.gamma, res.minimizer);
    return f;
}

FunctionEstimate boost_rkhs_classic(const RkhsProblem& p, Index rounds, SolverUsage* usage,
                                    const SolveOptions& opts,
                                    const std::function<void(Index, const Vector&)>& on_round) {
    check_problem(p);
    if (rounds < 1) throw ConfigError("rkhs boost: need at least one round");
    if (p.loss.kind == LossKind::Hinge)
        throw ConfigError(
            "rkhs boost: hinge cannot be boosted iteratively; residuals after the "
            "first round are no longer +-1 labels");

    const GramFactor fac = GramFactor::make(p.gram);
    const Vector scales = weak_scales(fac, p.gamma);
    SolveOptions local = opts;

    FunctionEstimate f;
    f.kernel = p.kernel;
    f.coefficients = Vector::Zero(p.gram.rows());
    Vector residual = p.y;
    Vector dual;
    for (Index k = 0; k < rounds; ++k) {
        const SolveResult res = solve_factored(p.loss, fac.w, scales, residual, local);
        track(usage, res);
        f.coefficients += weak_back(fac, p.gamma, res.minimizer);
        residual = p.y - p.gram * f.coefficients;
        dual = res.dual;
        local.warm_start = &dual;
        if (on_round) on_round(k + 1, f.coefficients);
    }
    return f;
}

namespace {

FunctionEstimate boost_kernel_core(const RkhsProblem& p, const GramFactor& fac, double lambda,
                                   double sigma2, double nu, SolverUsage* usage,
                                   const SolveOptions& opts, Vector* dual_state) {
    check_problem(p);
    if (!(sigma2 > 0.0)) throw ConfigError("rkhs boost: sigma2 must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("rkhs boost: lambda must be nonnegative");
    if (!(nu >= 1.0)) throw ConfigError("rkhs boost: nu must be at least 1");
    if (lambda > 0.0 && std::abs(sigma2 / lambda - p.gamma) > 1e-9 * p.gamma)
        throw ConfigError("rkhs boost: sigma2/lambda disagrees with the problem gamma");

    FunctionEstimate f;
    f.kernel = p.kernel;
    if (lambda == 0.0) {
        f.coefficients = Vector::Zero(p.gram.rows());
        return f;
    }

    // One round is the weak learner exactly; hand it over so the two entry
    // points cannot drift apart numerically.
    if (nu == 1.0) return weak_learner_rkhs(p, fac, usage, opts);

    // Boosting kernel of lambda*K in the gram eigenbasis: the regularized
    // problem in b reduces to the canonical form with design A and the
    // fitted values are yfit = A a.
    const Index r = fac.mu.size();
    Vector bf(r);
    for (Index i = 0; i < r; ++i) {
        const double t = nu * std::log1p(fac.mu[i] / p.gamma);
        if (t > 700.0) throw NumericError("rkhs boost: boosting kernel overflows at this nu");
        bf[i] = std::expm1(t);
    }
    SolveOptions local = opts;
    if (dual_state != nullptr && dual_state->size() > 0) local.warm_start = dual_state;
    const SolveResult res = solve_factored(p.loss, fac.w, bf.cwiseSqrt(), p.y, local);
    track(usage, res);
    if (dual_state != nullptr) *dual_state = res.dual;

    // c = K^+ yfit through the same retained directions
    f.coefficients = fac.w * (fac.w.transpose() * res.fitted).cwiseQuotient(fac.mu);
    return f;
}

}  // namespace

FunctionEstimate boost_rkhs_kernel(const RkhsProblem& p, double lambda, double sigma2, double nu,
                                   SolverUsage* usage, const SolveOptions& opts) {
    if (p.loss.kind == LossKind::Hinge)
        throw ConfigError("rkhs boost: use the classifier entry point for hinge");
    return boost_kernel_core(p, GramFactor::make(p.gram), lambda, sigma2, nu, usage, opts,
                             nullptr);
}

FunctionEstimate boost_rkhs_kernel(const RkhsProblem& p, const GramFactor& fac, double lambda,
                                   double sigma2, double nu, SolverUsage* usage,
                                   const SolveOptions& opts, Vector* dual_state) {
    if (p.loss.kind == LossKind::Hinge)
        throw ConfigError("rkhs boost: use the classifier entry point for hinge");
    return boost_kernel_core(p, fac, lambda, sigma2, nu, usage, opts, dual_state);
}

namespace {

void check_labels(const Vector& y) {
    for (Index i = 0; i < y.size(); ++i)
        if (y[i] != 1.0 && y[i] != -1.0) throw DataError("svc: labels must be +-1");
}

}  // namespace

FunctionEstimate boost_svc(const RkhsProblem& p, double lambda, double sigma2, double nu,
                           SolverUsage* usage, const SolveOptions& opts) {
    if (p.loss.kind != LossKind::Hinge) throw ConfigError("svc: loss must be hinge");
    check_labels(p.y);
    return boost_kernel_core(p, GramFactor::make(p.gram), lambda, sigma2, nu, usage, opts,
                             nullptr);
}

FunctionEstimate boost_svc(const RkhsProblem& p, const GramFactor& fac, double lambda,
                           double sigma2, double nu, SolverUsage* usage,
                           const SolveOptions& opts, Vector* dual_state) {
    if (p.loss.kind != LossKind::Hinge) throw ConfigError("svc: loss must be hinge");
    check_labels(p.y);
    return boost_kernel_core(p, fac, lambda, sigma2, nu, usage, opts, dual_state);
}

Vector predict(const FunctionEstimate& f, const Matrix& points) {
    return kernel_cross(f.kernel, points, f.kernel.inputs) * f.coefficients;
}

}  // namespace kboost
