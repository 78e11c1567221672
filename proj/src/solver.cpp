#include "kboost/solver.hpp"

#include <cmath>
#include <limits>

namespace kboost {

namespace {

bool is_margin_loss(const LossSpec& loss) { return loss.kind == LossKind::Hinge; }

double fit_objective(const LossSpec& loss, const Vector& y, const Vector& w) {
    if (is_margin_loss(loss)) return loss_value(loss, Vector(y.cwiseProduct(w)));
    return loss_value(loss, Vector(y - w));
}

// prox of s*f at v where f is the loss seen through residuals or margins
Vector fit_prox(const LossSpec& loss, double s, const Vector& y, const Vector& v) {
    const Index n = y.size();
    Vector out(n);
    if (is_margin_loss(loss)) {
        for (Index j = 0; j < n; ++j) out[j] = y[j] * prox(loss, s, y[j] * v[j]);
    } else {
        for (Index j = 0; j < n; ++j) out[j] = y[j] - prox(loss, s, y[j] - v[j]);
    }
    return out;
}

// subdifferential of the j-th loss term as a function of the fitted value
Interval fit_interval(const LossSpec& loss, double y, double w) {
    if (is_margin_loss(loss)) {
        const Interval g = subgradient(loss, y * w);
        return y > 0 ? g : Interval{-g.hi, -g.lo};
    }
    const Interval g = subgradient(loss, y - w);
    return {-g.hi, -g.lo};
}

// Admissible subgradients anywhere within slack of the fitted value. The
// subdifferential map is monotone, so the hull of the two endpoint intervals
// covers the whole band. Without the band the certificate can never settle at
// a kink: the exact subdifferential collapses to one side the moment the
// iterate steps off the corner, while the true dual sits strictly inside.
Interval slack_interval(const LossSpec& loss, double y, double w, double slack) {
    const Interval a = fit_interval(loss, y, w - slack);
    const Interval b = fit_interval(loss, y, w + slack);
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

// Exact minimizer of |y - G a|^2 + a'a through the SVD; stable for any
// conditioning of G since every spectral factor is bounded.
SolveResult solve_quadratic(const Matrix& g, const Vector& y) {
    SolveResult res;
    Eigen::BDCSVD<Matrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    Vector z = svd.matrixU().transpose() * y;
    for (Index i = 0; i < z.size(); ++i) z[i] *= sv[i] / (sv[i] * sv[i] + 1.0);
    res.minimizer = svd.matrixV() * z;
    res.fitted = g * res.minimizer;
    res.objective = (y - res.fitted).squaredNorm() + res.minimizer.squaredNorm();
    res.dual = -2.0 * (y - res.fitted);
    res.optimality_residual =
        (2.0 * res.minimizer + g.transpose() * res.dual).norm();
    res.converged = true;
    res.objective_trace.push_back(res.objective);
    return res;
}

void check_solve_inputs(const LossSpec& loss, Index design_rows, const Vector& y,
                        const SolveOptions& opts) {
    validate(loss);
    const Index n = y.size();
    if (n == 0) throw ConfigError("solve: empty data vector");
    if (design_rows != n) throw ConfigError("solve: design rows must match data length");
    if (!(opts.tol > 0.0)) throw ConfigError("solve: tol must be positive");
    if (opts.max_iter < 1) throw ConfigError("solve: max_iter must be positive");
    if (!(opts.split_rho > 0.0)) throw ConfigError("solve: split_rho must be positive");
    if (opts.warm_start != nullptr && opts.warm_start->size() != n)
        throw ConfigError("solve: warm start length must match data length");
    if (is_margin_loss(loss))
        for (Index j = 0; j < n; ++j)
            if (y[j] != 1.0 && y[j] != -1.0) throw DataError("solve: hinge labels must be +-1");
}

SolveResult zero_design_result(const LossSpec& loss, const Vector& y, Index cols) {
    // zero design: the regularizer alone picks the origin
    SolveResult res;
    res.minimizer = Vector::Zero(cols);
    res.fitted = Vector::Zero(y.size());
    res.objective = fit_objective(loss, y, res.fitted);
    res.dual = Vector::Zero(y.size());
    res.converged = true;
    res.objective_trace.push_back(res.objective);
    return res;
}

// Splitting iteration behind both entry points; q must have orthonormal
// columns. Alternates the exact diagonal quadratic subproblem in a with the
// loss prox in fit space, coupled through the scaled dual d. The
// per-component a-update is indifferent to the spread of s, which reaches
// hundreds of orders of magnitude for boosting factors at large nu; any
// method stepping with max(s)^2 would stall there.
SolveResult admm_core(const LossSpec& loss, const Matrix& q, const Vector& s, const Vector& y,
                      const SolveOptions& opts) {
    const Index n = y.size();
    const Index m = s.size();
    const double rho = opts.split_rho;
    const double scale = 1.0 + y.norm();

    SolveResult res;
    res.warm_started = opts.warm_start != nullptr;

    // amp_i = rho*s_i/(2 + rho*s_i^2) and coef_i = rho/(2 + rho*s_i^2),
    // arranged so forming s^2 can only overflow to inf where the limit is 0
    Vector amp(m), coef(m);
    for (Index i = 0; i < m; ++i) {
        const double av = std::abs(s[i]);
        if (av == 0.0) {
            amp[i] = 0.0;
            coef[i] = 0.0;
        } else if (av > 1.0) {
            amp[i] = 1.0 / (2.0 / (rho * s[i]) + s[i]);
            coef[i] = 1.0 / (2.0 / rho + s[i] * s[i]);
        } else {
            const double den = 2.0 + rho * s[i] * s[i];
            amp[i] = rho * s[i] / den;
            coef[i] = rho / den;
        }
    }

    Vector w = Vector::Zero(n);
    Vector d = Vector::Zero(n);
    if (res.warm_started) {
        d = *opts.warm_start / rho;
        // Resume at the fixed point the dual implies: there v = w and
        // a = -(rho/2) s .* (q'd). A dual carried over from a very different
        // scale vector can reconstruct garbage; start that case from the
        // plain dual-only warm start instead.
        const Vector qd = q.transpose() * d;
        Vector a0(m);
        for (Index i = 0; i < m; ++i) a0[i] = -0.5 * rho * s[i] * qd[i];
        w = q * s.cwiseProduct(a0).eval();
        if (!w.allFinite() || w.norm() > 100.0 * scale) w.setZero();
    }

    // The prox step places rho*d exactly inside the subdifferential at w, so
    // the certificate checks a-side stationarity with an exact dual: project
    // u into the slack-widened subdifferential intervals at w, pull back
    // through q, add the gradient of the quadratic term in the h = s.*a
    // parameterization (the a-space residual would multiply roundoff by s_i).
    // Convergence additionally requires a small primal gap v - w, so the wide
    // early slack cannot fake a pass.
    auto certificate = [&](const Vector& u, const Vector& wfit, const Vector& gap,
                           const Vector& b) {
        Vector g(n);
        for (Index j = 0; j < n; ++j) {
            const double slack = opts.tol * (1.0 + std::abs(y[j])) + std::abs(gap[j]);
            g[j] = slack_interval(loss, y[j], wfit[j], slack).clamp(u[j]);
        }
        Vector r = q.transpose() * g;
        for (Index i = 0; i < m; ++i)
            r[i] = s[i] == 0.0 ? 0.0 : r[i] + 2.0 * coef[i] * b[i];
        return r.norm();
    };

    double best_obj = std::numeric_limits<double>::infinity();
    Vector best_a, best_v, best_u, best_b, best_w, best_gap;
    double last_kkt = std::numeric_limits<double>::infinity();
    Vector a(m), v(n), b(m);

    Index it = 0;
    for (it = 1; it <= opts.max_iter; ++it) {
        b = q.transpose() * (w - d);
        a = amp.cwiseProduct(b);
        v = q * s.cwiseProduct(a).eval();
        w = fit_prox(loss, 1.0 / rho, y, Vector(v + d));
        d += v - w;

        if (it % 5 == 0 || it == opts.max_iter) {
            const double obj = fit_objective(loss, y, v) + a.squaredNorm();
            const Vector u = rho * d;
            const Vector gap = v - w;
            if (obj < best_obj) {
                best_obj = obj;
                best_a = a;
                best_v = v;
                best_u = u;
                best_b = b;
                best_w = w;
                best_gap = gap;
            }
            res.objective_trace.push_back(best_obj);
            last_kkt = certificate(u, w, gap, b);
            if (last_kkt <= opts.tol * scale && gap.norm() <= opts.tol * scale) {
                res.converged = true;
                break;
            }
        }
    }
    res.iterations = std::min(it, opts.max_iter);

    if (res.converged) {
        res.minimizer = a;
        res.fitted = v;
        res.dual = rho * d;
        res.optimality_residual = last_kkt;
        res.objective = fit_objective(loss, y, v) + a.squaredNorm();
    } else {
        // fall back to the best objective seen
        res.minimizer = best_a;
        res.fitted = best_v;
        res.dual = best_u;
        res.objective = best_obj;
        res.optimality_residual = certificate(best_u, best_w, best_gap, best_b);
    }
    return res;
}

}  // namespace

SolveResult solve(const CompositeProblem& problem, const SolveOptions& opts) {
    check_solve_inputs(problem.loss, problem.design.rows(), problem.y, opts);

    if (problem.weight.size() != 0) {
        const Reduction red = reduce_weighted(problem.design, problem.weight);
        CompositeProblem canon{problem.loss, red.design, Matrix(), problem.y};
        SolveResult res = solve(canon, opts);
        res.minimizer = red.back * res.minimizer;
        return res;
    }

    const Matrix& g = problem.design;
    if (problem.loss.kind == LossKind::Quadratic && !opts.force_iterative)
        return solve_quadratic(g, problem.y);
    if (g.cols() == 0 || g.lpNorm<Eigen::Infinity>() == 0.0)
        return zero_design_result(problem.loss, problem.y, g.cols());

    // Route through the splitting core in the SVD basis; the regularizer is
    // rotation invariant, so the canonical minimizer maps back through V.
    Eigen::BDCSVD<Matrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SolveResult res = admm_core(problem.loss, svd.matrixU(), svd.singularValues(), problem.y, opts);
    res.minimizer = svd.matrixV() * res.minimizer;
    return res;
}

SolveResult solve_factored(const LossSpec& loss, const Matrix& q, const Vector& s,
                           const Vector& y, const SolveOptions& opts) {
    check_solve_inputs(loss, q.rows(), y, opts);
    if (q.cols() != s.size()) throw ConfigError("solve: factor widths differ");
    const Index m = s.size();
    if (m == 0 || s.cwiseAbs().maxCoeff() == 0.0) return zero_design_result(loss, y, m);

    if (loss.kind == LossKind::Quadratic && !opts.force_iterative) {
        // s/(s^2+1) in the regime-stable form; never forms s^2
        auto shrink = [](double v) {
            if (v == 0.0) return 0.0;
            return std::abs(v) > 1.0 ? 1.0 / (v + 1.0 / v) : v / (v * v + 1.0);
        };
        SolveResult res;
        Vector z = q.transpose() * y;
        Vector a = z;
        for (Index i = 0; i < m; ++i) a[i] *= shrink(s[i]);
        res.minimizer = a;
        res.fitted = q * s.cwiseProduct(a).eval();
        res.objective = (y - res.fitted).squaredNorm() + a.squaredNorm();
        res.dual = -2.0 * (y - res.fitted);
        Vector r = q.transpose() * res.dual;
        for (Index i = 0; i < m; ++i)
            r[i] = s[i] == 0.0 ? 0.0 : r[i] + 2.0 * (shrink(s[i]) / s[i]) * z[i];
        res.optimality_residual = r.norm();
        res.converged = true;
        res.objective_trace.push_back(res.objective);
        return res;
    }

    return admm_core(loss, q, s, y, opts);
}

Reduction reduce_weighted(const Matrix& G, const Matrix& M) {
    if (M.rows() != M.cols()) throw ConfigError("reduce: regularizer must be square");
    if (G.cols() != M.rows()) throw ConfigError("reduce: design and regularizer sizes differ");
    Matrix sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw NumericError("reduce: eigendecomposition failed");
    const Vector& mu = eig.eigenvalues();
    const Index k = mu.size();
    const double top = std::max(mu[k - 1], 0.0);
    if (mu[0] < -1e-10 * top) throw ConfigError("reduce: regularizer must be PSD");

    Index r = 0;
    for (Index i = 0; i < k; ++i)
        if (mu[i] > kRankTol * top) ++r;
    Matrix wr(k, r);
    Vector inv_sqrt(r);
    for (Index i = k - r, j = 0; i < k; ++i, ++j) {
        wr.col(j) = eig.eigenvectors().col(i);
        inv_sqrt[j] = 1.0 / std::sqrt(mu[i]);
    }

    Reduction red;
    red.back = wr * inv_sqrt.asDiagonal();
    red.design = G * red.back;
    // The change of variables is exact only if every design row lies in
    // range(M); otherwise the original objective is unbounded below.
    const double gap = (G - (G * wr) * wr.transpose()).norm();
    if (gap > 1e-8 * (1.0 + G.norm()))
        throw NumericError("reduce: design rows leave the regularizer range");
    return red;
}

ThetaEstimate estimate_theta(const BoostingKernel& bk, const LossSpec& loss, const Vector& y,
                             const SolveOptions& opts) {
    if (bk.model == nullptr) throw ConfigError("estimate: missing spectral model");
    const SpectralModel& m = *bk.model;
    if (y.size() != m.n()) throw ConfigError("estimate: data length mismatch");

    ThetaEstimate est;
    if (bk.lambda == 0.0 || m.rank() == 0) {
        est.theta = Vector::Zero(m.m());
        est.fitted = Vector::Zero(m.n());
        est.degenerate = true;
        est.stats.minimizer = Vector();
        est.stats.fitted = est.fitted;
        est.stats.objective = fit_objective(loss, y, est.fitted);
        est.stats.dual = Vector::Zero(m.n());
        est.stats.converged = true;
        est.stats.objective_trace.push_back(est.stats.objective);
        return est;
    }

    CompositeProblem prob{loss, factor_A(bk), Matrix(), y};
    est.stats = solve(prob, opts);
    est.fitted = est.stats.fitted;

    Eigen::BDCSVD<Matrix> svd(m.regression, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // module rank cutoff 1e-12 lives on squared spectra; singular values of U
    // get its square root
    svd.setThreshold(1e-6);
    est.theta = svd.solve(est.fitted);
    return est;
}

}  // namespace kboost
