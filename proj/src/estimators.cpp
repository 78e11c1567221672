#include "kboost/estimators.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <vector>

namespace kboost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-point validation penalties; the selection score is their mean.
Vector score_terms(const LossSpec& loss, bool labels, const Vector& truth, const Vector& pred) {
    Vector t(truth.size());
    if (labels) {
        // sign(0) matches neither class
        for (Index i = 0; i < truth.size(); ++i) t[i] = pred[i] * truth[i] > 0.0 ? 0.0 : 1.0;
        return t;
    }
    for (Index i = 0; i < truth.size(); ++i) t[i] = loss_value(loss, truth[i] - pred[i]);
    return t;
}

double mean_of(const Vector& v) { return v.size() > 0 ? v.sum() / double(v.size()) : 0.0; }

// Standard error of the mean penalty.
double sem_of(const Vector& v) {
    const Index n = v.size();
    if (n < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (Index i = 0; i < n; ++i) ss += (v[i] - m) * (v[i] - m);
    return std::sqrt(ss / double(n - 1)) / std::sqrt(double(n));
}

Vector gamma_grid(const EstimatorSpec& spec) {
    if (spec.fix_gamma) return Vector::Constant(1, spec.gamma);
    if (spec.grid_count < 1) throw ConfigError("estimator: gamma grid needs at least one point");
    if (!(spec.grid_lo > 0.0) || !(spec.grid_hi >= spec.grid_lo))
        throw ConfigError("estimator: gamma grid bounds must be positive and ordered");
    Vector g(spec.grid_count);
    if (spec.grid_count == 1) {
        g[0] = spec.grid_lo;
        return g;
    }
    const double lo = std::log(spec.grid_lo);
    const double step = (std::log(spec.grid_hi) - lo) / double(spec.grid_count - 1);
    for (Index i = 0; i < spec.grid_count; ++i) g[i] = std::exp(lo + double(i) * step);
    return g;
}

SolveOptions solve_opts(const EstimatorSpec& spec) {
    SolveOptions o;
    o.tol = spec.solve_tol;
    o.max_iter = spec.solve_max_iter;
    return o;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
    Matrix m(a.rows() + b.rows(), a.cols());
    m << a, b;
    return m;
}

Vector vcat(const Vector& a, const Vector& b) {
    Vector v(a.size() + b.size());
    v << a, b;
    return v;
}

// Largest usable nu before the factor exponent nu*log1p(mu/gamma) leaves the
// double range; 650 keeps headroom below the hard overflow at 700.
double nu_cap(const EstimatorSpec& spec, double mu_top, double gamma) {
    if (mu_top <= 0.0) return 1.0;
    const double per_round = std::log1p(mu_top / gamma);
    if (per_round <= 0.0) return spec.nu_max;
    return std::min(spec.nu_max, 650.0 / per_round);
}

FunctionEstimate fit_oneshot(const EstimatorSpec& spec, RkhsProblem& p, const GramFactor& fac,
                             double gamma, double nu, SolverUsage* usage,
                             const SolveOptions& opts, Vector* chain) {
    p.gamma = gamma;
    const double lambda = spec.sigma2 / gamma;
    if (spec.loss.kind == LossKind::Hinge)
        return boost_svc(p, fac, lambda, spec.sigma2, nu, usage, opts, chain);
    return boost_rkhs_kernel(p, fac, lambda, spec.sigma2, nu, usage, opts, chain);
}

KernelFitResult run_weak(const EstimatorSpec& spec, const SplitData& d) {
    KernelFitResult out;
    const KernelSpec ktrain = KernelSpec::gaussian(d.x_train, spec.bandwidth);
    RkhsProblem p = RkhsProblem::make(ktrain, d.y_train, spec.loss, spec.gamma);
    const GramFactor fac = GramFactor::make(p.gram);
    const Matrix kval = kernel_cross(ktrain, d.x_val, d.x_train);
    const SolveOptions opts = solve_opts(spec);

    const Vector gammas = gamma_grid(spec);
    double best = kInf;
    double gbest = gammas[0];
    for (Index i = 0; i < gammas.size(); ++i) {
        p.gamma = gammas[i];
        const FunctionEstimate f = weak_learner_rkhs(p, fac, &out.usage, opts);
        const double s = mean_of(score_terms(spec.loss, d.labels, d.y_val, kval * f.coefficients));
        ++out.candidates;
        if (s < best) {
            best = s;
            gbest = gammas[i];
        }
    }

    RkhsProblem pm = RkhsProblem::make(KernelSpec::gaussian(vstack(d.x_train, d.x_val), spec.bandwidth),
                                       vcat(d.y_train, d.y_val), spec.loss, gbest);
    const GramFactor mfac = GramFactor::make(pm.gram);
    const FunctionEstimate fm = weak_learner_rkhs(pm, mfac, &out.usage, opts);
    out.test_prediction = predict(fm, d.x_test);
    out.gamma = gbest;
    out.nu = 1.0;
    out.val_score = best;
    return out;
}

KernelFitResult run_classic(const EstimatorSpec& spec, const SplitData& d) {
    if (!spec.fix_gamma)
        throw ConfigError("estimator: the iterative scheme runs at a fixed gamma");
    KernelFitResult out;
    const SolveOptions opts = solve_opts(spec);
    RkhsProblem pm = RkhsProblem::make(KernelSpec::gaussian(vstack(d.x_train, d.x_val), spec.bandwidth),
                                       vcat(d.y_train, d.y_val), spec.loss, spec.gamma);

    Index rounds = 1;
    if (spec.fix_nu) {
        rounds = Index(std::llround(spec.nu));
        if (rounds < 1 || double(rounds) != spec.nu)
            throw ConfigError("estimator: the iterative scheme needs a whole number of rounds");
        out.val_score = std::numeric_limits<double>::quiet_NaN();
    } else {
        const KernelSpec ktrain = KernelSpec::gaussian(d.x_train, spec.bandwidth);
        RkhsProblem p = RkhsProblem::make(ktrain, d.y_train, spec.loss, spec.gamma);
        const Matrix kval = kernel_cross(ktrain, d.x_val, d.x_train);
        double best = kInf;
        boost_rkhs_classic(p, spec.rounds_cap, &out.usage, opts,
                           [&](Index k, const Vector& c) {
                               const double s = mean_of(
                                   score_terms(spec.loss, d.labels, d.y_val, kval * c));
                               if (s < best) {
                                   best = s;
                                   rounds = k;
                               }
                           });
        out.candidates = spec.rounds_cap;
        out.val_score = best;
    }

    const FunctionEstimate fm = boost_rkhs_classic(pm, rounds, &out.usage, opts);
    out.test_prediction = predict(fm, d.x_test);
    out.gamma = spec.gamma;
    out.nu = double(rounds);
    return out;
}

KernelFitResult run_oneshot(const EstimatorSpec& spec, const SplitData& d) {
    KernelFitResult out;
    const SolveOptions opts = solve_opts(spec);
    const KernelSpec ktrain = KernelSpec::gaussian(d.x_train, spec.bandwidth);
    RkhsProblem p = RkhsProblem::make(ktrain, d.y_train, spec.loss, spec.gamma);
    const GramFactor fac = GramFactor::make(p.gram);
    const Matrix kval = kernel_cross(ktrain, d.x_val, d.x_train);

    RkhsProblem pm = RkhsProblem::make(KernelSpec::gaussian(vstack(d.x_train, d.x_val), spec.bandwidth),
                                       vcat(d.y_train, d.y_val), spec.loss, spec.gamma);
    const GramFactor mfac = GramFactor::make(pm.gram);

    // the refit sees the merged gram, so its top eigenvalue bounds nu too
    const double mu_top = std::max(fac.mu.size() > 0 ? fac.mu[fac.mu.size() - 1] : 0.0,
                                   mfac.mu.size() > 0 ? mfac.mu[mfac.mu.size() - 1] : 0.0);

    struct Cand {
        double gamma;
        double nu;
        double score;
    };
    std::vector<Cand> cands;
    double best_score = kInf;
    double best_nu = 1.0;
    double best_gamma = spec.gamma;
    Vector best_terms;

    Vector chain;
    auto eval = [&](double gamma, double nu, bool warm) -> double {
        const FunctionEstimate f =
            fit_oneshot(spec, p, fac, gamma, nu, &out.usage, opts, warm ? &chain : nullptr);
        const Vector terms = score_terms(spec.loss, d.labels, d.y_val, kval * f.coefficients);
        const double s = mean_of(terms);
        cands.push_back({gamma, nu, s});
        if (s < best_score || (s == best_score && (nu < best_nu ||
                                                   (nu == best_nu && gamma < best_gamma)))) {
            best_score = s;
            best_nu = nu;
            best_gamma = gamma;
            best_terms = terms;
        }
        return s;
    };

    const Vector gammas = gamma_grid(spec);
    for (Index gi = 0; gi < gammas.size(); ++gi) {
        const double gamma = gammas[gi];
        const double cap = nu_cap(spec, mu_top, gamma);
        chain.resize(0);
        if (spec.fix_nu) {
            eval(gamma, std::min(spec.nu, cap), false);
            continue;
        }
        if (cap > 1.0) {
            // the searcher scores both ends of the bracket, so nu = 1 is
            // always a candidate; that solve coincides with the plain weak
            // learner at the same gamma
            HoldoutOptions h;
            h.lo = 0.0;
            h.hi = std::log(cap);
            h.bracket_tol = spec.bracket_tol;
            h.exhaustive = spec.exhaustive_nu;
            tune_holdout([&](double t) { return eval(gamma, std::exp(t), true); }, h);
        } else {
            eval(gamma, 1.0, false);
        }
    }

    double pick_gamma = best_gamma;
    double pick_nu = best_nu;
    double pick_score = best_score;
    if (spec.parsimony && cands.size() > 1) {
        // anything within one standard error of the best is statistically
        // indistinguishable from it; take the cheapest such model
        const double margin = best_score + sem_of(best_terms);
        for (const Cand& c : cands) {
            if (c.score > margin) continue;
            if (c.nu < pick_nu || (c.nu == pick_nu && (c.score < pick_score ||
                                                       (c.score == pick_score &&
                                                        c.gamma < pick_gamma)))) {
                pick_gamma = c.gamma;
                pick_nu = c.nu;
                pick_score = c.score;
            }
        }
    }

    const FunctionEstimate fm =
        fit_oneshot(spec, pm, mfac, pick_gamma, pick_nu, &out.usage, opts, nullptr);
    out.test_prediction = predict(fm, d.x_test);
    out.gamma = pick_gamma;
    out.nu = pick_nu;
    out.val_score = pick_score;
    out.candidates = Index(cands.size());
    return out;
}

void check_split(const SplitData& d) {
    if (d.x_train.rows() == 0) throw DataError("estimator: empty training block");
    if (d.x_val.rows() == 0) throw DataError("estimator: empty validation block");
    if (d.x_train.rows() != d.y_train.size())
        throw DataError("estimator: training block sizes disagree");
    if (d.x_val.rows() != d.y_val.size())
        throw DataError("estimator: validation block sizes disagree");
    if (d.x_val.cols() != d.x_train.cols() ||
        (d.x_test.rows() > 0 && d.x_test.cols() != d.x_train.cols()))
        throw DataError("estimator: point dimensions disagree across blocks");
}

void check_spec(const EstimatorSpec& spec) {
    validate(spec.loss);
    if (!(spec.bandwidth > 0.0)) throw ConfigError("estimator: bandwidth must be positive");
    if (!(spec.sigma2 > 0.0)) throw ConfigError("estimator: sigma2 must be positive");
    if (!(spec.gamma > 0.0)) throw ConfigError("estimator: gamma must be positive");
    if (!(spec.nu >= 1.0)) throw ConfigError("estimator: nu must be at least 1");
    if (!(spec.nu_max >= 1.0)) throw ConfigError("estimator: nu_max must be at least 1");
    if (spec.rounds_cap < 1) throw ConfigError("estimator: rounds_cap must be at least 1");
    if (!(spec.bracket_tol > 0.0)) throw ConfigError("estimator: bracket_tol must be positive");
    if (!(spec.solve_tol > 0.0)) throw ConfigError("estimator: solve_tol must be positive");
    if (spec.solve_max_iter < 1) throw ConfigError("estimator: solve_max_iter must be at least 1");
}

}  // namespace

KernelFitResult run_kernel_estimator(const EstimatorSpec& spec, const SplitData& data) {
    check_spec(spec);
    check_split(data);
    switch (spec.kind) {
        case EstimatorSpec::Kind::LinearSure:
            throw ConfigError("estimator: the observation-model scheme needs a design matrix");
        case EstimatorSpec::Kind::RkhsWeak:
            return run_weak(spec, data);
        case EstimatorSpec::Kind::RkhsClassic:
            return run_classic(spec, data);
        case EstimatorSpec::Kind::RkhsBoost:
            return run_oneshot(spec, data);
    }
    throw ConfigError("estimator: unknown scheme");
}

LinearFitResult run_linear_sure(const EstimatorSpec& spec, const Matrix& design,
                                const Matrix& kernel, const Vector& y, double sigma2) {
    check_spec(spec);
    LinearFitResult out;
    const SpectralModel model = factorize(design, kernel, sigma2);
    SureSurface surf = make_surface(model, y);
    surf.nu_max = spec.nu_max;
    SureOptions topt;
    topt.fix_nu = spec.fix_nu;
    topt.nu = spec.nu;
    out.tune = tune_sure(surf, topt);
    const BoostingKernel bk{&model, out.tune.lambda, out.tune.nu};
    out.fitted = boosting_smoother_apply(bk, y);
    Eigen::BDCSVD<Matrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-6);
    out.theta = svd.solve(out.fitted);
    return out;
}

}  // namespace kboost
