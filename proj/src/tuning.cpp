#include "kboost/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace kboost {

namespace {

void check_surface(const SureSurface& s) {
    if (s.z.size() != s.eigs.size()) throw ConfigError("sure: z and spectrum lengths differ");
    if (!(s.sigma2 > 0.0)) throw ConfigError("sure: sigma2 must be positive");
    if (!(s.nu_max >= 1.0)) throw ConfigError("sure: nu_max must be at least 1");
}

void check_point(double lambda, double nu) {
    if (!(lambda >= 0.0)) throw ConfigError("sure: lambda must be nonnegative");
    if (!(nu >= 1.0)) throw ConfigError("sure: nu must be at least 1");
}

// directions above the rank cutoff
std::vector<Index> retained(const Vector& eigs) {
    std::vector<Index> idx;
    const double top = eigs.size() ? eigs.maxCoeff() : 0.0;
    for (Index i = 0; i < eigs.size(); ++i)
        if (eigs[i] > kRankTol * top) idx.push_back(i);
    return idx;
}

double median(std::vector<double> v) {
    const size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + h, v.end());
    double m = v[h];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + h - 1, v.end());
        m = 0.5 * (m + v[h - 1]);
    }
    return m;
}

}  // namespace

SureSurface make_surface(const SpectralModel& model, const Vector& y) {
    if (y.size() != model.n()) throw ConfigError("sure: data length mismatch");
    SureSurface s;
    s.z = model.basis.transpose() * y;
    s.eigs = model.eigenvalues;
    s.sigma2 = model.sigma2;
    return s;
}

double sure_objective(const SureSurface& s, double lambda, double nu) {
    check_surface(s);
    check_point(lambda, nu);
    const double n = double(s.z.size());
    double acc = 2.0 * s.sigma2 * n;
    for (Index i = 0; i < s.z.size(); ++i) {
        const double t = nu * std::log1p(lambda * s.eigs[i] / s.sigma2);
        const double pow_nu = std::exp(-t);
        acc += s.z[i] * s.z[i] * pow_nu * pow_nu - 2.0 * s.sigma2 * pow_nu;
    }
    return acc;
}

double sure_dnu(const SureSurface& s, double lambda, double nu) {
    check_surface(s);
    check_point(lambda, nu);
    double acc = 0.0;
    for (Index i = 0; i < s.z.size(); ++i) {
        const double log_a = -std::log1p(lambda * s.eigs[i] / s.sigma2);
        const double pow_nu = std::exp(nu * log_a);
        acc += 2.0 * log_a * pow_nu * (s.z[i] * s.z[i] * pow_nu - s.sigma2);
    }
    return acc;
}

std::pair<double, double> lambda_bounds(const SureSurface& s) {
    check_surface(s);
    const std::vector<Index> idx = retained(s.eigs);
    if (idx.empty()) throw DataError("lambda bounds: no directions above the rank cutoff");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Index i : idx) {
        const double v = (s.z[i] * s.z[i] - s.sigma2) / s.eigs[i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

TuneResult tune_sure(const SureSurface& s, const SureOptions& opts) {
    check_surface(s);
    if (opts.fix_lambda && !(opts.lambda >= 0.0)) throw ConfigError("tune: fixed lambda < 0");
    if (opts.fix_nu && !(opts.nu >= 1.0 && opts.nu <= s.nu_max)) throw ConfigError("tune: fixed nu outside box");
    if (opts.lambda_grid < 2 || opts.nu_grid < 2) throw ConfigError("tune: grids need two points");

    TuneResult best;
    best.objective = std::numeric_limits<double>::infinity();
    TuneDiagnostics& diag = best.diagnostics;
    auto consider = [&](double lambda, double nu) {
        const double j = sure_objective(s, lambda, nu);
        if (j < best.objective) {
            best.objective = j;
            best.lambda = lambda;
            best.nu = nu;
        }
        return j;
    };

    const std::vector<Index> idx = retained(s.eigs);
    if (idx.empty()) {
        // flat surface: every direction is null, any point gives sum z_i^2
        best.lambda = opts.fix_lambda ? opts.lambda : 0.0;
        best.nu = opts.fix_nu ? opts.nu : 1.0;
        best.objective = sure_objective(s, best.lambda, best.nu);
        diag.grid_evaluations = 1;
        diag.at_boundary_nu1 = best.nu <= 1.0 + 1e-9;
        diag.diverging_nu = best.nu >= s.nu_max * (1.0 - 1e-9);
        return best;
    }

    std::vector<double> ratios;
    ratios.reserve(idx.size());
    for (Index i : idx) ratios.push_back(s.sigma2 / s.eigs[i]);
    const double center = median(std::move(ratios));

    std::vector<double> lambdas;
    if (opts.fix_lambda) {
        lambdas.push_back(opts.lambda);
    } else {
        lambdas.push_back(0.0);
        for (Index k = 0; k < opts.lambda_grid; ++k) {
            const double f = double(k) / double(opts.lambda_grid - 1);  // 0..1
            lambdas.push_back(center * std::pow(10.0, -4.0 + 8.0 * f));
        }
    }
    std::vector<double> nus;
    if (opts.fix_nu) {
        nus.push_back(opts.nu);
    } else {
        const double top = std::log(s.nu_max);
        for (Index k = 0; k < opts.nu_grid; ++k)
            nus.push_back(std::exp(top * double(k) / double(opts.nu_grid - 1)));
    }

    for (double nu : nus)
        for (double lambda : lambdas) {
            consider(lambda, nu);
            ++diag.grid_evaluations;
        }

    // pattern search on (log lambda, log nu) from the best grid point;
    // lambda = 0 has no log coordinate and the surface is flat there anyway
    if (best.lambda > 0.0) {
        double hx = opts.fix_lambda ? 0.0 : 4.0 * std::log(10.0) / double(opts.lambda_grid - 1);
        double hy = opts.fix_nu ? 0.0 : 0.5 * std::log(s.nu_max) / double(opts.nu_grid - 1);
        const double xlo = std::log(center * 1e-12);
        const double xhi = std::log(center * 1e4);
        const double yhi = std::log(s.nu_max);
        double x = std::log(best.lambda);
        double y = std::log(best.nu);
        while (std::max(hx, hy) >= 1e-4 && diag.local_search_iterations < 500) {
            ++diag.local_search_iterations;
            bool moved = false;
            for (double cx : {std::clamp(x - hx, xlo, xhi), std::clamp(x + hx, xlo, xhi)})
                if (cx != x && sure_objective(s, std::exp(cx), std::exp(y)) < best.objective) {
                    x = cx;
                    consider(std::exp(x), std::exp(y));
                    moved = true;
                }
            for (double cy : {std::clamp(y - hy, 0.0, yhi), std::clamp(y + hy, 0.0, yhi)})
                if (cy != y && sure_objective(s, std::exp(x), std::exp(cy)) < best.objective) {
                    y = cy;
                    consider(std::exp(x), std::exp(y));
                    moved = true;
                }
            if (!moved) {
                hx /= 2.0;
                hy /= 2.0;
            }
        }
    }

    diag.at_boundary_nu1 = best.nu <= 1.0 + 1e-9;
    diag.diverging_nu = best.nu >= s.nu_max * (1.0 - 1e-9);
    return best;
}

TuneResult tune_holdout(const std::function<double(double)>& score, const HoldoutOptions& opts) {
    if (!(opts.hi > opts.lo)) throw ConfigError("holdout: empty search interval");
    TuneResult res;
    res.lambda = std::numeric_limits<double>::quiet_NaN();
    TuneDiagnostics& diag = res.diagnostics;

    // keyed by argument so golden-section reuse never re-evaluates
    std::map<double, double> seen;
    auto ev = [&](double x) {
        auto it = seen.find(x);
        if (it != seen.end()) return it->second;
        const double v = score(x);
        seen.emplace(x, v);
        ++diag.grid_evaluations;
        return v;
    };

    if (opts.exhaustive) {
        if (!(opts.exhaustive_step > 0.0)) throw ConfigError("holdout: step must be positive");
        for (double x = opts.lo; x < opts.hi + 0.5 * opts.exhaustive_step; x += opts.exhaustive_step)
            ev(std::min(x, opts.hi));
    } else {
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = opts.lo, hi = opts.hi;
        ev(lo);
        ev(hi);
        double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        double fc = ev(c), fd = ev(d);
        while (hi - lo > opts.bracket_tol && diag.grid_evaluations < opts.max_evals) {
            ++diag.local_search_iterations;
            if (fc <= fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - gr * (hi - lo);
                fc = ev(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + gr * (hi - lo);
                fd = ev(d);
            }
        }
    }

    double bx = opts.lo, bv = std::numeric_limits<double>::infinity();
    for (const auto& [x, v] : seen)
        if (v < bv) {
            bv = v;
            bx = x;  // map order makes ties resolve to the smaller argument
        }
    res.nu = bx;
    res.objective = bv;
    return res;
}

double estimate_sigma2(const Matrix& U, const Vector& y) {
    const Index n = U.rows(), m = U.cols();
    if (y.size() != n) throw ConfigError("sigma2: data length mismatch");
    if (n <= m) throw ConfigError("sigma2: need more rows than columns; supply sigma2 instead");
    Eigen::ColPivHouseholderQR<Matrix> qr(U);
    if (qr.rank() < m) throw ConfigError("sigma2: regression matrix is column rank deficient");
    const Vector r = y - U * qr.solve(y);
    return r.squaredNorm() / double(n - m);
}

}  // namespace kboost
