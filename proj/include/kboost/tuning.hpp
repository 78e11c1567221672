#pragma once

#include "kboost/kernels.hpp"

#include <functional>
#include <utility>

namespace kboost {

// Everything the risk objective needs: data rotated into the eigenbasis,
// the spectrum, the noise level, and the search box for nu.
struct SureSurface {
    Vector z;       // V^T y
    Vector eigs;    // d_i^2
    double sigma2 = 1.0;
    double nu_max = 500.0;
};

SureSurface make_surface(const SpectralModel& model, const Vector& y);

// Unbiased risk of the boosting smoother:
//   J(lambda, nu) = sum z_i^2 a_i^{2 nu} + 2 sigma^2 n - 2 sigma^2 sum a_i^nu
// with a_i = sigma^2/(lambda d_i^2 + sigma^2), powers taken in the log domain.
double sure_objective(const SureSurface& s, double lambda, double nu);

// Analytic nu-derivative 2 sum log(a_i) a_i^nu (z_i^2 a_i^nu - sigma^2).
double sure_dnu(const SureSurface& s, double lambda, double nu);

// (min, max) of (z_i^2 - sigma^2)/d_i^2 over directions above the rank
// cutoff. Below the min the risk keeps favoring more rounds; above the max it
// favors stopping at one. Values may be negative; the reading only applies
// when they are positive.
std::pair<double, double> lambda_bounds(const SureSurface& s);

struct TuneDiagnostics {
    bool at_boundary_nu1 = false;
    bool diverging_nu = false;  // nu ran into nu_max, standing in for infinity
    Index grid_evaluations = 0;
    Index local_search_iterations = 0;
};

struct TuneResult {
    double lambda = 0.0;
    double nu = 1.0;
    double objective = 0.0;
    TuneDiagnostics diagnostics;
};

struct SureOptions {
    Index lambda_grid = 25;
    Index nu_grid = 25;
    bool fix_lambda = false;
    double lambda = 0.0;
    bool fix_nu = false;
    double nu = 1.0;
};

// Coarse log-grid scan (lambda spans [1e-4, 1e4] times the median of
// sigma^2/d_i^2, plus the lambda = 0 candidate) followed by a pattern search
// on (log lambda, log nu). The surface may be multimodal; this is a
// documented best-effort, not a global guarantee.
TuneResult tune_sure(const SureSurface& s, const SureOptions& opts = {});

struct HoldoutOptions {
    double lo = 1.0;
    double hi = 500.0;
    bool exhaustive = false;       // step scan instead of golden section
    double exhaustive_step = 0.01;
    double bracket_tol = 1e-3;
    Index max_evals = 200;
};

// Minimize a validation score over one continuous parameter (callers pass nu
// or log nu). Assumes unimodality for the golden-section path; ties break
// toward the smaller argument. Result lambda is NaN (not tuned here).
TuneResult tune_holdout(const std::function<double(double)>& score, const HoldoutOptions& opts = {});

// Unbiased noise estimate |y - U theta_LS|^2 / (n - m); needs more rows than
// columns and full column rank.
double estimate_sigma2(const Matrix& U, const Vector& y);

}  // namespace kboost
