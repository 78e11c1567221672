#pragma once

#include "kboost/kernels.hpp"

#include <vector>

namespace kboost {

// Full history of the iterative scheme: fitted values after each round,
// the per-round coefficient increments, and their sum.
struct BoostTrace {
    std::vector<Vector> predictions;  // yhat(1..rounds)
    std::vector<Vector> increments;   // per-round theta updates
    Vector theta;                     // cumulative estimate after the last round

    Index rounds() const { return Index(predictions.size()); }
};

// Iterative boosting: start from yhat = 0 and repeatedly apply the ridge weak
// learner to the current residuals, yhat(k+1) = yhat(k) + S_lam (y - yhat(k)).
BoostTrace run_boost(const SpectralModel& model, double lambda, const Vector& y, Index rounds);

}  // namespace kboost
