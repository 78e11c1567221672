#include "kboost/classic_boost.hpp"

namespace kboost {

BoostTrace run_boost(const SpectralModel& model, double lambda, const Vector& y, Index rounds) {
    if (rounds < 1) throw ConfigError("run_boost: need at least one round");
    if (y.size() != model.n()) throw ConfigError("run_boost: data length mismatch");
    if (!(lambda >= 0.0)) throw ConfigError("run_boost: lambda must be nonnegative");

    const Index n = model.n();
    Vector s(n), g(n);
    for (Index i = 0; i < n; ++i) {
        const double ld = lambda * model.eigenvalues[i];
        s[i] = ld / (ld + model.sigma2);
        g[i] = 1.0 / (ld + model.sigma2);
    }
    // theta increment on residual r: lam*K*U^T*V diag(g) V^T r
    const Matrix back = lambda * model.kernel * model.regression.transpose() * model.basis;

    BoostTrace trace;
    trace.predictions.reserve(size_t(rounds));
    trace.increments.reserve(size_t(rounds));
    trace.theta = Vector::Zero(model.m());

    const Vector z = model.basis.transpose() * y;
    Vector zhat = Vector::Zero(n);
    for (Index k = 0; k < rounds; ++k) {
        const Vector rho = z - zhat;
        zhat += s.cwiseProduct(rho);
        trace.predictions.push_back(model.basis * zhat);
        Vector inc = back * g.cwiseProduct(rho);
        trace.theta += inc;
        trace.increments.push_back(std::move(inc));
    }
    return trace;
}

}  // namespace kboost
