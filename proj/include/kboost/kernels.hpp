#pragma once

#include "kboost/common.hpp"

#include <vector>

namespace kboost {

// Kernel matrix recipes. Identity and StableSpline are index-based (no
// out-of-sample evaluation); GaussianGram keeps its inputs so estimates can
// be evaluated at new points; Explicit wraps a user-supplied PSD matrix.
struct KernelSpec {
    enum class Kind { Identity, StableSpline, GaussianGram, Explicit };

    Kind kind = Kind::Identity;
    Index dim = 0;          // identity / stable spline size
    double alpha = 0.9;     // stable spline decay, in [0,1)
    double bandwidth = 1.0; // gaussian: K(x,z) = exp(-bandwidth*|x-z|^2)
    Matrix inputs;          // gaussian: one point per row
    Matrix matrix;          // explicit

    static KernelSpec identity(Index m) {
        KernelSpec s;
        s.kind = Kind::Identity;
        s.dim = m;
        return s;
    }
    static KernelSpec stable_spline(Index m, double alpha) {
        KernelSpec s;
        s.kind = Kind::StableSpline;
        s.dim = m;
        s.alpha = alpha;
        return s;
    }
    static KernelSpec gaussian(Matrix inputs, double bandwidth) {
        KernelSpec s;
        s.kind = Kind::GaussianGram;
        s.inputs = std::move(inputs);
        s.bandwidth = bandwidth;
        s.dim = s.inputs.rows();
        return s;
    }
    static KernelSpec explicit_matrix(Matrix m) {
        KernelSpec s;
        s.kind = Kind::Explicit;
        s.matrix = std::move(m);
        s.dim = s.matrix.rows();
        return s;
    }
};

Matrix build_kernel(const KernelSpec& spec);

// Cross-kernel between new points (rows of a) and stored points (rows of b);
// only pointwise-evaluable kernels support this.
Matrix kernel_cross(const KernelSpec& spec, const Matrix& a, const Matrix& b);

// Eigenstructure of U*K*U^T plus the ingredients needed by every estimator.
// eigenvalues holds d_i^2, sorted descending, tiny negatives clamped to 0.
struct SpectralModel {
    Matrix basis;        // V, n x n orthonormal
    Vector eigenvalues;  // d_i^2 >= 0, descending
    double sigma2 = 1.0;
    Matrix regression;   // U, n x m
    Matrix kernel;       // K, m x m

    Index n() const { return basis.rows(); }
    Index m() const { return regression.cols(); }
    // Count of directions above the relative rank cutoff.
    Index rank() const;
};

SpectralModel factorize(const Matrix& U, const Matrix& K, double sigma2);

// One boosting-kernel estimate = (model, lambda, nu). Non-owning view of the
// model; keep the SpectralModel alive while the kernel is in use.
struct BoostingKernel {
    const SpectralModel* model = nullptr;
    double lambda = 0.0;
    double nu = 1.0;
};

// Ridge weak learner: yhat = P_lam (P_lam + sigma2 I)^{-1} y, P_lam = lam*U*K*U^T.
Vector weak_learner_predict(const SpectralModel& model, double lambda, const Vector& y);

// Per-direction shrinkage 1 - (sigma2/(lam*d_i^2+sigma2))^nu of the nu-round
// booster, computed in the log domain.
Vector shrinkage_factors(const BoostingKernel& bk);

// Apply the nu-round boosting smoother to y in one shot.
Vector boosting_smoother_apply(const BoostingKernel& bk, const Vector& y);

struct BoostingEigs {
    Vector values;                 // eigenvalues of P_{lam,nu}, model order
    std::vector<bool> saturated;   // per-direction overflow flag
    bool any_saturated = false;
};

// Eigenvalues sigma2*((lam*d_i^2/sigma2 + 1)^nu - 1); entries whose log-domain
// exponent overflows are reported as saturated at the largest double.
BoostingEigs boosting_kernel_eigs(const BoostingKernel& bk);

// A with P_{lam,nu} = sigma2 * A * A^T, columns restricted to directions above
// the rank cutoff. All-null models yield an n x 0 factor; callers treat that
// as a degenerate problem. Throws if any retained direction overflows.
Matrix factor_A(const BoostingKernel& bk);

// B = U * P_{lam,nu} * U^T. Defined only for square U (the identity mapping in
// the function-space path); rectangular U is rejected.
Matrix matrix_B(const BoostingKernel& bk);

}  // namespace kboost
