#include "kboost/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace kboost {

namespace {

Matrix gaussian_gram(const Matrix& a, const Matrix& b, double beta) {
    Matrix g(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < b.rows(); ++j)
            g(i, j) = std::exp(-beta * (a.row(i) - b.row(j)).squaredNorm());
    return g;
}

}  // namespace

Matrix build_kernel(const KernelSpec& spec) {
    switch (spec.kind) {
        case KernelSpec::Kind::Identity:
            if (spec.dim <= 0) throw ConfigError("kernel: identity needs a positive size");
            return Matrix::Identity(spec.dim, spec.dim);
        case KernelSpec::Kind::StableSpline: {
            if (spec.dim <= 0) throw ConfigError("kernel: stable spline needs a positive size");
            if (!(spec.alpha >= 0.0 && spec.alpha < 1.0))
                throw ConfigError("kernel: stable spline alpha must lie in [0,1)");
            Matrix k(spec.dim, spec.dim);
            for (Index i = 0; i < spec.dim; ++i)
                for (Index j = 0; j <= i; ++j) {
                    // entry alpha^max(i,j) with 1-based indices
                    k(i, j) = k(j, i) = std::pow(spec.alpha, double(i + 1));
                }
            return k;
        }
        case KernelSpec::Kind::GaussianGram:
            if (spec.inputs.rows() == 0) throw ConfigError("kernel: gaussian needs input points");
            if (!(spec.bandwidth > 0.0))
                throw ConfigError("kernel: gaussian bandwidth must be positive");
            return gaussian_gram(spec.inputs, spec.inputs, spec.bandwidth);
        case KernelSpec::Kind::Explicit: {
            const Matrix& m = spec.matrix;
            if (m.rows() == 0 || m.rows() != m.cols())
                throw ConfigError("kernel: explicit matrix must be square and nonempty");
            const double scale = m.cwiseAbs().maxCoeff();
            const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
            if (asym > 1e-10 * scale && scale > 0.0) {
                std::ostringstream os;
                os << "kernel: explicit matrix is not symmetric (max asymmetry " << asym << ")";
                throw ConfigError(os.str());
            }
            Matrix sym = 0.5 * (m + m.transpose());
            Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
            const double top = eig.eigenvalues().maxCoeff();
            const double bottom = eig.eigenvalues().minCoeff();
            if (bottom < -1e-10 * std::max(top, 0.0)) {
                std::ostringstream os;
                os << "kernel: explicit matrix is not positive semidefinite "
                   << "(most negative eigenvalue " << bottom << ")";
                throw ConfigError(os.str());
            }
            return sym;
        }
    }
    throw ConfigError("kernel: unknown kind");
}

Matrix kernel_cross(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    if (spec.kind != KernelSpec::Kind::GaussianGram)
        throw ConfigError("kernel: only gaussian kernels support out-of-sample evaluation");
    if (a.cols() != b.cols())
        throw DataError("kernel: input dimension mismatch in cross evaluation");
    return gaussian_gram(a, b, spec.bandwidth);
}

Index SpectralModel::rank() const {
    if (eigenvalues.size() == 0) return 0;
    const double cut = kRankTol * eigenvalues[0];
    Index r = 0;
    while (r < eigenvalues.size() && eigenvalues[r] > cut) ++r;
    return r;
}

SpectralModel factorize(const Matrix& U, const Matrix& K, double sigma2) {
    if (U.cols() != K.rows() || K.rows() != K.cols())
        throw ConfigError("factorize: U columns must match the kernel size");
    if (!(sigma2 > 0.0)) throw ConfigError("factorize: sigma2 must be positive");

    Matrix M = U * K * U.transpose();
    M = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
    if (eig.info() != Eigen::Success) throw NumericError("factorize: eigendecomposition failed");

    const Index n = U.rows();
    SpectralModel model;
    model.basis = Matrix(n, n);
    model.eigenvalues = Vector(n);
    // SelfAdjointEigenSolver sorts ascending; flip to descending.
    for (Index i = 0; i < n; ++i) {
        model.basis.col(i) = eig.eigenvectors().col(n - 1 - i);
        model.eigenvalues[i] = eig.eigenvalues()[n - 1 - i];
    }
    const double dmax = std::max(model.eigenvalues[0], 0.0);
    for (Index i = 0; i < n; ++i)
        if (model.eigenvalues[i] < kRankTol * dmax) model.eigenvalues[i] = 0.0;
    model.sigma2 = sigma2;
    model.regression = U;
    model.kernel = K;
    return model;
}

Vector weak_learner_predict(const SpectralModel& model, double lambda, const Vector& y) {
    if (y.size() != model.n()) throw ConfigError("weak learner: data length mismatch");
    if (!(lambda >= 0.0)) throw ConfigError("weak learner: lambda must be nonnegative");
    Vector z = model.basis.transpose() * y;
    for (Index i = 0; i < z.size(); ++i) {
        const double ld = lambda * model.eigenvalues[i];
        z[i] *= ld / (ld + model.sigma2);
    }
    return model.basis * z;
}

namespace {

void check_kernel(const BoostingKernel& bk) {
    if (bk.model == nullptr) throw ConfigError("boosting kernel: missing spectral model");
    if (!(bk.lambda >= 0.0)) throw ConfigError("boosting kernel: lambda must be nonnegative");
    if (!(bk.nu >= 1.0)) throw ConfigError("boosting kernel: nu must be at least 1");
}

}  // namespace

Vector shrinkage_factors(const BoostingKernel& bk) {
    check_kernel(bk);
    const SpectralModel& m = *bk.model;
    Vector f(m.n());
    for (Index i = 0; i < m.n(); ++i) {
        // 1 - alpha^nu with alpha = sigma2/(lam d^2 + sigma2), via expm1/log1p
        const double snr = bk.lambda * m.eigenvalues[i] / m.sigma2;
        f[i] = -std::expm1(-bk.nu * std::log1p(snr));
    }
    return f;
}

Vector boosting_smoother_apply(const BoostingKernel& bk, const Vector& y) {
    check_kernel(bk);
    if (y.size() != bk.model->n()) throw ConfigError("boosting smoother: data length mismatch");
    Vector z = bk.model->basis.transpose() * y;
    z.array() *= shrinkage_factors(bk).array();
    return bk.model->basis * z;
}

BoostingEigs boosting_kernel_eigs(const BoostingKernel& bk) {
    check_kernel(bk);
    const SpectralModel& m = *bk.model;
    // exp(t) overflows past ~709.78; anything above this cap is reported as
    // saturated rather than inf.
    const double cap = 700.0;
    BoostingEigs out;
    out.values = Vector(m.n());
    out.saturated.assign(size_t(m.n()), false);
    for (Index i = 0; i < m.n(); ++i) {
        const double snr = bk.lambda * m.eigenvalues[i] / m.sigma2;
        const double t = bk.nu * std::log1p(snr);
        if (t > cap) {
            out.values[i] = std::numeric_limits<double>::max();
            out.saturated[size_t(i)] = true;
            out.any_saturated = true;
        } else {
            out.values[i] = m.sigma2 * std::expm1(t);
        }
    }
    return out;
}

Matrix factor_A(const BoostingKernel& bk) {
    check_kernel(bk);
    if (!(bk.lambda > 0.0)) throw ConfigError("factor A: lambda must be positive");
    const SpectralModel& m = *bk.model;
    const Index r = m.rank();
    Matrix a(m.n(), r);
    for (Index i = 0; i < r; ++i) {
        const double snr = bk.lambda * m.eigenvalues[i] / m.sigma2;
        const double t = bk.nu * std::log1p(snr);
        if (t > 700.0) {
            std::ostringstream os;
            os << "factor A: direction " << i << " overflows at nu=" << bk.nu;
            throw NumericError(os.str());
        }
        a.col(i) = m.basis.col(i) * std::sqrt(std::expm1(t));
    }
    return a;
}

Matrix matrix_B(const BoostingKernel& bk) {
    check_kernel(bk);
    const SpectralModel& m = *bk.model;
    if (m.regression.rows() != m.regression.cols())
        throw ConfigError("matrix B: defined only for square U; got " +
                          std::to_string(m.regression.rows()) + "x" +
                          std::to_string(m.regression.cols()));
    const BoostingEigs eigs = boosting_kernel_eigs(bk);
    if (eigs.any_saturated) throw NumericError("matrix B: boosting kernel eigenvalues overflow");
    const Matrix w = m.regression * m.basis;
    return w * eigs.values.asDiagonal() * w.transpose();
}

}  // namespace kboost
