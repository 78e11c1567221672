#include "kboost/kernels.hpp"

#include "doctest.h"
#include "util.hpp"

#include <cmath>

using namespace kboost;
using testutil::random_matrix;
using testutil::random_psd;
using testutil::random_vector;
using testutil::rel_err;

TEST_SUITE("kernels") {

TEST_CASE("identity kernel") {
    const Matrix k = build_kernel(KernelSpec::identity(4));
    CHECK(rel_err(k, Matrix::Identity(4, 4)) == 0.0);
    CHECK_THROWS_AS(build_kernel(KernelSpec::identity(0)), ConfigError);
}

TEST_CASE("stable spline entries are alpha^max(i,j), 1-indexed") {
    const double alpha = 0.5;
    const Matrix k = build_kernel(KernelSpec::stable_spline(3, alpha));
    CHECK(k(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k(0, 2) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(k(1, 2) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(k(2, 2) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(rel_err(k, Matrix(k.transpose())) < 1e-15);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(build_kernel(KernelSpec::stable_spline(12, 0.9)));
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);

    CHECK_THROWS_AS(build_kernel(KernelSpec::stable_spline(3, 1.0)), ConfigError);
    CHECK_THROWS_AS(build_kernel(KernelSpec::stable_spline(3, -0.1)), ConfigError);
}

TEST_CASE("gaussian gram and cross evaluation") {
    std::mt19937_64 gen(11);
    const Matrix x = random_matrix(gen, 6, 2);
    const double beta = 1.7;
    const KernelSpec spec = KernelSpec::gaussian(x, beta);
    const Matrix k = build_kernel(spec);
    for (Index i = 0; i < 6; ++i) {
        CHECK(k(i, i) == doctest::Approx(1.0).epsilon(1e-15));
        for (Index j = 0; j < 6; ++j) {
            const double d2 = (x.row(i) - x.row(j)).squaredNorm();
            CHECK(k(i, j) == doctest::Approx(std::exp(-beta * d2)).epsilon(1e-14));
        }
    }
    // cross evaluation at the training points reproduces the gram
    const Matrix cross = kernel_cross(spec, x, x);
    CHECK(rel_err(cross, k) < 1e-14);
    CHECK_THROWS_AS(kernel_cross(KernelSpec::identity(3), x, x), ConfigError);
    CHECK_THROWS_AS(kernel_cross(spec, random_matrix(gen, 2, 3), x), DataError);
    CHECK_THROWS_AS(build_kernel(KernelSpec::gaussian(x, 0.0)), ConfigError);
}

TEST_CASE("explicit kernel validation") {
    std::mt19937_64 gen(12);
    const Matrix psd = random_psd(gen, 5);
    CHECK(rel_err(build_kernel(KernelSpec::explicit_matrix(psd)), psd) == 0.0);

    Matrix asym = psd;
    asym(0, 1) += 1.0;
    CHECK_THROWS_AS(build_kernel(KernelSpec::explicit_matrix(asym)), ConfigError);

    Matrix indef = psd;
    indef -= 2.0 * psd.norm() * Matrix::Identity(5, 5);
    CHECK_THROWS_AS(build_kernel(KernelSpec::explicit_matrix(indef)), ConfigError);
}

TEST_CASE("factorize reconstructs U K U^T") {
    std::mt19937_64 gen(13);
    const Matrix u = random_matrix(gen, 12, 5);
    const Matrix k = random_psd(gen, 5);
    const SpectralModel model = factorize(u, k, 0.3);
    const Matrix recon =
        model.basis * model.eigenvalues.asDiagonal() * model.basis.transpose();
    CHECK(rel_err(recon, Matrix(u * k * u.transpose())) < 1e-10);
    CHECK(model.eigenvalues.minCoeff() >= 0.0);
    for (Index i = 1; i < model.eigenvalues.size(); ++i)
        CHECK(model.eigenvalues[i - 1] >= model.eigenvalues[i]);
    // rank 5 kernel through a 12 x 5 design leaves 7 null directions
    CHECK(model.rank() == 5);
    CHECK_THROWS_AS(factorize(u, k, 0.0), ConfigError);
    CHECK_THROWS_AS(factorize(u, random_psd(gen, 4), 1.0), ConfigError);
}

TEST_CASE("weak learner matches the dense smoother formula") {
    std::mt19937_64 gen(14);
    const Matrix u = random_matrix(gen, 10, 4);
    const Matrix k = random_psd(gen, 4);
    const double sigma2 = 0.7, lambda = 2.3;
    const SpectralModel model = factorize(u, k, sigma2);
    const Vector y = random_vector(gen, 10);

    const Matrix p = lambda * u * k * u.transpose();
    const Vector direct =
        p * (p + sigma2 * Matrix::Identity(10, 10)).ldlt().solve(y);
    CHECK(rel_err(weak_learner_predict(model, lambda, y), direct) < 1e-12);
}

TEST_CASE("boosting kernel spectrum") {
    std::mt19937_64 gen(15);
    const Matrix u = random_matrix(gen, 8, 3);
    const Matrix k = random_psd(gen, 3);
    const double sigma2 = 0.5;
    const SpectralModel model = factorize(u, k, sigma2);

    BoostingKernel bk{&model, 1.3, 3.7};
    const BoostingEigs eigs = boosting_kernel_eigs(bk);
    CHECK_FALSE(eigs.any_saturated);
    for (Index i = 0; i < model.n(); ++i) {
        const double snr = bk.lambda * model.eigenvalues[i] / sigma2;
        CHECK(eigs.values[i] ==
              doctest::Approx(sigma2 * (std::pow(1.0 + snr, bk.nu) - 1.0)).epsilon(1e-12));
    }

    // one round reduces to the weak-learner kernel lambda*U*K*U^T
    bk.nu = 1.0;
    const BoostingEigs one = boosting_kernel_eigs(bk);
    for (Index i = 0; i < model.n(); ++i) {
        const double want = bk.lambda * model.eigenvalues[i];
        if (want > 0.0) CHECK(std::abs(one.values[i] - want) / want <= 1e-12);
    }

    bk.nu = 1e6;  // exponent far beyond the double range
    CHECK(boosting_kernel_eigs(bk).any_saturated);
    CHECK_THROWS_AS(factor_A(bk), NumericError);
}

TEST_CASE("smoother, factor and B agree with dense algebra") {
    std::mt19937_64 gen(16);
    const Index n = 9;
    const Matrix u = random_matrix(gen, n, n);  // square so B is defined
    const Matrix k = random_psd(gen, n);
    const double sigma2 = 1.1, lambda = 0.8, nu = 2.6;
    const SpectralModel model = factorize(u, k, sigma2);
    const BoostingKernel bk{&model, lambda, nu};

    // dense P from its eigenvalues
    const Matrix p = model.basis * Vector(boosting_kernel_eigs(bk).values).asDiagonal() *
                     model.basis.transpose();
    const Vector y = random_vector(gen, n);
    const Vector direct = p * (p + sigma2 * Matrix::Identity(n, n)).ldlt().solve(y);
    CHECK(rel_err(boosting_smoother_apply(bk, y), direct) < 1e-10);

    const Matrix a = factor_A(bk);
    CHECK(a.cols() == model.rank());
    CHECK(rel_err(Matrix(sigma2 * a * a.transpose()), p) < 1e-10);

    CHECK(rel_err(matrix_B(bk), Matrix(u * p * u.transpose())) < 1e-10);

    SpectralModel narrow = factorize(random_matrix(gen, 8, 3), random_psd(gen, 3), 1.0);
    const BoostingKernel bad{&narrow, lambda, nu};
    CHECK_THROWS_AS(matrix_B(bad), ConfigError);
    CHECK_THROWS_AS(factor_A(BoostingKernel{&model, 0.0, 2.0}), ConfigError);
}

TEST_CASE("shrinkage factors stay inside [0,1) and match the closed form") {
    std::mt19937_64 gen(17);
    const Matrix u = random_matrix(gen, 7, 7);
    const SpectralModel model = factorize(u, random_psd(gen, 7), 0.9);
    const BoostingKernel bk{&model, 3.0, 17.5};
    const Vector s = shrinkage_factors(bk);
    for (Index i = 0; i < model.n(); ++i) {
        const double a = 0.9 / (3.0 * model.eigenvalues[i] + 0.9);
        CHECK(s[i] == doctest::Approx(1.0 - std::pow(a, 17.5)).epsilon(1e-12));
        CHECK(s[i] >= 0.0);
        // strictly below 1 in exact arithmetic, but a^nu below machine epsilon
        // rounds the stored factor to exactly 1.0
        CHECK(s[i] <= 1.0);
    }
}

}  // TEST_SUITE
