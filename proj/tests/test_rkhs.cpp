#include "kboost/rkhs.hpp"

#include "doctest.h"
#include "util.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace kboost;
using testutil::random_matrix;
using testutil::random_vector;
using testutil::rel_err;

namespace {

RkhsProblem random_problem(std::mt19937_64& gen, Index n, LossSpec loss, double gamma) {
    const Matrix x = random_matrix(gen, n, 2);
    return RkhsProblem::make(KernelSpec::gaussian(x, 0.8), random_vector(gen, n), loss, gamma);
}

double rkhs_objective(const RkhsProblem& p, const Vector& c) {
    const Vector fit = p.gram * c;
    return loss_value(p.loss, Vector(p.y - fit)) + p.gamma * double(c.transpose() * p.gram * c);
}

}  // namespace

TEST_SUITE("rkhs") {

TEST_CASE("gram factor reconstructs the kernel matrix") {
    std::mt19937_64 gen(61);
    const Matrix x = random_matrix(gen, 15, 2);
    const Matrix gram = build_kernel(KernelSpec::gaussian(x, 1.2));
    const GramFactor fac = GramFactor::make(gram);
    CHECK(rel_err(Matrix(fac.w * fac.mu.asDiagonal() * fac.w.transpose()), gram) < 1e-10);
    CHECK(rel_err(Matrix(fac.w.transpose() * fac.w),
                  Matrix(Matrix::Identity(fac.w.cols(), fac.w.cols()))) < 1e-12);
    for (Index i = 1; i < fac.mu.size(); ++i) CHECK(fac.mu[i - 1] <= fac.mu[i]);
}

TEST_CASE("quadratic weak learner solves (K + gamma I) c = y") {
    std::mt19937_64 gen(62);
    const RkhsProblem p = random_problem(gen, 14, LossSpec::quadratic(), 2.5);
    const Vector oracle =
        (p.gram + 2.5 * Matrix::Identity(14, 14)).ldlt().solve(p.y);

    SolverUsage usage;
    const FunctionEstimate direct = weak_learner_rkhs(p, &usage);
    CHECK(rel_err(direct.coefficients, oracle) < 1e-10);
    CHECK(usage.calls == 1);

    const GramFactor fac = GramFactor::make(p.gram);
    const FunctionEstimate factored = weak_learner_rkhs(p, fac);
    CHECK(rel_err(factored.coefficients, oracle) < 1e-8);
}

TEST_CASE("l1 weak learner beats coefficient perturbations") {
    std::mt19937_64 gen(63);
    const RkhsProblem p = random_problem(gen, 12, LossSpec::l1(), 0.7);
    SolveOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 200000;
    const FunctionEstimate est = weak_learner_rkhs(p, nullptr, opts);
    const double at_min = rkhs_objective(p, est.coefficients);
    for (int i = 0; i < 200; ++i) {
        const Vector d = 0.05 * random_vector(gen, 12);
        CHECK(at_min <= rkhs_objective(p, est.coefficients + d) + 1e-6);
    }
}

TEST_CASE("one round of the boosting kernel is the weak learner, bit for bit") {
    std::mt19937_64 gen(64);
    for (const LossSpec& loss : {LossSpec::quadratic(), LossSpec::l1()}) {
        const double gamma = 40.0, sigma2 = 2.0;
        const RkhsProblem p = random_problem(gen, 13, loss, gamma);
        const GramFactor fac = GramFactor::make(p.gram);
        const FunctionEstimate weak = weak_learner_rkhs(p, fac);
        const FunctionEstimate boosted =
            boost_rkhs_kernel(p, fac, sigma2 / gamma, sigma2, 1.0);
        REQUIRE(weak.coefficients.size() == boosted.coefficients.size());
        for (Index i = 0; i < weak.coefficients.size(); ++i)
            CHECK(weak.coefficients[i] == boosted.coefficients[i]);
    }
}

TEST_CASE("integer nu coincides with the iterative recursion under quadratic loss") {
    std::mt19937_64 gen(65);
    const double gamma = 25.0, sigma2 = 1.5;
    const RkhsProblem p = random_problem(gen, 16, LossSpec::quadratic(), gamma);
    const GramFactor fac = GramFactor::make(p.gram);
    for (Index nu = 1; nu <= 6; ++nu) {
        const FunctionEstimate iter = boost_rkhs_classic(p, nu);
        const FunctionEstimate oneshot =
            boost_rkhs_kernel(p, fac, sigma2 / gamma, sigma2, double(nu));
        const Vector fit_iter = p.gram * iter.coefficients;
        const Vector fit_one = p.gram * oneshot.coefficients;
        CHECK(rel_err(fit_iter, fit_one) < 1e-8);
        CHECK(rel_err(iter.coefficients, oneshot.coefficients) < 1e-6);
    }
}

TEST_CASE("round callback sees cumulative coefficients, one-based") {
    std::mt19937_64 gen(66);
    const RkhsProblem p = random_problem(gen, 10, LossSpec::quadratic(), 8.0);
    std::vector<Index> rounds_seen;
    std::vector<Vector> cumulative;
    SolverUsage usage;
    boost_rkhs_classic(p, 4, &usage, {}, [&](Index k, const Vector& c) {
        rounds_seen.push_back(k);
        cumulative.push_back(c);
    });
    REQUIRE(rounds_seen.size() == 4);
    for (Index k = 0; k < 4; ++k) CHECK(rounds_seen[std::size_t(k)] == k + 1);
    CHECK(usage.calls == 4);
    // the prefix after k rounds is exactly the k-round run
    for (Index k = 1; k <= 4; ++k) {
        const FunctionEstimate prefix = boost_rkhs_classic(p, k);
        CHECK(rel_err(cumulative[std::size_t(k - 1)], prefix.coefficients) < 1e-12);
    }
}

TEST_CASE("boosting kernel validations") {
    std::mt19937_64 gen(67);
    const RkhsProblem p = random_problem(gen, 9, LossSpec::quadratic(), 10.0);
    const GramFactor fac = GramFactor::make(p.gram);
    // sigma2/lambda must reproduce gamma
    CHECK_THROWS_AS(boost_rkhs_kernel(p, fac, 0.3, 2.0, 2.0), ConfigError);
    CHECK_THROWS_AS(boost_rkhs_kernel(p, fac, 0.2, 0.0, 2.0), ConfigError);
    CHECK_THROWS_AS(boost_rkhs_kernel(p, fac, 0.2, 2.0, 0.5), ConfigError);
    CHECK_THROWS_AS(boost_rkhs_kernel(p, fac, 0.2, 2.0, 1e8), NumericError);

    // lambda = 0 yields the zero estimate; the gamma consistency check does
    // not apply there
    const FunctionEstimate z = boost_rkhs_kernel(p, fac, 0.0, 2.0, 3.0);
    CHECK(z.coefficients.norm() == 0.0);

    RkhsProblem hinge_p = p;
    hinge_p.loss = LossSpec::hinge();
    CHECK_THROWS_AS(boost_rkhs_kernel(hinge_p, fac, 0.2, 2.0, 2.0), ConfigError);
    CHECK_THROWS_AS(boost_rkhs_classic(hinge_p, 3), ConfigError);
}

TEST_CASE("classifier entry point enforces hinge and labels") {
    std::mt19937_64 gen(68);
    const Index n = 12;
    const Matrix x = random_matrix(gen, n, 2);
    Vector labels(n);
    for (Index i = 0; i < n; ++i) labels[i] = i % 2 == 0 ? 1.0 : -1.0;
    RkhsProblem p;
    p.kernel = KernelSpec::gaussian(x, 0.6);
    p.gram = build_kernel(p.kernel);
    p.y = labels;
    p.loss = LossSpec::hinge();
    p.gamma = 5.0;

    SolveOptions opts;
    opts.tol = 1e-9;
    opts.max_iter = 100000;
    const FunctionEstimate est = boost_svc(p, 0.2, 1.0, 2.0, nullptr, opts);
    CHECK(est.coefficients.size() == n);
    CHECK(est.coefficients.norm() > 0.0);

    RkhsProblem bad = p;
    bad.y[0] = 0.5;
    CHECK_THROWS_AS(boost_svc(bad, 0.2, 1.0, 2.0), DataError);
    RkhsProblem wrong_loss = p;
    wrong_loss.loss = LossSpec::l1();
    CHECK_THROWS_AS(boost_svc(wrong_loss, 0.2, 1.0, 2.0), ConfigError);
}

TEST_CASE("dual chaining reproduces cold solves") {
    std::mt19937_64 gen(69);
    const double gamma = 30.0, sigma2 = 1.0;
    const RkhsProblem p = random_problem(gen, 15, LossSpec::l1(), gamma);
    const GramFactor fac = GramFactor::make(p.gram);
    SolveOptions opts;
    opts.tol = 1e-9;
    opts.max_iter = 200000;

    Vector chain;
    for (double nu : {2.0, 3.5, 6.0, 11.0}) {
        SolverUsage warm_usage, cold_usage;
        const FunctionEstimate warm = boost_rkhs_kernel(p, fac, sigma2 / gamma, sigma2, nu,
                                                        &warm_usage, opts, &chain);
        const FunctionEstimate cold =
            boost_rkhs_kernel(p, fac, sigma2 / gamma, sigma2, nu, &cold_usage, opts);
        CHECK(chain.size() > 0);  // the dual flows back out
        CHECK(rel_err(Vector(p.gram * warm.coefficients), Vector(p.gram * cold.coefficients)) <
              1e-5);
    }
}

TEST_CASE("prediction at the training points is the gram expansion") {
    std::mt19937_64 gen(70);
    const Matrix x = random_matrix(gen, 11, 2);
    RkhsProblem p = RkhsProblem::make(KernelSpec::gaussian(x, 0.9), random_vector(gen, 11),
                                      LossSpec::quadratic(), 3.0);
    const FunctionEstimate est = weak_learner_rkhs(p);
    CHECK(rel_err(predict(est, x), Vector(p.gram * est.coefficients)) < 1e-12);
}

}  // TEST_SUITE
