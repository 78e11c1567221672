#include "kboost/losses.hpp"

#include "doctest.h"
#include "util.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace kboost;

namespace {

std::vector<LossSpec> all_losses() {
    return {LossSpec::quadratic(),
            LossSpec::l1(),
            LossSpec::huber(1.0),
            LossSpec::huber(0.3),
            LossSpec::quantile_huber(0.3, 0.8),
            LossSpec::vapnik(0.5),
            LossSpec::hinge(),
            LossSpec::elastic_net(0.7)};
}

// brute-force prox: scan u over [-12, 12]
double grid_prox(const LossSpec& spec, double t, double w, double step) {
    double best_u = -12.0, best = std::numeric_limits<double>::infinity();
    for (double u = -12.0; u <= 12.0; u += step) {
        const double val = loss_value(spec, u) + (u - w) * (u - w) / (2.0 * t);
        if (val < best) {
            best = val;
            best_u = u;
        }
    }
    return best_u;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("componentwise values") {
    Vector r(2);
    r << -2.0, 3.0;
    CHECK(loss_value(LossSpec::l1(), r) == doctest::Approx(5.0));
    CHECK(loss_value(LossSpec::quadratic(), r) == doctest::Approx(13.0));

    Vector m(2);
    m << 2.0, 0.5;
    CHECK(loss_value(LossSpec::hinge(), m) == doctest::Approx(0.5));

    Vector v(2);
    v << 0.3, -1.0;
    CHECK(loss_value(LossSpec::vapnik(0.5), v) == doctest::Approx(0.5));

    CHECK(loss_value(LossSpec::huber(1.0), 0.5) == doctest::Approx(0.125));
    CHECK(loss_value(LossSpec::huber(1.0), 3.0) == doctest::Approx(2.5));
    CHECK(loss_value(LossSpec::elastic_net(0.7), -2.0) == doctest::Approx(1.4 + 2.0));
}

TEST_CASE("convex, nonnegative, zero attained") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (const LossSpec& spec : all_losses()) {
        CAPTURE(loss_to_string(spec));
        if (spec.kind == LossKind::Hinge)
            CHECK(loss_value(spec, 1.5) == 0.0);
        else
            CHECK(loss_value(spec, 0.0) == 0.0);
        for (int i = 0; i < 200; ++i) {
            const double a = u(gen), b = u(gen), lam = 0.5 * (1.0 + u(gen) / 5.0);
            CHECK(loss_value(spec, a) >= 0.0);
            const double mix = loss_value(spec, lam * a + (1.0 - lam) * b);
            const double bound = lam * loss_value(spec, a) + (1.0 - lam) * loss_value(spec, b);
            CHECK(mix <= bound + 1e-12);
        }
    }
}

TEST_CASE("huber derivative is continuous and bounded by kappa") {
    const LossSpec spec = LossSpec::huber(0.8);
    const double h = 1e-7;
    for (double r : {-3.0, -0.8 - 1e-9, -0.8 + 1e-9, -0.2, 0.0, 0.5, 0.8, 2.7}) {
        const double fd = (loss_value(spec, r + h) - loss_value(spec, r - h)) / (2.0 * h);
        const Interval g = subgradient(spec, r);
        CHECK(g.lo == doctest::Approx(g.hi));
        CHECK(fd == doctest::Approx(g.lo).epsilon(1e-5));
        CHECK(std::abs(g.lo) <= 0.8 + 1e-12);
    }
}

TEST_CASE("prox closed forms") {
    CHECK(prox(LossSpec::l1(), 1.0, 0.0) == 0.0);
    CHECK(prox(LossSpec::l1(), 1.0, 2.5) == doctest::Approx(1.5));
    CHECK(prox(LossSpec::l1(), 1.0, -0.4) == 0.0);
    CHECK(prox(LossSpec::quadratic(), 0.25, 3.0) == doctest::Approx(2.0));
    CHECK(prox(LossSpec::hinge(), 0.5, 2.0) == 2.0);       // flat region
    CHECK(prox(LossSpec::hinge(), 0.5, 0.8) == 1.0);        // pulled to the elbow
    CHECK(prox(LossSpec::hinge(), 0.5, -1.0) == doctest::Approx(-0.5));
    CHECK(prox(LossSpec::vapnik(0.5), 1.0, 0.3) == 0.3);    // dead zone
}

TEST_CASE("prox agrees with a brute-force argmin") {
    std::mt19937_64 gen(22);
    std::uniform_real_distribution<double> uw(-6.0, 6.0);
    std::uniform_real_distribution<double> ut(0.05, 3.0);
    for (const LossSpec& spec : all_losses()) {
        CAPTURE(loss_to_string(spec));
        for (int i = 0; i < 3; ++i) {
            const double t = ut(gen), w = uw(gen);
            const double got = prox(spec, t, w);
            const double want = grid_prox(spec, t, w, 1e-4);
            CHECK(std::abs(got - want) <= 1e-3);
        }
    }
}

TEST_CASE("prox point satisfies the minimization property") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> uw(-6.0, 6.0);
    std::uniform_real_distribution<double> ut(0.05, 3.0);
    for (const LossSpec& spec : all_losses()) {
        for (int i = 0; i < 50; ++i) {
            const double t = ut(gen), w = uw(gen);
            const double p = prox(spec, t, w);
            const double at_p = loss_value(spec, p) + (p - w) * (p - w) / (2.0 * t);
            for (int j = 0; j < 20; ++j) {
                const double u = uw(gen);
                const double at_u = loss_value(spec, u) + (u - w) * (u - w) / (2.0 * t);
                CHECK(at_p <= at_u + 1e-12);
            }
        }
    }
}

TEST_CASE("subgradients match finite differences away from kinks") {
    std::mt19937_64 gen(24);
    std::uniform_real_distribution<double> ur(-4.0, 4.0);
    const double h = 1e-6;
    for (const LossSpec& spec : all_losses()) {
        CAPTURE(loss_to_string(spec));
        for (int i = 0; i < 100; ++i) {
            const double r = ur(gen);
            CHECK(subgradient(spec, r).lo <= subgradient(spec, r).hi);
            const double fd = (loss_value(spec, r + h) - loss_value(spec, r - h)) / (2.0 * h);
            // convexity: the difference quotient over [r-h, r+h] is bracketed
            // by the one-sided slopes at the interval ends
            CHECK(subgradient(spec, r - h).lo - 1e-9 <= fd);
            CHECK(fd <= subgradient(spec, r + h).hi + 1e-9);
        }
    }
    const Interval at_zero = subgradient(LossSpec::l1(), 0.0);
    CHECK(at_zero.lo == -1.0);
    CHECK(at_zero.hi == 1.0);
    const Interval elbow = subgradient(LossSpec::hinge(), 1.0);
    CHECK(elbow.lo == -1.0);
    CHECK(elbow.hi == 0.0);
}

TEST_CASE("parsing and printing round-trip") {
    for (const LossSpec& spec : all_losses()) {
        const LossSpec back = parse_loss(loss_to_string(spec));
        CHECK(back.kind == spec.kind);
        CHECK(back.kappa == doctest::Approx(spec.kappa));
        CHECK(back.tau == doctest::Approx(spec.tau));
        CHECK(back.epsilon == doctest::Approx(spec.epsilon));
        CHECK(back.mu == doctest::Approx(spec.mu));
    }
    CHECK(parse_loss("huber:k=2.5").kappa == doctest::Approx(2.5));
    CHECK(parse_loss("qhuber:tau=0.2,k=0.9").tau == doctest::Approx(0.2));
    CHECK_THROWS_AS(parse_loss("square"), ConfigError);
    CHECK_THROWS_AS(parse_loss("huber:k=-1"), ConfigError);
    CHECK_THROWS_AS(validate(LossSpec::quantile_huber(1.5, 1.0)), ConfigError);
    CHECK_THROWS_AS(validate(LossSpec::huber(0.0)), ConfigError);
}

}  // TEST_SUITE
