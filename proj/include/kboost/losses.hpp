#pragma once

#include "kboost/common.hpp"

#include <string>

namespace kboost {

// Piecewise linear-quadratic penalties applied componentwise. All of them are
// convex, nonnegative and vanish at zero. Hinge acts on margins y_i*f(x_i);
// the others act on residuals.
enum class LossKind { Quadratic, L1, Huber, QuantileHuber, Vapnik, Hinge, ElasticNet };

struct LossSpec {
    LossKind kind = LossKind::Quadratic;
    double kappa = 1.0;    // huber / qhuber: width of the quadratic zone
    double tau = 0.5;      // qhuber: quantile level in (0,1)
    double epsilon = 0.1;  // vapnik: half-width of the insensitive zone
    double mu = 0.5;       // enet: weight of the l1 term

    static LossSpec quadratic() { return {LossKind::Quadratic}; }
    static LossSpec l1() { return {LossKind::L1}; }
    static LossSpec huber(double kappa) { return {LossKind::Huber, kappa}; }
    static LossSpec quantile_huber(double tau, double kappa) {
        LossSpec s{LossKind::QuantileHuber};
        s.tau = tau;
        s.kappa = kappa;
        return s;
    }
    static LossSpec vapnik(double eps) {
        LossSpec s{LossKind::Vapnik};
        s.epsilon = eps;
        return s;
    }
    static LossSpec hinge() { return {LossKind::Hinge}; }
    static LossSpec elastic_net(double mu) {
        LossSpec s{LossKind::ElasticNet};
        s.mu = mu;
        return s;
    }
};

// Closed interval; subdifferentials of scalar PLQ penalties are intervals.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double distance(double s) const {
        if (s < lo) return lo - s;
        if (s > hi) return s - hi;
        return 0.0;
    }
    double clamp(double s) const { return s < lo ? lo : (s > hi ? hi : s); }
};

void validate(const LossSpec& spec);

double loss_value(const LossSpec& spec, double r);
double loss_value(const LossSpec& spec, const Vector& r);

// prox_{t*rho}(w) = argmin_u rho(u) + (u - w)^2 / (2t), t > 0.
double prox(const LossSpec& spec, double t, double w);
Vector prox(const LossSpec& spec, double t, const Vector& w);

Interval subgradient(const LossSpec& spec, double r);

// Accepts "quad", "l1", "huber[:k=..]", "qhuber[:tau=..,k=..]",
// "vapnik[:eps=..]", "hinge", "enet[:mu=..]".
LossSpec parse_loss(const std::string& text);
std::string loss_to_string(const LossSpec& spec);

}  // namespace kboost
