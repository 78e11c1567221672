#include "kboost/losses.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

namespace kboost {

void validate(const LossSpec& spec) {
    switch (spec.kind) {
        case LossKind::Huber:
        case LossKind::QuantileHuber:
            if (!(spec.kappa > 0.0)) throw ConfigError("loss: kappa must be positive");
            if (spec.kind == LossKind::QuantileHuber && !(spec.tau > 0.0 && spec.tau < 1.0))
                throw ConfigError("loss: tau must lie in (0,1)");
            break;
        case LossKind::Vapnik:
            if (!(spec.epsilon >= 0.0)) throw ConfigError("loss: eps must be nonnegative");
            break;
        case LossKind::ElasticNet:
            if (!(spec.mu >= 0.0)) throw ConfigError("loss: mu must be nonnegative");
            break;
        default:
            break;
    }
}

double loss_value(const LossSpec& spec, double r) {
    const double a = std::abs(r);
    switch (spec.kind) {
        case LossKind::Quadratic:
            return r * r;
        case LossKind::L1:
            return a;
        case LossKind::Huber: {
            const double k = spec.kappa;
            return a <= k ? 0.5 * r * r : k * a - 0.5 * k * k;
        }
        case LossKind::QuantileHuber: {
            // slope -tau on the far left, +(1-tau) on the far right,
            // r^2/(4*kappa) in between; breakpoints -2*tau*kappa and
            // 2*(1-tau)*kappa make the derivative continuous.
            const double t = spec.tau, k = spec.kappa;
            if (r < -2.0 * t * k) return -t * r - k * t * t;
            if (r > 2.0 * (1.0 - t) * k) return (1.0 - t) * r - k * (1.0 - t) * (1.0 - t);
            return r * r / (4.0 * k);
        }
        case LossKind::Vapnik:
            return a <= spec.epsilon ? 0.0 : a - spec.epsilon;
        case LossKind::Hinge:
            return r >= 1.0 ? 0.0 : 1.0 - r;  // r is a margin here
        case LossKind::ElasticNet:
            return spec.mu * a + 0.5 * r * r;
    }
    return 0.0;
}

double loss_value(const LossSpec& spec, const Vector& r) {
    double s = 0.0;
    for (Index i = 0; i < r.size(); ++i) s += loss_value(spec, r[i]);
    return s;
}

namespace {
inline double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }
}  // namespace

double prox(const LossSpec& spec, double t, double w) {
    switch (spec.kind) {
        case LossKind::Quadratic:
            return w / (1.0 + 2.0 * t);
        case LossKind::L1: {
            const double a = std::abs(w) - t;
            return a > 0.0 ? sgn(w) * a : 0.0;
        }
        case LossKind::Huber: {
            const double k = spec.kappa;
            if (std::abs(w) <= k * (1.0 + t)) return w / (1.0 + t);
            return w - t * k * sgn(w);
        }
        case LossKind::QuantileHuber: {
            const double tau = spec.tau, k = spec.kappa;
            if (w < -tau * (2.0 * k + t)) return w + t * tau;
            if (w > (1.0 - tau) * (2.0 * k + t)) return w - t * (1.0 - tau);
            return 2.0 * k * w / (2.0 * k + t);
        }
        case LossKind::Vapnik: {
            const double e = spec.epsilon, a = std::abs(w);
            if (a <= e) return w;
            if (a <= e + t) return sgn(w) * e;
            return w - t * sgn(w);
        }
        case LossKind::Hinge: {
            if (w >= 1.0) return w;
            if (w >= 1.0 - t) return 1.0;
            return w + t;
        }
        case LossKind::ElasticNet: {
            const double a = std::abs(w) - spec.mu * t;
            return a > 0.0 ? sgn(w) * a / (1.0 + t) : 0.0;
        }
    }
    return w;
}

Vector prox(const LossSpec& spec, double t, const Vector& w) {
    Vector out(w.size());
    for (Index i = 0; i < w.size(); ++i) out[i] = prox(spec, t, w[i]);
    return out;
}

Interval subgradient(const LossSpec& spec, double r) {
    switch (spec.kind) {
        case LossKind::Quadratic:
            return {2.0 * r, 2.0 * r};
        case LossKind::L1:
            if (r > 0.0) return {1.0, 1.0};
            if (r < 0.0) return {-1.0, -1.0};
            return {-1.0, 1.0};
        case LossKind::Huber: {
            const double g = std::min(spec.kappa, std::max(-spec.kappa, r));
            return {g, g};
        }
        case LossKind::QuantileHuber: {
            const double tau = spec.tau, k = spec.kappa;
            if (r < -2.0 * tau * k) return {-tau, -tau};
            if (r > 2.0 * (1.0 - tau) * k) return {1.0 - tau, 1.0 - tau};
            const double g = r / (2.0 * k);
            return {g, g};
        }
        case LossKind::Vapnik: {
            const double e = spec.epsilon;
            if (std::abs(r) < e) return {0.0, 0.0};
            if (r > e) return {1.0, 1.0};
            if (r < -e) return {-1.0, -1.0};
            return r > 0.0 ? Interval{0.0, 1.0} : Interval{-1.0, 0.0};
        }
        case LossKind::Hinge:
            if (r < 1.0) return {-1.0, -1.0};
            if (r > 1.0) return {0.0, 0.0};
            return {-1.0, 0.0};
        case LossKind::ElasticNet: {
            if (r > 0.0) return {r + spec.mu, r + spec.mu};
            if (r < 0.0) return {r - spec.mu, r - spec.mu};
            return {-spec.mu, spec.mu};
        }
    }
    return {0.0, 0.0};
}

namespace {

std::map<std::string, double> parse_params(const std::string& text, const std::string& name) {
    std::map<std::string, double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("loss '" + name + "': expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        char* end = nullptr;
        const double v = std::strtod(val.c_str(), &end);
        if (end == val.c_str() || *end != '\0')
            throw ConfigError("loss '" + name + "': bad numeric value '" + val + "'");
        out[key] = v;
    }
    return out;
}

double take(std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    const double v = it->second;
    params.erase(it);
    return v;
}

}  // namespace

LossSpec parse_loss(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    std::map<std::string, double> params;
    if (colon != std::string::npos) params = parse_params(text.substr(colon + 1), name);

    LossSpec spec;
    if (name == "quad") {
        spec = LossSpec::quadratic();
    } else if (name == "l1") {
        spec = LossSpec::l1();
    } else if (name == "huber") {
        spec = LossSpec::huber(take(params, "k", 1.0));
    } else if (name == "qhuber") {
        spec = LossSpec::quantile_huber(take(params, "tau", 0.5), take(params, "k", 1.0));
    } else if (name == "vapnik") {
        spec = LossSpec::vapnik(take(params, "eps", 0.1));
    } else if (name == "hinge") {
        spec = LossSpec::hinge();
    } else if (name == "enet") {
        spec = LossSpec::elastic_net(take(params, "mu", 0.5));
    } else {
        throw ConfigError("unknown loss '" + name +
                          "'; expected quad, l1, huber[:k=..], qhuber[:tau=..,k=..], "
                          "vapnik[:eps=..], hinge, or enet[:mu=..]");
    }
    if (!params.empty())
        throw ConfigError("loss '" + name + "': unknown parameter '" + params.begin()->first + "'");
    validate(spec);
    return spec;
}

std::string loss_to_string(const LossSpec& spec) {
    std::ostringstream os;
    switch (spec.kind) {
        case LossKind::Quadratic: return "quad";
        case LossKind::L1: return "l1";
        case LossKind::Huber:
            os << "huber:k=" << spec.kappa;
            break;
        case LossKind::QuantileHuber:
            os << "qhuber:tau=" << spec.tau << ",k=" << spec.kappa;
            break;
        case LossKind::Vapnik:
            os << "vapnik:eps=" << spec.epsilon;
            break;
        case LossKind::Hinge: return "hinge";
        case LossKind::ElasticNet:
            os << "enet:mu=" << spec.mu;
            break;
    }
    return os.str();
}

}  // namespace kboost
