#pragma once

// Hand-rolled model definitions used as implementation-independent oracles.
// These deliberately do not go through ssyield::build_preset.

#include <cmath>
#include <functional>

#include "ssyield/diffusion.hpp"

namespace testmodels {

// Logistic dynamics on (0,1): dX = -mu X(1-X) dt + sigma X(1-X) dW,
// beta = -2 mu / sigma^2 (k = 1).
struct LogisticParams {
    double mu = 0.05;
    double sigma = 0.1;
    double x0 = 0.5;
    double k0 = 100.0;
    double k1 = 9.0;
    double k2 = 4.0;
};

inline double logistic_beta(const LogisticParams& p) {
    return -2.0 * p.mu / (p.sigma * p.sigma);
}

inline ssyield::DiffusionModel logistic_model(const LogisticParams& p = {},
                                              bool with_overrides = true) {
    ssyield::DiffusionModel m;
    const double mu = p.mu, sigma = p.sigma;
    m.drift = [mu](double x) { return -mu * x * (1.0 - x); };
    m.dispersion = [sigma](double x) { return sigma * x * (1.0 - x); };
    m.left = 0.0;
    m.right = 1.0;
    m.anchor = p.x0;
    m.left_behavior = ssyield::LeftBehavior::natural;
    m.right_behavior = ssyield::RightBehavior::natural;
    if (with_overrides && sigma > 0) {
        const double beta = logistic_beta(p);
        const double x0 = p.x0;
        const double C1 = std::pow(x0 / (1.0 - x0), beta);
        const double C2 = 1.0 / (sigma * sigma * C1);
        m.scale_log_density_override = [beta, C1](double x) {
            return std::log(C1) + beta * std::log((1.0 - x) / x);
        };
        m.speed_density_override = [beta, C2](double v) {
            return C2 * std::pow(1.0 - v, -(beta + 2.0)) *
                   std::pow(v, beta - 2.0);
        };
    }
    m.validate();
    return m;
}

// closed forms from the x0 = xbar = 1/2 parameterization
inline double logistic_zeta_cf(const LogisticParams& p, double x) {
    const double b = logistic_beta(p);
    const double den = p.sigma * p.sigma * b * (b * b - 1.0);
    return -2.0 *
           (1.0 - 2.0 * x + 2.0 * b * std::log(2.0 - 2.0 * x) +
            b * (1.0 + b) * std::log(x / (1.0 - x))) /
           den;
}

inline double logistic_g0_cf(const LogisticParams& p, double x) {
    const double b = logistic_beta(p);
    const double den = p.sigma * p.sigma * b * (b * b - 1.0);
    return p.k0 *
           ((2.0 * x - 1.0) * (2.0 * b * b - 1.0) -
            2.0 * b * std::log(2.0 - 2.0 * x) -
            b * (1.0 + b) * std::log(x / (1.0 - x))) /
           (2.0 * den);
}

inline double logistic_c0(const LogisticParams& p, double x) {
    return p.k0 * (x - 0.5) * (x - 0.5);
}

// Drifted Brownian motion on (-inf, inf): dX = -mu dt + sigma dW.
inline ssyield::DiffusionModel bm_model(double mu = 1.0, double sigma = 1.0,
                                        double x0 = 0.0) {
    ssyield::DiffusionModel m;
    m.drift = [mu](double) { return -mu; };
    m.dispersion = [sigma](double) { return sigma; };
    m.anchor = x0;
    m.validate();
    return m;
}

// Reflected drifted BM on (0, inf), regular reflecting left boundary.
inline ssyield::DiffusionModel reflected_bm_model(double mu = 1.0,
                                                  double sigma = 1.0,
                                                  double x0 = 1.0) {
    ssyield::DiffusionModel m;
    m.drift = [mu](double) { return -mu; };
    m.dispersion = [sigma](double) { return sigma; };
    m.left = 0.0;
    m.anchor = x0;
    m.left_behavior = ssyield::LeftBehavior::regular_reflecting;
    m.validate();
    return m;
}

// GBM on (0, inf): dX = -mu X dt + sigma X dW.
inline ssyield::DiffusionModel gbm_model(double mu = 0.5, double sigma = 0.5,
                                         double x0 = 1.0) {
    ssyield::DiffusionModel m;
    m.drift = [mu](double x) { return -mu * x; };
    m.dispersion = [sigma](double x) { return sigma * x; };
    m.left = 0.0;
    m.anchor = x0;
    m.validate();
    return m;
}

}  // namespace testmodels
