#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ssyield/problem.hpp"

namespace ssyield {

enum class PresetId {
    drifted_bm,
    drifted_bm_reflected,
    gbm_power_cost,
    gbm_piecewise_cost,
    logistic_zskew,
};

inline const char* preset_name(PresetId id) {
    switch (id) {
        case PresetId::drifted_bm: return "drifted_bm";
        case PresetId::drifted_bm_reflected: return "drifted_bm_reflected";
        case PresetId::gbm_power_cost: return "gbm_power_cost";
        case PresetId::gbm_piecewise_cost: return "gbm_piecewise_cost";
        case PresetId::logistic_zskew: return "logistic_zskew";
    }
    return "?";
}

inline std::vector<PresetId> all_presets() {
    return {PresetId::drifted_bm, PresetId::drifted_bm_reflected,
            PresetId::gbm_power_cost, PresetId::gbm_piecewise_cost,
            PresetId::logistic_zskew};
}

inline PresetId preset_from_name(const std::string& name) {
    for (PresetId id : all_presets())
        if (name == preset_name(id)) return id;
    throw InvalidParameter("unknown preset '" + name + "'");
}

/// Numeric overrides plus an optional yields selector:
///   "" (preset default), "dirac", "proportional", "zskew".
struct PresetOverrides {
    std::map<std::string, double> values;
    std::string yields;
};

namespace detail {

class ParamReader {
  public:
    ParamReader(const std::map<std::string, double>& bag,
                std::map<std::string, double> defaults)
        : defaults_(std::move(defaults)) {
        for (const auto& [k, v] : bag) {
            if (!defaults_.count(k))
                throw InvalidParameter("unknown preset parameter '" + k + "'");
            defaults_[k] = v;
        }
    }
    double operator()(const std::string& key) const {
        return defaults_.at(key);
    }
    const std::map<std::string, double>& resolved() const { return defaults_; }

  private:
    std::map<std::string, double> defaults_;
};

}  // namespace detail

/// Resolved parameter set is kept for report headers.
struct PresetBuild {
    ProblemSpec spec;
    std::map<std::string, double> parameters;
    std::string yields;
};

inline PresetBuild build_preset_detailed(PresetId id,
                                         const PresetOverrides& ov = {}) {
    PresetBuild out;
    ProblemSpec& spec = out.spec;
    const std::string& ysel = ov.yields;
    auto pick_yields = [&](const std::string& def,
                           double delta) -> YieldFamily {
        const std::string& s = ysel.empty() ? def : ysel;
        out.yields = s;
        if (s == "dirac") return YieldFamily::dirac();
        if (s == "proportional") return YieldFamily::nearly_proportional(delta);
        if (s == "zskew")
            throw InvalidParameter(
                "z-skewed yields are only defined for the logistic preset");
        throw InvalidParameter("unknown yields selector '" + s + "'");
    };

    switch (id) {
        case PresetId::drifted_bm: {
            detail::ParamReader p(ov.values,
                                  {{"mu", 1.0},
                                   {"sigma", 1.0},
                                   {"c_b", 2.0},
                                   {"c_h", 1.0},
                                   {"k1", 3.0},
                                   {"k2", 1.0},
                                   {"x0", 0.0},
                                   {"delta", 0.5}});
            const double mu = p("mu"), sg = p("sigma");
            if (!(mu > 0.0 && sg > 0.0))
                throw InvalidParameter("drifted_bm: mu, sigma must be > 0");
            spec.diffusion.drift = [mu](double) { return -mu; };
            spec.diffusion.dispersion = [sg](double) { return sg; };
            spec.diffusion.anchor = p("x0");
            const double x0 = p("x0");
            spec.diffusion.scale_log_density_override = [mu, sg, x0](double x) {
                return 2.0 * mu * (x - x0) / (sg * sg);
            };
            spec.diffusion.speed_density_override = [mu, sg, x0](double x) {
                return std::exp(-2.0 * mu * (x - x0) / (sg * sg)) / (sg * sg);
            };
            const double cb = p("c_b"), chh = p("c_h");
            spec.costs.holding = [cb, chh](double x) {
                return x < 0 ? -cb * x : chh * x;
            };
            spec.costs.holding_limit_left =
                std::numeric_limits<double>::infinity();
            spec.costs.holding_limit_right =
                std::numeric_limits<double>::infinity();
            const double k1 = p("k1"), k2 = p("k2");
            spec.costs.ordering = [k1, k2](double y, double z) {
                return k1 + k2 * (z - y);
            };
            spec.costs.fixed_cost_k1 = k1;
            spec.yields = pick_yields("proportional", p("delta"));
            spec.label = "drifted_bm";
            out.parameters = p.resolved();
            break;
        }
        case PresetId::drifted_bm_reflected: {
            detail::ParamReader p(ov.values,
                                  {{"mu", 1.0},
                                   {"sigma", 1.0},
                                   {"k1", 3.0},
                                   {"k2", 1.0},
                                   {"k3", 1.0},
                                   {"k4", 2.0},
                                   {"x0", 1.0},
                                   {"delta", 0.5}});
            const double mu = p("mu"), sg = p("sigma");
            if (!(mu > 0.0 && sg > 0.0))
                throw InvalidParameter(
                    "drifted_bm_reflected: mu, sigma must be > 0");
            spec.diffusion.drift = [mu](double) { return -mu; };
            spec.diffusion.dispersion = [sg](double) { return sg; };
            spec.diffusion.left = 0.0;
            spec.diffusion.anchor = p("x0");
            spec.diffusion.left_behavior = LeftBehavior::regular_reflecting;
            const double x0 = p("x0");
            spec.diffusion.scale_log_density_override = [mu, sg, x0](double x) {
                return 2.0 * mu * (x - x0) / (sg * sg);
            };
            spec.diffusion.speed_density_override = [mu, sg, x0](double x) {
                return std::exp(-2.0 * mu * (x - x0) / (sg * sg)) / (sg * sg);
            };
            const double k3 = p("k3"), k4 = p("k4");
            spec.costs.holding = [k3, k4](double x) {
                return k3 * x + k4 * std::exp(-x);
            };
            spec.costs.holding_limit_left = k4;
            spec.costs.holding_limit_right =
                std::numeric_limits<double>::infinity();
            const double k1 = p("k1"), k2 = p("k2");
            spec.costs.ordering = [k1, k2](double y, double z) {
                return k1 + k2 * std::sqrt(z - y);
            };
            spec.costs.fixed_cost_k1 = k1;
            spec.yields = pick_yields("proportional", p("delta"));
            spec.label = "drifted_bm_reflected";
            out.parameters = p.resolved();
            break;
        }
        case PresetId::gbm_power_cost: {
            detail::ParamReader p(ov.values,
                                  {{"mu", 0.5},
                                   {"sigma", 0.5},
                                   {"k1", 2.0},
                                   {"k2", 1.0},
                                   {"k3", 1.0},
                                   {"k4", 1.0},
                                   {"beta", -1.0},
                                   {"x0", 1.0},
                                   {"delta", 0.5}});
            const double mu = p("mu"), sg = p("sigma"), beta = p("beta");
            if (!(mu > 0.0 && sg > 0.0))
                throw InvalidParameter("gbm_power_cost: mu, sigma must be > 0");
            if (!(beta < 0.0))
                throw InvalidParameter("gbm_power_cost: beta must be < 0");
            spec.diffusion.drift = [mu](double x) { return -mu * x; };
            spec.diffusion.dispersion = [sg](double x) { return sg * x; };
            spec.diffusion.left = 0.0;
            spec.diffusion.anchor = p("x0");
            const double gamma = 2.0 * mu / (sg * sg);
            const double x0 = p("x0");
            spec.diffusion.scale_log_density_override = [gamma, x0](double x) {
                return gamma * std::log(x / x0);
            };
            spec.diffusion.speed_density_override = [gamma, sg, x0](double x) {
                return std::pow(x / x0, -gamma) / (sg * sg * x * x);
            };
            const double k3 = p("k3"), k4 = p("k4");
            spec.costs.holding = [k3, k4, beta](double x) {
                return k3 * x + k4 * std::pow(x, beta);
            };
            spec.costs.holding_limit_left =
                std::numeric_limits<double>::infinity();
            spec.costs.holding_limit_right =
                std::numeric_limits<double>::infinity();
            const double k1 = p("k1"), k2 = p("k2");
            spec.costs.ordering = [k1, k2](double y, double z) {
                return k1 + k2 * std::sqrt(z - y);
            };
            spec.costs.fixed_cost_k1 = k1;
            spec.yields = pick_yields("proportional", p("delta"));
            spec.label = "gbm_power_cost";
            out.parameters = p.resolved();
            break;
        }
        case PresetId::gbm_piecewise_cost: {
            detail::ParamReader p(ov.values,
                                  {{"mu", 0.5},
                                   {"sigma", 0.5},
                                   {"k1", 2.0},
                                   {"k3", 1.0},
                                   {"k4", 1.0},
                                   {"x0", 1.0},
                                   {"delta", 0.5}});
            const double mu = p("mu"), sg = p("sigma");
            if (!(mu > 0.0 && sg > 0.0))
                throw InvalidParameter(
                    "gbm_piecewise_cost: mu, sigma must be > 0");
            spec.diffusion.drift = [mu](double x) { return -mu * x; };
            spec.diffusion.dispersion = [sg](double x) { return sg * x; };
            spec.diffusion.left = 0.0;
            spec.diffusion.anchor = p("x0");
            const double gamma = 2.0 * mu / (sg * sg);
            const double x0 = p("x0");
            spec.diffusion.scale_log_density_override = [gamma, x0](double x) {
                return gamma * std::log(x / x0);
            };
            spec.diffusion.speed_density_override = [gamma, sg, x0](double x) {
                return std::pow(x / x0, -gamma) / (sg * sg * x * x);
            };
            const double k3 = p("k3"), k4 = p("k4");
            spec.costs.holding = [k3, k4](double x) {
                return x < 1.0 ? k3 * (1.0 - x) : k4 * (x - 1.0);
            };
            spec.costs.holding_limit_left = k3;
            spec.costs.holding_limit_right =
                std::numeric_limits<double>::infinity();
            const double k1 = p("k1");
            spec.costs.ordering = [k1](double y, double z) {
                return k1 +
                       0.5 * (1.0 / std::sqrt(y) - 1.0 / std::sqrt(z)) +
                       0.5 * (z - y);
            };
            spec.costs.fixed_cost_k1 = k1;
            spec.yields = pick_yields("proportional", p("delta"));
            spec.label = "gbm_piecewise_cost";
            out.parameters = p.resolved();
            break;
        }
        case PresetId::logistic_zskew: {
            detail::ParamReader p(ov.values,
                                  {{"mu", 0.05},
                                   {"sigma", 0.1},
                                   {"k0", 100.0},
                                   {"k1", 9.0},
                                   {"k2", 4.0},
                                   {"x0", 0.5},
                                   {"xbar", 0.5},
                                   {"j", 10.0}});
            const double mu = p("mu"), sg = p("sigma");
            const double k0 = p("k0"), xbar = p("xbar");
            if (!(mu > 0.0))
                throw InvalidParameter("logistic: mu must be > 0");
            spec.diffusion.drift = [mu](double x) {
                return -mu * x * (1.0 - x);
            };
            spec.diffusion.dispersion = [sg](double x) {
                return sg * x * (1.0 - x);
            };
            spec.diffusion.left = 0.0;
            spec.diffusion.right = 1.0;
            spec.diffusion.anchor = p("x0");
            spec.costs.holding = [k0, xbar](double x) {
                return k0 * (x - xbar) * (x - xbar);
            };
            spec.costs.holding_limit_left = k0 * xbar * xbar;
            spec.costs.holding_limit_right = k0 * (1.0 - xbar) * (1.0 - xbar);
            const double k1 = p("k1"), k2 = p("k2");
            spec.costs.ordering = [k1, k2](double y, double z) {
                return k1 + k2 * (z - y);
            };
            spec.costs.fixed_cost_k1 = k1;
            const int j = static_cast<int>(p("j"));
            spec.yields = (ysel.empty() || ysel == "zskew")
                              ? YieldFamily::z_skewed_uniform(j, 1.0)
                              : pick_yields(ysel, 0.5);
            out.yields = ysel.empty() ? "zskew" : ysel;

            if (sg > 0.0) {
                const double beta = -2.0 * mu / (sg * sg);
                if (!(beta < -1.0))
                    throw InvalidParameter(
                        "logistic: requires beta = -2 mu / sigma^2 < -1");
                const double x0 = p("x0");
                const double C1 = std::pow(x0 / (1.0 - x0), beta);
                const double C2 = 1.0 / (sg * sg * C1);
                spec.diffusion.scale_log_density_override =
                    [beta, C1](double x) {
                        return std::log(C1) +
                               beta * std::log((1.0 - x) / x);
                    };
                spec.diffusion.speed_density_override = [beta, C2](double v) {
                    return C2 * std::pow(1.0 - v, -(beta + 2.0)) *
                           std::pow(v, beta - 2.0);
                };
                // closed forms hold only in the symmetric parameterization
                if (x0 == 0.5 && xbar == 0.5) {
                    const double den = sg * sg * beta * (beta * beta - 1.0);
                    ClosedFormFunctionals cf;
                    cf.zeta = [beta, den](double x) {
                        return -2.0 *
                               (1.0 - 2.0 * x +
                                2.0 * beta * std::log(2.0 - 2.0 * x) +
                                beta * (1.0 + beta) *
                                    std::log(x / (1.0 - x))) /
                               den;
                    };
                    cf.zeta_prime = [beta, den](double x) {
                        return -2.0 *
                               (-2.0 - 2.0 * beta / (1.0 - x) +
                                beta * (1.0 + beta) / (x * (1.0 - x))) /
                               den;
                    };
                    cf.g0 = [k0, beta, den](double x) {
                        return k0 *
                               ((2.0 * x - 1.0) * (2.0 * beta * beta - 1.0) -
                                2.0 * beta * std::log(2.0 - 2.0 * x) -
                                beta * (1.0 + beta) *
                                    std::log(x / (1.0 - x))) /
                               (2.0 * den);
                    };
                    cf.g0_prime = [k0, beta, den](double x) {
                        return k0 *
                               (2.0 * (2.0 * beta * beta - 1.0) +
                                2.0 * beta / (1.0 - x) -
                                beta * (1.0 + beta) / (x * (1.0 - x))) /
                               (2.0 * den);
                    };
                    spec.closed_form = cf;
                }
            }
            spec.label = "logistic_zskew";
            out.parameters = p.resolved();
            break;
        }
    }
    spec.validate();
    return out;
}

inline ProblemSpec build_preset(PresetId id, const PresetOverrides& ov = {}) {
    return build_preset_detailed(id, ov).spec;
}

}  // namespace ssyield
