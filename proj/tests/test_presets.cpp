#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ssyield/functionals.hpp"
#include "ssyield/presets.hpp"
#include "test_models.hpp"

using namespace ssyield;
using Catch::Approx;
namespace tmod = testmodels;

TEST_CASE("logistic defaults and the beta constraint", "[presets]") {
    auto built = build_preset_detailed(PresetId::logistic_zskew);
    REQUIRE(built.parameters.at("mu") == 0.05);
    REQUIRE(built.parameters.at("sigma") == 0.1);
    const double beta = -2.0 * 0.05 / (1.0 * 0.1 * 0.1);
    REQUIRE(beta == Approx(-10.0));
    REQUIRE(built.spec.closed_form.has_value());
    REQUIRE(built.yields == "zskew");

    // holding cost limits at the endpoints: k0/4 on both sides
    REQUIRE(built.spec.costs.holding_limit_left == Approx(25.0));
    REQUIRE(built.spec.costs.holding_limit_right == Approx(25.0));

    PresetOverrides bad;
    bad.values["sigma"] = 0.4;  // beta = -0.625 >= -1
    REQUIRE_THROWS_AS(build_preset(PresetId::logistic_zskew, bad),
                      InvalidParameter);
}

TEST_CASE("logistic closed forms detach away from the symmetric anchor",
          "[presets]") {
    PresetOverrides ov;
    ov.values["x0"] = 0.4;
    auto spec = build_preset(PresetId::logistic_zskew, ov);
    REQUIRE_FALSE(spec.closed_form.has_value());
    REQUIRE(spec.diffusion.scale_log_density_override != nullptr);
}

TEST_CASE("logistic model variants", "[presets]") {
    PresetOverrides m1;
    m1.values["sigma"] = 0.0;
    m1.yields = "dirac";
    auto spec1 = build_preset(PresetId::logistic_zskew, m1);
    REQUIRE(spec1.diffusion.deterministic);
    REQUIRE(spec1.yields.kind() == YieldKind::dirac);

    PresetOverrides m2;
    m2.yields = "dirac";
    auto spec2 = build_preset(PresetId::logistic_zskew, m2);
    REQUIRE_FALSE(spec2.diffusion.deterministic);
    REQUIRE(spec2.yields.kind() == YieldKind::dirac);

    auto spec3 = build_preset(PresetId::logistic_zskew);
    REQUIRE(spec3.yields.kind() == YieldKind::z_skewed_uniform);
    REQUIRE(spec3.yields.skew_exponent() == 10);
}

TEST_CASE("drifted BM cost structure", "[presets]") {
    auto spec = build_preset(PresetId::drifted_bm);
    REQUIRE(spec.costs.ordering(0.4, 0.4) == Approx(3.0));  // c1(y,y) = k1
    REQUIRE(spec.costs.holding(-2.0) == Approx(4.0));
    REQUIRE(spec.costs.holding(3.0) == Approx(3.0));
    // scale density override matches the quadrature-built one
    auto hand = tmod::bm_model(1.0, 1.0, 0.0);
    hand.scale_log_density_override = nullptr;
    auto ss_hand = build_scale_speed(hand);
    auto ss_preset = build_scale_speed(spec.diffusion);
    for (double x : {-1.5, 0.0, 0.5, 2.0})
        REQUIRE(ss_preset.scale_log_density(x) ==
                Approx(ss_hand.scale_log_density(x)).margin(1e-9));
}

TEST_CASE("GBM presets pass the holding-cost integrability probe",
          "[presets]") {
    for (PresetId id :
         {PresetId::gbm_power_cost, PresetId::gbm_piecewise_cost}) {
        auto spec = build_preset(id);
        auto ss = build_scale_speed(spec.diffusion);
        auto c0m = [&](double v) {
            return spec.costs.holding(v) * ss.speed_density(v);
        };
        auto r = integrate_to_boundary(c0m, spec.diffusion.anchor,
                                       spec.diffusion.right, 1e-9);
        REQUIRE(r.converged);
        REQUIRE(std::isfinite(r.value));
    }
}

TEST_CASE("GBM scale and speed overrides agree with quadrature", "[presets]") {
    auto spec = build_preset(PresetId::gbm_power_cost);
    auto generic = spec.diffusion;
    generic.scale_log_density_override = nullptr;
    generic.speed_density_override = nullptr;
    auto ss_cf = build_scale_speed(spec.diffusion);
    auto ss_q = build_scale_speed(generic);
    for (double x : {0.3, 0.8, 1.0, 1.7, 3.2}) {
        REQUIRE(ss_q.scale_density(x) ==
                Approx(ss_cf.scale_density(x)).epsilon(1e-8));
        REQUIRE(ss_q.speed_density(x) ==
                Approx(ss_cf.speed_density(x)).epsilon(1e-8));
    }
}

TEST_CASE("reflected preset declares a regular reflecting origin",
          "[presets]") {
    auto spec = build_preset(PresetId::drifted_bm_reflected);
    REQUIRE(spec.diffusion.left_behavior == LeftBehavior::regular_reflecting);
    REQUIRE(spec.diffusion.left == 0.0);
    REQUIRE(spec.costs.holding_limit_left == Approx(2.0));
    // sqrt ordering cost with floor k1
    REQUIRE(spec.costs.ordering(1.0, 1.0) == Approx(3.0));
    REQUIRE(spec.costs.ordering(1.0, 2.0) == Approx(4.0));
}

TEST_CASE("unknown parameters and invalid capacities are rejected",
          "[presets]") {
    PresetOverrides ov;
    ov.values["nonsense"] = 1.0;
    REQUIRE_THROWS_WITH(build_preset(PresetId::drifted_bm, ov),
                        Catch::Matchers::ContainsSubstring("nonsense"));

    ProblemSpec bad;
    bad.diffusion = tmod::logistic_model();
    bad.costs.holding = [](double x) { return x * x; };
    bad.costs.ordering = [](double, double) { return 1.0; };
    bad.costs.fixed_cost_k1 = 1.0;
    bad.yields = YieldFamily::z_skewed_uniform(10, 2.0);  // capacity != b
    REQUIRE_THROWS_AS(bad.validate(), InvalidParameter);
}

TEST_CASE("zskew yields are rejected outside the logistic preset",
          "[presets]") {
    PresetOverrides ov;
    ov.yields = "zskew";
    REQUIRE_THROWS_AS(build_preset(PresetId::drifted_bm, ov),
                      InvalidParameter);
}
