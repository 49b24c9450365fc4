#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ssyield/diffusion.hpp"
#include "test_models.hpp"

using namespace ssyield;
using Catch::Approx;
namespace tmod = testmodels;

TEST_CASE("drifted BM scale log-density from quadrature", "[diffusion]") {
    const double mu = 1.0, sigma = 1.0, x0 = 0.0;
    auto model = tmod::bm_model(mu, sigma, x0);
    auto ss = build_scale_speed(model);
    for (double x : {-2.0, -0.5, 0.0, 0.7, 3.1}) {
        const double expected = 2.0 * mu * (x - x0) / (sigma * sigma);
        REQUIRE(ss.scale_log_density(x) == Approx(expected).margin(1e-9));
    }
    REQUIRE(ss.scale(x0) == 0.0);
    double prev = ss.scale(-3.0);
    for (double x = -2.5; x <= 3.0; x += 0.5) {
        const double s = ss.scale(x);
        REQUIRE(s > prev);
        prev = s;
    }
}

TEST_CASE("logistic speed density closed form and quadrature path agree",
          "[diffusion]") {
    tmod::LogisticParams p;
    auto with_cf = tmod::logistic_model(p, true);
    auto generic = tmod::logistic_model(p, false);
    auto ss_cf = build_scale_speed(with_cf);
    auto ss_q = build_scale_speed(generic);

    const double beta = tmod::logistic_beta(p);
    const double C2 = std::pow((1.0 - p.x0) / p.x0, beta) / (p.sigma * p.sigma);
    for (int i = 1; i <= 50; ++i) {
        const double v = 0.05 + 0.9 * i / 51.0;
        const double paper = C2 * std::pow(1.0 - v, -(beta + 2.0)) *
                             std::pow(v, beta - 2.0);
        REQUIRE(ss_cf.speed_density(v) == Approx(paper).epsilon(1e-12));
        REQUIRE(ss_q.speed_density(v) == Approx(paper).epsilon(1e-8));
        REQUIRE(ss_q.scale_density(v) ==
                Approx(ss_cf.scale_density(v)).epsilon(1e-8));
        REQUIRE(ss_q.scale(v) ==
                Approx(ss_cf.scale(v)).margin(1e-8).epsilon(1e-8));
    }
}

TEST_CASE("logistic scale density is one at the anchor", "[diffusion]") {
    auto model = tmod::logistic_model();
    auto ss = build_scale_speed(model);
    REQUIRE(ss.scale_density(0.5) == Approx(1.0).epsilon(1e-12));
    REQUIRE(ss.scale(0.5) == 0.0);
}

TEST_CASE("boundary classification of the example models", "[diffusion]") {
    SECTION("logistic: both natural, left attracting") {
        auto model = tmod::logistic_model();
        auto ss = build_scale_speed(model);
        auto l = classify_boundary(model, ss, Endpoint::left);
        auto r = classify_boundary(model, ss, Endpoint::right);
        REQUIRE(l.feller_class == FellerClass::natural);
        REQUIRE(r.feller_class == FellerClass::natural);
        REQUIRE(l.attracting);
        REQUIRE_FALSE(r.attracting);
        REQUIRE(r.speed_tail_finite);
    }
    SECTION("drifted BM: infinite endpoints natural") {
        auto model = tmod::bm_model();
        auto ss = build_scale_speed(model);
        auto l = classify_boundary(model, ss, Endpoint::left);
        auto r = classify_boundary(model, ss, Endpoint::right);
        REQUIRE(l.feller_class == FellerClass::natural);
        REQUIRE(r.feller_class == FellerClass::natural);
        REQUIRE(l.attracting);
        REQUIRE_FALSE(r.attracting);
        REQUIRE(r.speed_tail_finite);
    }
    SECTION("reflected BM: left regular and attracting") {
        auto model = tmod::reflected_bm_model();
        auto ss = build_scale_speed(model);
        auto l = classify_boundary(model, ss, Endpoint::left);
        REQUIRE(l.feller_class == FellerClass::regular);
        REQUIRE(l.attracting);
    }
    SECTION("GBM: natural at zero, attracting") {
        auto model = tmod::gbm_model();
        auto ss = build_scale_speed(model);
        auto l = classify_boundary(model, ss, Endpoint::left);
        auto r = classify_boundary(model, ss, Endpoint::right);
        REQUIRE(l.feller_class == FellerClass::natural);
        REQUIRE(l.attracting);
        REQUIRE(r.feller_class == FellerClass::natural);
        REQUIRE_FALSE(r.attracting);
    }
}

TEST_CASE("classification mismatch against a wrong declaration",
          "[diffusion]") {
    auto model = tmod::logistic_model();
    model.left_behavior = LeftBehavior::exit;
    auto ss = build_scale_speed(model);
    REQUIRE_THROWS_AS(classify_boundary(model, ss, Endpoint::left),
                      ClassificationMismatch);
}

TEST_CASE("generator annihilates constants and the scale function",
          "[diffusion]") {
    auto model = tmod::logistic_model();
    auto ss = build_scale_speed(model);
    for (double x : {0.2, 0.5, 0.8}) {
        auto rc = apply_generator([](double) { return 3.25; }, model, x);
        REQUIRE(rc.value == Approx(0.0).margin(1e-12));
        auto rs = apply_generator([&](double u) { return ss.scale(u); }, model,
                                  x);
        REQUIRE(rs.value == Approx(0.0).margin(5e-5));
    }
}

TEST_CASE("generator maps zeta to minus one", "[diffusion]") {
    // zeta from the independent closed form; A zeta = -1 on the interior
    tmod::LogisticParams p;
    auto model = tmod::logistic_model(p);
    for (double x : {0.3, 0.5, 0.62}) {
        auto r = apply_generator(
            [&](double u) { return tmod::logistic_zeta_cf(p, u); }, model, x);
        REQUIRE(r.value == Approx(-1.0).margin(1e-4));
        REQUIRE(r.step > 0.0);
    }
}

TEST_CASE("stencil guards near the boundary", "[diffusion]") {
    auto model = tmod::logistic_model();
    REQUIRE_THROWS_AS(
        apply_generator([](double u) { return u; }, model, 1.0 - 1e-15),
        StencilOutOfDomain);
    REQUIRE_THROWS_AS(
        apply_generator([](double u) { return u; }, model, 1.5),
        StencilOutOfDomain);
}

TEST_CASE("degenerate dispersion is rejected by scale construction",
          "[diffusion]") {
    tmod::LogisticParams p;
    p.sigma = 0.0;
    auto model = tmod::logistic_model(p, false);
    REQUIRE(model.deterministic);
    REQUIRE_THROWS_AS(build_scale_speed(model), NondegeneracyViolation);
}

TEST_CASE("negative dispersion is rejected at validation", "[diffusion]") {
    DiffusionModel m;
    m.drift = [](double) { return 0.0; };
    m.dispersion = [](double x) { return x < 0.5 ? 1.0 : -1.0; };
    m.left = 0.0;
    m.right = 1.0;
    m.anchor = 0.4;
    REQUIRE_THROWS_AS(m.validate(), NondegeneracyViolation);
}
