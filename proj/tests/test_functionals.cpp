#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "ssyield/functionals.hpp"
#include "ssyield/presets.hpp"
#include "test_models.hpp"

using namespace ssyield;
using Catch::Approx;
namespace tmod = testmodels;

namespace {

ProblemSpec logistic_spec(const std::string& yields = "") {
    PresetOverrides ov;
    ov.yields = yields;
    return build_preset(PresetId::logistic_zskew, ov);
}

// spec with quadrature-only functionals: closed forms stripped, coefficient
// overrides kept (they are exact and tested separately).
ProblemSpec strip_closed_forms(ProblemSpec spec) {
    spec.closed_form.reset();
    return spec;
}

// independent nested quadrature of zeta/g0 for the logistic model, built on
// the paper's scale/speed densities only
double nested_zeta_oracle(double x) {
    const double beta = -10.0, sigma = 0.1;
    auto sprime = [&](double u) { return std::pow((1.0 - u) / u, beta); };
    auto m = [&](double v) {
        return std::pow(1.0 - v, -(beta + 2.0)) * std::pow(v, beta - 2.0) /
               (sigma * sigma);
    };
    auto inner = [&](double u) {
        return integrate_to_boundary([&](double v) { return 2.0 * m(v); }, u,
                                     1.0, 1e-11)
            .value;
    };
    return integrate([&](double u) { return sprime(u) * inner(u); },
                     std::min(x, 0.5), std::max(x, 0.5), 1e-10)
               .value *
           (x < 0.5 ? -1.0 : 1.0);
}

double nested_g0_oracle(double x) {
    const double beta = -10.0, sigma = 0.1, k0 = 100.0;
    auto sprime = [&](double u) { return std::pow((1.0 - u) / u, beta); };
    auto m = [&](double v) {
        return std::pow(1.0 - v, -(beta + 2.0)) * std::pow(v, beta - 2.0) /
               (sigma * sigma);
    };
    auto inner = [&](double u) {
        return integrate_to_boundary(
                   [&](double v) {
                       return 2.0 * k0 * (v - 0.5) * (v - 0.5) * m(v);
                   },
                   u, 1.0, 1e-11)
            .value;
    };
    return integrate([&](double u) { return sprime(u) * inner(u); },
                     std::min(x, 0.5), std::max(x, 0.5), 1e-10)
               .value *
           (x < 0.5 ? -1.0 : 1.0);
}

}  // namespace

TEST_CASE("g0 and zeta vanish at the anchor", "[functionals]") {
    CycleFunctionals fn(logistic_spec());
    REQUIRE(fn.g0(0.5) == 0.0);
    REQUIRE(fn.zeta(0.5) == 0.0);
    REQUIRE(compute_g0(logistic_spec(), 0.5) == 0.0);
    REQUIRE(compute_zeta(logistic_spec(), 0.5) == 0.0);
}

TEST_CASE("logistic closed forms reproduce the reference values",
          "[functionals]") {
    CycleFunctionals fn(logistic_spec());
    REQUIRE(fn.zeta(0.25) == Approx(-21.512).margin(1e-3));
    REQUIRE(fn.g0(0.25) == Approx(-37.800).margin(1e-3));
    // against the independent nested-quadrature oracle
    REQUIRE(fn.zeta(0.25) == Approx(nested_zeta_oracle(0.25)).margin(2e-6));
    REQUIRE(fn.g0(0.25) == Approx(nested_g0_oracle(0.25)).margin(2e-6));
}

TEST_CASE("closed-form and quadrature paths agree on a 50-point grid",
          "[functionals]") {
    CycleFunctionals cf(logistic_spec());
    CycleFunctionals quad(strip_closed_forms(logistic_spec()));
    for (int i = 0; i < 50; ++i) {
        const double x = 0.05 + 0.9 * i / 49.0;
        const double scale = 1.0 + std::abs(cf.g0(x));
        REQUIRE(std::abs(quad.g0(x) - cf.g0(x)) < 1e-6 * scale);
        const double zscale = 1.0 + std::abs(cf.zeta(x));
        REQUIRE(std::abs(quad.zeta(x) - cf.zeta(x)) < 1e-6 * zscale);
    }
}

TEST_CASE("generator identities for g0 and zeta", "[functionals]") {
    auto spec = logistic_spec();
    CycleFunctionals fn(spec);
    for (double x : {0.25, 0.4, 0.55, 0.7}) {
        GeneratorInput g0in;
        g0in.value = [&](double u) { return fn.g0(u); };
        g0in.derivative = [&](double u) { return fn.g0_prime(u); };
        auto rg = apply_generator(g0in, spec.diffusion, x);
        REQUIRE(rg.value + spec.costs.holding(x) == Approx(0.0).margin(1e-4));

        GeneratorInput zin;
        zin.value = [&](double u) { return fn.zeta(u); };
        zin.derivative = [&](double u) { return fn.zeta_prime(u); };
        auto rz = apply_generator(zin, spec.diffusion, x);
        REQUIRE(rz.value == Approx(-1.0).margin(1e-4));
    }
    // quadrature-backed path satisfies the same equation
    CycleFunctionals quad(strip_closed_forms(spec));
    GeneratorInput qin;
    qin.value = [&](double u) { return quad.g0(u); };
    qin.derivative = [&](double u) { return quad.g0_prime(u); };
    auto rq = apply_generator(qin, spec.diffusion, 0.45);
    REQUIRE(rq.value + spec.costs.holding(0.45) == Approx(0.0).margin(1e-3));
}

TEST_CASE("jump operator basics", "[functionals]") {
    CycleFunctionals fn(logistic_spec());
    auto zeta = [&](double x) { return fn.zeta(x); };
    REQUIRE(jump_B(zeta, 0.4, 0.4) == 0.0);
    REQUIRE(jump_B(zeta, 0.25, 0.5) == Approx(21.512).margin(1e-3));
    const double direct = jump_B(zeta, 0.3, 0.8);
    REQUIRE(jump_B(zeta, 0.3, 0.6) + jump_B(zeta, 0.6, 0.8) ==
            Approx(direct).epsilon(1e-14));
    REQUIRE_THROWS_AS(jump_B(zeta, 0.8, 0.3), OutOfRegion);
}

TEST_CASE("F0 and H0 reference points", "[functionals]") {
    CycleFunctionals fn(logistic_spec());
    REQUIRE(std::isinf(fn.F0(0.4, 0.4)));
    REQUIRE(std::isinf(fn.H0(0.4, 0.4)));
    REQUIRE(fn.F0(0.381724, 0.56993) == Approx(1.00067).margin(1e-3));
    REQUIRE(fn.H0(0.384973, 0.6575) == Approx(1.33092).margin(1e-3));
}

TEST_CASE("dirac yields collapse H0 to F0", "[functionals]") {
    CycleFunctionals fn(logistic_spec("dirac"));
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j) {
            const double y = 0.1 + 0.8 * i / 12.0;
            const double z = 0.1 + 0.8 * j / 12.0;
            REQUIRE(fn.H0(y, z) == Approx(fn.F0(y, z)).epsilon(1e-12));
        }
}

TEST_CASE("H0 via hats equals H0 via the cycle-proportion measure",
          "[functionals]") {
    CycleFunctionals fn(logistic_spec());
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const double y = 0.25 + 0.3 * i / 19.0;
            const double z = 0.58 + 0.3 * j / 19.0;
            REQUIRE(std::abs(fn.H0(y, z) - fn.H0_via_frak_P(y, z)) < 1e-6);
        }
}

TEST_CASE("cycle-proportion measure properties", "[functionals]") {
    CycleFunctionals fn(logistic_spec());
    const double y = 0.4, z = 0.7;
    REQUIRE(fn.frak_P(y, z, y, z) == Approx(1.0).margin(1e-10));

    CycleFunctionals dn(logistic_spec("dirac"));
    REQUIRE(dn.frak_P(y, z, 0.69, 0.71) == 1.0);
    REQUIRE(dn.frak_P(y, z, 0.2, 0.69) == 0.0);

    // mass escapes to the boundary as z -> 1 (natural right endpoint)
    double prev = 0.0;
    for (double zz : {0.95, 0.99, 0.999}) {
        double inf_mass = 1.0;
        for (double yy = 0.3; yy <= 0.5001; yy += 0.025)
            inf_mass = std::min(inf_mass, fn.frak_P(yy, zz, 0.9, 1.0));
        REQUIRE(inf_mass >= prev - 1e-12);
        prev = inf_mass;
    }
    REQUIRE(prev >= 0.99);
    REQUIRE_THROWS_AS(fn.frak_P(0.7, 0.4, 0.0, 1.0), OutOfRegion);
}

TEST_CASE("policy evaluation at the reference optima", "[functionals]") {
    CycleFunctionals m3(logistic_spec());
    auto e3 = m3.evaluate_policy(0.384973, 0.6575);
    REQUIRE(e3.kappa_hat == Approx(0.088618).margin(2e-4));
    REQUIRE(e3.hat_Bzeta == Approx(11.2843).margin(2e-2));
    REQUIRE(e3.mean_supply == Approx(0.138321).margin(5e-4));
    REQUIRE(e3.H0 == Approx(1.33092).margin(1e-3));
    REQUIRE(e3.H0 ==
            Approx((e3.hat_c1 + e3.hat_Bg0) / e3.hat_Bzeta).epsilon(1e-14));

    CycleFunctionals m2(logistic_spec("dirac"));
    auto e2 = m2.evaluate_policy(0.381724, 0.56993);
    REQUIRE(e2.hat_Bzeta == Approx(15.2779).margin(2e-2));
    REQUIRE(e2.H0 == Approx(1.00067).margin(1e-3));
    REQUIRE(e2.mean_supply == Approx(0.56993 - 0.381724).epsilon(1e-14));
    REQUIRE_THROWS_AS(m2.evaluate_policy(0.5, 0.5), OutOfRegion);
}

TEST_CASE("hatted cycle length never exceeds the non-deficient one",
          "[functionals]") {
    CycleFunctionals fn(logistic_spec());
    CycleFunctionals dn(logistic_spec("dirac"));
    auto zf = [&](double x) { return fn.zeta(x); };
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j) {
            const double y = 0.15 + 0.7 * i / 10.0;
            const double z = 0.15 + 0.7 * j / 10.0;
            REQUIRE(fn.hat_Bzeta(y, z) <= jump_B(zf, y, z) + 1e-12);
            REQUIRE(dn.hat_Bzeta(y, z) ==
                    Approx(jump_B(zf, y, z)).epsilon(1e-12));
        }
}

TEST_CASE("cycle surplus identity", "[functionals]") {
    // c1hat + (B U0)^ = (H0 - H*) (B zeta)^ for any constant H*
    CycleFunctionals fn(logistic_spec());
    const double h_star = 1.33;
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 9; ++j) {
            const double y = 0.2 + 0.5 * i / 8.0;
            const double z = 0.25 + 0.55 * j / 8.0;
            if (z - y < 0.05) continue;
            const double lhs = fn.hat_c1(y, z) + fn.hat_BU0(y, z, h_star);
            const double rhs =
                (fn.H0(y, z) - h_star) * fn.hat_Bzeta(y, z);
            REQUIRE(lhs == Approx(rhs).margin(1e-6));
        }
}

TEST_CASE("grid minimum of H0 dominates the F0 minimum", "[functionals]") {
    CycleFunctionals fn(logistic_spec());
    double minH = std::numeric_limits<double>::infinity();
    double minF = minH;
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 40; ++j) {
            const double y = 0.15 + 0.5 * i / 39.0;
            const double z = 0.35 + 0.6 * j / 39.0;
            if (z - y < 1e-3) continue;
            minH = std::min(minH, fn.H0(y, z));
            minF = std::min(minF, fn.F0(y, z));
        }
    REQUIRE(minH >= minF - 1e-12);
}

TEST_CASE("holding cost that is not speed-integrable fails loudly",
          "[functionals]") {
    ProblemSpec spec;
    spec.diffusion = tmod::gbm_model(0.5, 0.5, 1.0);  // gamma = 4
    spec.costs.holding = [](double x) { return std::pow(x, 6.0); };
    spec.costs.holding_limit_left = 0.0;
    spec.costs.holding_limit_right = std::numeric_limits<double>::infinity();
    spec.costs.ordering = [](double y, double z) { return 1.0 + (z - y); };
    spec.costs.fixed_cost_k1 = 1.0;
    spec.yields = YieldFamily::dirac();
    CycleFunctionals fn(spec);
    REQUIRE_THROWS_AS(fn.g0(1.5), IntegrabilityFailure);
}

TEST_CASE("boundary extension by continuity at an attainable endpoint",
          "[functionals]") {
    ProblemSpec spec;
    spec.diffusion = tmod::reflected_bm_model(1.0, 1.0, 1.0);
    spec.costs.holding = [](double x) { return x + 2.0 * std::exp(-x); };
    spec.costs.holding_limit_left = 2.0;
    spec.costs.holding_limit_right = std::numeric_limits<double>::infinity();
    spec.costs.ordering = [](double y, double z) {
        return 3.0 + std::sqrt(z - y);
    };
    spec.costs.fixed_cost_k1 = 3.0;
    spec.yields = YieldFamily::nearly_proportional(0.5);
    CycleFunctionals fn(spec);
    const double at_zero = fn.zeta(0.0);
    REQUIRE(std::isfinite(at_zero));
    REQUIRE(at_zero < fn.zeta(0.01));
    REQUIRE(std::isfinite(fn.g0(0.0)));
}
