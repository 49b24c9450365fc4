#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ssyield/problem.hpp"

using namespace ssyield;
using Catch::Approx;

TEST_CASE("dirac kernel integrates and samples at z", "[yields]") {
    auto f = YieldFamily::dirac();
    auto g = [](double v) { return v * v + 1.0; };
    REQUIRE(integrate_against_Q(f, g, 0.3, 0.8) == g(0.8));
    REQUIRE(integrate_against_Q(f, g, 0.5, 0.5) == g(0.5));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) REQUIRE(sample_yield(f, 0.3, 0.8, rng) == 0.8);
}

TEST_CASE("z-skewed kernel reproduces the mean supply level", "[yields]") {
    auto f = YieldFamily::z_skewed_uniform(10, 1.0);
    const double y = 0.384973, z = 0.6575;
    const double w = std::pow(z, 10);
    const double L = (1.0 - w) * y + w * z;
    const double mean = integrate_against_Q(f, [](double v) { return v; }, y, z);
    REQUIRE(mean == Approx(0.5 * (L + z)).epsilon(1e-12));
    REQUIRE(mean == Approx(0.523294).margin(1e-6));
    REQUIRE(mean - y == Approx(0.138321).margin(1e-6));
}

TEST_CASE("base pushforward mean matches the closed form and Monte Carlo",
          "[yields]") {
    const double delta = 0.4, y = -0.7, z = 1.9;
    auto f = YieldFamily::nearly_proportional(delta);
    const double closed = y + (z - y) * (delta + 1.0) / 2.0;
    const double viaQ = integrate_against_Q(f, [](double v) { return v; }, y, z);
    REQUIRE(viaQ == Approx(closed).epsilon(1e-12));

    std::mt19937_64 rng(42);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = sample_yield(f, y, z, rng);
        sum += v;
        sumsq += v * v;
    }
    const double mc = sum / n;
    const double se = std::sqrt((sumsq / n - mc * mc) / n);
    REQUIRE(std::abs(mc - closed) < 4.0 * se);
}

TEST_CASE("z-skewed sampling matches the analytic cdf", "[yields]") {
    auto f = YieldFamily::z_skewed_uniform(10, 1.0);
    const double y = 0.384973, z = 0.6575;
    const double L = f.support_lower(y, z);
    std::mt19937_64 rng(7);
    const int n = 100000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_yield(f, y, z, rng);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cdf = (xs[i] - L) / (z - L);  // uniform on (L, z]
        ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
        ks = std::max(ks, std::abs(cdf - i / static_cast<double>(n)));
    }
    REQUIRE(ks < 0.01);
}

TEST_CASE("base pushforward sampling respects the delivery guaranty",
          "[yields]") {
    auto f = YieldFamily::nearly_proportional(0.3);
    const double y = 0.2, z = 1.4;
    std::mt19937_64 rng(3);
    double lo = 1e300;
    for (int i = 0; i < 100000; ++i)
        lo = std::min(lo, sample_yield(f, y, z, rng));
    REQUIRE(lo >= y + 0.3 * (z - y) - 1e-12);
}

TEST_CASE("minimal delivery guaranty verdicts", "[yields]") {
    REQUIRE(check_mdg(YieldFamily::dirac()).pass);
    auto ok = check_mdg(YieldFamily::nearly_proportional(0.3));
    REQUIRE(ok.pass);
    REQUIRE(ok.guaranteed_fraction == Approx(0.3));
    REQUIRE_THROWS_AS(YieldFamily::nearly_proportional(0.0), InvalidParameter);
    REQUIRE(check_mdg(YieldFamily::z_skewed_uniform(10, 1.0)).pass);
}

TEST_CASE("assured supply commitment probes", "[yields]") {
    SECTION("nearly proportional yields on an unbounded interval") {
        auto f = YieldFamily::nearly_proportional(0.5);
        std::vector<double> zs{2.0, 4.0, 8.0, 16.0, 64.0, 256.0};
        auto rep = check_asc(f, 0.1, 0.6, 1.0, zs);
        REQUIRE(rep.pass);
        REQUIRE(rep.tail_infima.back() == Approx(1.0).margin(1e-2));
    }
    SECTION("z-skewed uniform toward a finite boundary") {
        auto f = YieldFamily::z_skewed_uniform(10, 1.0);
        std::vector<double> zs{0.92, 0.95, 0.99, 0.999};
        auto rep = check_asc(f, 0.3, 0.5, 0.9, zs);
        REQUIRE(rep.pass);
        REQUIRE(rep.tail_infima.back() == Approx(1.0).margin(1e-6));
    }
    SECTION("dirac commits all mass above any fixed level") {
        auto f = YieldFamily::dirac();
        std::vector<double> zs{0.95, 0.97, 0.999};
        auto rep = check_asc(f, 0.3, 0.5, 0.9, zs);
        REQUIRE(rep.pass);
        REQUIRE(rep.delta == Approx(1.0));
    }
}

TEST_CASE("kernel mass and support properties", "[yields]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<YieldFamily> fams{YieldFamily::dirac(),
                                  YieldFamily::nearly_proportional(0.35),
                                  YieldFamily::z_skewed_uniform(10, 1.0)};
    for (const auto& f : fams) {
        for (int i = 0; i < 20; ++i) {
            double y = u(rng), z = u(rng);
            if (y > z) std::swap(y, z);
            if (z - y < 1e-3) continue;
            const double mass =
                integrate_against_Q(f, [](double) { return 1.0; }, y, z);
            REQUIRE(mass == Approx(1.0).margin(1e-10));
            const double inside = integrate_against_Q(
                f, [&](double v) { return (v > y && v <= z) ? 1.0 : 0.0; }, y,
                z);
            REQUIRE(inside == Approx(1.0).margin(1e-10));
        }
    }
}

TEST_CASE("weak continuity probe battery", "[yields]") {
    std::vector<YieldFamily> fams{YieldFamily::dirac(),
                                  YieldFamily::nearly_proportional(0.35),
                                  YieldFamily::z_skewed_uniform(10, 1.0)};
    std::vector<std::function<double(double)>> gs{
        [](double) { return 1.0; },
        [](double v) { return v; },
        [](double v) { return v * v; },
        [](double v) { return std::sin(3.0 * v); },
        [](double v) { return std::exp(-v * v); },
        [](double v) { return std::clamp((v - 0.5) / 0.2, 0.0, 1.0); }};
    const double y = 0.35, z = 0.72;
    for (const auto& f : fams) {
        for (const auto& g : gs) {
            const double base = integrate_against_Q(f, g, y, z);
            const double eps = 1e-8;
            const double moved =
                integrate_against_Q(f, g, y + eps, z - 0.5 * eps);
            REQUIRE(std::abs(moved - base) < 1e-6);
            // diagonal approach: Q(.; y, y+eps) -> point mass at y
            const double diag = integrate_against_Q(f, g, y, y + eps);
            REQUIRE(std::abs(diag - g(y)) < 1e-6);
        }
    }
}

TEST_CASE("sampler and kernel integral agree on a nonlinear statistic",
          "[yields]") {
    auto f = YieldFamily::z_skewed_uniform(10, 1.0);
    const double y = 0.3, z = 0.8;
    auto g = [](double v) { return v * v; };
    const double exact = integrate_against_Q(f, g, y, z);
    std::mt19937_64 rng(99);
    const long n = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < n; ++i) {
        const double v = g(sample_yield(f, y, z, rng));
        sum += v;
        sumsq += v * v;
    }
    const double mc = sum / n;
    const double se = std::sqrt((sumsq / n - mc * mc) / n);
    REQUIRE(std::abs(mc - exact) < 4.0 * se);
}

TEST_CASE("kernel rejects inverted arguments", "[yields]") {
    auto f = YieldFamily::nearly_proportional(0.5);
    REQUIRE_THROWS_AS(
        integrate_against_Q(f, [](double v) { return v; }, 0.8, 0.3),
        OutOfRegion);
    std::mt19937_64 rng(1);
    REQUIRE_THROWS_AS(sample_yield(f, 0.8, 0.3, rng), OutOfRegion);
}
