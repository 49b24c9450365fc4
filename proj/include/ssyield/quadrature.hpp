#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "ssyield/errors.hpp"

namespace ssyield {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
    bool converged = false;
};

struct QuadratureOptions {
    double abs_tol = 1e-9;
    double rel_tol = 0.0;
    long max_evaluations = 1'000'000;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1,1] (QUADPACK dqk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

struct PanelEstimate {
    double value;
    double error;
};

template <typename F>
PanelEstimate gauss_kronrod_15(F&& f, double lo, double hi, long& evals) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    auto eval = [&](double x) {
        double v = f(x);
        ++evals;
        if (!std::isfinite(v))
            throw NonFiniteIntegrand("integrand is not finite", x);
        return v;
    };
    const double fc = eval(mid);
    double kronrod = kKronrodWeights[7] * fc;
    double gauss = kGaussWeights[3] * fc;
    double resabs = std::abs(kronrod);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double f1 = eval(mid - dx);
        const double f2 = eval(mid + dx);
        kronrod += kKronrodWeights[i] * (f1 + f2);
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (f1 + f2);
        resabs += kKronrodWeights[i] * (std::abs(f1) + std::abs(f2));
    }
    kronrod *= half;
    gauss *= half;
    resabs *= std::abs(half);
    // QUADPACK-style error rescaling keeps the estimate meaningful when the
    // raw |K-G| difference is already at roundoff level.
    double err = std::abs(kronrod - gauss);
    if (resabs > 0.0 && err > 0.0)
        err = resabs * std::min(1.0, std::pow(200.0 * err / resabs, 1.5));
    err = std::max(err, std::numeric_limits<double>::epsilon() * 50.0 * resabs);
    return {kronrod, err};
}

struct Panel {
    double lo, hi, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [lo, hi].
///
/// Subdivides the worst panel until the summed error estimate falls below
/// max(abs_tol, rel_tol*|I|) or the evaluation budget is exhausted, in which
/// case converged=false is returned rather than throwing.
template <typename F>
QuadratureResult integrate(F&& f, double lo, double hi,
                           QuadratureOptions opts = {}) {
    if (!(lo <= hi)) throw Error("integrate: requires lo <= hi");
    QuadratureResult result;
    if (lo == hi) {
        result.converged = true;
        return result;
    }
    long evals = 0;
    auto first = detail::gauss_kronrod_15(f, lo, hi, evals);
    std::priority_queue<detail::Panel> panels;
    panels.push({lo, hi, first.value, first.error});
    double total = first.value;
    double total_err = first.error;
    auto tol = [&](double current) {
        return std::max(opts.abs_tol, opts.rel_tol * std::abs(current));
    };
    while (total_err > tol(total) && evals + 30 <= opts.max_evaluations) {
        detail::Panel worst = panels.top();
        if (worst.hi - worst.lo <=
            std::numeric_limits<double>::epsilon() *
                (std::abs(worst.lo) + std::abs(worst.hi)))
            break;  // cannot subdivide further
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        auto left = detail::gauss_kronrod_15(f, worst.lo, mid, evals);
        auto right = detail::gauss_kronrod_15(f, mid, worst.hi, evals);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push({worst.lo, mid, left.value, left.error});
        panels.push({mid, worst.hi, right.value, right.error});
    }
    result.value = total;
    result.error_estimate = total_err;
    result.evaluations = evals;
    result.converged = total_err <= tol(total);
    return result;
}

template <typename F>
QuadratureResult integrate(F&& f, double lo, double hi, double tol) {
    QuadratureOptions opts;
    opts.abs_tol = tol;
    return integrate(std::forward<F>(f), lo, hi, opts);
}

struct BoundaryOptions {
    double abs_tol = 1e-9;
    long max_evaluations = 1'000'000;
    int max_panels = 400;
    double overflow_guard = 1e150;
    /// Treat persistently non-decaying panels of a one-signed integrand as
    /// divergence (sound for monotone partial sums).
    bool trend_divergence = true;
    /// Width of the first panel toward an infinite endpoint; 0 picks
    /// max(1, |from|). Set small when the integrand concentrates near `from`.
    double first_width = 0.0;
};

/// Improper integral of f from `from` to `endpoint` (finite singular or +-inf).
///
/// Finite endpoints are approached by geometric halving of the remaining gap,
/// infinite ones by doubling panels; the panel-sum sequence is extrapolated by
/// its geometric ratio. Returns converged=false when the tail refuses to
/// stabilize; throws DivergentTail when partial sums blow up or (for
/// one-signed integrands) panels stop decaying.
template <typename F>
QuadratureResult integrate_to_boundary(F&& f, double from, double endpoint,
                                       BoundaryOptions opts = {}) {
    QuadratureResult out;
    if (from == endpoint) {
        out.converged = true;
        return out;
    }
    const bool infinite = std::isinf(endpoint);
    const double direction = endpoint > from ? 1.0 : -1.0;

    double sum = 0.0;
    double err_acc = 0.0;
    long evals = 0;
    double prev_panel = std::numeric_limits<double>::quiet_NaN();
    int stable = 0;       // consecutive panels with a decaying ratio
    int non_decay = 0;    // consecutive panels refusing to decay
    bool one_signed_pos = true, one_signed_neg = true;

    QuadratureOptions popts;
    popts.abs_tol = opts.abs_tol / 4.0;
    popts.rel_tol = 1e-12;

    double lo = from;
    double last_apv = std::numeric_limits<double>::infinity();
    const double gap0 = std::abs(endpoint - from);
    for (int k = 0; k < opts.max_panels; ++k) {
        double hi;
        if (infinite) {
            const double w0 = opts.first_width > 0
                                  ? opts.first_width
                                  : std::max(1.0, std::abs(from));
            hi = from + direction * w0 * (std::pow(2.0, k + 1) - 1.0);
        } else {
            const double gap = endpoint - lo;
            hi = endpoint - 0.5 * gap;
            const double width = std::abs(hi - lo);
            if (width <= 1e-14 * gap0 || hi == lo)
                break;  // resolution floor at the endpoint
        }
        popts.max_evaluations = opts.max_evaluations - evals;
        if (popts.max_evaluations < 30) break;
        QuadratureResult panel = direction > 0
                                     ? integrate(f, lo, hi, popts)
                                     : integrate(f, hi, lo, popts);
        double pv = direction > 0 ? panel.value : -panel.value;
        evals += panel.evaluations;
        err_acc += panel.error_estimate;
        sum += pv;
        if (pv > 1e-300) one_signed_neg = false;
        if (pv < -1e-300) one_signed_pos = false;

        if (std::abs(sum) > opts.overflow_guard)
            throw DivergentTail("integrate_to_boundary: partial sums exceed overflow guard",
                                sum);

        const double apv = std::abs(pv);
        last_apv = apv;
        if (std::isfinite(prev_panel) && std::abs(prev_panel) > 0.0) {
            const double r = apv / std::abs(prev_panel);
            if (r < 0.95) {
                ++stable;
                non_decay = 0;
                if (stable >= 3) {
                    const double tail = apv * r / (1.0 - std::min(r, 0.95));
                    if (tail + err_acc <= opts.abs_tol ||
                        tail <= 1e-13 * std::abs(sum)) {
                        out.value = sum;
                        out.error_estimate = err_acc + tail;
                        out.evaluations = evals;
                        out.converged = true;
                        return out;
                    }
                }
            } else {
                stable = 0;
                // only count panels that matter; tiny ones preceding a
                // concentration layer must not accumulate into a verdict
                if (apv > opts.abs_tol)
                    ++non_decay;
                if (opts.trend_divergence && (one_signed_pos || one_signed_neg) &&
                    non_decay >= 12 && apv > opts.abs_tol)
                    throw DivergentTail(
                        "integrate_to_boundary: panel sums do not decay", sum);
            }
        }
        // toward an infinite endpoint vanishing panels are the only signal
        // available; toward a finite endpoint keep sweeping to the floor, a
        // concentration layer may still be ahead.
        if (infinite && apv <= opts.abs_tol * 0.25 && k >= 2) {
            out.value = sum;
            out.error_estimate = err_acc + apv;
            out.evaluations = evals;
            out.converged = true;
            return out;
        }
        prev_panel = pv;
        lo = hi;
    }
    out.value = sum;
    out.evaluations = evals;
    if (!infinite && last_apv <= opts.abs_tol) {
        out.error_estimate = err_acc + last_apv;
        out.converged = true;
    } else {
        out.error_estimate = std::numeric_limits<double>::infinity();
        out.converged = false;
    }
    return out;
}

template <typename F>
QuadratureResult integrate_to_boundary(F&& f, double from, double endpoint,
                                       double tol) {
    BoundaryOptions opts;
    opts.abs_tol = tol;
    return integrate_to_boundary(std::forward<F>(f), from, endpoint, opts);
}

namespace detail {

/// Fixed Gauss-Legendre rule, 16 points; used for smooth kernel averages.
inline constexpr std::array<double, 8> kGL16Nodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> kGL16Weights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

template <typename F>
double gauss_legendre_16(F&& f, double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double dx = half * kGL16Nodes[i];
        sum += kGL16Weights[i] * (f(mid - dx) + f(mid + dx));
    }
    return half * sum;
}

}  // namespace detail

}  // namespace ssyield
