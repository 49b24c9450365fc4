#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

#include "ssyield/detail/table.hpp"
#include "ssyield/diffusion.hpp"
#include "ssyield/problem.hpp"
#include "ssyield/quadrature.hpp"

namespace ssyield {

namespace detail {

/// Lazily built tail integral T(x) = int_x^b w(v) dv for w >= 0.
///
/// The cumulative piece is anchored at the current top of coverage so T is
/// assembled from nonnegative increments only; anchoring at x0 would cancel
/// catastrophically near b where T underflows relative to its total.
class LazyTail {
  public:
    LazyTail(std::function<double(double)> weight, double domain_lo,
             double domain_hi, double init_lo, double init_hi, double tol,
             std::string diverged_what)
        : state_(std::make_shared<State>()) {
        state_->weight = std::move(weight);
        state_->domain_lo = domain_lo;
        state_->domain_hi = domain_hi;
        state_->init_lo = init_lo;
        state_->init_hi = init_hi;
        state_->tol = tol;
        state_->diverged_what = std::move(diverged_what);
    }

    double operator()(double x) const {
        auto s = snapshot_for(x);
        // T at the nearest node above x is a pure sum of one-signed segment
        // integrals; the short remainder is integrated afresh. Interpolating
        // T itself cannot hold relative accuracy where it spans dozens of
        // orders of magnitude.
        const auto& nodes = s->cumulative.nodes();
        auto it = std::lower_bound(
            nodes.begin(), nodes.end(), x,
            [](const TableNode& n, double v) {
                return n.x < v;
            });
        if (it == nodes.end()) --it;
        const double at_node = s->top_tail - it->F;
        if (it->x == x) return at_node;
        QuadratureOptions q;
        q.abs_tol = 1e-250;
        q.rel_tol = 1e-12;
        q.max_evaluations = 4000;
        return at_node + integrate(state_->weight, x, it->x, q).value;
    }
    double weight(double x) const { return state_->weight(x); }

  private:
    struct Snapshot {
        CumulativeTable cumulative;  // anchored at the coverage top
        double top_tail = 0.0;       // improper remainder above the top
        bool covers(double x) const { return cumulative.covers(x); }
    };
    struct State {
        std::function<double(double)> weight;
        double domain_lo, domain_hi, init_lo, init_hi, tol;
        std::string diverged_what;
        std::shared_ptr<const Snapshot> snap;
        std::mutex mutex;
    };

    std::shared_ptr<const Snapshot> snapshot_for(double x) const {
        State& st = *state_;
        auto s = std::atomic_load(&st.snap);
        if (s && s->covers(x)) return s;
        std::lock_guard<std::mutex> lock(st.mutex);
        s = std::atomic_load(&st.snap);
        if (s && s->covers(x)) return s;
        double lo = s ? std::min(s->cumulative.front_x(), st.init_lo)
                      : st.init_lo;
        double hi = s ? std::max(s->cumulative.back_x(), st.init_hi)
                      : st.init_hi;
        int guard = 0;
        while (x < lo && guard++ < 4096)
            lo = std::isfinite(st.domain_lo)
                     ? st.domain_lo + 0.5 * (lo - st.domain_lo)
                     : lo - std::max(1.0, std::abs(lo));
        while (x > hi && guard++ < 4096)
            hi = std::isfinite(st.domain_hi)
                     ? st.domain_hi - 0.5 * (st.domain_hi - hi)
                     : hi + std::max(1.0, std::abs(hi));
        lo = std::min(lo, x);
        hi = std::max(hi, x);

        auto made = std::make_shared<Snapshot>();
        try {
            BoundaryOptions bo;
            bo.abs_tol = st.tol;
            auto top = integrate_to_boundary(st.weight, hi, st.domain_hi, bo);
            if (!top.converged)
                throw InconclusiveIntegral(st.diverged_what +
                                           ": tail did not stabilize");
            made->top_tail = top.value;
        } catch (const DivergentTail&) {
            throw IntegrabilityFailure(st.diverged_what);
        }
        auto seeds = layout_seeds(lo, hi, hi, 64, 16,
                                  std::isfinite(st.domain_lo),
                                  std::isfinite(st.domain_hi));
        seeds.push_back(x);
        TableBuildOptions topts;
        topts.tol = st.tol;
        made->cumulative =
            build_cumulative_table(st.weight, seeds, hi, topts);
        std::atomic_store(&st.snap,
                          std::shared_ptr<const Snapshot>(made));
        return std::atomic_load(&st.snap);
    }

    std::shared_ptr<State> state_;
};

}  // namespace detail

/// Analytic per-policy quantities for the nominal (y,z) ordering policy.
struct PolicyEvaluation {
    double y = 0.0;
    double z = 0.0;
    double H0 = 0.0;           // long-run average cost
    double F0_at_yz = 0.0;     // non-deficient counterpart at the same point
    double hat_c1 = 0.0;       // expected ordering cost per cycle
    double hat_Bg0 = 0.0;      // expected holding cost per cycle
    double hat_Bzeta = 0.0;    // expected cycle length
    double kappa_hat = 0.0;    // long-run order frequency
    double mean_supply = 0.0;  // expected delivered amount above y
};

/// g0, zeta and everything built from them for one problem instance.
///
/// Uses the closed forms attached to the spec when present, otherwise
/// cached nested-quadrature tables (inner tails computed once per node,
/// outer integrals accumulated; cubic interpolation with exact slopes).
/// Evaluation is pure; tables refine themselves on demand under a lock.
class CycleFunctionals {
  public:
    explicit CycleFunctionals(ProblemSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        if (spec_.diffusion.deterministic)
            throw NondegeneracyViolation(
                "cycle functionals need nondegenerate dispersion");
        ss_ = build_scale_speed(spec_.diffusion);
        const auto& d = spec_.diffusion;
        diag_gap_ = 1e-6 * (d.finite_left() && d.finite_right()
                                ? d.right - d.left
                                : 1.0);
        if (spec_.closed_form) {
            cf_ = *spec_.closed_form;
            return;
        }
        const double half = 0.25 * d.length_scale();
        auto c0 = spec_.costs.holding;
        auto m = [ss = ss_](double v) { return ss.speed_density(v); };
        cost_tail_ = detail::LazyTail(
            [c0, m](double v) { return 2.0 * c0(v) * m(v); }, d.left, d.right,
            d.anchor - half, d.anchor + half, 1e-10,
            "holding cost is not integrable against the speed measure near b");
        time_tail_ = detail::LazyTail(
            [m](double v) { return 2.0 * m(v); }, d.left, d.right,
            d.anchor - half, d.anchor + half, 1e-10,
            "speed measure is infinite near b");
        auto sprime = [ss = ss_](double u) { return ss.scale_density(u); };
        auto tc = *cost_tail_;
        auto tt = *time_tail_;
        g0_table_ = detail::LazyCumulative(
            [sprime, tc](double u) { return sprime(u) * tc(u); }, d.anchor,
            d.left, d.right, d.anchor - half, d.anchor + half, 1e-9);
        zeta_table_ = detail::LazyCumulative(
            [sprime, tt](double u) { return sprime(u) * tt(u); }, d.anchor,
            d.left, d.right, d.anchor - half, d.anchor + half, 1e-9);
    }

    const ProblemSpec& spec() const { return spec_; }
    const ScaleSpeed& scale_speed() const { return ss_; }
    double diagonal_gap() const { return diag_gap_; }

    double g0(double x) const {
        if (x == spec_.diffusion.anchor) return 0.0;
        return cf_ ? cf_->g0(x) : (*g0_table_)(x);
    }
    double zeta(double x) const {
        if (x == spec_.diffusion.anchor) return 0.0;
        return cf_ ? cf_->zeta(x) : (*zeta_table_)(x);
    }
    double g0_prime(double x) const {
        if (cf_) return cf_->g0_prime(x);
        return ss_.scale_density(x) * (*cost_tail_)(x);
    }
    double zeta_prime(double x) const {
        if (cf_) return cf_->zeta_prime(x);
        return ss_.scale_density(x) * (*time_tail_)(x);
    }

    /// int_x^b 2 c0 dM and int_x^b 2 dM; closed-form specs recover them from
    /// the derivative identities g0' = s' Tc, zeta' = s' T1.
    double cost_tail(double x) const {
        if (!cf_) return (*cost_tail_)(x);
        return cf_->g0_prime(x) / ss_.scale_density(x);
    }
    double time_tail(double x) const {
        if (!cf_) return (*time_tail_)(x);
        return cf_->zeta_prime(x) / ss_.scale_density(x);
    }

    double u0(double x, double h_star) const {
        return g0(x) - h_star * zeta(x);
    }
    double u0_prime(double x, double h_star) const {
        return g0_prime(x) - h_star * zeta_prime(x);
    }

    double hat_c1(double y, double z) const {
        auto c1 = spec_.costs.ordering;
        return integrate_against_Q(
            spec_.yields, [&](double v) { return c1(y, v); }, y, z);
    }
    double hat_Bg0(double y, double z) const {
        return integrate_against_Q(
                   spec_.yields, [&](double v) { return g0(v); }, y, z) -
               g0(y);
    }
    double hat_Bzeta(double y, double z) const {
        return integrate_against_Q(
                   spec_.yields, [&](double v) { return zeta(v); }, y, z) -
               zeta(y);
    }
    double hat_BU0(double y, double z, double h_star) const {
        return integrate_against_Q(
                   spec_.yields, [&](double v) { return u0(v, h_star); }, y,
                   z) -
               u0(y, h_star);
    }

    /// Non-deficient-policy cost; +infinity inside the diagonal gap.
    double F0(double y, double z) const {
        require_region(y, z);
        if (z - y < diag_gap_)
            return std::numeric_limits<double>::infinity();
        return (spec_.costs.ordering(y, z) + g0(z) - g0(y)) /
               (zeta(z) - zeta(y));
    }

    /// Random-yield long-run average cost; +infinity inside the diagonal gap.
    double H0(double y, double z) const {
        require_region(y, z);
        if (z - y < diag_gap_)
            return std::numeric_limits<double>::infinity();
        return (hat_c1(y, z) + hat_Bg0(y, z)) / hat_Bzeta(y, z);
    }

    /// Same value through the cycle-proportion measure; the two routes must
    /// agree, which tests use as an internal consistency oracle.
    double H0_via_frak_P(double y, double z) const {
        require_region(y, z);
        if (z - y < diag_gap_)
            return std::numeric_limits<double>::infinity();
        auto num = integrate_against_Q(
            spec_.yields,
            [&](double v) { return F0(y, v) * (zeta(v) - zeta(y)); }, y, z);
        auto den = integrate_against_Q(
            spec_.yields, [&](double v) { return zeta(v) - zeta(y); }, y, z);
        return num / den;
    }

    /// frak-P((c, d]; y, z): proportion of the expected cycle length due to
    /// deliveries into (c, d].
    double frak_P(double y, double z, double c, double d) const {
        if (!(y < z)) throw OutOfRegion("frak_P: requires y < z");
        if (spec_.yields.kind() == YieldKind::dirac)
            return (z > c && z <= d) ? 1.0 : 0.0;
        auto num = integrate_against_Q(
            spec_.yields,
            [&](double v) {
                return (v > c && v <= d) ? zeta(v) - zeta(y) : 0.0;
            },
            y, z);
        return num / hat_Bzeta(y, z);
    }

    PolicyEvaluation evaluate_policy(double y, double z) const {
        if (!(y < z)) throw OutOfRegion("evaluate_policy: requires y < z");
        PolicyEvaluation e;
        e.y = y;
        e.z = z;
        e.hat_c1 = hat_c1(y, z);
        e.hat_Bg0 = hat_Bg0(y, z);
        e.hat_Bzeta = hat_Bzeta(y, z);
        e.kappa_hat = 1.0 / e.hat_Bzeta;
        e.mean_supply = spec_.yields.mean(y, z) - y;
        e.F0_at_yz = F0(y, z);
        e.H0 = (e.hat_c1 + e.hat_Bg0) / e.hat_Bzeta;
        return e;
    }

  private:
    static void require_region(double y, double z) {
        if (y > z) throw OutOfRegion("cost functionals: requires y <= z");
    }

    ProblemSpec spec_;
    ScaleSpeed ss_;
    double diag_gap_ = 1e-6;
    std::optional<ClosedFormFunctionals> cf_;
    std::optional<detail::LazyTail> cost_tail_;
    std::optional<detail::LazyTail> time_tail_;
    std::optional<detail::LazyCumulative> g0_table_;
    std::optional<detail::LazyCumulative> zeta_table_;
};

/// One-off helpers matching the operation surface; each builds the cached
/// functionals afresh, so repeated evaluation should hold a CycleFunctionals.
inline double compute_g0(const ProblemSpec& spec, double x) {
    return CycleFunctionals(spec).g0(x);
}
inline double compute_zeta(const ProblemSpec& spec, double x) {
    return CycleFunctionals(spec).zeta(x);
}

template <typename F>
double jump_B(F&& f, double y, double z) {
    if (y > z) throw OutOfRegion("jump_B: requires y <= z");
    return f(z) - f(y);
}

inline double compute_F0(const CycleFunctionals& fn, double y, double z) {
    return fn.F0(y, z);
}
inline double compute_H0(const CycleFunctionals& fn, double y, double z) {
    return fn.H0(y, z);
}

}  // namespace ssyield
