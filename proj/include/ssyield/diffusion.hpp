#pragma once
#include <type_traits>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ssyield/detail/table.hpp"
#include "ssyield/errors.hpp"
#include "ssyield/quadrature.hpp"

namespace ssyield {

enum class LeftBehavior { natural, exit, regular_reflecting, regular_sticky };
enum class RightBehavior { natural, entrance };
enum class Endpoint { left, right };
enum class FellerClass { regular, exit, entrance, natural };

inline const char* to_string(FellerClass c) {
    switch (c) {
        case FellerClass::regular: return "regular";
        case FellerClass::exit: return "exit";
        case FellerClass::entrance: return "entrance";
        case FellerClass::natural: return "natural";
    }
    return "?";
}

/// Uncontrolled diffusion dX = mu(X) dt + sigma(X) dW on the interval (a,b).
///
/// Infinite endpoints must be declared natural. A model whose dispersion is
/// identically zero is accepted as deterministic dynamics: the simulator runs
/// it as an ODE while scale/speed construction refuses it. Absolute
/// continuity of the scale and speed measures is assumed for continuous
/// coefficients with positive dispersion; only that case is representable.
struct DiffusionModel {
    std::function<double(double)> drift;
    std::function<double(double)> dispersion;
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    double anchor = 0.0;
    LeftBehavior left_behavior = LeftBehavior::natural;
    RightBehavior right_behavior = RightBehavior::natural;

    // optional closed forms; when absent both are built by quadrature
    std::function<double(double)> scale_log_density_override;
    std::function<double(double)> speed_density_override;

    bool deterministic = false;  // set by validate()

    bool finite_left() const { return std::isfinite(left); }
    bool finite_right() const { return std::isfinite(right); }

    /// Characteristic length used for stencils and probe grids.
    double length_scale() const {
        double s = std::numeric_limits<double>::infinity();
        if (finite_left()) s = std::min(s, anchor - left);
        if (finite_right()) s = std::min(s, right - anchor);
        if (!std::isfinite(s)) s = 1.0 + std::abs(anchor);
        return s;
    }

    std::vector<double> probe_grid(int n_per_side = 12) const {
        std::vector<double> g{anchor};
        const double s = length_scale();
        for (int k = 0; k < n_per_side; ++k) {
            const double frac = std::pow(10.0, -0.5 * k);
            if (finite_left())
                g.push_back(left + (anchor - left) * frac);
            else
                g.push_back(anchor - s * std::pow(2.0, k / 2.0));
            if (finite_right())
                g.push_back(right - (right - anchor) * frac);
            else
                g.push_back(anchor + s * std::pow(2.0, k / 2.0));
        }
        return g;
    }

    void validate() {
        if (!(left < anchor && anchor < right))
            throw InvalidParameter("diffusion: requires a < x0 < b");
        if (!finite_left() && left_behavior != LeftBehavior::natural)
            throw InvalidParameter(
                "diffusion: infinite left endpoint must be natural");
        if (!finite_right() && right_behavior != RightBehavior::natural)
            throw InvalidParameter(
                "diffusion: infinite right endpoint must be natural");
        if (!drift || !dispersion)
            throw InvalidParameter("diffusion: drift/dispersion not set");
        bool all_zero = true, any_zero = false;
        for (double x : probe_grid()) {
            const double s = dispersion(x);
            if (!std::isfinite(s) || s < 0.0)
                throw NondegeneracyViolation(
                    "diffusion: dispersion negative or non-finite at x=" +
                    std::to_string(x));
            if (s == 0.0)
                any_zero = true;
            else
                all_zero = false;
        }
        if (all_zero)
            deterministic = true;
        else if (any_zero)
            throw NondegeneracyViolation(
                "diffusion: dispersion vanishes at an interior point");
    }
};

namespace detail {

/// Lazily built cumulative-integral evaluator F(x) = int_{anchor}^x f.
/// Readers snapshot the table lock-free; out-of-range requests rebuild a
/// wider table under the mutex and swap it in.
class LazyCumulative {
  public:
    LazyCumulative(std::function<double(double)> integrand, double anchor,
                   double domain_lo, double domain_hi, double init_lo,
                   double init_hi, double build_tol)
        : state_(std::make_shared<State>()) {
        state_->integrand = std::move(integrand);
        state_->anchor = anchor;
        state_->domain_lo = domain_lo;
        state_->domain_hi = domain_hi;
        state_->init_lo = init_lo;
        state_->init_hi = init_hi;
        state_->tol = build_tol;
    }

    double operator()(double x) const { return snapshot_for(x)->value(x); }
    double derivative(double x) const {
        return snapshot_for(x)->derivative(x);
    }

  private:
    struct State {
        std::function<double(double)> integrand;
        double anchor, domain_lo, domain_hi, init_lo, init_hi, tol;
        std::shared_ptr<const CumulativeTable> table;
        std::mutex mutex;
    };

    std::shared_ptr<const CumulativeTable> snapshot_for(double x) const {
        State& st = *state_;
        if (!(x > st.domain_lo && x < st.domain_hi) && x != st.domain_lo &&
            x != st.domain_hi)
            throw Error("cumulative table: request outside the state interval");
        auto snap = std::atomic_load(&st.table);
        if (snap && snap->covers(x)) return snap;
        std::lock_guard<std::mutex> lock(st.mutex);
        snap = std::atomic_load(&st.table);
        if (snap && snap->covers(x)) return snap;
        double lo = snap ? std::min(snap->front_x(), st.init_lo) : st.init_lo;
        double hi = snap ? std::max(snap->back_x(), st.init_hi) : st.init_hi;
        auto widen_low = [&](double edge) {
            return std::isfinite(st.domain_lo)
                       ? st.domain_lo + 0.5 * (edge - st.domain_lo)
                       : edge - std::max(1.0, std::abs(edge));
        };
        auto widen_high = [&](double edge) {
            return std::isfinite(st.domain_hi)
                       ? st.domain_hi - 0.5 * (st.domain_hi - edge)
                       : edge + std::max(1.0, std::abs(edge));
        };
        int guard = 0;
        while (x < lo && guard++ < 4096) lo = widen_low(lo);
        while (x > hi && guard++ < 4096) hi = widen_high(hi);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        auto seeds = layout_seeds(lo, hi, st.anchor, 64, 16,
                                  std::isfinite(st.domain_lo),
                                  std::isfinite(st.domain_hi));
        seeds.push_back(x);
        TableBuildOptions topts;
        topts.tol = st.tol;
        auto built = std::make_shared<const CumulativeTable>(
            build_cumulative_table(st.integrand, seeds, st.anchor, topts));
        std::atomic_store(&st.table, built);
        return built;
    }

    std::shared_ptr<State> state_;
};

}  // namespace detail

/// Scale function (anchored so scale(x0) = 0 exactly), its log-density and
/// the speed density. Pure value type; copies share the lazy tables.
class ScaleSpeed {
  public:
    double anchor() const { return anchor_; }

    double scale_log_density(double x) const { return log_density_(x); }
    double scale_density(double x) const { return std::exp(log_density_(x)); }
    double scale(double x) const { return scale_fn_(x); }
    double speed_density(double x) const { return speed_(x); }

    /// Stable product s'(x) * int_x^{to} h(v) m(v) dv, evaluated as
    /// int_x^{to} h(v) e^{l(x)-l(v)} / sigma^2(v) dv so it stays finite where
    /// s' underflows while the raw tail overflows.
    template <typename H>
    QuadratureResult scale_times_speed_tail(H&& h, double x, double to,
                                            double tol = 1e-10) const {
        const double lx = log_density_(x);
        auto sig = sigma_;
        auto ld = log_density_;
        auto f = [h = std::forward<H>(h), lx, sig, ld](double v) {
            const double s = sig(v);
            return h(v) * std::exp(lx - ld(v)) / (s * s);
        };
        BoundaryOptions opts;
        opts.abs_tol = tol;
        return integrate_to_boundary(f, x, to, opts);
    }

  private:
    friend ScaleSpeed build_scale_speed(const DiffusionModel& model);
    double anchor_ = 0.0;
    std::function<double(double)> log_density_;
    std::function<double(double)> scale_fn_;
    std::function<double(double)> speed_;
    std::function<double(double)> sigma_;
};

inline ScaleSpeed build_scale_speed(const DiffusionModel& model) {
    if (model.deterministic)
        throw NondegeneracyViolation(
            "scale/speed undefined for deterministic dynamics (sigma == 0)");
    ScaleSpeed ss;
    ss.anchor_ = model.anchor;
    ss.sigma_ = model.dispersion;

    const double init_half = 0.25 * model.length_scale();
    const double lo0 = model.anchor - init_half;
    const double hi0 = model.anchor + init_half;

    if (model.scale_log_density_override) {
        ss.log_density_ = model.scale_log_density_override;
    } else {
        auto mu = model.drift;
        auto sig = model.dispersion;
        auto integrand = [mu, sig](double u) {
            const double s = sig(u);
            if (!(s > 0.0))
                throw NondegeneracyViolation(
                    "scale construction: dispersion <= 0 at x=" +
                    std::to_string(u));
            return -2.0 * mu(u) / (s * s);
        };
        ss.log_density_ = detail::LazyCumulative(integrand, model.anchor,
                                                 model.left, model.right, lo0,
                                                 hi0, 1e-11);
    }

    {
        auto ld = ss.log_density_;
        auto integrand = [ld](double u) { return std::exp(ld(u)); };
        ss.scale_fn_ = detail::LazyCumulative(integrand, model.anchor,
                                              model.left, model.right, lo0,
                                              hi0, 1e-10);
    }

    if (model.speed_density_override) {
        ss.speed_ = model.speed_density_override;
    } else {
        auto ld = ss.log_density_;
        auto sig = model.dispersion;
        ss.speed_ = [ld, sig](double x) {
            const double s = sig(x);
            if (!(s > 0.0))
                throw NondegeneracyViolation(
                    "speed density: dispersion <= 0 at x=" + std::to_string(x));
            return std::exp(-ld(x)) / (s * s);
        };
    }
    return ss;
}

struct BoundaryClassification {
    Endpoint which = Endpoint::left;
    FellerClass feller_class = FellerClass::natural;
    bool attracting = false;
    bool speed_tail_finite = false;
};

namespace detail {

enum class Mass { finite, infinite, inconclusive };

template <typename F>
Mass improper_mass(F&& f, double from, double endpoint, double* value,
                   double tol = 1e-9) {
    try {
        BoundaryOptions opts;
        opts.abs_tol = tol;
        auto r =
            integrate_to_boundary(std::forward<F>(f), from, endpoint, opts);
        if (value) *value = std::abs(r.value);
        return r.converged ? Mass::finite : Mass::inconclusive;
    } catch (const DivergentTail&) {
        return Mass::infinite;
    } catch (const NonFiniteIntegrand&) {
        // a nonnegative integrand overflowed on the way to the boundary
        return Mass::infinite;
    }
}

}  // namespace detail

/// Numeric Feller classification of one endpoint via scale/speed
/// integrability tests, compared against the declared behavior.
///
/// Throws ClassificationMismatch when the numeric class contradicts the
/// declaration and InconclusiveIntegral when a required improper integral
/// cannot be decided within tolerance.
inline BoundaryClassification classify_boundary(const DiffusionModel& model,
                                                const ScaleSpeed& ss,
                                                Endpoint which) {
    using detail::Mass;
    const double c = model.anchor;
    const double e = which == Endpoint::left ? model.left : model.right;
    auto sprime = [&](double u) { return ss.scale_density(u); };
    auto speed = [&](double u) { return ss.speed_density(u); };

    BoundaryClassification out;
    out.which = which;

    double IS_val = 0.0;
    const Mass IS = detail::improper_mass(sprime, c, e, &IS_val);
    if (IS == Mass::inconclusive)
        throw InconclusiveIntegral(
            "boundary classification: scale measure test did not stabilize");
    out.attracting = IS == Mass::finite;

    const Mass IM = detail::improper_mass(speed, c, e, nullptr);
    out.speed_tail_finite =
        which == Endpoint::right
            ? IM == Mass::finite
            : detail::improper_mass(speed, c, model.right, nullptr) ==
                  Mass::finite;

    // Scale mass between u and `from`, log-shifted by l(u); multiplied by
    // 1/sigma^2(u) this is (S(u)-S(from)) m(u) without overflow. The shifted
    // integrand concentrates near u, so u is always treated as the refined
    // end and the first panel toward an infinite endpoint is sized by the
    // local log-density slope.
    auto scale_between = [&](double u, double from, bool improper) {
        const double lu = ss.scale_log_density(u);
        auto g = [&, lu](double t) {
            return std::exp(ss.scale_log_density(t) - lu);
        };
        BoundaryOptions o;
        o.abs_tol = 1e-10;
        if (improper) {
            const double sig = model.dispersion(u);
            const double slope = std::abs(2.0 * model.drift(u) / (sig * sig));
            o.first_width = std::min(1.0, 5.0 / (slope + 1e-12));
            return std::abs(integrate_to_boundary(g, u, from, o).value);
        }
        return std::abs(integrate_to_boundary(g, from, u, o).value);
    };

    Mass sigma_mass = Mass::infinite;  // infinite when the scale mass is
    if (IS == Mass::finite) {
        auto sigma_integrand = [&](double u) {
            const double s = model.dispersion(u);
            return scale_between(u, e, true) / (s * s);
        };
        sigma_mass = detail::improper_mass(sigma_integrand, c, e, nullptr, 1e-8);
    }
    auto n_integrand = [&](double u) {
        const double s = model.dispersion(u);
        return scale_between(u, c, false) / (s * s);
    };
    const Mass n_mass = detail::improper_mass(n_integrand, c, e, nullptr, 1e-8);

    if (IS == Mass::finite && IM == Mass::finite)
        out.feller_class = FellerClass::regular;
    else if (IS == Mass::finite && IM == Mass::infinite) {
        if (sigma_mass == Mass::finite)
            out.feller_class = FellerClass::exit;
        else if (sigma_mass == Mass::infinite)
            out.feller_class = FellerClass::natural;
        else
            throw InconclusiveIntegral(
                "boundary classification: exit-vs-natural test inconclusive");
    } else {
        if (n_mass == Mass::finite)
            out.feller_class = FellerClass::entrance;
        else if (n_mass == Mass::infinite)
            out.feller_class = FellerClass::natural;
        else
            throw InconclusiveIntegral(
                "boundary classification: entrance-vs-natural test "
                "inconclusive");
    }
    if (IM == Mass::inconclusive && IS == Mass::finite)
        throw InconclusiveIntegral(
            "boundary classification: speed measure test inconclusive");

    FellerClass declared;
    if (which == Endpoint::left) {
        switch (model.left_behavior) {
            case LeftBehavior::natural: declared = FellerClass::natural; break;
            case LeftBehavior::exit: declared = FellerClass::exit; break;
            default: declared = FellerClass::regular; break;
        }
    } else {
        declared = model.right_behavior == RightBehavior::natural
                       ? FellerClass::natural
                       : FellerClass::entrance;
    }
    if (declared != out.feller_class)
        throw ClassificationMismatch(
            std::string("declared ") + to_string(declared) +
            " but classified " + to_string(out.feller_class) + " at the " +
            (which == Endpoint::left ? "left" : "right") + " boundary");
    return out;
}

/// Callable with an optional analytic first derivative. When the derivative
/// is present the generator uses it directly and differences it once for f'';
/// otherwise both derivatives come from 5-point value stencils.
struct GeneratorInput {
    std::function<double(double)> value;
    std::function<double(double)> derivative;  // optional
};

struct GeneratorResult {
    double value = 0.0;
    double step = 0.0;
    double error_estimate = 0.0;
};

/// Af = (sigma^2/2) f'' + mu f' at an interior point. Finite differences with
/// Richardson refinement; the reported step is the finer of the two scales.
inline GeneratorResult apply_generator(const GeneratorInput& f,
                                       const DiffusionModel& model, double x,
                                       double step_hint = 0.0) {
    if (!(x > model.left && x < model.right))
        throw StencilOutOfDomain("apply_generator: x outside the interval");
    const double room_left = model.finite_left()
                                 ? x - model.left
                                 : std::numeric_limits<double>::infinity();
    const double room_right = model.finite_right()
                                  ? model.right - x
                                  : std::numeric_limits<double>::infinity();
    const double room = std::min(room_left, room_right);
    double h = step_hint > 0
                   ? step_hint
                   : 1e-3 * std::max(std::abs(x), model.length_scale());
    if (2.5 * h >= room) h = 0.36 * room;
    const double h_min = 64.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(x) + model.length_scale());
    if (h <= h_min)
        throw StencilOutOfDomain(
            "apply_generator: no room for the difference stencil at x=" +
            std::to_string(x));

    const double mu = model.drift(x);
    const double s2 = model.dispersion(x) * model.dispersion(x);
    auto A_at = [&](double step) {
        double fp, fpp;
        if (f.derivative) {
            fp = f.derivative(x);
            fpp =
                (f.derivative(x + step) - f.derivative(x - step)) / (2 * step);
        } else {
            const double f1 = f.value(x - 2 * step), f2 = f.value(x - step),
                         f3 = f.value(x), f4 = f.value(x + step),
                         f5 = f.value(x + 2 * step);
            fp = (f1 - 8 * f2 + 8 * f4 - f5) / (12 * step);
            fpp = (-f1 + 16 * f2 - 30 * f3 + 16 * f4 - f5) / (12 * step * step);
        }
        return 0.5 * s2 * fpp + mu * fp;
    };
    const double A1 = A_at(h);
    const double A2 = A_at(0.5 * h);
    const double factor = f.derivative ? 4.0 : 16.0;  // Richardson
    GeneratorResult out;
    out.value = (factor * A2 - A1) / (factor - 1.0);
    out.step = 0.5 * h;
    out.error_estimate = std::abs(A2 - A1);
    return out;
}

template <typename F>
    requires std::is_invocable_r_v<double, F, double>
GeneratorResult apply_generator(F&& plain, const DiffusionModel& model,
                                double x, double step_hint = 0.0) {
    GeneratorInput in;
    in.value = std::forward<F>(plain);
    return apply_generator(in, model, x, step_hint);
}

}  // namespace ssyield
