#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ssyield/functionals.hpp"
#include "ssyield/optimizer.hpp"
#include "ssyield/problem.hpp"

namespace ssyield {

enum class ConditionId {
    C2_1,
    C2_2_MDG,
    C2_2_weak_cont,
    C2_2_ASC,
    C2_3,
    C2_4,
    C5_1,
};

inline const char* to_string(ConditionId id) {
    switch (id) {
        case ConditionId::C2_1: return "diffusion_boundaries";
        case ConditionId::C2_2_MDG: return "yield_minimal_delivery";
        case ConditionId::C2_2_weak_cont: return "yield_weak_continuity";
        case ConditionId::C2_2_ASC: return "yield_assured_supply";
        case ConditionId::C2_3: return "cost_regularity";
        case ConditionId::C2_4: return "boundary_cost_dominance";
        case ConditionId::C5_1: return "auxiliary_function_bounds";
    }
    return "?";
}

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct Evidence {
    std::string probe;
    double value;
};

struct ConditionReport {
    ConditionId condition_id;
    Verdict verdict = Verdict::inconclusive;
    std::vector<Evidence> evidence;
    std::string notes;
};

struct VerifyOptions {
    /// Throw MissingOptimum when the optimum-dependent verdicts are
    /// requested without an optimization result.
    bool require_optimum = false;
    double weak_continuity_tol = 1e-6;
    double asc_floor = 1e-4;
};

namespace detail {

inline void note(ConditionReport& r, const std::string& s) {
    if (!r.notes.empty()) r.notes += "; ";
    r.notes += s;
}

/// Geometric offsets from an endpoint (finite) or magnitudes (infinite).
inline std::vector<double> boundary_grid(const DiffusionModel& d,
                                         Endpoint which, int per_decade,
                                         int decades) {
    std::vector<double> xs;
    const bool left = which == Endpoint::left;
    const double e = left ? d.left : d.right;
    const double s = d.length_scale();
    for (int k = 0; k <= per_decade * decades; ++k) {
        const double f = std::pow(10.0, -static_cast<double>(k) / per_decade);
        double x;
        if (std::isfinite(e))
            x = left ? e + (d.anchor - e) * 0.5 * f
                     : e - (e - d.anchor) * 0.5 * f;
        else
            x = left ? d.anchor - s / f : d.anchor + s / f;
        xs.push_back(x);
    }
    return xs;
}

/// Decade maxima of a scanned quotient with a plateau verdict: pass when the
/// last decades do not grow beyond the earlier ones.
struct PlateauScan {
    std::vector<double> decade_max;
    Verdict verdict = Verdict::inconclusive;
    double last = std::numeric_limits<double>::quiet_NaN();
};

inline PlateauScan plateau_scan(const std::function<double(double)>& q,
                                const std::vector<double>& xs,
                                int per_decade) {
    PlateauScan out;
    double cur = 0.0;
    int in_decade = 0;
    int usable = 0;
    for (double x : xs) {
        double v;
        try {
            v = q(x);
        } catch (const Error&) {
            break;  // table/overflow limit reached; use what we have
        }
        if (!std::isfinite(v)) break;
        cur = std::max(cur, v);
        ++usable;
        if (++in_decade == per_decade) {
            out.decade_max.push_back(cur);
            cur = 0.0;
            in_decade = 0;
        }
    }
    if (in_decade > 0) out.decade_max.push_back(cur);
    if (out.decade_max.size() < 4) {
        out.verdict = Verdict::inconclusive;
        return out;
    }
    out.last = out.decade_max.back();
    const size_t n = out.decade_max.size();
    double early = 0.0;
    for (size_t i = 0; i + 3 < n; ++i) early = std::max(early, out.decade_max[i]);
    double late = 0.0;
    for (size_t i = n - 3; i < n; ++i) late = std::max(late, out.decade_max[i]);
    out.verdict = late <= 1.25 * early + 1e-12 ? Verdict::pass : Verdict::fail;
    return out;
}

}  // namespace detail

/// Best-effort numeric verification of the standing model conditions,
/// producing one structured report per condition. Verdicts that need the
/// optimal cost level (boundary dominance, auxiliary-function bounds) come
/// out inconclusive unless an optimization result is supplied.
inline std::vector<ConditionReport> verify_all(
    const ProblemSpec& spec, const OptimizationResult* opt = nullptr,
    VerifyOptions options = {}) {
    if (options.require_optimum && opt == nullptr)
        throw MissingOptimum(
            "boundary-dominance and auxiliary-bound verdicts need an "
            "optimization result");
    std::vector<ConditionReport> reports;
    const auto& d = spec.diffusion;
    const bool deterministic = d.deterministic;

    std::optional<CycleFunctionals> fn;
    if (!deterministic) fn.emplace(spec);

    // --- boundaries: left attracting, right non-attracting, classes match
    {
        ConditionReport r;
        r.condition_id = ConditionId::C2_1;
        if (deterministic) {
            r.verdict = Verdict::inconclusive;
            detail::note(r, "deterministic dynamics: no scale/speed measure");
        } else {
            try {
                const auto& ss = fn->scale_speed();
                auto l = classify_boundary(d, ss, Endpoint::left);
                auto rr = classify_boundary(d, ss, Endpoint::right);
                r.evidence.push_back({"left_attracting", l.attracting ? 1. : 0.});
                r.evidence.push_back(
                    {"right_attracting", rr.attracting ? 1. : 0.});
                r.evidence.push_back(
                    {"right_speed_tail_finite", rr.speed_tail_finite ? 1. : 0.});
                detail::note(r, std::string("left ") +
                                    to_string(l.feller_class) + ", right " +
                                    to_string(rr.feller_class));
                const bool order_ok = l.attracting && !rr.attracting;
                const bool tail_ok =
                    d.right_behavior != RightBehavior::natural ||
                    rr.speed_tail_finite;
                r.verdict = order_ok && tail_ok ? Verdict::pass : Verdict::fail;
                if (!tail_ok)
                    detail::note(r, "speed measure tail at b is not finite");
            } catch (const ClassificationMismatch& e) {
                r.verdict = Verdict::fail;
                detail::note(r, e.what());
            } catch (const InconclusiveIntegral& e) {
                r.verdict = Verdict::inconclusive;
                detail::note(r, e.what());
            }
        }
        reports.push_back(std::move(r));
    }

    // --- minimal delivery guaranty
    {
        ConditionReport r;
        r.condition_id = ConditionId::C2_2_MDG;
        auto m = check_mdg(spec.yields);
        r.verdict = m.pass ? Verdict::pass : Verdict::fail;
        r.evidence.push_back({"guaranteed_fraction", m.guaranteed_fraction});
        detail::note(r, m.notes);
        reports.push_back(std::move(r));
    }

    // --- weak continuity probe battery
    {
        ConditionReport r;
        r.condition_id = ConditionId::C2_2_weak_cont;
        const double room = 0.25 * d.length_scale();
        const double y = d.anchor - 0.5 * room, z = d.anchor + room;
        std::vector<std::function<double(double)>> battery{
            [](double) { return 1.0; },
            [&](double v) { return (v - d.anchor) / room; },
            [&](double v) {
                const double u = (v - d.anchor) / room;
                return u * u / (1.0 + u * u);
            },
            [&](double v) { return std::sin(3.0 * (v - d.anchor) / room); }};
        double worst = 0.0;
        const double eps = 1e-8 * room;
        for (const auto& g : battery) {
            const double base = integrate_against_Q(spec.yields, g, y, z);
            const double moved =
                integrate_against_Q(spec.yields, g, y + eps, z - 0.5 * eps);
            worst = std::max(worst, std::abs(moved - base));
            const double diag = integrate_against_Q(spec.yields, g, y, y + eps);
            worst = std::max(worst, std::abs(diag - g(y)));
        }
        r.evidence.push_back({"max_probe_difference", worst});
        r.verdict = worst <= options.weak_continuity_tol ? Verdict::pass
                                                         : Verdict::fail;
        detail::note(r, "probe evidence only; not a full certificate");
        reports.push_back(std::move(r));
    }

    // --- assured supply commitment
    {
        ConditionReport r;
        r.condition_id = ConditionId::C2_2_ASC;
        if (d.right_behavior == RightBehavior::entrance) {
            r.verdict = Verdict::pass;
            detail::note(r, "not applicable: right boundary is entrance");
        } else {
            const double room = 0.25 * d.length_scale();
            const double d1 = d.anchor - 0.5 * room;
            const double d2 = d.anchor + 0.5 * room;
            // the committed fraction must stay positive uniformly in the
            // checked level, so the level itself walks toward b
            std::vector<double> level_offsets{0.3, 0.1, 0.03, 0.01};
            double floor_delta = std::numeric_limits<double>::infinity();
            double first_delta = -1.0;
            for (double off : level_offsets) {
                double zt, zfar;
                std::vector<double> zgrid;
                if (d.finite_right()) {
                    zt = d.right - (d.right - d2) * off;
                    for (double f : {0.5, 0.1, 0.01, 0.001})
                        zgrid.push_back(d.right - (d.right - zt) * f);
                    zfar = zgrid.back();
                } else {
                    zt = d.anchor + room * 4.0 / off;
                    for (double f : {2.0, 4.0, 16.0, 64.0})
                        zgrid.push_back(zt * f);
                    zfar = zgrid.back();
                }
                (void)zfar;
                auto rep = check_asc(spec.yields, d1, d2, zt, zgrid);
                r.evidence.push_back({"delta_at_level", rep.delta});
                if (first_delta < 0) first_delta = rep.delta;
                floor_delta = std::min(floor_delta, rep.delta);
                if (!rep.pass) floor_delta = 0.0;
            }
            const bool decaying = floor_delta < 0.25 * first_delta;
            r.verdict = (floor_delta > options.asc_floor && !decaying)
                            ? Verdict::pass
                            : Verdict::fail;
            if (decaying)
                detail::note(r,
                             "committed fraction decays as the checked level "
                             "approaches the boundary");
        }
        reports.push_back(std::move(r));
    }

    // --- cost regularity: c1 floor, c0 limits, speed integrability
    {
        ConditionReport r;
        r.condition_id = ConditionId::C2_3;
        bool ok = true;
        double c1_min = std::numeric_limits<double>::infinity();
        const double room = 0.5 * d.length_scale();
        for (int i = 0; i <= 20; ++i)
            for (int j = i; j <= 20; ++j) {
                const double y = d.anchor - room + 2.0 * room * i / 20.0;
                const double z = d.anchor - room + 2.0 * room * j / 20.0;
                c1_min = std::min(c1_min, spec.costs.ordering(y, z));
            }
        r.evidence.push_back({"c1_min_on_grid", c1_min});
        r.evidence.push_back({"k1", spec.costs.fixed_cost_k1});
        if (!(c1_min >= spec.costs.fixed_cost_k1 * (1.0 - 1e-9))) {
            ok = false;
            detail::note(r, "ordering cost dips below its declared floor");
        }

        for (Endpoint which : {Endpoint::left, Endpoint::right}) {
            const double declared = which == Endpoint::left
                                        ? spec.costs.holding_limit_left
                                        : spec.costs.holding_limit_right;
            auto xs = detail::boundary_grid(d, which, 4, 3);
            const double last = spec.costs.holding(xs.back());
            const char* name = which == Endpoint::left ? "c0_limit_left"
                                                       : "c0_limit_right";
            r.evidence.push_back({name, last});
            if (std::isinf(declared)) {
                const double mid = spec.costs.holding(xs.front());
                if (!(last > 10.0 * (1.0 + mid))) {
                    ok = false;
                    detail::note(r, "declared infinite holding limit but no "
                                    "growth observed");
                }
            } else if (!(std::abs(last - declared) <=
                         1e-3 * (1.0 + std::abs(declared)))) {
                ok = false;
                detail::note(r, "declared holding limit does not match the "
                                "numeric limit");
            }
        }
        if (!d.finite_left() || !d.finite_right()) {
            // infinite endpoints must carry infinite holding limits
            if ((!d.finite_left() && !std::isinf(spec.costs.holding_limit_left)) ||
                (!d.finite_right() &&
                 !std::isinf(spec.costs.holding_limit_right))) {
                ok = false;
                detail::note(r, "holding cost must diverge at infinite "
                                "endpoints");
            }
        }

        if (deterministic) {
            r.verdict = Verdict::inconclusive;
            detail::note(r, "speed integrability untestable without a speed "
                            "measure");
        } else {
            bool integrable = true;
            bool decided = true;
            for (double f : {0.75, 0.25, -0.5}) {
                const double y = d.anchor - f * 0.5 * d.length_scale();
                try {
                    auto t = integrate_to_boundary(
                        [&](double v) {
                            return spec.costs.holding(v) *
                                   fn->scale_speed().speed_density(v);
                        },
                        y, d.right, 1e-9);
                    if (!t.converged) decided = false;
                    r.evidence.push_back({"c0_speed_tail_from_y", t.value});
                } catch (const DivergentTail&) {
                    integrable = false;
                } catch (const NonFiniteIntegrand&) {
                    integrable = false;
                }
            }
            if (!integrable) {
                ok = false;
                detail::note(r, "holding cost is not integrable against the "
                                "speed measure near b");
            }
            r.verdict = !decided && ok ? Verdict::inconclusive
                                       : (ok ? Verdict::pass : Verdict::fail);
        }
        if (r.verdict == Verdict::pass && !ok) r.verdict = Verdict::fail;
        if (deterministic && !ok) r.verdict = Verdict::fail;
        reports.push_back(std::move(r));
    }

    // --- boundary cost dominance (needs the optimal level)
    {
        ConditionReport r;
        r.condition_id = ConditionId::C2_4;
        if (deterministic) {
            r.verdict = Verdict::inconclusive;
            detail::note(r, "deterministic dynamics: no H0 optimum");
        } else if (opt == nullptr) {
            r.verdict = Verdict::inconclusive;
            detail::note(r, "no optimum supplied");
        } else {
            const double h_star = opt->H0_star;
            r.evidence.push_back({"H0_star", h_star});
            bool left_ok, right_ok;
            if (d.left_behavior != LeftBehavior::natural) {
                left_ok = true;
                detail::note(r, "left boundary attainable");
            } else {
                const double lim = spec.costs.holding_limit_left;
                r.evidence.push_back({"c0_left_limit", lim});
                left_ok = h_star < lim;
            }
            if (d.right_behavior == RightBehavior::entrance) {
                right_ok = true;
                detail::note(r, "right boundary is entrance");
            } else {
                const double lim = spec.costs.holding_limit_right;
                r.evidence.push_back({"c0_right_limit", lim});
                right_ok = h_star < lim;
            }
            if ((!left_ok || !right_ok) && !opt->converged) {
                // fallback witness probe on a coarse lattice
                auto grid = grid_scan(*fn, 24, opt->box);
                r.evidence.push_back({"grid_witness_min", grid.min_value});
                const double lim = std::min(spec.costs.holding_limit_left,
                                            spec.costs.holding_limit_right);
                left_ok = right_ok = grid.min_value < lim;
                detail::note(r, "used the coarse-grid witness probe");
            }
            r.verdict = left_ok && right_ok ? Verdict::pass : Verdict::fail;
        }
        reports.push_back(std::move(r));
    }

    // --- auxiliary-function boundary bounds
    {
        ConditionReport r;
        r.condition_id = ConditionId::C5_1;
        if (deterministic) {
            r.verdict = Verdict::inconclusive;
            detail::note(r, "deterministic dynamics");
        } else if (opt == nullptr) {
            r.verdict = Verdict::inconclusive;
            detail::note(r, "no optimum supplied");
        } else {
            const double h_star = opt->H0_star;
            const double eps_exponent = 0.5;  // fixed epsilon in (0,1)
            auto sigma_u0p = [&](double x) {
                return d.dispersion(x) * fn->u0_prime(x, h_star);
            };
            Verdict worst = Verdict::pass;
            for (Endpoint which : {Endpoint::left, Endpoint::right}) {
                const double lim = which == Endpoint::left
                                       ? spec.costs.holding_limit_left
                                       : spec.costs.holding_limit_right;
                auto quotient = [&](double x) {
                    const double su = sigma_u0p(x);
                    const double au = std::abs(fn->u0(x, h_star));
                    double q;
                    if (std::isinf(lim)) {
                        q = spec.costs.holding(x) / ((1.0 + au) * (1.0 + au));
                        if (which == Endpoint::left)
                            q += su * su /
                                 ((1.0 + au) * (1.0 + au) * (1.0 + au));
                        else
                            q += su * su /
                                 ((1.0 + au) *
                                  (1.0 + spec.costs.holding(x)));
                    } else {
                        q = su * su /
                            std::pow(1.0 + au, 2.0 + eps_exponent);
                        if (which == Endpoint::right)
                            q += su * su /
                                 ((1.0 + au) *
                                  (1.0 + spec.costs.holding(x)));
                    }
                    return q;
                };
                const int per_decade = 8;
                auto xs = detail::boundary_grid(d, which, per_decade, 6);
                auto scan = detail::plateau_scan(quotient, xs, per_decade);
                const char* name = which == Endpoint::left
                                       ? "left_quotient_last_decade"
                                       : "right_quotient_last_decade";
                r.evidence.push_back({name, scan.last});
                if (scan.verdict == Verdict::fail)
                    worst = Verdict::fail;
                else if (scan.verdict == Verdict::inconclusive &&
                         worst == Verdict::pass)
                    worst = Verdict::inconclusive;
            }
            // regular reflecting left boundary additionally needs U0'(a)
            if (d.left_behavior == LeftBehavior::regular_reflecting) {
                const double u0p_at_a = fn->u0_prime(d.left, h_star);
                r.evidence.push_back({"u0_prime_at_left", u0p_at_a});
                if (!std::isfinite(u0p_at_a)) worst = Verdict::fail;
            }
            r.verdict = worst;
            detail::note(r, "plateau scan over geometric boundary grids");
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

/// Ratio sequences toward the natural endpoints and the boundary mass of the
/// cycle-proportion measure; purely diagnostic.
struct RatioSequence {
    Endpoint which = Endpoint::left;
    bool applicable = false;          // declared holding limit is finite
    std::vector<double> xs;
    std::vector<double> ratios;       // B g0 / B zeta against the anchor
    double declared_limit = 0.0;
    double final_rel_err = std::numeric_limits<double>::quiet_NaN();
    double log_rate = std::numeric_limits<double>::quiet_NaN();
};

struct TailMassSequence {
    double level = 0.0;  // mass checked above this stock level
    std::vector<double> zs;
    std::vector<double> min_masses;  // min over the order-from grid
};

struct AsymptoticsReport {
    RatioSequence left;
    RatioSequence right;
    std::optional<TailMassSequence> tail;
};

inline AsymptoticsReport asymptotics_report(const ProblemSpec& spec) {
    if (spec.diffusion.deterministic)
        throw NondegeneracyViolation(
            "asymptotics need nondegenerate dynamics");
    CycleFunctionals fn(spec);
    const auto& d = spec.diffusion;
    AsymptoticsReport rep;
    const bool deep = spec.closed_form.has_value();

    auto run_side = [&](Endpoint which) {
        RatioSequence seq;
        seq.which = which;
        const bool left = which == Endpoint::left;
        seq.declared_limit = left ? spec.costs.holding_limit_left
                                  : spec.costs.holding_limit_right;
        seq.applicable = std::isfinite(seq.declared_limit) &&
                         (left ? d.left_behavior == LeftBehavior::natural
                               : d.right_behavior == RightBehavior::natural);
        std::vector<double> xs;
        if (std::isfinite(left ? d.left : d.right)) {
            const double e = left ? d.left : d.right;
            const double room = left ? d.anchor - e : e - d.anchor;
            if (deep) {
                // closed forms evaluate cleanly at extreme offsets; the
                // convergence is only logarithmic so the grid must go deep
                if (left)
                    for (int k = 2; k <= 50; k += 2)
                        xs.push_back(e + std::pow(10.0, -0.5 * k));
                else
                    for (int k = 6; k <= 53; ++k)
                        xs.push_back(e - std::pow(2.0, -k));
            } else {
                for (int k = 1; k <= 12; ++k)
                    xs.push_back(left ? e + room * std::pow(10.0, -0.5 * k)
                                      : e - room * std::pow(10.0, -0.5 * k));
            }
        } else {
            const double s = d.length_scale();
            for (int k = 1; k <= 12; ++k)
                xs.push_back(left ? d.anchor - s * std::pow(2.0, k)
                                  : d.anchor + s * std::pow(2.0, k));
        }
        for (double x : xs) {
            double ratio;
            try {
                ratio = fn.g0(x) / fn.zeta(x);
            } catch (const Error&) {
                break;
            }
            if (!std::isfinite(ratio)) break;
            seq.xs.push_back(x);
            seq.ratios.push_back(ratio);
        }
        if (seq.applicable && !seq.ratios.empty()) {
            seq.final_rel_err =
                std::abs(seq.ratios.back() - seq.declared_limit) /
                std::max(1e-300, std::abs(seq.declared_limit));
            // the error decays like c / |log offset|; report the c estimate
            const double e = left ? d.left : d.right;
            const double off = std::isfinite(e)
                                   ? std::abs(seq.xs.back() - e)
                                   : 1.0 / std::abs(seq.xs.back());
            seq.log_rate = seq.final_rel_err * std::abs(std::log(off));
        }
        return seq;
    };
    rep.left = run_side(Endpoint::left);
    rep.right = run_side(Endpoint::right);

    if (d.right_behavior == RightBehavior::natural &&
        spec.yields.kind() != YieldKind::dirac) {
        TailMassSequence tail;
        const double room = 0.25 * d.length_scale();
        const double d1 = d.anchor - 0.5 * room, d2 = d.anchor + 0.5 * room;
        if (d.finite_right()) {
            tail.level = d.right - 0.2 * (d.right - d2);
            for (double f : {0.5, 0.1, 0.01})
                tail.zs.push_back(d.right - (d.right - tail.level) * f);
        } else {
            tail.level = d.anchor + 4.0 * room;
            for (double f : {4.0, 16.0, 64.0})
                tail.zs.push_back(tail.level * f);
        }
        for (double z : tail.zs) {
            double inf_mass = 1.0;
            for (int i = 0; i <= 8; ++i) {
                const double y = d1 + (d2 - d1) * i / 8.0;
                inf_mass =
                    std::min(inf_mass, fn.frak_P(y, z, tail.level, d.right));
            }
            tail.min_masses.push_back(inf_mass);
        }
        rep.tail = std::move(tail);
    }
    return rep;
}

}  // namespace ssyield
