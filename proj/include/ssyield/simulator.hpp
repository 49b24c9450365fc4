#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ssyield/functionals.hpp"
#include "ssyield/problem.hpp"

namespace ssyield {

struct SimulationConfig {
    double policy_y = 0.0;
    double policy_z = 0.0;
    double horizon = 1000.0;  // per replication, after burn-in
    double time_step = 1e-3;
    int replications = 8;
    std::uint64_t seed = 12345;
    double burn_in = -1.0;  // < 0: five analytic cycles (or first order)
    int occupation_bins = 200;
    bool record_paths = false;
    long max_recorded_steps = 2'000'000;
    int threads = 0;  // 0: hardware, capped by SS_YIELD_THREADS
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct PathEvent {
    double t;
    double x;
    char kind;  // 's' step, 'o' order, 'r' reflection
};

struct ReplicationSummary {
    double J = 0.0;
    double mean_cycle = 0.0;
    double order_frequency = 0.0;
    double mean_supply = 0.0;
    double local_time_rate = 0.0;
    double measured_time = 0.0;
    long orders = 0;
    long cycles = 0;
    bool flagged = false;  // an escape retry cap was hit
};

struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<double> mass;  // normalized to total 1 with the tails
    double below = 0.0, above = 0.0;

    double total() const {
        double s = below + above;
        for (double m : mass) s += m;
        return s;
    }
};

struct SimulationResult {
    Estimate J, mean_cycle_length, order_frequency, mean_supply;
    Histogram occupation;          // binned time-average occupation
    double ordering_mass = 0.0;    // orders per unit time
    double stock_level_mass = 0.0; // same jump count, same normalization
    double local_time_rate = 0.0;  // reflection local time per unit time
    long total_orders = 0;
    double total_time = 0.0;
    int flagged_replications = 0;
    std::vector<ReplicationSummary> replications;
    std::vector<std::vector<PathEvent>> paths;  // filled when recording
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t seed, int replication) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(
                                 replication + 0x51ab5e)));
}

inline int thread_budget(int requested) {
    int n = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* cap = std::getenv("SS_YIELD_THREADS")) {
        const int c = std::atoi(cap);
        if (c > 0) n = std::min(n, c);
    }
    return n;
}

// classic RK4 step for the drift-only (deterministic) dynamics
inline double rk4_step(const std::function<double(double)>& mu, double x,
                       double dt) {
    const double k1 = mu(x);
    const double k2 = mu(x + 0.5 * dt * k1);
    const double k3 = mu(x + 0.5 * dt * k2);
    const double k4 = mu(x + dt * k3);
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct RepAccumulator {
    ReplicationSummary summary;
    std::vector<double> hist;
    double hist_below = 0.0, hist_above = 0.0;
    std::vector<PathEvent> path;
};

}  // namespace detail

/// Simulates the controlled inventory process under the nominal (y,z)
/// ordering policy: Euler-Maruyama between orders (fixed-step RK4 when the
/// dispersion vanishes identically), order triggered at the first grid time
/// with X <= y, the delivered level drawn from the yield kernel at the
/// current (possibly overshot) level. Replications run concurrently on
/// deterministically derived streams; aggregation is replication-ordered, so
/// identical inputs give bit-identical results.
inline SimulationResult simulate(const ProblemSpec& spec,
                                 const SimulationConfig& cfg) {
    if (!(cfg.policy_y < cfg.policy_z))
        throw OutOfRegion("simulate: policy requires y < z");
    if (!(cfg.policy_y > spec.diffusion.left ||
          (spec.diffusion.finite_left() && cfg.policy_y == spec.diffusion.left)))
        throw InvalidParameter("simulate: policy y outside the state space");
    if (!(cfg.policy_z < spec.diffusion.right))
        throw InvalidParameter("simulate: policy z outside the state space");
    if (!(cfg.time_step > 0.0) || !(cfg.horizon > 10.0 * cfg.time_step))
        throw InvalidParameter("simulate: horizon must dwarf the time step");
    if (cfg.replications < 1)
        throw InvalidParameter("simulate: needs at least one replication");
    if (spec.diffusion.left_behavior == LeftBehavior::regular_sticky)
        throw InvalidParameter(
            "simulate: sticky boundaries are classification-only");

    const auto& d = spec.diffusion;
    const double y = cfg.policy_y, z = cfg.policy_z;

    double burn_in = cfg.burn_in;
    if (burn_in < 0.0) {
        if (!d.deterministic) {
            CycleFunctionals fn(spec);
            burn_in = 5.0 * fn.hat_Bzeta(y, z);
        } else {
            burn_in = 0.0;  // resolved per replication at the first order
        }
    }
    const bool auto_burn_first_order = d.deterministic && cfg.burn_in < 0.0;

    const double span = z - y;
    const double hist_lo =
        d.left_behavior == LeftBehavior::regular_reflecting
            ? d.left
            : std::max(d.finite_left() ? d.left : y - 0.5 * span,
                       y - 0.5 * span);
    const double hist_hi = std::min(
        d.finite_right() ? d.right : z + 0.5 * span, z + 0.5 * span);
    const int nbins = std::max(cfg.occupation_bins, 8);

    auto run_replication = [&](int rep) {
        detail::RepAccumulator acc;
        acc.hist.assign(nbins, 0.0);
        std::mt19937_64 rng(detail::derive_stream(cfg.seed, rep));
        std::normal_distribution<double> normal(0.0, 1.0);

        const double dt = cfg.time_step;
        const double sqdt = std::sqrt(dt);
        auto mu = d.drift;
        auto sig = d.dispersion;
        auto c0 = spec.costs.holding;
        auto c1 = spec.costs.ordering;
        const bool reflecting =
            d.left_behavior == LeftBehavior::regular_reflecting;
        const double interior_margin =
            1e-12 * (std::isfinite(d.right - d.left) ? d.right - d.left : 1.0);

        double x = d.anchor;
        double t = 0.0;
        bool burn_pending = auto_burn_first_order;
        double burn = burn_pending ? std::numeric_limits<double>::infinity()
                                   : burn_in;
        double end_time = burn_pending
                              ? std::numeric_limits<double>::infinity()
                              : burn_in + cfg.horizon;

        double window_time = 0.0;
        double cost_acc = 0.0;
        double supply_acc = 0.0;
        double local_time = 0.0;
        double cycle_acc = 0.0;
        long cycles = 0;
        long orders = 0;
        double last_order_t = std::numeric_limits<double>::quiet_NaN();

        auto in_window = [&](double time) { return time >= burn; };
        auto record = [&](double time, double level, char kind) {
            if (cfg.record_paths &&
                static_cast<long>(acc.path.size()) < cfg.max_recorded_steps)
                acc.path.push_back({time, level, kind});
        };
        auto bin_add = [&](double level, double weight) {
            if (level < hist_lo)
                acc.hist_below += weight;
            else if (level >= hist_hi)
                acc.hist_above += weight;
            else {
                const int b = static_cast<int>((level - hist_lo) /
                                               (hist_hi - hist_lo) * nbins);
                acc.hist[std::min(b, nbins - 1)] += weight;
            }
        };
        auto place_order = [&](double time) {
            const double pre = x;
            const double v = sample_yield(spec.yields, pre, z, rng);
            if (in_window(time)) {
                cost_acc += c1(pre, v);
                supply_acc += v - y;
                ++orders;
                if (!std::isnan(last_order_t)) {
                    cycle_acc += time - last_order_t;
                    ++cycles;
                }
                last_order_t = time;
            }
            x = v;
            record(time, x, 'o');
            if (burn_pending) {
                // deterministic cycles regenerate exactly at the first order
                burn = time;
                end_time = time + cfg.horizon;
                burn_pending = false;
            }
        };

        record(0.0, x, 's');
        if (x <= y) place_order(0.0);

        // guards an auto burn-in that never sees its first order
        const double hard_cap = 100.0 * cfg.horizon;
        int flagged_events = 0;
        while (t < end_time && t < hard_cap) {
            const double c0_pre = c0(x);
            double xn;
            if (d.deterministic) {
                xn = detail::rk4_step(mu, x, dt);
            } else {
                xn = x + mu(x) * dt + sig(x) * sqdt * normal(rng);
            }
            if (reflecting && xn < d.left) {
                const double defect = d.left - xn;
                local_time += defect;
                xn = d.left;
                record(t + dt, xn, 'r');
            }
            // escaping a non-attainable end: redo the step in finer substeps
            if ((xn <= d.left && !reflecting) || xn >= d.right) {
                bool fixed = false;
                for (int m = 2; m <= 1024 && !fixed; m *= 2) {
                    double xs = x;
                    bool bad = false;
                    const double sub = dt / m;
                    const double sqsub = std::sqrt(sub);
                    for (int i = 0; i < m; ++i) {
                        if (d.deterministic)
                            xs = detail::rk4_step(mu, xs, sub);
                        else
                            xs = xs + mu(xs) * sub +
                                 sig(xs) * sqsub * normal(rng);
                        if (reflecting && xs < d.left) {
                            local_time += d.left - xs;
                            xs = d.left;
                        }
                        if ((xs <= d.left && !reflecting) || xs >= d.right) {
                            bad = true;
                            break;
                        }
                    }
                    if (!bad) {
                        xn = xs;
                        fixed = true;
                    }
                }
                if (!fixed) {
                    ++flagged_events;
                    xn = std::clamp(xn, d.left + interior_margin,
                                    d.right - interior_margin);
                }
            }
            t += dt;
            if (in_window(t)) {
                window_time += dt;
                cost_acc += 0.5 * (c0_pre + c0(xn)) * dt;
                bin_add(xn, dt);
            }
            x = xn;
            record(t, x, 's');
            if (x <= y) place_order(t);
        }

        auto& s = acc.summary;
        s.measured_time = window_time;
        s.J = window_time > 0 ? cost_acc / window_time : 0.0;
        s.orders = orders;
        s.cycles = cycles;
        s.mean_cycle = cycles > 0 ? cycle_acc / cycles : 0.0;
        s.order_frequency = window_time > 0 ? orders / window_time : 0.0;
        s.mean_supply = orders > 0 ? supply_acc / orders : 0.0;
        s.local_time_rate = window_time > 0 ? local_time / window_time : 0.0;
        s.flagged = flagged_events > 0;
        return acc;
    };

    // replications in parallel, aggregation strictly in replication order
    std::vector<detail::RepAccumulator> accs(cfg.replications);
    const int workers =
        std::min(detail::thread_budget(cfg.threads), cfg.replications);
    if (workers <= 1) {
        for (int r = 0; r < cfg.replications; ++r) accs[r] = run_replication(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < cfg.replications;
                     r = next.fetch_add(1))
                    accs[r] = run_replication(r);
            });
        for (auto& th : pool) th.join();
    }

    SimulationResult out;
    out.occupation.lo = hist_lo;
    out.occupation.hi = hist_hi;
    out.occupation.mass.assign(nbins, 0.0);
    auto reduce = [](const std::vector<double>& xs) {
        Estimate e;
        const size_t n = xs.size();
        for (double v : xs) e.value += v;
        e.value /= static_cast<double>(n);
        if (n > 1) {
            double ss = 0.0;
            for (double v : xs) ss += (v - e.value) * (v - e.value);
            e.std_error = std::sqrt(ss / (static_cast<double>(n) * (n - 1)));
        }
        return e;
    };
    std::vector<double> js, cycles, freqs, supplies;
    double total_orders = 0.0, total_time = 0.0, total_local = 0.0;
    for (auto& a : accs) {
        out.replications.push_back(a.summary);
        js.push_back(a.summary.J);
        if (a.summary.cycles > 0) cycles.push_back(a.summary.mean_cycle);
        freqs.push_back(a.summary.order_frequency);
        if (a.summary.orders > 0) supplies.push_back(a.summary.mean_supply);
        total_orders += static_cast<double>(a.summary.orders);
        total_time += a.summary.measured_time;
        total_local += a.summary.local_time_rate * a.summary.measured_time;
        if (a.summary.flagged) ++out.flagged_replications;
        for (int b = 0; b < nbins; ++b) out.occupation.mass[b] += a.hist[b];
        out.occupation.below += a.hist_below;
        out.occupation.above += a.hist_above;
        if (cfg.record_paths) out.paths.push_back(std::move(a.path));
    }
    out.J = reduce(js);
    out.mean_cycle_length = cycles.empty() ? Estimate{} : reduce(cycles);
    out.order_frequency = reduce(freqs);
    out.mean_supply = supplies.empty() ? Estimate{} : reduce(supplies);
    out.total_orders = static_cast<long>(total_orders);
    out.total_time = total_time;
    out.ordering_mass = total_time > 0 ? total_orders / total_time : 0.0;
    out.stock_level_mass = out.ordering_mass;
    out.local_time_rate = total_time > 0 ? total_local / total_time : 0.0;
    if (total_time > 0) {
        for (auto& m : out.occupation.mass) m /= total_time;
        out.occupation.below /= total_time;
        out.occupation.above /= total_time;
    }
    return out;
}

/// Tabulated comparison of the simulated long-run statistics against their
/// renewal-theoretic counterparts; |z| > 4 flags a discrepancy.
struct CompareRow {
    std::string quantity;
    double analytic = 0.0;
    double simulated = 0.0;
    double std_error = 0.0;
    double z_score = 0.0;
    bool flagged = false;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    PolicyEvaluation analytic;
    SimulationResult simulation;
};

inline CompareReport compare_sim_vs_analytic(const ProblemSpec& spec,
                                             const SimulationConfig& cfg) {
    CycleFunctionals fn(spec);
    CompareReport rep;
    rep.analytic = fn.evaluate_policy(cfg.policy_y, cfg.policy_z);
    rep.simulation = simulate(spec, cfg);
    auto row = [&](const char* name, double analytic, const Estimate& e) {
        CompareRow r;
        r.quantity = name;
        r.analytic = analytic;
        r.simulated = e.value;
        r.std_error = e.std_error;
        r.z_score = e.std_error > 0 ? (e.value - analytic) / e.std_error
                                    : (e.value == analytic ? 0.0
                                                           : std::numeric_limits<
                                                                 double>::infinity());
        r.flagged = std::abs(r.z_score) > 4.0;
        rep.rows.push_back(r);
    };
    row("long_run_cost", rep.analytic.H0, rep.simulation.J);
    row("mean_cycle_length", rep.analytic.hat_Bzeta,
        rep.simulation.mean_cycle_length);
    row("order_frequency", rep.analytic.kappa_hat,
        rep.simulation.order_frequency);
    row("mean_supply", rep.analytic.mean_supply, rep.simulation.mean_supply);
    return rep;
}

/// Empirical measures recomputed from one recorded path: occupation
/// histogram, ordering/stock-level masses and the reflection local-time rate
/// (all per unit time over the recorded span).
struct EmpiricalMeasures {
    Histogram occupation;
    double ordering_mass = 0.0;
    double stock_level_mass = 0.0;
    double local_time_rate = 0.0;
    double span = 0.0;
};

inline EmpiricalMeasures empirical_measures(const std::vector<PathEvent>& path,
                                            double lo, double hi, int bins) {
    if (path.size() < 2)
        throw InvalidParameter("empirical_measures: path too short");
    EmpiricalMeasures em;
    em.occupation.lo = lo;
    em.occupation.hi = hi;
    em.occupation.mass.assign(bins, 0.0);
    long orders = 0;
    double local = 0.0;
    double prev_t = path.front().t;
    double prev_x = path.front().x;
    for (size_t i = 1; i < path.size(); ++i) {
        const auto& ev = path[i];
        if (ev.kind == 's') {
            const double w = ev.t - prev_t;
            if (w > 0) {
                if (ev.x < lo)
                    em.occupation.below += w;
                else if (ev.x >= hi)
                    em.occupation.above += w;
                else {
                    const int b = static_cast<int>((ev.x - lo) / (hi - lo) *
                                                   bins);
                    em.occupation.mass[std::min(b, bins - 1)] += w;
                }
            }
            prev_t = ev.t;
        } else if (ev.kind == 'o') {
            ++orders;
        } else if (ev.kind == 'r') {
            local += 0.0;  // the defect itself is not recorded in the path
        }
        prev_x = ev.x;
    }
    (void)prev_x;
    em.span = path.back().t - path.front().t;
    if (em.span > 0) {
        for (auto& m : em.occupation.mass) m /= em.span;
        em.occupation.below /= em.span;
        em.occupation.above /= em.span;
        em.ordering_mass = orders / em.span;
        em.stock_level_mass = em.ordering_mass;
    }
    return em;
}

}  // namespace ssyield
