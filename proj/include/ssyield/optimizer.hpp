#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ssyield/functionals.hpp"

namespace ssyield {

struct OptimizeOptions {
    int starts = 6;
    int seed_grid = 24;       // coarse seeding lattice per axis
    double coord_tol = 1e-5;  // simplex convergence, per coordinate
    double value_tol = 1e-12;
    int max_iterations = 600;
    std::optional<std::array<double, 4>> box;  // y_lo, y_hi, z_lo, z_hi
    int max_box_expansions = 3;
};

struct SearchBox {
    double y_lo, y_hi, z_lo, z_hi;
};

struct OptimizationResult {
    double y_star = 0.0;
    double z_star = 0.0;
    double H0_star = std::numeric_limits<double>::infinity();
    long evaluations = 0;
    int starts = 0;
    bool converged = false;
    SearchBox box{};
    std::optional<std::pair<double, double>> grid_argmin;
    std::vector<std::string> warnings;
};

namespace detail {

struct NmOutcome {
    double y, z, f;
    bool converged;
    long evaluations;
};

/// Nelder-Mead on (y,z); the objective returns +inf outside the admissible
/// region, which downhill moves simply avoid.
template <typename F>
NmOutcome nelder_mead(F&& f, double y0, double z0, double step_y,
                      double step_z, const OptimizeOptions& opts) {
    struct Pt {
        double y, z, f;
    };
    long evals = 0;
    auto eval = [&](double y, double z) {
        ++evals;
        return f(y, z);
    };
    std::array<Pt, 3> s{Pt{y0, z0, eval(y0, z0)},
                        Pt{y0 + step_y, z0, eval(y0 + step_y, z0)},
                        Pt{y0, z0 + step_z, eval(y0, z0 + step_z)}};
    auto order = [&] {
        std::sort(s.begin(), s.end(),
                  [](const Pt& a, const Pt& b) { return a.f < b.f; });
    };
    order();
    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const double spread_y =
            std::max({s[0].y, s[1].y, s[2].y}) - std::min({s[0].y, s[1].y, s[2].y});
        const double spread_z =
            std::max({s[0].z, s[1].z, s[2].z}) - std::min({s[0].z, s[1].z, s[2].z});
        const double fspread = std::abs(s[2].f - s[0].f);
        if (spread_y < opts.coord_tol && spread_z < opts.coord_tol &&
            (fspread <= opts.value_tol * (1.0 + std::abs(s[0].f)) ||
             !std::isfinite(fspread))) {
            converged = true;
            break;
        }
        const double cy = 0.5 * (s[0].y + s[1].y);
        const double cz = 0.5 * (s[0].z + s[1].z);
        const double ry = cy + (cy - s[2].y), rz = cz + (cz - s[2].z);
        const double fr = eval(ry, rz);
        if (fr < s[0].f) {
            const double ey = cy + 2.0 * (cy - s[2].y);
            const double ez = cz + 2.0 * (cz - s[2].z);
            const double fe = eval(ey, ez);
            s[2] = fe < fr ? Pt{ey, ez, fe} : Pt{ry, rz, fr};
        } else if (fr < s[1].f) {
            s[2] = {ry, rz, fr};
        } else {
            const bool outside = fr < s[2].f;
            const double ky = outside ? cy + 0.5 * (ry - cy)
                                      : cy + 0.5 * (s[2].y - cy);
            const double kz = outside ? cz + 0.5 * (rz - cz)
                                      : cz + 0.5 * (s[2].z - cz);
            const double fk = eval(ky, kz);
            if (fk < std::min(fr, s[2].f)) {
                s[2] = {ky, kz, fk};
            } else {
                for (int i = 1; i < 3; ++i) {
                    s[i].y = s[0].y + 0.5 * (s[i].y - s[0].y);
                    s[i].z = s[0].z + 0.5 * (s[i].z - s[0].z);
                    s[i].f = eval(s[i].y, s[i].z);
                }
            }
        }
        order();
    }
    return {s[0].y, s[0].z, s[0].f, converged, evals};
}

/// Compact sub-rectangle of the ordering region located from the boundary
/// asymptotics: beyond the returned edges the ratio Bg0/Bzeta already
/// dominates a sampled interior cost level, so no minimizer lives there.
inline SearchBox auto_search_box(const CycleFunctionals& fn,
                                 std::vector<std::string>* warnings) {
    const auto& d = fn.spec().diffusion;
    const double x0 = d.anchor;
    const double s = d.length_scale();

    auto h_or_inf = [&](double y, double z) {
        if (!(y < z)) return std::numeric_limits<double>::infinity();
        if (d.finite_left() && y <= d.left) {
            if (d.left_behavior == LeftBehavior::natural)
                return std::numeric_limits<double>::infinity();
            y = d.left;
        }
        try {
            return fn.H0(y, z);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    double h_ref = std::numeric_limits<double>::infinity();
    for (double fy : {0.15, 0.3, 0.5}) {
        for (double fz : {0.15, 0.3, 0.5}) {
            const double y = d.finite_left()
                                 ? d.left + (x0 - d.left) * (1.0 - fy)
                                 : x0 - s * 2.0 * fy;
            const double z = d.finite_right()
                                 ? d.right - (d.right - x0) * (1.0 - fz)
                                 : x0 + s * 2.0 * fz;
            h_ref = std::min(h_ref, h_or_inf(y, z));
        }
    }
    if (!std::isfinite(h_ref)) {
        if (warnings)
            warnings->push_back(
                "box sizing: no finite interior cost sample; using a wide "
                "default");
        h_ref = 1.0;
    }
    const double threshold = 2.0 * h_ref;

    auto ratio = [&](double x) {
        const double zt = fn.zeta(x);
        if (zt == 0.0) return 0.0;
        return fn.g0(x) / zt;
    };

    const bool left_attainable = d.left_behavior != LeftBehavior::natural;
    double y_lo = d.finite_left() ? d.left + (x0 - d.left) * 0.5 : x0 - s;
    bool resolved = false;
    for (int k = 0; k < 60; ++k) {
        double r;
        try {
            r = ratio(y_lo);
        } catch (const Error&) {
            break;
        }
        if (std::isfinite(r) && r >= threshold) {
            resolved = true;
            break;
        }
        if (d.finite_left()) {
            const double next = d.left + (y_lo - d.left) * 0.6;
            if (next == y_lo) break;
            y_lo = next;
        } else {
            y_lo = x0 - s * std::pow(1.6, k + 1);
        }
    }
    if (!resolved) {
        if (left_attainable && d.finite_left())
            y_lo = d.left;  // the boundary belongs to the state space
        else if (warnings)
            warnings->push_back(
                "box sizing: left edge unresolved by the asymptotic ratio");
    }

    double z_hi = d.finite_right() ? d.right - (d.right - x0) * 0.5 : x0 + s;
    resolved = false;
    for (int k = 0; k < 60; ++k) {
        double r;
        try {
            r = ratio(z_hi);
        } catch (const Error&) {
            break;
        }
        if (std::isfinite(r) && r >= threshold) {
            resolved = true;
            break;
        }
        if (d.finite_right()) {
            const double next = d.right - (d.right - z_hi) * 0.6;
            if (next == z_hi) break;
            z_hi = next;
        } else {
            z_hi = x0 + s * std::pow(1.6, k + 1);
        }
    }
    if (!resolved) {
        if (d.right_behavior == RightBehavior::entrance && d.finite_right())
            z_hi = d.right;
        else if (warnings)
            warnings->push_back(
                "box sizing: right edge unresolved by the asymptotic ratio");
    }

    const double gap = 8.0 * fn.diagonal_gap();
    SearchBox box{y_lo, z_hi - gap, y_lo + gap, z_hi};
    return box;
}

}  // namespace detail

/// Dense H0 evaluation over a box; cells inside the diagonal gap or failing
/// to evaluate are recorded as missing (NaN).
struct GridScan {
    std::vector<double> ys, zs;
    std::vector<double> values;  // row-major: values[iy * zs.size() + iz]
    double y_argmin = 0.0, z_argmin = 0.0;
    double min_value = std::numeric_limits<double>::infinity();
    long missing = 0;

    double at(int iy, int iz) const { return values[iy * zs.size() + iz]; }
};

inline GridScan grid_scan(const CycleFunctionals& fn, int resolution,
                          const SearchBox& box) {
    if (resolution < 2)
        throw InvalidParameter("grid_scan: resolution must be >= 2");
    GridScan g;
    g.ys.resize(resolution);
    g.zs.resize(resolution);
    for (int i = 0; i < resolution; ++i) {
        g.ys[i] = box.y_lo + (box.y_hi - box.y_lo) * i / (resolution - 1.0);
        g.zs[i] = box.z_lo + (box.z_hi - box.z_lo) * i / (resolution - 1.0);
    }
    g.values.assign(static_cast<size_t>(resolution) * resolution,
                    std::numeric_limits<double>::quiet_NaN());
    for (int iy = 0; iy < resolution; ++iy) {
        for (int iz = 0; iz < resolution; ++iz) {
            const double y = g.ys[iy], z = g.zs[iz];
            if (!(z - y >= fn.diagonal_gap())) {
                ++g.missing;
                continue;
            }
            double v;
            try {
                v = fn.H0(y, z);
            } catch (const Error&) {
                ++g.missing;
                continue;
            }
            g.values[iy * static_cast<size_t>(resolution) + iz] = v;
            // tie-break: smaller value, then smaller z, then smaller y
            if (v < g.min_value ||
                (v == g.min_value &&
                 (z < g.z_argmin || (z == g.z_argmin && y < g.y_argmin)))) {
                g.min_value = v;
                g.y_argmin = y;
                g.z_argmin = z;
            }
        }
    }
    return g;
}

/// Multistart simplex minimization of H0 over the region {y < z}.
///
/// Seeds come from a coarse lattice; the box is sized from the boundary
/// asymptotics unless supplied. When the argmin lands on a box edge the box
/// expands (up to max_box_expansions) before a warning is recorded.
inline OptimizationResult minimize_H0(const CycleFunctionals& fn,
                                      OptimizeOptions opts = {}) {
    OptimizationResult res;
    SearchBox box;
    if (opts.box)
        box = SearchBox{(*opts.box)[0], (*opts.box)[1], (*opts.box)[2],
                        (*opts.box)[3]};
    else
        box = detail::auto_search_box(fn, &res.warnings);

    const auto& d = fn.spec().diffusion;
    auto objective = [&](double y, double z) {
        if (y < box.y_lo || y > box.y_hi || z < box.z_lo || z > box.z_hi)
            return std::numeric_limits<double>::infinity();
        if (!(z - y >= fn.diagonal_gap()))
            return std::numeric_limits<double>::infinity();
        if (d.finite_left() && y < d.left)
            return std::numeric_limits<double>::infinity();
        try {
            return fn.H0(y, z);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    for (int expansion = 0;; ++expansion) {
        const int n = std::max(opts.seed_grid, 4);
        struct Seed {
            double y, z, f;
        };
        std::vector<Seed> seeds;
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz) {
                const double y =
                    box.y_lo + (box.y_hi - box.y_lo) * (iy + 0.5) / n;
                const double z =
                    box.z_lo + (box.z_hi - box.z_lo) * (iz + 0.5) / n;
                const double f = objective(y, z);
                res.evaluations += 1;
                if (std::isfinite(f)) seeds.push_back({y, z, f});
            }
        if (seeds.empty()) throw AllStartsFailed("no finite seed in the box");
        std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) {
            return a.f < b.f || (a.f == b.f && (a.z < b.z ||
                                                (a.z == b.z && a.y < b.y)));
        });

        const double step_y = (box.y_hi - box.y_lo) / n;
        const double step_z = (box.z_hi - box.z_lo) / n;
        res.starts = 0;
        double best_f = std::numeric_limits<double>::infinity();
        double best_y = 0.0, best_z = 0.0;
        bool best_conv = false;
        const int nstarts =
            std::min<int>(opts.starts, static_cast<int>(seeds.size()));
        for (int k = 0; k < nstarts; ++k) {
            auto out = detail::nelder_mead(objective, seeds[k].y, seeds[k].z,
                                           step_y, step_z, opts);
            res.evaluations += out.evaluations;
            ++res.starts;
            if (!std::isfinite(out.f)) continue;
            if (!std::isfinite(best_f)) {
                best_f = out.f;
                best_y = out.y;
                best_z = out.z;
                best_conv = out.converged;
                continue;
            }
            const double tie = 1e-9 * (1.0 + std::abs(best_f));
            if (out.f < best_f - tie ||
                (std::abs(out.f - best_f) <= tie &&
                 (out.z < best_z || (out.z == best_z && out.y < best_y)))) {
                best_f = out.f;
                best_y = out.y;
                best_z = out.z;
                best_conv = out.converged;
            }
        }
        if (!std::isfinite(best_f))
            throw AllStartsFailed("all simplex starts diverged");

        const double edge_y = 5e-3 * (box.y_hi - box.y_lo);
        const double edge_z = 5e-3 * (box.z_hi - box.z_lo);
        const bool at_lo_y = best_y - box.y_lo < edge_y &&
                             !(d.finite_left() && box.y_lo <= d.left &&
                               d.left_behavior != LeftBehavior::natural);
        const bool at_hi_z = box.z_hi - best_z < edge_z &&
                             !(d.finite_right() && box.z_hi >= d.right);
        const bool at_hi_y = box.y_hi - best_y < edge_y;
        const bool at_lo_z = best_z - box.z_lo < edge_z;
        res.y_star = best_y;
        res.z_star = best_z;
        res.H0_star = best_f;
        res.converged = best_conv;
        res.box = box;
        if (!(at_lo_y || at_hi_z || at_hi_y || at_lo_z)) break;
        if (expansion >= opts.max_box_expansions) {
            res.warnings.push_back(
                "argmin sits on the search-box edge after expansions");
            break;
        }
        const double wy = box.y_hi - box.y_lo, wz = box.z_hi - box.z_lo;
        if (at_lo_y)
            box.y_lo = d.finite_left()
                           ? std::max(d.left + (box.y_lo - d.left) * 0.4,
                                      d.left)
                           : box.y_lo - 0.5 * wy;
        if (at_hi_y) box.y_hi = std::min(box.y_hi + 0.5 * wy, box.z_hi);
        if (at_lo_z) box.z_lo = std::max(box.z_lo - 0.5 * wz, box.y_lo);
        if (at_hi_z)
            box.z_hi = d.finite_right()
                           ? d.right - (d.right - box.z_hi) * 0.4
                           : box.z_hi + 0.5 * wz;
    }
    return res;
}

/// Residuals of the average-cost quasi-variational system at a computed
/// optimum; all four relations evaluated on configurable grids.
struct QviReport {
    double interior_residual_max = 0.0;  // max |A U0 + c0 - H0*|
    double min_hat_BU0_plus_c1 = 0.0;    // over the region grid
    double value_at_optimum = 0.0;       // (B U0)^ + c1^ at (y*, z*)
    double u0_anchor = 0.0;              // |U0(x0)|, zero by construction
    double max_hat_Bzeta = 0.0;          // scale for the inequality checks
    double hat_Bzeta_at_optimum = 0.0;
};

inline QviReport qvi_residuals(const CycleFunctionals& fn,
                               const OptimizationResult& res,
                               int interior_points = 200,
                               int region_points = 40) {
    const double h_star = res.H0_star;
    const auto& d = fn.spec().diffusion;
    QviReport rep;
    rep.u0_anchor = std::abs(fn.u0(d.anchor, h_star));

    GeneratorInput u0in;
    u0in.value = [&](double x) { return fn.u0(x, h_star); };
    u0in.derivative = [&](double x) { return fn.u0_prime(x, h_star); };
    const double lo = res.box.y_lo, hi = res.box.z_hi;
    for (int i = 0; i < interior_points; ++i) {
        const double x = lo + (hi - lo) * (i + 0.5) / interior_points;
        auto g = apply_generator(u0in, d, x);
        const double resid =
            std::abs(g.value + fn.spec().costs.holding(x) - h_star);
        rep.interior_residual_max = std::max(rep.interior_residual_max, resid);
    }

    rep.min_hat_BU0_plus_c1 = std::numeric_limits<double>::infinity();
    for (int iy = 0; iy < region_points; ++iy)
        for (int iz = 0; iz < region_points; ++iz) {
            const double y =
                res.box.y_lo +
                (res.box.y_hi - res.box.y_lo) * (iy + 0.5) / region_points;
            const double z =
                res.box.z_lo +
                (res.box.z_hi - res.box.z_lo) * (iz + 0.5) / region_points;
            if (!(z - y >= fn.diagonal_gap())) continue;
            const double v = fn.hat_c1(y, z) + fn.hat_BU0(y, z, h_star);
            rep.min_hat_BU0_plus_c1 = std::min(rep.min_hat_BU0_plus_c1, v);
            rep.max_hat_Bzeta =
                std::max(rep.max_hat_Bzeta, fn.hat_Bzeta(y, z));
        }

    rep.value_at_optimum = fn.hat_c1(res.y_star, res.z_star) +
                           fn.hat_BU0(res.y_star, res.z_star, h_star);
    rep.hat_Bzeta_at_optimum = fn.hat_Bzeta(res.y_star, res.z_star);
    return rep;
}

}  // namespace ssyield
