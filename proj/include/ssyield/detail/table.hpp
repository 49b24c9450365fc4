#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ssyield/errors.hpp"
#include "ssyield/quadrature.hpp"

namespace ssyield::detail {

struct TableNode {
    double x;
    double F;   // cumulative integral from the anchor
    double fx;  // integrand value, exact derivative of F
};

/// Piecewise cubic Hermite table of F(x) = int_{anchor}^x f(t) dt.
///
/// Node derivatives are the integrand itself, so each segment interpolates
/// with the exact slope at both ends; segment placement is validated during
/// construction by comparing the cubic against direct quadrature at the
/// midpoint.
class CumulativeTable {
  public:
    CumulativeTable() = default;
    explicit CumulativeTable(std::vector<TableNode> nodes)
        : nodes_(std::move(nodes)) {}

    bool empty() const { return nodes_.empty(); }
    double front_x() const { return nodes_.front().x; }
    double back_x() const { return nodes_.back().x; }
    bool covers(double x) const {
        return !nodes_.empty() && x >= nodes_.front().x && x <= nodes_.back().x;
    }

    double value(double x) const {
        const Seg s = locate(x);
        const double t = s.t, h = s.h;
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        return h00 * s.a->F + h * h10 * s.a->fx + h01 * s.b->F +
               h * h11 * s.b->fx;
    }

    double derivative(double x) const {
        const Seg s = locate(x);
        const double t = s.t, h = s.h;
        const double d00 = 6.0 * t * (t - 1.0) / h;
        const double d10 = (3.0 * t - 1.0) * (t - 1.0);
        const double d11 = t * (3.0 * t - 2.0);
        return d00 * (s.a->F - s.b->F) + d10 * s.a->fx + d11 * s.b->fx;
    }

    const std::vector<TableNode>& nodes() const { return nodes_; }

  private:
    struct Seg {
        const TableNode* a;
        const TableNode* b;
        double t, h;
    };
    Seg locate(double x) const {
        if (nodes_.size() < 2 || x < nodes_.front().x || x > nodes_.back().x)
            throw Error("CumulativeTable: evaluation outside covered range");
        auto it = std::upper_bound(
            nodes_.begin(), nodes_.end(), x,
            [](double v, const TableNode& n) { return v < n.x; });
        if (it == nodes_.end()) --it;
        const TableNode* b = &*it;
        const TableNode* a = b - 1;
        const double h = b->x - a->x;
        return {a, b, h > 0 ? (x - a->x) / h : 0.0, h};
    }
    std::vector<TableNode> nodes_;
};

struct TableBuildOptions {
    double tol = 1e-9;        // Hermite-vs-quadrature midpoint mismatch
    double quad_tol = 1e-11;  // per-segment quadrature tolerance
    int max_depth = 28;
};

/// Builds a cumulative table over strictly increasing seed abscissae.
/// `anchor` must be one of the seeds; F(anchor) = 0.
///
/// Every node stores the directly computed integral from its predecessor;
/// the cumulative values are prefix sums taken outward from the anchor node,
/// so regions where the integrand is astronomically larger than at the
/// anchor never cancel against each other.
inline CumulativeTable build_cumulative_table(
    const std::function<double(double)>& f, std::vector<double> seeds,
    double anchor, TableBuildOptions opts = {}) {
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    if (seeds.size() < 2) throw Error("table: need at least two seed nodes");

    QuadratureOptions q;
    q.abs_tol = opts.quad_tol;
    q.rel_tol = 1e-13;

    struct NodeInc {
        double x, fx;
        double inc;  // integral from the previous node to this one
    };
    // refine a segment [a,b]; emits interior nodes and returns the increment
    // from the last emitted node (or a) to b. All increments are direct
    // quadrature results of their own subsegment.
    std::function<double(double, double, double, double, double, int,
                         std::vector<NodeInc>&)>
        refine = [&](double a, double b, double fa, double fb, double Iab,
                     int depth, std::vector<NodeInc>& out) -> double {
        const double m = 0.5 * (a + b);
        if (depth >= opts.max_depth || m <= a || m >= b) return Iab;
        const double fm = f(m);
        const double Iam = integrate(f, a, m, q).value;
        const double Imb = integrate(f, m, b, q).value;
        const double h = b - a;
        // Hermite prediction of F(m) relative to F(a)
        const double Hm = 0.5 * (Iam + Imb) + h * (fa - fb) / 8.0;
        if (std::abs(Hm - Iam) <= opts.tol * (1.0 + std::abs(Iam)))
            return Iab;
        const double lastL = refine(a, m, fa, fm, Iam, depth + 1, out);
        out.push_back({m, fm, lastL});
        return refine(m, b, fm, fb, Imb, depth + 1, out);
    };

    std::vector<NodeInc> incs;
    incs.reserve(seeds.size() * 2);
    double prev = seeds.front();
    double fprev = f(prev);
    incs.push_back({prev, fprev, 0.0});
    for (size_t i = 1; i < seeds.size(); ++i) {
        const double x = seeds[i];
        const double fx = f(x);
        const double I = integrate(f, prev, x, q).value;
        const double last = refine(prev, x, fprev, fx, I, 0, incs);
        incs.push_back({x, fx, last});
        prev = x;
        fprev = fx;
    }

    size_t anchor_idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < incs.size(); ++i) {
        const double d = std::abs(incs[i].x - anchor);
        if (d < best) {
            best = d;
            anchor_idx = i;
        }
    }
    std::vector<TableNode> nodes(incs.size());
    nodes[anchor_idx] = {incs[anchor_idx].x, 0.0, incs[anchor_idx].fx};
    for (size_t i = anchor_idx + 1; i < incs.size(); ++i)
        nodes[i] = {incs[i].x, nodes[i - 1].F + incs[i].inc, incs[i].fx};
    for (size_t i = anchor_idx; i-- > 0;)
        nodes[i] = {incs[i].x, nodes[i + 1].F - incs[i + 1].inc, incs[i].fx};
    return CumulativeTable(std::move(nodes));
}

/// Geometric + linear seed layout on [lo, hi] around an anchor; `per_decade`
/// controls node density toward endpoints flagged as singular.
inline std::vector<double> layout_seeds(double lo, double hi, double anchor,
                                        int linear_n, int per_decade,
                                        bool singular_lo, bool singular_hi) {
    std::vector<double> s;
    s.push_back(lo);
    s.push_back(hi);
    s.push_back(anchor);
    const double span = hi - lo;
    for (int i = 1; i < linear_n; ++i)
        s.push_back(lo + span * i / static_cast<double>(linear_n));
    auto geometric = [&](double from_end, bool low_side) {
        const double d0 = low_side ? anchor - lo : hi - anchor;
        if (d0 <= 0) return;
        double d = d0;
        const double shrink = std::pow(10.0, -1.0 / per_decade);
        while (d > 1e-14 * span + 1e-300) {
            const double x = low_side ? lo + d : hi - d;
            s.push_back(x);
            d *= shrink;
            if (d < from_end) break;
        }
    };
    if (singular_lo) geometric(1e-9 * span, true);
    if (singular_hi) geometric(1e-9 * span, false);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

}  // namespace ssyield::detail
