#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ssyield/diffusion.hpp"
#include "ssyield/errors.hpp"
#include "ssyield/quadrature.hpp"

namespace ssyield {

/// Holding/back-order rate c0 and ordering cost c1 with its fixed floor k1.
struct CostModel {
    std::function<double(double)> holding;                  // c0(x) >= 0
    double holding_limit_left = 0.0;                        // may be +inf
    double holding_limit_right = 0.0;                       // may be +inf
    std::function<double(double, double)> ordering;         // c1(y,z)
    double fixed_cost_k1 = 0.0;                             // c1 >= k1 > 0
};

enum class YieldKind { dirac, base_pushforward, z_skewed_uniform };

inline const char* to_string(YieldKind k) {
    switch (k) {
        case YieldKind::dirac: return "dirac";
        case YieldKind::base_pushforward: return "base_pushforward";
        case YieldKind::z_skewed_uniform: return "z_skewed_uniform";
    }
    return "?";
}

/// Parametrized random-yield transition kernel Q(.; y, z).
///
/// Kinds:
///   dirac              - non-deficient supply, point mass at z;
///   base_pushforward   - uniform base on [delta, 1] mapped through the
///                        linear map t -> y + t (z-y) (nearly proportional
///                        yields); support [y + delta (z-y), z];
///   z_skewed_uniform   - uniform on (L, z] with
///                        L = (1-(z/k)^j) y + (z/k)^j z, capacity k.
/// Q(.; y, y) is the point mass at y for every kind.
class YieldFamily {
  public:
    static YieldFamily dirac() {
        YieldFamily f;
        f.kind_ = YieldKind::dirac;
        return f;
    }
    static YieldFamily nearly_proportional(double delta) {
        if (!(delta > 0.0 && delta <= 1.0))
            throw InvalidParameter("yield: delta must lie in (0, 1]");
        YieldFamily f;
        f.kind_ = YieldKind::base_pushforward;
        f.delta_ = delta;
        return f;
    }
    static YieldFamily z_skewed_uniform(int skew_exponent, double capacity) {
        if (skew_exponent < 1)
            throw InvalidParameter("yield: skew exponent must be >= 1");
        if (!(capacity > 0.0))
            throw InvalidParameter("yield: capacity must be positive");
        YieldFamily f;
        f.kind_ = YieldKind::z_skewed_uniform;
        f.skew_ = skew_exponent;
        f.capacity_ = capacity;
        return f;
    }

    YieldKind kind() const { return kind_; }
    double delta() const { return delta_; }
    int skew_exponent() const { return skew_; }
    double capacity() const { return capacity_; }

    /// Lower endpoint of supp Q(.; y, z); equals z for the dirac kind.
    double support_lower(double y, double z) const {
        require_region(y, z);
        switch (kind_) {
            case YieldKind::dirac: return z;
            case YieldKind::base_pushforward: return y + delta_ * (z - y);
            case YieldKind::z_skewed_uniform: {
                const double w = std::pow(z / capacity_, skew_);
                return (1.0 - w) * y + w * z;
            }
        }
        return z;
    }

    double mean(double y, double z) const {
        require_region(y, z);
        if (kind_ == YieldKind::dirac || y == z) return z;
        return 0.5 * (support_lower(y, z) + z);
    }

    /// Q((t, b); y, z) for t below the right boundary.
    double tail_probability(double t, double y, double z) const {
        require_region(y, z);
        if (y == z) return t < y ? 1.0 : 0.0;
        if (kind_ == YieldKind::dirac) return t < z ? 1.0 : 0.0;
        const double L = support_lower(y, z);
        if (t < L) return 1.0;
        if (t >= z) return 0.0;
        return (z - t) / (z - L);
    }

    double quantile(double u, double y, double z) const {
        require_region(y, z);
        if (kind_ == YieldKind::dirac || y == z) return z;
        const double L = support_lower(y, z);
        // u in [0,1); u = 0 maps to z so the support is (L, z]
        return z - u * (z - L);
    }

  private:
    void require_region(double y, double z) const {
        if (y > z)
            throw OutOfRegion("yield kernel: requires y <= z");
    }
    YieldKind kind_ = YieldKind::dirac;
    double delta_ = 1.0;
    int skew_ = 0;
    double capacity_ = 0.0;
};

/// Hat operation: integral of g against Q(.; y, z). Exact for atoms; the
/// continuous kinds integrate over the cdf-transformed variable, which for
/// uniform kernels is Gauss-Legendre on the support interval.
template <typename G>
double integrate_against_Q(const YieldFamily& family, G&& g, double y,
                           double z, double tol = 1e-11) {
    if (y > z) throw OutOfRegion("integrate_against_Q: requires y <= z");
    if (y == z) return g(y);
    if (family.kind() == YieldKind::dirac) return g(z);
    const double L = family.support_lower(y, z);
    const double w = z - L;
    if (w <= 0.0) return g(z);
    QuadratureOptions opts;
    opts.abs_tol = tol;
    opts.rel_tol = 1e-12;
    auto r = integrate(std::forward<G>(g), L, z, opts);
    return r.value / w;
}

/// Draws the delivered inventory level; v lies in (y, z] a.s. for y < z.
inline double sample_yield(const YieldFamily& family, double y, double z,
                           std::mt19937_64& rng) {
    if (y > z) throw OutOfRegion("sample_yield: requires y <= z");
    if (y == z) return y;
    if (family.kind() == YieldKind::dirac) return z;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return family.quantile(unif(rng), y, z);
}

struct MdgReport {
    bool pass = false;
    double guaranteed_fraction = 0.0;  // of the nominal order that arrives
    std::string notes;
};

/// Minimal-delivery-guaranty verdict; analytic per kind.
inline MdgReport check_mdg(const YieldFamily& family) {
    MdgReport r;
    switch (family.kind()) {
        case YieldKind::dirac:
            r.pass = true;
            r.guaranteed_fraction = 1.0;
            r.notes = "point mass at the nominal level";
            break;
        case YieldKind::base_pushforward:
            r.pass = family.delta() > 0.0;
            r.guaranteed_fraction = family.delta();
            r.notes = r.pass ? "support starts at y + delta (z-y)"
                             : "support reaches the order-from level";
            break;
        case YieldKind::z_skewed_uniform:
            // left endpoint y + (z/k)^j (z-y) > y for every z > y
            r.pass = true;
            r.guaranteed_fraction = 0.0;  // state dependent, positive
            r.notes = "support left endpoint exceeds y by (z/k)^j (z-y)";
            break;
    }
    return r;
}

struct AscReport {
    bool pass = false;
    double delta = 0.0;                  // reported lower bound
    std::vector<double> tail_infima;     // inf over y-grid, one per z
    std::string notes;
};

/// Assured-supply-commitment probe: inf over y in [d1,d2] of
/// Q((z_tilde, b); y, z) along an ascending z grid approaching the right
/// boundary. Passes when the tail infimum stabilizes above a positive level.
inline AscReport check_asc(const YieldFamily& family, double d1, double d2,
                           double z_tilde, const std::vector<double>& z_grid) {
    if (!(d1 < d2 && d2 < z_tilde))
        throw InvalidParameter("check_asc: requires d1 < d2 < z_tilde");
    if (z_grid.size() < 3)
        throw InvalidParameter("check_asc: z grid too short");
    AscReport rep;
    const int ny = 33;
    for (double z : z_grid) {
        if (!(z > z_tilde))
            throw InvalidParameter("check_asc: z grid must exceed z_tilde");
        double inf = std::numeric_limits<double>::infinity();
        for (int i = 0; i < ny; ++i) {
            const double y = d1 + (d2 - d1) * i / (ny - 1.0);
            inf = std::min(inf, family.tail_probability(z_tilde, y, z));
        }
        rep.tail_infima.push_back(inf);
    }
    const size_t n = rep.tail_infima.size();
    const double m3 = std::min({rep.tail_infima[n - 1], rep.tail_infima[n - 2],
                                rep.tail_infima[n - 3]});
    double tail_max = 0.0;
    for (size_t i = n - 3; i < n; ++i)
        tail_max = std::max(tail_max, rep.tail_infima[i]);
    rep.delta = m3;
    rep.pass = m3 > 1e-4 && rep.tail_infima[n - 1] >= 0.5 * tail_max;
    rep.notes = rep.pass ? "tail infimum stabilizes above delta"
                         : "tail infimum vanishes or keeps decaying";
    return rep;
}

/// Optional closed forms a preset may attach (g0/zeta and derivatives).
struct ClosedFormFunctionals {
    std::function<double(double)> g0;
    std::function<double(double)> zeta;
    std::function<double(double)> g0_prime;
    std::function<double(double)> zeta_prime;
};

/// Complete problem instance.
struct ProblemSpec {
    DiffusionModel diffusion;
    CostModel costs;
    YieldFamily yields = YieldFamily::dirac();
    std::string label;
    std::optional<ClosedFormFunctionals> closed_form;

    void validate() {
        diffusion.validate();
        if (!costs.holding || !costs.ordering)
            throw InvalidParameter("costs: holding/ordering not set");
        if (!(costs.fixed_cost_k1 > 0.0))
            throw InvalidParameter("costs: fixed cost k1 must be positive");
        if (yields.kind() == YieldKind::z_skewed_uniform &&
            yields.capacity() != diffusion.right)
            throw InvalidParameter(
                "yields: capacity must equal the right endpoint");
    }
};

}  // namespace ssyield
