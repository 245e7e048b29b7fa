#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dwell/grid.hpp"
#include "dwell/model.hpp"

namespace dwell {

/// Agmon geometry of the landscape: single-well action A, the tunneling
/// parameter T = exp(-2 A(L/2)), and the distance profile from the nearest
/// well bottom.
struct AgmonGeometry {
    double s = 2.0;
    double L = 6.0;

    AgmonGeometry() = default;
    AgmonGeometry(double s_, double L_) : s(s_), L(L_) {
        if (s < 2.0) throw error("s must be at least 2");
        if (L < 0.0) throw error("L must be nonnegative");
    }
    explicit AgmonGeometry(const PotentialSpec& p) : AgmonGeometry(p.s, p.L) {}

    double A(double x_abs) const { return agmon_A(std::fabs(x_abs), s); }
    double tunneling() const { return std::exp(-2.0 * A(0.5 * L)); }
};

inline double tunneling_T(const AgmonGeometry& geom) { return geom.tunneling(); }

/// A_DW(x): Agmon distance to the closest well bottom. Even, zero at +-L/2,
/// continuous across the seam at x = 0.
inline GridField agmon_profile(const Grid& g, const AgmonGeometry& geom) {
    GridField prof(g);
    const double c = 0.5 * geom.L;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        prof[i] = (x >= 0.0) ? geom.A(std::fabs(x - c)) : geom.A(std::fabs(x + c));
    }
    return prof;
}

namespace detail {

// composite Simpson of sqrt(V_DW) over [a, b], a <= b, cells of width <= max_step
inline double simpson_sqrt_vdw(double a, double b, const AgmonGeometry& geom,
                               double max_step) {
    if (b <= a) return 0.0;
    const double c = 0.5 * geom.L;
    auto f = [&](double t) {
        const double dist = std::min(std::fabs(t - c), std::fabs(t + c));
        return std::pow(dist, 0.5 * geom.s);
    };
    const int cells = std::max(2, static_cast<int>(std::ceil((b - a) / max_step)));
    const double w = (b - a) / cells;
    double s = 0.0;
    for (int k = 0; k < cells; ++k) {
        const double x0 = a + k * w;
        const double x1 = x0 + w;
        s += (w / 6.0) * (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1));
    }
    return s;
}

}  // namespace detail

/// Two-point Agmon distance d_DW(x, y) = |int_x^y sqrt(V_DW)|; in one
/// dimension the geodesic is the straight segment. The integrand has kinks at
/// 0 and +-L/2 only, so the quadrature splits there and Simpson integrates
/// the polynomial pieces of even s exactly.
inline double agmon_distance(double x, double y, const AgmonGeometry& geom,
                             double max_step = 0.01) {
    double a = std::min(x, y);
    double b = std::max(x, y);
    std::vector<double> pts{a, b};
    for (double brk : {-0.5 * geom.L, 0.0, 0.5 * geom.L})
        if (brk > a && brk < b) pts.push_back(brk);
    std::sort(pts.begin(), pts.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i)
        total += detail::simpson_sqrt_vdw(pts[i], pts[i + 1], geom, max_step);
    return total;
}

/// Fitted envelope constants of the decay estimates. The upper constant is
/// the smallest C with |u| <= C exp(-(1-eps) A_DW) on the admissible region;
/// the lower constant is the largest c with u_+ >= c exp(-A_DW)/V_DW^(alpha+eps).
struct EnvelopeReport {
    double epsilon = 0.0;
    double region_radius = 0.0;
    double fitted_C_upper = 0.0;
    double fitted_c_lower = 0.0;
    double alpha = 0.0;
    int violation_count = 0;
    int region_nodes = 0;
};

inline EnvelopeReport check_upper_envelope(const GridField& u, const AgmonGeometry& geom,
                                           double epsilon, double R) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw error("epsilon must lie in (0, 1/2)");
    if (R <= 0.0) throw error("region radius must be positive");
    const Grid& g = u.grid;
    const double c = 0.5 * geom.L;
    EnvelopeReport rep;
    rep.epsilon = epsilon;
    rep.region_radius = R;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (std::fabs(x - c) < R || std::fabs(x + c) < R) continue;
        const double adw = (x >= 0.0) ? geom.A(x - c) : geom.A(x + c);
        rep.fitted_C_upper =
            std::max(rep.fitted_C_upper, std::fabs(u[i]) * std::exp((1.0 - epsilon) * adw));
        ++rep.region_nodes;
    }
    if (rep.region_nodes == 0) throw error("region empty");
    return rep;
}

// alpha of the lower envelope, d = 1: (2d-2+s)/(4s), with the mu_+ correction
// in the borderline case s = 2.
inline double lower_envelope_alpha(double s, double mu_plus) {
    const double base = s / (4.0 * s);
    return (s == 2.0) ? base - mu_plus / (2.0 * s) : base;
}

inline EnvelopeReport check_lower_envelope(const GridField& u_plus, const AgmonGeometry& geom,
                                           double mu_plus, double epsilon, double R) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw error("epsilon must lie in (0, 1)");
    if (R <= 0.0) throw error("region radius must be positive");
    const Grid& g = u_plus.grid;
    const double c = 0.5 * geom.L;
    EnvelopeReport rep;
    rep.epsilon = epsilon;
    rep.region_radius = R;
    rep.alpha = lower_envelope_alpha(geom.s, mu_plus);
    rep.fitted_c_lower = std::numeric_limits<double>::max();
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (std::fabs(x - c) < R || std::fabs(x + c) < R) continue;
        const double vdw = std::min(std::pow(std::fabs(x - c), geom.s),
                                    std::pow(std::fabs(x + c), geom.s));
        if (vdw < 1e-12) continue;  // envelope singular at well bottoms
        const double adw = (x >= 0.0) ? geom.A(x - c) : geom.A(x + c);
        const double ratio =
            u_plus[i] * std::pow(vdw, rep.alpha + epsilon) * std::exp(adw);
        rep.fitted_c_lower = std::min(rep.fitted_c_lower, ratio);
        ++rep.region_nodes;
    }
    if (rep.region_nodes == 0) throw error("region empty");
    return rep;
}

}  // namespace dwell
