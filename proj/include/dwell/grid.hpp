#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dwell/core.hpp"

namespace dwell {

/// Uniform symmetric 1-D grid with an odd number of nodes, so that x = 0 is a node.
/// Node coordinates are computed as h*(i - mid) which makes x_i == -x_{n-1-i} bitwise.
struct Grid {
    double h = 0.0;  // spacing
    int n = 0;       // node count, odd
    int mid = 0;     // index of x = 0

    double x(int i) const { return h * static_cast<double>(i - mid); }
    double half_extent() const { return h * static_cast<double>(mid); }

    bool operator==(const Grid& o) const { return h == o.h && n == o.n; }
};

// Agmon action of the single well |x|^s; lives here because the domain
// truncation margin is chosen from it.
inline double agmon_A(double x_abs, double s) {
    const double p = 1.0 + 0.5 * s;
    return std::pow(x_abs, p) / p;
}

/// Builds a grid covering [-X, X] with X >= L/2 + margin, where the margin satisfies
/// exp(-A(margin)) < trunc_tol. X is rounded up to a multiple of h.
inline Grid build_grid(double L, double s, double h, double trunc_tol,
                       long max_points = 2000001) {
    if (L <= 0.0) throw error("L must be positive");
    if (s < 2.0) throw error("s must be at least 2");
    if (h <= 0.0) throw error("h must be positive");
    if (trunc_tol <= 0.0 || trunc_tol >= 1.0) throw error("trunc_tol must lie in (0,1)");

    // invert A(margin) = -log(tol)
    const double p = 1.0 + 0.5 * s;
    const double margin = std::pow(p * std::log(1.0 / trunc_tol), 1.0 / p);
    const double want = 0.5 * L + margin;
    const int mid = static_cast<int>(std::ceil(want / h - 1e-12));
    const long n = 2L * mid + 1L;
    if (n > max_points)
        throw error(format("grid too large: %ld nodes exceeds cap %ld", n, max_points));

    Grid g;
    g.h = h;
    g.n = static_cast<int>(n);
    g.mid = mid;
    return g;
}

/// Real values on grid nodes. Mass and inner products carry the h weight.
struct GridField {
    Grid grid;
    std::vector<double> v;

    GridField() = default;
    explicit GridField(const Grid& g) : grid(g), v(static_cast<size_t>(g.n), 0.0) {}
    GridField(const Grid& g, std::vector<double> vals) : grid(g), v(std::move(vals)) {}

    int size() const { return grid.n; }
    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

inline double inner(const GridField& a, const GridField& b) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return a.grid.h * s;
}

inline double mass(const GridField& u) { return inner(u, u); }

inline double norm(const GridField& u) { return std::sqrt(mass(u)); }

inline double max_abs(const GridField& u) {
    double m = 0.0;
    for (double x : u.v) m = std::max(m, std::fabs(x));
    return m;
}

// Index reversal; an exact involution.
inline GridField reflect(const GridField& u) {
    GridField r(u.grid);
    for (int i = 0; i < u.size(); ++i) r[i] = u[u.size() - 1 - i];
    return r;
}

inline GridField& scale(GridField& u, double c) {
    for (double& x : u.v) x *= c;
    return u;
}

inline GridField& normalize_mass(GridField& u, double target_mass) {
    const double m = mass(u);
    if (m <= 0.0) throw error("cannot normalize a zero field");
    return scale(u, std::sqrt(target_mass / m));
}

inline GridField operator+(const GridField& a, const GridField& b) {
    GridField r(a.grid);
    for (int i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline GridField operator-(const GridField& a, const GridField& b) {
    GridField r(a.grid);
    for (int i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline GridField operator*(double c, const GridField& a) {
    GridField r = a;
    scale(r, c);
    return r;
}

// L2 norm over a half line; the x = 0 node enters with half weight so that the
// even/odd split of a symmetric field is exact.
inline double half_space_norm(const GridField& f, bool positive_side) {
    const int mid = f.grid.mid;
    double s = 0.5 * f[mid] * f[mid];
    if (positive_side) {
        for (int i = mid + 1; i < f.size(); ++i) s += f[i] * f[i];
    } else {
        for (int i = 0; i < mid; ++i) s += f[i] * f[i];
    }
    return std::sqrt(f.grid.h * s);
}

}  // namespace dwell
