#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dwell/core.hpp"

namespace dwell {

/// Symmetric tridiagonal matrix: diagonal d (n) and off-diagonal e (n-1).
struct Tridiag {
    std::vector<double> d;
    std::vector<double> e;

    int size() const { return static_cast<int>(d.size()); }

    // Gershgorin bounds on the spectrum.
    void bounds(double& lo, double& hi) const {
        lo = std::numeric_limits<double>::max();
        hi = std::numeric_limits<double>::lowest();
        const int n = size();
        for (int i = 0; i < n; ++i) {
            double r = 0.0;
            if (i > 0) r += std::fabs(e[static_cast<size_t>(i - 1)]);
            if (i < n - 1) r += std::fabs(e[static_cast<size_t>(i)]);
            lo = std::min(lo, d[static_cast<size_t>(i)] - r);
            hi = std::max(hi, d[static_cast<size_t>(i)] + r);
        }
    }

    double gersh_norm() const {
        double lo, hi;
        bounds(lo, hi);
        return std::max(std::fabs(lo), std::fabs(hi));
    }
};

// ---------------------------------------------------------------------------
// Route 1: implicit QL with Wilkinson shifts. All eigenvalues, ascending.
// Classic tql1; O(n^2), backward stable. Reference path for every solve.
// ---------------------------------------------------------------------------
inline std::vector<double> tql_eigenvalues(const Tridiag& T) {
    std::vector<double> d = T.d;
    std::vector<double> e = T.e;
    const int n = static_cast<int>(d.size());
    if (n == 0) return d;
    e.push_back(0.0);
    const double eps = std::numeric_limits<double>::epsilon();

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[static_cast<size_t>(m)]) +
                                  std::fabs(d[static_cast<size_t>(m + 1)]);
                if (std::fabs(e[static_cast<size_t>(m)]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 100) throw error("tridiagonal QL failed to converge");
                double g = (d[static_cast<size_t>(l + 1)] - d[static_cast<size_t>(l)]) /
                           (2.0 * e[static_cast<size_t>(l)]);
                double r = std::hypot(g, 1.0);
                g = d[static_cast<size_t>(m)] - d[static_cast<size_t>(l)] +
                    e[static_cast<size_t>(l)] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[static_cast<size_t>(i)];
                    double b = c * e[static_cast<size_t>(i)];
                    r = std::hypot(f, g);
                    e[static_cast<size_t>(i + 1)] = r;
                    if (r == 0.0) {
                        d[static_cast<size_t>(i + 1)] -= p;
                        e[static_cast<size_t>(m)] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[static_cast<size_t>(i + 1)] - p;
                    r = (d[static_cast<size_t>(i)] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[static_cast<size_t>(i + 1)] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l) continue;
                d[static_cast<size_t>(l)] -= p;
                e[static_cast<size_t>(l)] = g;
                e[static_cast<size_t>(m)] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
    return d;
}

// ---------------------------------------------------------------------------
// Route 2: Sturm-count bisection. Independent of the QL path; used as the
// fast solve inside SCF loops and as the cross-check partner.
// ---------------------------------------------------------------------------

// Number of eigenvalues of T strictly below x, via the signs of the LDL^T pivots.
inline int sturm_count(const Tridiag& T, double x) {
    const size_t n = T.d.size();
    double e2max = 0.0;
    for (double v : T.e) e2max = std::max(e2max, v * v);
    const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, e2max);

    int cnt = 0;
    double q = T.d[0] - x;
    if (std::fabs(q) < pivmin) q = -pivmin;
    if (q <= 0.0) ++cnt;
    for (size_t i = 1; i < n; ++i) {
        q = T.d[i] - x - T.e[i - 1] * T.e[i - 1] / q;
        if (std::fabs(q) < pivmin) q = -pivmin;
        if (q <= 0.0) ++cnt;
    }
    return cnt;
}

/// k smallest eigenvalues by bisection, ascending, to machine precision.
inline std::vector<double> bisect_smallest(const Tridiag& T, int k) {
    const int n = T.size();
    if (k < 1) throw error("eigenvalue count must be positive");
    if (k > n) throw error("k exceeds grid size");
    double lo, hi;
    T.bounds(lo, hi);
    const double eps = std::numeric_limits<double>::epsilon();
    const double span = hi - lo;
    lo -= 1e-3 * span + 1.0;
    hi += 1e-3 * span + 1.0;

    std::vector<double> vals(static_cast<size_t>(k));
    double a_floor = lo;
    for (int j = 0; j < k; ++j) {
        double a = a_floor;
        double b = hi;
        // invariant: count(a) <= j < count(b)
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            if (b - a <= 4.0 * eps * std::max({std::fabs(a), std::fabs(b), 1e-3}))
                break;
            if (sturm_count(T, mid) >= j + 1)
                b = mid;
            else
                a = mid;
        }
        vals[static_cast<size_t>(j)] = 0.5 * (a + b);
        a_floor = a;  // next eigenvalue cannot lie below this bracket
    }
    return vals;
}

// ---------------------------------------------------------------------------
// Eigenvectors by shift-invert iteration: LU factorization of (T - sigma I)
// with partial pivoting (fill-in limited to a second superdiagonal).
// ---------------------------------------------------------------------------
struct TriShiftLU {
    std::vector<double> dl;   // multipliers
    std::vector<double> dd;   // U diagonal
    std::vector<double> du;   // first superdiagonal of U
    std::vector<double> du2;  // second superdiagonal of U
    std::vector<char> piv;    // 1 if rows i, i+1 were swapped

    TriShiftLU(const Tridiag& T, double sigma) {
        const int n = T.size();
        dd.resize(static_cast<size_t>(n));
        dl.assign(static_cast<size_t>(std::max(0, n - 1)), 0.0);
        du.assign(static_cast<size_t>(std::max(0, n - 1)), 0.0);
        du2.assign(static_cast<size_t>(std::max(0, n - 2)), 0.0);
        piv.assign(static_cast<size_t>(std::max(0, n - 1)), 0);
        for (int i = 0; i < n; ++i) dd[static_cast<size_t>(i)] = T.d[static_cast<size_t>(i)] - sigma;
        for (int i = 0; i + 1 < n; ++i) {
            dl[static_cast<size_t>(i)] = T.e[static_cast<size_t>(i)];
            du[static_cast<size_t>(i)] = T.e[static_cast<size_t>(i)];
        }
        const double tiny =
            std::numeric_limits<double>::epsilon() * std::max(1.0, T.gersh_norm());
        for (int i = 0; i + 1 < n; ++i) {
            const size_t si = static_cast<size_t>(i);
            if (std::fabs(dd[si]) >= std::fabs(dl[si])) {
                if (dd[si] == 0.0) dd[si] = tiny;  // nearly exact eigenvalue shift
                const double fact = dl[si] / dd[si];
                dl[si] = fact;
                dd[si + 1] -= fact * du[si];
            } else {
                const double fact = dd[si] / dl[si];
                dd[si] = dl[si];
                dl[si] = fact;
                const double temp = du[si];
                du[si] = dd[si + 1];
                dd[si + 1] = temp - fact * dd[si + 1];
                if (i + 2 < n) {
                    du2[si] = du[si + 1];
                    du[si + 1] = -fact * du[si + 1];
                }
                piv[si] = 1;
            }
        }
        if (n > 0 && dd[static_cast<size_t>(n - 1)] == 0.0)
            dd[static_cast<size_t>(n - 1)] = tiny;
    }

    void solve(std::vector<double>& b) const {
        const int n = static_cast<int>(dd.size());
        for (int i = 0; i + 1 < n; ++i) {
            const size_t si = static_cast<size_t>(i);
            if (!piv[si]) {
                b[si + 1] -= dl[si] * b[si];
            } else {
                const double temp = b[si];
                b[si] = b[si + 1];
                b[si + 1] = temp - dl[si] * b[si];
            }
        }
        b[static_cast<size_t>(n - 1)] /= dd[static_cast<size_t>(n - 1)];
        if (n > 1) {
            b[static_cast<size_t>(n - 2)] =
                (b[static_cast<size_t>(n - 2)] -
                 du[static_cast<size_t>(n - 2)] * b[static_cast<size_t>(n - 1)]) /
                dd[static_cast<size_t>(n - 2)];
        }
        for (int i = n - 3; i >= 0; --i) {
            const size_t si = static_cast<size_t>(i);
            b[si] = (b[si] - du[si] * b[si + 1] - du2[si] * b[si + 2]) / dd[si];
        }
    }
};

// Euclidean (unweighted) helpers on raw vectors.
inline double vec_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Eigenvector for the (already converged) eigenvalue sigma. Orthogonalizes
/// against `prev` each pass, which keeps clustered pairs clean.
inline std::vector<double> inverse_iteration(
    const Tridiag& T, double sigma,
    const std::vector<const std::vector<double>*>& prev = {}) {
    const int n = T.size();
    const TriShiftLU lu(T, sigma);
    // deterministic quasi-random start; avoids accidental orthogonality to the target
    std::vector<double> v(static_cast<size_t>(n));
    unsigned long long state = 0x9e3779b97f4a7c15ULL;
    for (auto& x : v) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        x = 0.5 + static_cast<double>(state >> 11) / 9007199254740992.0;
    }

    auto orthogonalize = [&](std::vector<double>& w) {
        for (const auto* p : prev) {
            const double c = vec_dot(w, *p);
            for (size_t i = 0; i < w.size(); ++i) w[i] -= c * (*p)[i];
        }
    };

    orthogonalize(v);
    double nv = vec_norm(v);
    for (double& x : v) x /= nv;

    for (int pass = 0; pass < 6; ++pass) {
        std::vector<double> y = v;
        lu.solve(y);
        orthogonalize(y);
        const double g = vec_norm(y);
        if (g == 0.0) throw error("inverse iteration broke down");
        for (double& x : y) x /= g;
        double delta = 0.0;  // distance to previous iterate modulo sign
        const double align = vec_dot(y, v) >= 0.0 ? 1.0 : -1.0;
        for (size_t i = 0; i < y.size(); ++i)
            delta = std::max(delta, std::fabs(y[i] - align * v[i]));
        v = y;
        // growth factor g ~ 1/|residual|; stop once the iterate is stationary
        if (pass >= 1 && delta < 1e-12) break;
    }
    // fix the overall sign deterministically: largest-magnitude entry positive
    int imax = 0;
    for (int i = 1; i < n; ++i)
        if (std::fabs(v[static_cast<size_t>(i)]) > std::fabs(v[static_cast<size_t>(imax)])) imax = i;
    if (v[static_cast<size_t>(imax)] < 0.0)
        for (double& x : v) x = -x;
    return v;
}

inline void tridiag_apply(const Tridiag& T, const std::vector<double>& x,
                          std::vector<double>& out) {
    const int n = T.size();
    out.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = T.d[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
        if (i > 0) s += T.e[static_cast<size_t>(i - 1)] * x[static_cast<size_t>(i - 1)];
        if (i < n - 1) s += T.e[static_cast<size_t>(i)] * x[static_cast<size_t>(i + 1)];
        out[static_cast<size_t>(i)] = s;
    }
}

}  // namespace dwell
