#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dwell/hartree.hpp"
#include "dwell/operators.hpp"

namespace dwell {

struct EigenPair {
    double value = 0.0;
    GridField vector;  // unit mass
    Parity parity = Parity::none;
    double residual = 0.0;
};

struct EigenOptions {
    enum class Method { dense, iterative, both };
    Method method = Method::dense;
    double tol = 1e-10;
};

inline EigenOptions::Method parse_eig_method(const std::string& s) {
    if (s == "dense") return EigenOptions::Method::dense;
    if (s == "iterative") return EigenOptions::Method::iterative;
    if (s == "both") return EigenOptions::Method::both;
    throw error(format("type mismatch: eig.method must be dense|iterative|both, got '%s'",
                       s.c_str()));
}

namespace detail {

inline std::vector<double> eigenvalues_by_method(const Tridiag& T, int k,
                                                 EigenOptions::Method method) {
    if (method == EigenOptions::Method::iterative) return bisect_smallest(T, k);
    std::vector<double> all = tql_eigenvalues(T);
    std::vector<double> vals(all.begin(), all.begin() + k);
    if (method == EigenOptions::Method::both) {
        const std::vector<double> bis = bisect_smallest(T, k);
        const double tol = 64.0 * std::numeric_limits<double>::epsilon() * T.gersh_norm();
        for (int j = 0; j < k; ++j)
            if (std::fabs(vals[static_cast<size_t>(j)] - bis[static_cast<size_t>(j)]) > tol)
                throw error(format("dense and shift-invert eigenvalues disagree: %.17g vs %.17g",
                                   vals[static_cast<size_t>(j)], bis[static_cast<size_t>(j)]));
    }
    return vals;
}

}  // namespace detail

/// k lowest eigenpairs, ascending, orthonormal. Vectors come from shift-invert
/// iteration at the converged eigenvalues. On a reflection-symmetric full-box
/// operator each vector is projected onto its parity sector, which removes the
/// cross-contamination that near-degenerate tunneling pairs would otherwise carry.
inline std::vector<EigenPair> lowest_eigenpairs(const DiscreteHamiltonian& H, int k,
                                                const EigenOptions& opts = {}) {
    if (k < 1 || k > H.active_size()) throw error("k exceeds grid size");
    const Tridiag T = H.matrix();
    const std::vector<double> vals = detail::eigenvalues_by_method(T, k, opts.method);

    bool symmetric = H.lo == 0 && H.hi == H.grid.n - 1;
    for (int i = 0; i < H.grid.n && symmetric; ++i)
        if (std::fabs(H.diag[static_cast<size_t>(i)] -
                      H.diag[static_cast<size_t>(H.grid.n - 1 - i)]) > 1e-12)
            symmetric = false;

    std::vector<EigenPair> pairs;
    std::vector<std::vector<double>> raw;
    for (int j = 0; j < k; ++j) {
        std::vector<const std::vector<double>*> prev;
        for (const auto& r : raw) prev.push_back(&r);
        raw.push_back(inverse_iteration(T, vals[static_cast<size_t>(j)], prev));

        EigenPair p;
        p.value = vals[static_cast<size_t>(j)];
        p.vector = H.embed(raw.back());
        if (symmetric) {
            const GridField R = reflect(p.vector);
            GridField even = 0.5 * (p.vector + R);
            GridField odd = 0.5 * (p.vector - R);
            if (mass(even) >= mass(odd)) {
                p.parity = Parity::even;
                p.vector = even;
            } else {
                p.parity = Parity::odd;
                p.vector = odd;
            }
            normalize_mass(p.vector, 1.0);
        }
        GridField r = H.apply(p.vector);
        for (int i = 0; i < H.grid.n; ++i) r[i] -= p.value * p.vector[i];
        p.residual = norm(r);
        pairs.push_back(std::move(p));
    }
    return pairs;
}

/// mu_+, mu_-, mu_ex and their eigenvectors for the frozen mean-field
/// Hamiltonian h_DW = -Delta + V_DW + lambda w*|u_+|^2.
struct SpectralSummary {
    double mu_plus = 0.0, mu_minus = 0.0, mu_ex = 0.0;
    double gap1 = 0.0, gap2 = 0.0;
    GridField u_plus, u_minus, u_ex;
    double tunneling = 0.0;  // T = exp(-2 A(L/2))
    std::string method;      // "parity_split" or "full"
};

/// Computes the summary by the requested route and always cross-checks the
/// parity-split eigenvalues against a full solve on the same grid; for
/// exponentially small gaps this agreement is the credibility gate.
inline SpectralSummary spectral_summary(const GridField& V, const GridField& u_plus_hartree,
                                        const PotentialSpec& pspec, const InteractionSpec& ispec,
                                        const EigenOptions& opts = {},
                                        bool use_parity_split = true) {
    const Grid& g = V.grid;
    const int n = g.n;
    for (int i = 0; i < n; ++i)
        if (std::fabs(V[i] - V[n - 1 - i]) > 1e-12) throw error("parity split unavailable");

    GridField rho(g);
    for (int i = 0; i < n; ++i) rho[i] = u_plus_hartree[i] * u_plus_hartree[i];
    const GridField mf = mean_field_term(rho, ispec);
    const DiscreteHamiltonian H = assemble_hamiltonian(V, mf);

    // even sector carries mu_+ and mu_ex, odd sector carries mu_-
    const SectorOperator even = parity_restrict(H, Parity::even);
    const SectorOperator odd = parity_restrict(H, Parity::odd);
    const std::vector<double> ev = detail::eigenvalues_by_method(even.mat, 2, opts.method);
    const std::vector<double> ov = detail::eigenvalues_by_method(odd.mat, 1, opts.method);
    const double sp_plus = ev[0], sp_minus = ov[0], sp_ex = ev[1];

    const std::vector<EigenPair> full = lowest_eigenpairs(H, 3, opts);

    const double gap1_split = sp_minus - sp_plus;
    const double agree_tol = std::max(1e-9, 1e-6 * gap1_split);
    const double split_sorted[3] = {sp_plus, sp_minus, sp_ex};
    for (int j = 0; j < 3; ++j)
        if (std::fabs(full[static_cast<size_t>(j)].value - split_sorted[j]) > agree_tol)
            throw error(format("parity-split and full eigenvalues disagree: %.17g vs %.17g",
                               split_sorted[j], full[static_cast<size_t>(j)].value));

    SpectralSummary s;
    s.method = use_parity_split ? "parity_split" : "full";
    if (use_parity_split) {
        s.mu_plus = sp_plus;
        s.mu_minus = sp_minus;
        s.mu_ex = sp_ex;
        const std::vector<double> v_plus = inverse_iteration(even.mat, ev[0]);
        s.u_plus = even.unfold(v_plus);
        const std::vector<const std::vector<double>*> prev{&v_plus};
        s.u_ex = even.unfold(inverse_iteration(even.mat, ev[1], prev));
        s.u_minus = odd.unfold(inverse_iteration(odd.mat, ov[0]));
    } else {
        s.mu_plus = full[0].value;
        s.mu_minus = full[1].value;
        s.mu_ex = full[2].value;
        s.u_plus = full[0].vector;
        s.u_minus = full[1].vector;
        s.u_ex = full[2].vector;
    }

    if (!(s.mu_plus < s.mu_minus && s.mu_minus <= s.mu_ex))
        throw error("spectral ordering violated");
    s.gap1 = s.mu_minus - s.mu_plus;
    s.gap2 = s.mu_ex - s.mu_minus;

    phase_fix_positive(s.u_plus);
    // sign convention for the odd state: positive mass on x > 0
    double right_sum = 0.0;
    for (int i = g.mid + 1; i < n; ++i) right_sum += s.u_minus[i];
    if (right_sum < 0.0) scale(s.u_minus, -1.0);

    s.tunneling = std::exp(-2.0 * agmon_A(0.5 * pspec.L, pspec.s));
    return s;
}

/// Ground state of h_DW restricted by a zero condition on one side of the cut
/// plane at distance c from the far well bottom: x <= -L/2 + c for side=right,
/// mirrored for side=left. The returned vector lives on the full grid,
/// extended by zero.
inline EigenPair dirichlet_ground(const GridField& V, const GridField& mf,
                                  const PotentialSpec& pspec, double cut_c, Side side,
                                  const EigenOptions& opts = {}) {
    const Grid& g = V.grid;
    if (cut_c <= 0.0) throw error("cut distance must be positive");
    const double cut_x = -0.5 * pspec.L + cut_c;
    if (cut_x <= -g.half_extent() || cut_x >= g.half_extent()) throw error("cut outside grid");

    int cut_index;
    if (side == Side::right) {
        cut_index = 0;
        for (int i = 0; i < g.n; ++i)
            if (g.x(i) <= cut_x) cut_index = i;
    } else {
        cut_index = g.n - 1;
        for (int i = g.n - 1; i >= 0; --i)
            if (g.x(i) >= -cut_x) cut_index = i;
    }
    const DiscreteHamiltonian H =
        assemble_hamiltonian(V, mf, Boundary::half_space_dirichlet(cut_index, side));
    const Tridiag T = H.matrix();
    const double mu = detail::eigenvalues_by_method(T, 1, opts.method)[0];

    EigenPair p;
    p.value = mu;
    p.vector = H.embed(inverse_iteration(T, mu));
    phase_fix_positive(p.vector);
    GridField r = H.apply(p.vector);
    for (int i = 0; i < g.n; ++i) r[i] -= mu * p.vector[i];
    p.residual = norm(r);
    return p;
}

struct QuotientGap {
    double value = 0.0;
    int excluded_nodes = 0;
};

/// First gap through the ground-state representation: the expectation of
/// |grad(u_-/u_+)|^2 against |u_+|^2. Independent of eigenvalue subtraction.
/// Nodes where u_+ drops below the floor are excluded (with a count).
inline QuotientGap gap_via_quotient(const GridField& u_plus, const GridField& u_minus,
                                    double quotient_floor = 1e-280) {
    const Grid& g = u_plus.grid;
    const int n = g.n;
    std::vector<char> ok(static_cast<size_t>(n), 0);
    QuotientGap out;
    std::vector<double> f(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        if (std::fabs(u_plus[i]) >= quotient_floor) {
            ok[static_cast<size_t>(i)] = 1;
            f[static_cast<size_t>(i)] = u_minus[i] / u_plus[i];
        } else {
            ++out.excluded_nodes;
        }
    }
    double s = 0.0;
    const double inv_h = 1.0 / g.h;
    for (int i = 0; i + 1 < n; ++i) {
        if (!ok[static_cast<size_t>(i)] || !ok[static_cast<size_t>(i + 1)]) continue;
        const double df = (f[static_cast<size_t>(i + 1)] - f[static_cast<size_t>(i)]) * inv_h;
        const double w = 0.5 * (u_plus[i] * u_plus[i] + u_plus[i + 1] * u_plus[i + 1]);
        s += df * df * w;
    }
    out.value = g.h * s;
    return out;
}

}  // namespace dwell
