#pragma once

#include <cmath>
#include <utility>

#include "dwell/spectrum.hpp"

namespace dwell {

/// Smooth cutoff pair: chi_r ramps 0 -> 1 over the band
/// [-L/2 + 2c, -L/2 + 3c] with the quintic smoothstep t^3(10 - 15t + 6t^2);
/// chi_l is its exact reflection.
inline std::pair<GridField, GridField> build_cutoffs(const Grid& g, double L, double c) {
    if (c <= 0.0) throw error("cut distance must be positive");
    if (3.0 * c >= L) throw error("cutoff bands overlap wells");
    const double lo = -0.5 * L + 2.0 * c;
    GridField chi_r(g);
    for (int i = 0; i < g.n; ++i) {
        const double t = (g.x(i) - lo) / c;
        if (t <= 0.0)
            chi_r[i] = 0.0;
        else if (t >= 1.0)
            chi_r[i] = 1.0;
        else
            chi_r[i] = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    }
    GridField chi_l = reflect(chi_r);
    return {std::move(chi_r), std::move(chi_l)};
}

/// Helffer-Sjostrand quasi-mode set: psi = chi * u^(D), residuals
/// r = (h_DW - mu^(D)) psi, the two-mode states psi_+- and all the tracked
/// overlap scalars.
struct QuasiModeSet {
    double c = 0.0;
    GridField chi_r, chi_l;
    GridField psi_r, psi_l;
    double mu_D = 0.0;
    GridField r_r, r_l;

    double overlap_psi_rl = 0.0;     // <psi_r, psi_l>
    double overlap_psi_res = 0.0;    // <psi_r, r_r>
    double psi_norm_defect = 0.0;    // ||psi_r||^2 - 1
    double residual_norm = 0.0;      // ||r_r||

    GridField psi_plus, psi_minus;
    double denom_plus = 0.0;   // ||psi_r + psi_l||
    double denom_minus = 0.0;  // ||psi_r - psi_l||
};

inline QuasiModeSet build_quasimodes(const DiscreteHamiltonian& H_dw,
                                     const EigenPair& dirichlet_r,
                                     const EigenPair& dirichlet_l, double mu_D,
                                     const GridField& chi_r, const GridField& chi_l,
                                     double c) {
    const Grid& g = H_dw.grid;
    QuasiModeSet qm;
    qm.c = c;
    qm.chi_r = chi_r;
    qm.chi_l = chi_l;
    qm.mu_D = mu_D;

    qm.psi_r = GridField(g);
    qm.psi_l = GridField(g);
    for (int i = 0; i < g.n; ++i) {
        qm.psi_r[i] = chi_r[i] * dirichlet_r.vector[i];
        qm.psi_l[i] = chi_l[i] * dirichlet_l.vector[i];
    }

    qm.r_r = H_dw.apply(qm.psi_r);
    qm.r_l = H_dw.apply(qm.psi_l);
    for (int i = 0; i < g.n; ++i) {
        qm.r_r[i] -= mu_D * qm.psi_r[i];
        qm.r_l[i] -= mu_D * qm.psi_l[i];
    }

    qm.overlap_psi_rl = inner(qm.psi_r, qm.psi_l);
    qm.overlap_psi_res = inner(qm.psi_r, qm.r_r);
    qm.psi_norm_defect = mass(qm.psi_r) - 1.0;
    qm.residual_norm = norm(qm.r_r);

    GridField sum = qm.psi_r + qm.psi_l;
    GridField diff = qm.psi_r - qm.psi_l;
    qm.denom_plus = norm(sum);
    qm.denom_minus = norm(diff);
    if (qm.denom_minus < 1e-6 || qm.denom_plus < 1e-6)
        throw error("degenerate denominator");
    qm.psi_plus = (1.0 / qm.denom_plus) * sum;
    qm.psi_minus = (1.0 / qm.denom_minus) * diff;
    return qm;
}

inline std::pair<GridField, GridField> two_mode_states(const QuasiModeSet& qm) {
    return {qm.psi_plus, qm.psi_minus};
}

/// || psi_r - <u_+,psi_r> u_+ - <u_-,psi_r> u_- ||: distance from psi_r to the
/// span of the two lowest eigenvectors, computed by direct Gram projection.
inline double projection_defect(const QuasiModeSet& qm, const SpectralSummary& sum) {
    const double cp = inner(sum.u_plus, qm.psi_r);
    const double cm = inner(sum.u_minus, qm.psi_r);
    GridField res = qm.psi_r;
    for (int i = 0; i < res.size(); ++i)
        res[i] -= cp * sum.u_plus[i] + cm * sum.u_minus[i];
    return norm(res);
}

/// Discrete distances between the two lowest eigenvectors: L1 of
/// |u_+|^2 - |u_-|^2, L2 and Linf of |u_+| - |u_-|, plus the localized
/// half-space combinations.
struct EigenvectorDistances {
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double half_right_diff = 0.0;  // ||chi_{x>=0} (u_+ - u_-)||
    double half_left_sum = 0.0;    // ||chi_{x<=0} (u_+ + u_-)||
};

inline EigenvectorDistances eigenvector_distance_norms(const SpectralSummary& s) {
    const Grid& g = s.u_plus.grid;
    EigenvectorDistances d;
    double l2sq = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double ap = std::fabs(s.u_plus[i]);
        const double am = std::fabs(s.u_minus[i]);
        d.l1 += g.h * std::fabs(ap * ap - am * am);
        l2sq += g.h * (ap - am) * (ap - am);
        d.linf = std::max(d.linf, std::fabs(ap - am));
    }
    d.l2 = std::sqrt(l2sq);
    d.half_right_diff = half_space_norm(s.u_plus - s.u_minus, true);
    d.half_left_sum = half_space_norm(s.u_plus + s.u_minus, false);
    return d;
}

}  // namespace dwell
