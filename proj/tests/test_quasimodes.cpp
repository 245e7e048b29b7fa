// Cutoffs, quasi-modes, residual support, two-mode states, projection defect.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwell/agmon.hpp"
#include "dwell/hartree.hpp"
#include "dwell/quasimodes.hpp"

using namespace dwell;

namespace {

struct Setup {
    Grid g;
    PotentialSpec pspec;
    InteractionSpec ispec;
    GridField V, mf;
    DiscreteHamiltonian H;
    SpectralSummary sum;
    EigenPair dir_r, dir_l;
    QuasiModeSet qm;
};

Setup make_setup(double L, double lambda, double c, double h = 0.02) {
    Setup s{build_grid(L, 2.0, h, 1e-12), PotentialSpec(2.0, L),
            InteractionSpec(lambda, 0.5, 1.0), GridField(), GridField(),
            DiscreteHamiltonian(), SpectralSummary(), EigenPair(), EigenPair(), QuasiModeSet()};
    s.V = sample_potential(s.g, s.pspec, PotentialKind::double_well);
    const HartreeSolution dw = minimize(s.V, s.ispec, 1.0, {}, {-0.5 * L, 0.5 * L});
    s.sum = spectral_summary(s.V, dw.state, s.pspec, s.ispec, EigenOptions{});
    GridField rho(s.g);
    for (int i = 0; i < s.g.n; ++i) rho[i] = dw.state[i] * dw.state[i];
    s.mf = mean_field_term(rho, s.ispec);
    s.H = assemble_hamiltonian(s.V, s.mf);
    s.dir_r = dirichlet_ground(s.V, s.mf, s.pspec, c, Side::right);
    s.dir_l = dirichlet_ground(s.V, s.mf, s.pspec, c, Side::left);
    auto [cr, cl] = build_cutoffs(s.g, L, c);
    s.qm = build_quasimodes(s.H, s.dir_r, s.dir_l, s.dir_r.value, cr, cl, c);
    return s;
}

}  // namespace

TEST_CASE("cutoff ramp endpoints, midpoint, reflection") {
    const double L = 6.0, c = 0.5;
    Grid g;
    g.h = 0.05;
    g.mid = 100;
    g.n = 201;
    auto [chi_r, chi_l] = build_cutoffs(g, L, c);
    // band [-2, -1.5]; all three anchors are grid nodes at h = 0.05
    const int lo = g.mid - 40, mid = g.mid - 35, hi = g.mid - 30;
    CHECK(chi_r[lo] == 0.0);
    CHECK(chi_r[mid] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(chi_r[hi] == 1.0);
    for (int i = 0; i < g.n; ++i) {
        CHECK(chi_r[i] >= 0.0);
        CHECK(chi_r[i] <= 1.0);
        CHECK(chi_l[i] == chi_r[g.n - 1 - i]);  // exact reflection
    }
    CHECK_THROWS_WITH_AS(build_cutoffs(g, 1.2, 0.5), "cutoff bands overlap wells", error);
}

TEST_CASE("residual is supported in the cutoff band") {
    const Setup s = make_setup(6.0, 0.2, 0.5);
    const double band_lo = -3.0 + 2.0 * 0.5, band_hi = -3.0 + 3.0 * 0.5;
    double outside = 0.0;
    for (int i = 0; i < s.g.n; ++i) {
        const double x = s.g.x(i);
        if (x < band_lo - 1e-12 || x > band_hi + 1e-12)
            outside += s.g.h * s.qm.r_r[i] * s.qm.r_r[i];
    }
    const double total = mass(s.qm.r_r);
    CHECK(outside <= 1e-14 * total);
    CHECK(total > 0.0);
}

TEST_CASE("overlap scalars: signs and magnitudes") {
    const Setup s = make_setup(6.0, 0.0, 0.5);
    CHECK(s.qm.overlap_psi_rl >= -1e-12);
    CHECK(s.qm.overlap_psi_rl >= 0.0);
    CHECK(std::fabs(s.qm.psi_norm_defect) < 1e-2);
    CHECK(s.qm.psi_norm_defect <= 0.0);  // cutoff only removes mass
    CHECK(s.qm.residual_norm > 0.0);
    CHECK(std::fabs(s.qm.overlap_psi_res) < s.qm.residual_norm);
}

TEST_CASE("two-mode states: parity, orthogonality, denominators near sqrt(2)") {
    const Setup s = make_setup(6.0, 0.2, 0.5);
    auto [psi_plus, psi_minus] = two_mode_states(s.qm);
    CHECK(norm(psi_plus - reflect(psi_plus)) <= 1e-8);
    CHECK(norm(psi_minus + reflect(psi_minus)) <= 1e-8);
    CHECK(std::fabs(inner(psi_plus, psi_minus)) <= 1e-12);
    CHECK(mass(psi_plus) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.qm.denom_plus == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
    CHECK(s.qm.denom_minus == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
    // the symmetric two-mode state reproduces u_+ with near unit overlap
    CHECK(std::fabs(inner(psi_plus, s.sum.u_plus)) >= 0.999);
}

TEST_CASE("degenerate denominator guard") {
    const Setup s = make_setup(6.0, 0.0, 0.5);
    GridField ones(s.g);
    for (int i = 0; i < s.g.n; ++i) ones[i] = 1.0;
    // both quasi-modes built from the same Dirichlet state: psi_r == psi_l
    CHECK_THROWS_WITH_AS(build_quasimodes(s.H, s.dir_r, s.dir_r, s.dir_r.value, ones, ones, 0.5),
                         "degenerate denominator", error);
}

TEST_CASE("projection defect: contraction bound and smallness at L = 6") {
    const Setup s = make_setup(6.0, 0.0, 0.5);
    const double defect = projection_defect(s.qm, s.sum);
    CHECK(defect <= norm(s.qm.psi_r));
    CHECK(defect < 1e-2);
}

TEST_CASE("eigenvector distance norms: degenerate input gives zeros") {
    const Setup s = make_setup(5.0, 0.0, 0.5, 0.05);
    SpectralSummary fake = s.sum;
    fake.u_minus = fake.u_plus;
    const EigenvectorDistances d = eigenvector_distance_norms(fake);
    CHECK(d.l1 == 0.0);
    CHECK(d.l2 == 0.0);
    CHECK(d.linf == 0.0);
}

TEST_CASE("eigenvector distance norms: half-space reflection identity") {
    const Setup s = make_setup(6.0, 0.2, 0.5);
    const EigenvectorDistances d = eigenvector_distance_norms(s.sum);
    CHECK(std::fabs(d.half_right_diff - d.half_left_sum) <= 1e-10);
    CHECK(d.l1 > 0.0);
    CHECK(d.linf >= d.l1 * 0.0);  // all norms populated
}

TEST_CASE("dirichlet modes decay at the Agmon rate across a small sweep") {
    // max over the cutoff band of u_r^D e^{(1-eps) d_DW(., bx)} stays within 10x
    const double eps = 0.1, c = 0.5;
    double lo = std::numeric_limits<double>::max(), hi = 0.0;
    for (double L : {4.0, 5.0, 6.0}) {
        const Setup s = make_setup(L, 0.0, c, 0.05);
        const AgmonGeometry geom(2.0, L);
        const double band_lo = -0.5 * L + 2.0 * c, band_hi = -0.5 * L + 3.0 * c;
        double m = 0.0;
        for (int i = 0; i < s.g.n; ++i) {
            const double x = s.g.x(i);
            if (x < band_lo || x > band_hi) continue;
            const double d = agmon_distance(x, 0.5 * L, geom, s.g.h);
            m = std::max(m, std::fabs(s.dir_r.vector[i]) * std::exp((1.0 - eps) * d));
        }
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    CHECK(hi / lo < 10.0);
}

TEST_CASE("two-mode states converge to the true eigenvectors along L") {
    double prev_plus = 1e9, prev_minus = 1e9;
    for (double L : {4.0, 5.0, 6.0}) {
        const Setup s = make_setup(L, 0.0, 0.5, 0.05);
        auto [psi_plus, psi_minus] = two_mode_states(s.qm);
        const double dp = norm(psi_plus - s.sum.u_plus);
        GridField pm = psi_minus;
        if (inner(pm, s.sum.u_minus) < 0.0) scale(pm, -1.0);
        const double dm = norm(pm - s.sum.u_minus);
        CHECK(dp < prev_plus);
        CHECK(dm < prev_minus);
        prev_plus = dp;
        prev_minus = dm;
    }
    CHECK(prev_plus < 1e-2);
    CHECK(prev_minus < 1e-2);
}
