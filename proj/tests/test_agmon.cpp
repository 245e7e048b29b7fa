// Agmon action, tunneling parameter, two-point distance, decay envelopes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dwell/agmon.hpp"
#include "dwell/operators.hpp"
#include "dwell/spectrum.hpp"

using namespace dwell;

TEST_CASE("single-well action: closed-form values") {
    CHECK(agmon_A(0.0, 2.0) == 0.0);
    CHECK(agmon_A(2.0, 2.0) == doctest::Approx(2.0).epsilon(1e-14));        // s=2: x^2/2
    CHECK(agmon_A(1.0, 4.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));  // s=4: x^3/3
    // strictly increasing
    double prev = -1.0;
    for (double x = 0.0; x <= 3.0; x += 0.1) {
        CHECK(agmon_A(x, 2.0) > prev);
        prev = agmon_A(x, 2.0);
    }
}

TEST_CASE("tunneling parameter values and monotonicity") {
    const AgmonGeometry g4(2.0, 4.0);
    const AgmonGeometry g6(2.0, 6.0);
    CHECK(tunneling_T(g4) == doctest::Approx(1.8315638888734179e-2).epsilon(1e-10));
    CHECK(tunneling_T(g6) == doctest::Approx(1.2340980408667956e-4).epsilon(1e-10));
    CHECK(tunneling_T(g6) < tunneling_T(g4));
    // ln T = -2 A(L/2) up to rounding
    CHECK(std::log(tunneling_T(g4)) == doctest::Approx(-4.0).epsilon(1e-13));
}

TEST_CASE("double-well profile: seam continuity, zeros at the bottoms, evenness") {
    const Grid g = build_grid(4.0, 2.0, 0.1, 1e-12);
    const AgmonGeometry geom(2.0, 4.0);
    const GridField prof = agmon_profile(g, geom);
    CHECK(prof[g.mid] == doctest::Approx(geom.A(2.0)).epsilon(1e-14));
    CHECK(prof[g.mid + 20] == 0.0);  // x = 2 is a node
    const GridField R = reflect(prof);
    for (int i = 0; i < g.n; ++i) CHECK(prof[i] == R[i]);
}

TEST_CASE("two-point distance: exactness in one dimension") {
    const AgmonGeometry geom2(2.0, 4.0);
    CHECK(agmon_distance(1.3, 1.3, geom2) == 0.0);
    CHECK(agmon_distance(0.0, 2.0, geom2) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(agmon_distance(-2.0, 2.0, geom2) == doctest::Approx(4.0).epsilon(1e-6));

    const AgmonGeometry geom4(4.0, 6.0);
    CHECK(agmon_distance(0.0, 3.0, geom4) ==
          doctest::Approx(agmon_A(3.0, 4.0)).epsilon(1e-6));
}

TEST_CASE("triangle inequality on 100 random triples") {
    const AgmonGeometry geom(2.0, 5.0);
    std::mt19937 rng(31415);
    std::uniform_real_distribution<double> uni(-6.0, 6.0);
    for (int t = 0; t < 100; ++t) {
        const double x = uni(rng), y = uni(rng), z = uni(rng);
        const double dxy = agmon_distance(x, y, geom);
        const double dxz = agmon_distance(x, z, geom);
        const double dzy = agmon_distance(z, y, geom);
        CHECK(dxy <= dxz + dzy + 1e-9);
    }
}

TEST_CASE("distance gradient is bounded by sqrt(V_DW) plus a Lipschitz step") {
    const AgmonGeometry geom(2.0, 4.0);
    const Grid g = build_grid(4.0, 2.0, 0.05, 1e-10);
    const double bx = 2.0;
    // Lipschitz constant of sqrt(V_DW) = min|x -+ L/2| on the grid extent: 1 for s=2
    const double lip = 1.0;
    for (int i = 0; i + 1 < g.n; i += 7) {
        const double x = g.x(i);
        const double d1 = agmon_distance(x, bx, geom);
        const double d2 = agmon_distance(x + g.h, bx, geom);
        const double v = std::min(std::fabs(x - 2.0), std::fabs(x + 2.0));
        CHECK(std::fabs(d2 - d1) / g.h <= v + lip * g.h + 1e-12);
    }
}

TEST_CASE("half-space and barrier lower bounds hold nodewise with equality") {
    const double L = 4.0, c = 0.5;
    const AgmonGeometry geom(2.0, L);
    const Grid g = build_grid(L, 2.0, 0.05, 1e-10);
    const double bx = 0.5 * L;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        const double d = agmon_distance(x, bx, geom, g.h);
        if (x >= 0.0) {
            CHECK(d >= geom.A(std::fabs(x - bx)) - 1e-9);
            CHECK(d <= geom.A(std::fabs(x - bx)) + 1e-9);  // equality in 1-D
        } else if (x >= -0.5 * L + c && x <= 0.0) {
            const double bound = 2.0 * geom.A(0.5 * L) - geom.A(std::fabs(0.5 * L + x));
            CHECK(d >= bound - 1e-9);
        }
    }
}

TEST_CASE("upper envelope of the harmonic ground state attains its max at the region edge") {
    Grid g;
    g.h = 0.02;
    g.mid = 400;
    g.n = 801;
    const GridField V = sample_potential(g, PotentialSpec(2.0, 1.0), PotentialKind::single_centered);
    const auto pair = lowest_eigenpairs(assemble_hamiltonian(V, GridField(g)), 1, EigenOptions{})[0];

    const AgmonGeometry geom(2.0, 0.0);  // both bottoms at the origin
    const double eps = 0.1, R = 1.0;
    const EnvelopeReport rep = check_upper_envelope(pair.vector, geom, eps, R);
    CHECK(rep.fitted_C_upper > 0.0);
    CHECK(rep.region_nodes > 0);
    // u ~ e^{-x^2/2} against e^{-0.9 x^2/2}: the ratio decreases in |x|, so the
    // fitted constant is attained at the first node of the region
    double at_edge = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (std::fabs(x) < R) continue;
        const double v = std::fabs(pair.vector[i]) * std::exp((1.0 - eps) * geom.A(x));
        if (std::fabs(std::fabs(x) - R) < 1.5 * g.h) at_edge = std::max(at_edge, v);
    }
    CHECK(rep.fitted_C_upper == doctest::Approx(at_edge).epsilon(1e-6));
    // no node violates the envelope with the fitted constant, by construction
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (std::fabs(x) < R) continue;
        CHECK(std::fabs(pair.vector[i]) <=
              rep.fitted_C_upper * std::exp(-(1.0 - eps) * geom.A(x)) * (1.0 + 1e-12));
    }
}

TEST_CASE("lower envelope of the harmonic ground state has a positive constant") {
    Grid g;
    g.h = 0.02;
    g.mid = 400;
    g.n = 801;
    const GridField V = sample_potential(g, PotentialSpec(2.0, 1.0), PotentialKind::single_centered);
    const auto pair = lowest_eigenpairs(assemble_hamiltonian(V, GridField(g)), 1, EigenOptions{})[0];
    GridField u = pair.vector;
    phase_fix_positive(u);

    const AgmonGeometry geom(2.0, 0.0);
    const EnvelopeReport rep = check_lower_envelope(u, geom, pair.value, 0.1, 1.0);
    CHECK(rep.fitted_c_lower > 0.0);
    CHECK(rep.alpha == doctest::Approx(0.25 - pair.value / 4.0).epsilon(1e-10));
}

TEST_CASE("envelope preconditions") {
    Grid g;
    g.h = 0.1;
    g.mid = 30;
    g.n = 61;
    GridField u(g);
    for (int i = 0; i < g.n; ++i) u[i] = std::exp(-0.5 * g.x(i) * g.x(i));
    const AgmonGeometry geom(2.0, 0.0);
    CHECK_THROWS_AS(check_upper_envelope(u, geom, 0.0, 1.0), error);
    CHECK_THROWS_AS(check_upper_envelope(u, geom, 0.6, 1.0), error);
    CHECK_THROWS_WITH_AS(check_upper_envelope(u, geom, 0.1, 50.0), "region empty", error);
    CHECK_THROWS_WITH_AS(check_lower_envelope(u, geom, 1.0, 0.1, 50.0), "region empty", error);
}

TEST_CASE("lower-envelope exponent switches at s = 2") {
    CHECK(lower_envelope_alpha(2.0, 1.0) == doctest::Approx(0.25 - 0.25).epsilon(1e-14));
    CHECK(lower_envelope_alpha(4.0, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
}
