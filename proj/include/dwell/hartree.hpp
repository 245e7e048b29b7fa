#pragma once

#include <cmath>
#include <vector>

#include "dwell/operators.hpp"

namespace dwell {

/// Kinetic quadratic form h * sum over edges of |forward difference|^2,
/// including the two boundary edges against the Dirichlet box. By discrete
/// integration by parts this equals <u, -Delta_h u> exactly.
inline double kinetic_energy(const GridField& u) {
    const int n = u.size();
    const double inv_h = 1.0 / u.grid.h;
    double s = u[0] * u[0];  // edge from the left ghost
    for (int i = 0; i + 1 < n; ++i) {
        const double d = u[i + 1] - u[i];
        s += d * d;
    }
    s += u[n - 1] * u[n - 1];  // edge to the right ghost
    return s * inv_h;
}

/// Double interaction integral iint w(x-y) |u(x)|^2 |u(y)|^2 (lambda-free).
inline double interaction_integral(const GridField& u, const InteractionSpec& spec) {
    GridField rho(u.grid);
    for (int i = 0; i < u.size(); ++i) rho[i] = u[i] * u[i];
    const GridField conv = convolve_density(rho, spec);
    return inner(conv, rho);
}

/// Hartree energy E[u] = int |grad u|^2 + int V |u|^2 + (lambda/2) iint w rho rho.
inline double energy(const GridField& u, const GridField& pot, const InteractionSpec& spec) {
    double E = kinetic_energy(u);
    for (int i = 0; i < u.size(); ++i) E += u.grid.h * pot[i] * u[i] * u[i];
    if (spec.lambda != 0.0) E += 0.5 * spec.lambda * interaction_integral(u, spec);
    return E;
}

/// Rayleigh quotient of u under its own mean-field Hamiltonian h[|u|^2].
inline double chemical_potential(const GridField& u, const GridField& pot,
                                 const InteractionSpec& spec) {
    GridField rho(u.grid);
    for (int i = 0; i < u.size(); ++i) rho[i] = u[i] * u[i];
    const GridField mf = mean_field_term(rho, spec);
    const DiscreteHamiltonian H = assemble_hamiltonian(pot, mf);
    return inner(u, H.apply(u)) / mass(u);
}

struct ScfOptions {
    double damping = 0.5;
    double tol = 1e-10;
    int max_iter = 500;
};

struct HartreeSolution {
    GridField state;
    double energy = 0.0;
    double chemical_potential = 0.0;
    int iterations = 0;
    double final_residual = 0.0;
};

namespace detail {

// ground state of -Delta + V + mf; exploits the even fold when the diagonal
// is reflection symmetric (the Hartree minimizer is positive, hence even)
inline std::pair<double, GridField> linear_ground(const GridField& pot, const GridField& mf) {
    const DiscreteHamiltonian H = assemble_hamiltonian(pot, mf);
    bool symmetric = true;
    const int n = pot.size();
    for (int i = 0; i < n && symmetric; ++i)
        if (std::fabs((pot[i] + mf[i]) - (pot[n - 1 - i] + mf[n - 1 - i])) > 1e-12)
            symmetric = false;
    if (symmetric) {
        const SectorOperator even = parity_restrict(H, Parity::even);
        const double mu = bisect_smallest(even.mat, 1)[0];
        const GridField phi = even.unfold(inverse_iteration(even.mat, mu));
        return {mu, phi};
    }
    const Tridiag T = H.matrix();
    const double mu = bisect_smallest(T, 1)[0];
    return {mu, H.embed(inverse_iteration(T, mu))};
}

inline GridField gaussian_density(const Grid& g, const std::vector<double>& centers,
                                  double total_mass) {
    GridField rho(g);
    for (int i = 0; i < g.n; ++i) {
        double s = 0.0;
        for (double c : centers) {
            const double dx = g.x(i) - c;
            s += std::exp(-dx * dx);
        }
        rho[i] = s;
    }
    double m = 0.0;
    for (int i = 0; i < g.n; ++i) m += g.h * rho[i];
    scale(rho, total_mass / m);
    return rho;
}

}  // namespace detail

// Applies the positivity phase fix: global sign flip so the mean is positive.
// Idempotent; the flow below guarantees nodewise values >= -1e-10.
inline void phase_fix_positive(GridField& u) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) s += u[i];
    if (s < 0.0) scale(u, -1.0);
}

/// Damped self-consistent minimization of the Hartree functional at the
/// prescribed mass. Each step solves the linear ground state of h[rho_k] and
/// mixes densities: rho_{k+1} = (1-alpha) rho_k + alpha * mass * |phi_k|^2.
/// Converged when the Euler-Lagrange residual || h[|u|^2] u - mu u || <= tol.
inline HartreeSolution minimize(const GridField& pot, const InteractionSpec& spec,
                                double prescribed_mass, const ScfOptions& opts = {},
                                const std::vector<double>& init_centers = {}) {
    if (prescribed_mass <= 0.0) throw error("mass must be positive");
    if (opts.damping <= 0.0 || opts.damping > 1.0) throw error("damping must lie in (0,1]");
    const Grid& g = pot.grid;

    HartreeSolution sol;

    if (spec.lambda == 0.0) {
        auto [mu, phi] = detail::linear_ground(pot, GridField(g));
        normalize_mass(phi, prescribed_mass);
        phase_fix_positive(phi);
        sol.state = phi;
        sol.energy = energy(phi, pot, spec);
        sol.chemical_potential = chemical_potential(phi, pot, spec);
        sol.iterations = 1;
        GridField r = assemble_hamiltonian(pot, GridField(g)).apply(phi);
        for (int i = 0; i < g.n; ++i) r[i] -= mu * phi[i];
        sol.final_residual = norm(r);
        return sol;
    }

    // initial density: unit-width Gaussian bumps at the requested centers
    std::vector<double> centers = init_centers;
    if (centers.empty()) centers.push_back(0.0);
    GridField rho = detail::gaussian_density(g, centers, prescribed_mass);

    double prev_energy = std::numeric_limits<double>::max();
    for (int it = 1; it <= opts.max_iter; ++it) {
        for (int i = 0; i < g.n; ++i)
            if (rho[i] < -1e-12) throw error("negative density");

        const GridField mf = mean_field_term(rho, spec);
        auto [mu_lin, phi] = detail::linear_ground(pot, mf);
        (void)mu_lin;
        GridField u = phi;
        normalize_mass(u, prescribed_mass);
        phase_fix_positive(u);

        // Euler-Lagrange residual of the current state under its own field
        GridField rho_u(g);
        for (int i = 0; i < g.n; ++i) rho_u[i] = u[i] * u[i];
        const DiscreteHamiltonian Hu = assemble_hamiltonian(pot, mean_field_term(rho_u, spec));
        const GridField Huu = Hu.apply(u);
        const double mu = inner(u, Huu) / prescribed_mass;
        GridField res = Huu;
        for (int i = 0; i < g.n; ++i) res[i] -= mu * u[i];
        const double residual = norm(res);

        const double E = energy(u, pot, spec);
        if (E > prev_energy + 1e-12 * std::max(1.0, std::fabs(prev_energy)))
            throw error(format("scf energy increased at iteration %d: %.3e -> %.3e", it,
                               prev_energy, E));
        prev_energy = E;

        if (residual <= opts.tol) {
            sol.state = u;
            sol.energy = E;
            sol.chemical_potential = mu;
            sol.iterations = it;
            sol.final_residual = residual;
            return sol;
        }

        for (int i = 0; i < g.n; ++i)
            rho[i] = (1.0 - opts.damping) * rho[i] + opts.damping * rho_u[i];
        sol.final_residual = residual;
        sol.iterations = it;
    }
    throw error(format("scf did not converge after %d iterations, last residual %.3e",
                       opts.max_iter, sol.final_residual));
}

/// Left and right single-well minimizers at mass 1/2, solved independently.
/// On a symmetric grid they are reflections of each other to 1e-10.
inline std::pair<HartreeSolution, HartreeSolution> solve_single_wells(
    const Grid& g, const PotentialSpec& pspec, const InteractionSpec& ispec,
    const ScfOptions& opts = {}) {
    const GridField Vl = sample_potential(g, pspec, PotentialKind::left);
    const GridField Vr = sample_potential(g, pspec, PotentialKind::right);
    HartreeSolution left = minimize(Vl, ispec, 0.5, opts, {-0.5 * pspec.L});
    HartreeSolution right = minimize(Vr, ispec, 0.5, opts, {+0.5 * pspec.L});
    return {std::move(left), std::move(right)};
}

}  // namespace dwell
