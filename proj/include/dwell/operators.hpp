#pragma once

#include <cmath>
#include <vector>

#include "dwell/eigensolve.hpp"
#include "dwell/fft.hpp"
#include "dwell/grid.hpp"
#include "dwell/model.hpp"

namespace dwell {

/// (-Delta u)_i with the 3-point stencil and zero ghost values at the box
/// boundary. Exact on quadratics in the interior.
inline GridField apply_laplacian(const GridField& u) {
    const double inv_h2 = 1.0 / (u.grid.h * u.grid.h);
    GridField r(u.grid);
    const int n = u.size();
    for (int i = 0; i < n; ++i) {
        const double left = (i > 0) ? u[i - 1] : 0.0;
        const double right = (i < n - 1) ? u[i + 1] : 0.0;
        r[i] = (2.0 * u[i] - left - right) * inv_h2;
    }
    return r;
}

/// Discrete convolution (w * rho)(x_i) = h * sum_j w(x_i - x_j) rho_j summed
/// directly over the kernel support.
inline GridField convolve_density(const GridField& rho, const InteractionSpec& spec) {
    const std::vector<double> w = kernel_samples(spec, rho.grid.h);
    const int K = (static_cast<int>(w.size()) - 1) / 2;
    const int n = rho.size();
    GridField out(rho.grid);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        const int jlo = std::max(0, i - K);
        const int jhi = std::min(n - 1, i + K);
        for (int j = jlo; j <= jhi; ++j) s += w[static_cast<size_t>(i - j + K)] * rho[j];
        out[i] = rho.grid.h * s;
    }
    return out;
}

/// Same convolution through zero-padded FFTs; must agree with the direct path
/// to 1e-10 relative.
inline GridField convolve_density_fft(const GridField& rho, const InteractionSpec& spec) {
    const std::vector<double> w = kernel_samples(spec, rho.grid.h);
    const int K = (static_cast<int>(w.size()) - 1) / 2;
    const int n = rho.size();
    const size_t N = next_pow2(static_cast<size_t>(n + 2 * K + 1));
    std::vector<std::complex<double>> fr(N, 0.0), fw(N, 0.0);
    for (int i = 0; i < n; ++i) fr[static_cast<size_t>(i)] = rho[i];
    for (int k = -K; k <= K; ++k) {
        const size_t idx = static_cast<size_t>((k + static_cast<int>(N)) % static_cast<int>(N));
        fw[idx] = w[static_cast<size_t>(k + K)];
    }
    fft_pow2(fr, false);
    fft_pow2(fw, false);
    for (size_t i = 0; i < N; ++i) fr[i] *= fw[i];
    fft_pow2(fr, true);
    GridField out(rho.grid);
    for (int i = 0; i < n; ++i) out[i] = rho.grid.h * fr[static_cast<size_t>(i)].real();
    return out;
}

/// Mean-field potential lambda * (w * rho); short-circuits to zero at lambda = 0.
inline GridField mean_field_term(const GridField& rho, const InteractionSpec& spec) {
    if (spec.lambda == 0.0) return GridField(rho.grid);
    GridField mf = convolve_density(rho, spec);
    scale(mf, spec.lambda);
    return mf;
}

enum class Side { right, left };

/// Boundary condition of an assembled Hamiltonian: the Dirichlet box at +-X,
/// optionally sharpened to a half-space Dirichlet cut inside the grid.
struct Boundary {
    bool half_space = false;
    int cut_index = 0;  // nodes with x <= x(cut) (right) or x >= x(cut) (left) pinned to 0
    Side keep = Side::right;

    static Boundary box() { return Boundary{}; }
    static Boundary half_space_dirichlet(int cut, Side keep_side) {
        Boundary b;
        b.half_space = true;
        b.cut_index = cut;
        b.keep = keep_side;
        return b;
    }
};

/// Symmetric tridiagonal operator -Delta + V + mf restricted to the active
/// node window [lo, hi]; the field is pinned to zero outside.
struct DiscreteHamiltonian {
    Grid grid;
    std::vector<double> diag;  // 2/h^2 + V + mf on active nodes only
    double off = 0.0;          // -1/h^2
    int lo = 0;
    int hi = 0;

    int active_size() const { return hi - lo + 1; }

    Tridiag matrix() const {
        Tridiag T;
        T.d = diag;
        T.e.assign(static_cast<size_t>(std::max(0, active_size() - 1)), off);
        return T;
    }

    GridField apply(const GridField& u) const {
        GridField r(grid);
        for (int i = lo; i <= hi; ++i) {
            const double left = (i > lo) ? u[i - 1] : 0.0;
            const double right = (i < hi) ? u[i + 1] : 0.0;
            r[i] = diag[static_cast<size_t>(i - lo)] * u[i] + off * (left + right);
        }
        return r;
    }

    // embeds an active-window vector into a unit-mass grid field
    GridField embed(const std::vector<double>& v) const {
        GridField f(grid);
        for (int i = lo; i <= hi; ++i) f[i] = v[static_cast<size_t>(i - lo)];
        normalize_mass(f, 1.0);
        return f;
    }
};

inline DiscreteHamiltonian assemble_hamiltonian(const GridField& V, const GridField& mf,
                                                const Boundary& bc = Boundary::box()) {
    const Grid& g = V.grid;
    DiscreteHamiltonian H;
    H.grid = g;
    H.off = -1.0 / (g.h * g.h);
    H.lo = 0;
    H.hi = g.n - 1;
    if (bc.half_space) {
        if (bc.cut_index < 0 || bc.cut_index >= g.n) throw error("cut outside grid");
        if (bc.keep == Side::right) {
            H.lo = bc.cut_index + 1;
        } else {
            H.hi = bc.cut_index - 1;
        }
        if (H.lo >= H.hi) throw error("cut outside grid");
    }
    const double two_inv_h2 = 2.0 / (g.h * g.h);
    H.diag.resize(static_cast<size_t>(H.active_size()));
    for (int i = H.lo; i <= H.hi; ++i)
        H.diag[static_cast<size_t>(i - H.lo)] = two_inv_h2 + V[i] + mf[i];
    return H;
}

enum class Parity { even, odd, none };

/// Reflection-symmetric Hamiltonian folded onto the half line x >= 0.
/// The fold is an exact similarity transform, so sector eigenvalues are
/// exactly the even/odd eigenvalues of the full operator. The even sector
/// carries a sqrt(2) coupling between the x=0 node and its neighbor.
struct SectorOperator {
    Grid full_grid;
    Parity parity = Parity::even;
    Tridiag mat;

    // reconstructs the full-grid eigenvector (unit mass) from a sector vector
    GridField unfold(const std::vector<double>& v) const {
        GridField f(full_grid);
        const int mid = full_grid.mid;
        if (parity == Parity::even) {
            f[mid] = v[0];
            for (int j = 1; j <= mid; ++j) {
                // undo the sqrt(2) row scaling of the similarity transform
                const double val = v[static_cast<size_t>(j)] / std::sqrt(2.0);
                f[mid + j] = val;
                f[mid - j] = val;
            }
        } else {
            f[mid] = 0.0;
            for (int j = 1; j <= mid; ++j) {
                const double val = v[static_cast<size_t>(j - 1)];
                f[mid + j] = val;
                f[mid - j] = -val;
            }
        }
        normalize_mass(f, 1.0);
        return f;
    }
};

inline void require_symmetric(const GridField& V) {
    const int n = V.size();
    for (int i = 0; i < n; ++i)
        if (std::fabs(V[i] - V[n - 1 - i]) > 1e-12)
            throw error("potential not symmetric");
}

inline SectorOperator parity_restrict(const DiscreteHamiltonian& H, Parity p) {
    if (H.lo != 0 || H.hi != H.grid.n - 1)
        throw error("parity restriction needs the full box operator");
    GridField V(H.grid);
    for (int i = 0; i < H.grid.n; ++i) V[i] = H.diag[static_cast<size_t>(i)];
    require_symmetric(V);

    const int mid = H.grid.mid;
    SectorOperator S;
    S.full_grid = H.grid;
    S.parity = p;
    if (p == Parity::even) {
        // nodes x_0 = 0 .. x_mid = X; coupling 0<->1 becomes sqrt(2)*off
        S.mat.d.resize(static_cast<size_t>(mid + 1));
        S.mat.e.assign(static_cast<size_t>(mid), H.off);
        for (int j = 0; j <= mid; ++j)
            S.mat.d[static_cast<size_t>(j)] = H.diag[static_cast<size_t>(mid + j)];
        if (mid >= 1) S.mat.e[0] = std::sqrt(2.0) * H.off;
    } else {
        // nodes x_1 .. x_mid with a Dirichlet ghost at x = 0
        S.mat.d.resize(static_cast<size_t>(mid));
        S.mat.e.assign(static_cast<size_t>(std::max(0, mid - 1)), H.off);
        for (int j = 1; j <= mid; ++j)
            S.mat.d[static_cast<size_t>(j - 1)] = H.diag[static_cast<size_t>(mid + j)];
    }
    return S;
}

}  // namespace dwell
