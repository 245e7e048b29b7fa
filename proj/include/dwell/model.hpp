#pragma once

#include <cmath>
#include <vector>

#include "dwell/fft.hpp"
#include "dwell/grid.hpp"

namespace dwell {

/// Double-well landscape: wells of shape |x -+ L/2|^s with bottoms at +-L/2.
struct PotentialSpec {
    double s = 2.0;
    double L = 6.0;

    PotentialSpec() = default;
    PotentialSpec(double s_, double L_) : s(s_), L(L_) {
        if (L <= 0.0) throw error("L must be positive");
        if (s < 2.0) throw error("s must be at least 2");
    }
};

/// Repulsive pair interaction: coupling lambda and a tent kernel
/// w(x) = height * max(0, 1 - |x|/radius). The tent is bounded, compactly
/// supported, nonnegative, and has nonnegative Fourier transform.
struct InteractionSpec {
    double lambda = 0.0;
    double radius = 0.5;
    double height = 1.0;

    InteractionSpec() = default;
    InteractionSpec(double lambda_, double radius_, double height_)
        : lambda(lambda_), radius(radius_), height(height_) {
        if (lambda < 0.0) throw error("lambda must be nonnegative");
        if (radius <= 0.0) throw error("kernel radius must be positive");
        if (height <= 0.0) throw error("kernel height must be positive");
    }

    double w(double x) const {
        const double t = 1.0 - std::fabs(x) / radius;
        return t > 0.0 ? height * t : 0.0;
    }
};

enum class PotentialKind { double_well, left, right, single_centered };

// Both well branches evaluate the same powered distance, so the nodewise
// identity V_DW = min(V_left, V_right) is floating-point exact.
inline GridField sample_potential(const Grid& g, const PotentialSpec& spec,
                                  PotentialKind kind) {
    GridField V(g);
    const double c = 0.5 * spec.L;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        switch (kind) {
            case PotentialKind::left:
                V[i] = std::pow(std::fabs(x + c), spec.s);
                break;
            case PotentialKind::right:
                V[i] = std::pow(std::fabs(x - c), spec.s);
                break;
            case PotentialKind::single_centered:
                V[i] = std::pow(std::fabs(x), spec.s);
                break;
            case PotentialKind::double_well:
                V[i] = std::min(std::pow(std::fabs(x + c), spec.s),
                                std::pow(std::fabs(x - c), spec.s));
                break;
        }
    }
    return V;
}

// Kernel samples at offsets k*h for k = -K..K.
inline std::vector<double> kernel_samples(const InteractionSpec& spec, double h) {
    const int K = static_cast<int>(std::ceil(spec.radius / h)) + 1;
    std::vector<double> w(static_cast<size_t>(2 * K + 1), 0.0);
    for (int k = -K; k <= K; ++k)
        w[static_cast<size_t>(k + K)] = spec.w(static_cast<double>(k) * h);
    return w;
}

// Discrete Fourier check of the sampled kernel: the tent has w-hat >= 0, and
// sampling preserves that through aliasing, so any dip below -1e-10 of the
// peak flags a broken kernel shape.
inline void check_kernel_fourier(const InteractionSpec& spec, double h) {
    const std::vector<double> w = kernel_samples(spec, h);
    const int K = (static_cast<int>(w.size()) - 1) / 2;
    const size_t N = next_pow2(w.size() * 2);
    std::vector<std::complex<double>> buf(N, 0.0);
    // center the kernel at index 0 (wrap negative offsets) so the spectrum is real
    for (int k = -K; k <= K; ++k) {
        const size_t idx = static_cast<size_t>((k + static_cast<int>(N)) % static_cast<int>(N));
        buf[idx] = w[static_cast<size_t>(k + K)];
    }
    fft_pow2(buf, false);
    double peak = 0.0;
    for (const auto& z : buf) peak = std::max(peak, z.real());
    for (const auto& z : buf) {
        if (z.real() < -1e-10 * std::max(1.0, peak))
            throw error("kernel fails w-hat >= 0");
    }
}

/// Tent kernel sampled on the grid, centered at x = 0. Runs the Fourier
/// positivity check before returning.
inline GridField kernel_field(const Grid& g, const InteractionSpec& spec) {
    check_kernel_fourier(spec, g.h);
    GridField w(g);
    for (int i = 0; i < g.n; ++i) w[i] = spec.w(g.x(i));
    return w;
}

}  // namespace dwell
