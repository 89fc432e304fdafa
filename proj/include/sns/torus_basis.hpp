#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sns/spectrum.hpp"

namespace sns {

struct Wavevector {
    int k1 = 0;
    int k2 = 0;

    int norm2() const { return k1 * k1 + k2 * k2; }
    friend bool operator==(const Wavevector&, const Wavevector&) = default;
};

enum class Parity { Cos, Sin };

/// Real divergence-free Fourier mode on the torus [0, 2pi)^2:
///   e(x) = normalization * k_perp / |k| * trig(k . x),  k_perp = (-k2, k1).
/// Wavevectors live on the half lattice k1 > 0, or k1 == 0 and k2 > 0.
struct BasisMode {
    Wavevector k;
    Parity parity = Parity::Cos;
    double normalization = 0.0;

    double eigenvalue() const { return static_cast<double>(k.norm2()); }
    /// Unit direction k_perp / |k|.
    std::array<double, 2> direction() const;
    /// Velocity at a physical point.
    std::array<double, 2> velocity(double x, double y) const;
    /// Jacobian d u_i / d x_j at a physical point, row-major.
    std::array<double, 4> gradient(double x, double y) const;
};

/// 1 / (sqrt(2) pi): unit L2 norm of a single trig mode over the torus.
double torus_mode_normalization();

/// First n modes ordered by |k|^2, then lexicographically by (k1, k2), then cos before sin.
std::vector<BasisMode> assemble_torus_basis(std::size_t n);

Spectrum spectrum_of(const std::vector<BasisMode>& modes);

/// Trapezoid rule for int (e_i . grad e_j) . e_l over a grid x grid periodic mesh; exact while every
/// wavenumber involved stays below grid / 2.
double triad_quadrature(const BasisMode& ei, const BasisMode& ej, const BasisMode& el, int grid);

}  // namespace sns
