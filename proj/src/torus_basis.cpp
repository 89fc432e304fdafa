#include "sns/torus_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace sns {

double torus_mode_normalization() { return 1.0 / (std::numbers::sqrt2 * std::numbers::pi); }

std::array<double, 2> BasisMode::direction() const
{
    const double len = std::sqrt(static_cast<double>(k.norm2()));
    return {-k.k2 / len, k.k1 / len};
}

std::array<double, 2> BasisMode::velocity(double x, double y) const
{
    const double phase = k.k1 * x + k.k2 * y;
    const double amp = normalization * (parity == Parity::Cos ? std::cos(phase) : std::sin(phase));
    const auto d = direction();
    return {amp * d[0], amp * d[1]};
}

std::array<double, 4> BasisMode::gradient(double x, double y) const
{
    const double phase = k.k1 * x + k.k2 * y;
    const double dtrig = parity == Parity::Cos ? -std::sin(phase) : std::cos(phase);
    const double amp = normalization * dtrig;
    const auto d = direction();
    return {amp * d[0] * k.k1, amp * d[0] * k.k2, amp * d[1] * k.k1, amp * d[1] * k.k2};
}

std::vector<BasisMode> assemble_torus_basis(std::size_t n)
{
    if (n == 0) throw std::invalid_argument("torus basis: n must be positive");

    // Two real modes per half-lattice vector, about pi * r2 modes inside |k|^2 <= r2.
    int r2 = static_cast<int>(n / 3) + 2;
    std::vector<BasisMode> modes;
    for (;;) {
        modes.clear();
        const int r = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(r2))));
        for (int k1 = 0; k1 <= r; ++k1) {
            for (int k2 = -r; k2 <= r; ++k2) {
                if (k1 == 0 && k2 <= 0) continue;
                const Wavevector k{k1, k2};
                if (k.norm2() > r2) continue;
                modes.push_back({k, Parity::Cos, torus_mode_normalization()});
                modes.push_back({k, Parity::Sin, torus_mode_normalization()});
            }
        }
        if (modes.size() >= n) break;
        r2 *= 2;
    }

    std::sort(modes.begin(), modes.end(), [](const BasisMode& a, const BasisMode& b) {
        return std::tuple(a.k.norm2(), a.k.k1, a.k.k2, a.parity == Parity::Sin) <
               std::tuple(b.k.norm2(), b.k.k1, b.k.k2, b.parity == Parity::Sin);
    });
    modes.resize(n);
    return modes;
}

Spectrum spectrum_of(const std::vector<BasisMode>& modes)
{
    std::vector<double> values;
    values.reserve(modes.size());
    for (const auto& m : modes) values.push_back(m.eigenvalue());
    return Spectrum::from_values(Backend::Torus, std::move(values));
}

double triad_quadrature(const BasisMode& ei, const BasisMode& ej, const BasisMode& el, int grid)
{
    if (grid < 4) throw std::invalid_argument("quadrature grid must have at least 4 points per side");
    const double h = 2.0 * std::numbers::pi / grid;
    double acc = 0.0;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
            const double x = a * h, y = b * h;
            const auto u = ei.velocity(x, y);
            const auto g = ej.gradient(x, y);
            const auto w = el.velocity(x, y);
            acc += (u[0] * g[0] + u[1] * g[1]) * w[0] + (u[0] * g[2] + u[1] * g[3]) * w[1];
        }
    return acc * h * h;
}

}  // namespace sns
