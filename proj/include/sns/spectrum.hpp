#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sns {

enum class Backend { Torus, Synthetic };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

/// Ordered eigenvalues of the Stokes operator on the first n eigenmodes.
///
/// The torus backend lists |k|^2 over the divergence-free real Fourier modes
/// (see torus_basis.hpp); the synthetic backend uses lambda_k = c * k.
class Spectrum {
  public:
    Spectrum() = default;

    static Spectrum synthetic(std::size_t n, double slope);
    static Spectrum torus(std::size_t n);
    /// Wraps externally computed eigenvalues; checks positivity and ordering.
    static Spectrum from_values(Backend backend, std::vector<double> values, double slope = 0.0);

    std::size_t size() const { return values_.size(); }
    Backend backend() const { return backend_; }
    double slope() const { return slope_; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::span<const double> values() const { return values_; }

    /// First `m` eigenvalues as a spectrum of the same backend.
    Spectrum truncated(std::size_t m) const;

    std::string descriptor() const;

  private:
    Backend backend_ = Backend::Synthetic;
    double slope_ = 0.0;
    std::vector<double> values_;
};

Spectrum build_spectrum(Backend backend, std::size_t n, double slope = 1.0);

/// Coefficients of a velocity field against the orthonormal eigenbasis.
using SpectralField = std::vector<double>;

SpectralField unit_field(std::size_t n, std::size_t index);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> x);

/// coeff_k <- lambda_k^alpha x_k
SpectralField fractional_apply(std::span<const double> x, const Spectrum& s, double alpha);
/// ||A^alpha x||
double fractional_norm(std::span<const double> x, const Spectrum& s, double alpha);
/// coeff_k <- exp(-t lambda_k) x_k; throws for t < 0.
SpectralField semigroup_apply(std::span<const double> x, const Spectrum& s, double t);

struct InequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};

/// Relative slack absorbed by every inequality check.
inline constexpr double kInequalitySlack = 1e-12;

/// ||A^alpha e^{-tA}|| restricted to the truncation against (alpha/e)^alpha t^-alpha.
InequalityCheck smoothing_bound_check(const Spectrum& s, double alpha, double t);

/// ||A^r x|| <= ||A^p x||^mix ||A^q x||^(1-mix), r = mix p + (1-mix) q.
InequalityCheck interpolation_check(std::span<const double> x, const Spectrum& s, double p, double q,
                                    double mix);

/// Partial sum of lambda_k^{-2 alpha}.
double hilbert_schmidt_tail(const Spectrum& s, double alpha);

}  // namespace sns
