#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sns/spectrum.hpp"

namespace sns {

enum class ColoringKind { PowerLaw, SigmaSequence, Raw };

/// Diagonal coloring G e_k = g_k e_k.
///
/// PowerLaw: g_k = scale * lambda_k^-gamma. SigmaSequence: g_k = scale / sigma_k with sigma_k inside
/// [a k^(1/4+eps), b k^(1/2)]. Raw: arbitrary positive amplitudes (negative controls such as the
/// cylindrical g_k == 1).
struct Coloring {
    ColoringKind kind = ColoringKind::PowerLaw;
    std::vector<double> g;
    double gamma = 0.5;
    double epsilon = 0.25;
    double scale = 1.0;
    double band_a = 0.0;
    double band_b = 0.0;

    std::size_t size() const { return g.size(); }
    double operator[](std::size_t k) const { return g[k]; }
    /// Same shape, amplitudes multiplied by `factor`.
    Coloring scaled(double factor) const;
    /// First m amplitudes.
    Coloring truncated(std::size_t m) const;
    std::string descriptor() const;
};

struct ColoringSpec {
    ColoringKind kind = ColoringKind::PowerLaw;
    double gamma = 0.5;
    /// Negative means "largest admissible": gamma - 1/4 for power laws.
    double epsilon = -1.0;
    double scale = 1.0;
    std::vector<double> sigma;  // SigmaSequence
    double band_a = 0.0;
    double band_b = 0.0;
    std::vector<double> raw;  // Raw; a single value is broadcast
};

/// Throws std::invalid_argument for gamma outside (1/4, 1/2], eps outside (0, 1/4], eps larger than
/// gamma - 1/4, nonpositive amplitudes, or a sigma sequence leaving its band.
Coloring make_coloring(const ColoringSpec& spec, const Spectrum& s);

Coloring power_law_coloring(const Spectrum& s, double gamma, double epsilon = -1.0, double scale = 1.0);
/// g_k == value on every mode: the cylindrical (white) case excluded by the range condition.
Coloring constant_coloring(std::size_t n, double value = 1.0, double epsilon = 0.25);

struct RangeCondition {
    double upper = 0.0;       // max_k lambda_k^(1/4+eps) g_k over all n modes
    double lower = 0.0;       // max_k lambda_k^(-1/2) / g_k
    double upper_half = 0.0;  // same maxima over the first n/2 modes
    double lower_half = 0.0;
    bool ok = false;
};

/// Both maxima finite and grown by less than 5% from n/2 to n.
RangeCondition validate_range_condition(const Coloring& c, const Spectrum& s, double epsilon);

/// Time-stamped trajectory of spectral fields.
struct PathSample {
    std::vector<double> times;
    std::vector<SpectralField> fields;
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;

    std::size_t size() const { return times.size(); }
    std::size_t dim() const { return fields.empty() ? 0 : fields.front().size(); }
    const SpectralField& back() const { return fields.back(); }
    /// Throws unless times start at 0, strictly increase, and every field has the same length.
    void validate() const;
};

/// Precomputed per-mode exact OU transition over one step.
class OuPropagator {
  public:
    OuPropagator(const Coloring& c, const Spectrum& s, double dt);

    double dt() const { return dt_; }
    std::size_t size() const { return decay_.size(); }
    std::span<const double> decay() const { return decay_; }
    /// g_k sqrt((1 - e^{-2 lambda_k dt}) / (2 lambda_k)): standard deviation of one increment.
    std::span<const double> amplitude() const { return amplitude_; }

    /// z_k <- e^{-lambda_k dt} z_k + amplitude_k xi_k
    void advance(std::span<double> z, std::span<const double> xi) const;

  private:
    double dt_;
    std::vector<double> decay_;
    std::vector<double> amplitude_;
};

/// Stream of standard normals for one trajectory; transition m reads step address m + 1.
struct NoiseAddress {
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;
};

/// One exact OU step with normals drawn at `step`.
SpectralField ou_step(std::span<const double> state, double dt, const Coloring& c, const Spectrum& s,
                      NoiseAddress addr, std::uint32_t step);

/// Number of steps dt fits into T; throws unless T/dt is an integer to 1e-9 relative.
std::size_t step_count(double T, double dt);

/// OU path from Z_0 = 0 on the grid k dt, every `record_every`-th point stored.
PathSample ou_sample_path(double T, double dt, const Coloring& c, const Spectrum& s, NoiseAddress addr,
                          std::size_t record_every = 1);

/// E||A^gamma (Z(t+h) - Z(t))||^2 in closed form.
double increment_moment_oracle(const Coloring& c, const Spectrum& s, double gamma, double t, double h);

struct HolderFit {
    double beta = 0.0;
    double r2 = 0.0;
    std::vector<double> lags;
    std::vector<double> moments;
};

/// Dyadic lags (in grid steps) used by default: 1, 2, 4, ... up to a sixteenth of the path.
std::vector<std::size_t> dyadic_lags(std::size_t points);

/// Half the log-log slope of the time-averaged ||A^gamma (z(t+h) - z(t))||^2 against h.
/// Throws for paths under 100 points or with vanishing increments.
HolderFit holder_exponent_estimate(const PathSample& path, const Spectrum& s, double gamma,
                                   std::span<const std::size_t> lags = {});

/// Same regression on the exact expectation of the estimator's averaged moments, for a path from 0
/// with `points` grid points spaced dt.
HolderFit holder_exponent_oracle(const Coloring& c, const Spectrum& s, double gamma, double dt,
                                 std::size_t points, std::span<const std::size_t> lags = {});

struct HsIntegralCheck {
    double value_n = 0.0;
    double value_half = 0.0;
    double growth = 0.0;
    bool saturating = false;
};

/// int_0^1 t^{-2 alpha} sum_k g_k^2 e^{-2 t lambda_k} dt at n and n/2 modes; throws for alpha >= 1/2.
HsIntegralCheck hs_integral_check(const Coloring& c, const Spectrum& s, double alpha);

std::string to_string(ColoringKind k);
ColoringKind coloring_kind_from_string(const std::string& s);

}  // namespace sns
