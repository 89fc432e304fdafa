#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sns/noise.hpp"
#include "sns/solver.hpp"
#include "sns/spectrum.hpp"
#include "sns/triads.hpp"

namespace sns {

enum class ObservableKind { ModeCoordinate, SquaredMode, FractionalNorm, BoundedTanh, Constant };

struct Observable {
    ObservableKind kind = ObservableKind::ModeCoordinate;
    std::size_t mode = 0;  // zero-based coefficient index
    double gamma = 0.0;    // FractionalNorm
    double scale = 1.0;    // BoundedTanh: tanh(u_mode / scale); Constant: the value

    static Observable coordinate(std::size_t k);
    static Observable squared(std::size_t k);
    static Observable fractional_norm(double gamma);
    static Observable bounded(std::size_t k, double scale);
    static Observable constant(double value);

    double operator()(std::span<const double> u, const Spectrum& s) const;
    /// d phi / d u_mode for the coordinate-type observables.
    double derivative(double coordinate) const;
    bool is_bounded() const;
    /// sup |phi| for bounded observables, infinity otherwise.
    double sup_norm() const;
    std::string descriptor() const;
};

/// Finite-dimensional stochastic model: truncated Galerkin system driven by colored noise.
struct Model {
    const Spectrum& s;
    const TriadTable& t;
    const Coloring& c;
    Cutoff cutoff{std::numeric_limits<double>::infinity()};
    double dt = 1e-3;
};

struct MCConfig {
    std::size_t M = 1000;
    double t = 1.0;
    double burn_in = 0.0;
    std::size_t thinning = 1;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t M = 0;
};

/// Mean and standard error with a fixed-order pairwise summation.
Estimate summarize(std::span<const double> samples);
double pairwise_sum(std::span<const double> v);

/// Independent stream for a labelled sub-experiment.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Endpoint u(t) of the truncated chain from x; noise read at (addr, step m + 1).
SpectralField simulate_u(std::span<const double> x, double t, const Model& model, NoiseAddress addr);
/// M endpoints, trajectory i on address (seed, i); parallel over trajectories, deterministic output.
std::vector<SpectralField> simulate_endpoints(std::span<const double> x, double t, const Model& model,
                                              std::uint64_t seed, std::size_t M);

Estimate semigroup_estimate(const Observable& phi, std::span<const double> x, const Model& model, const MCConfig& mc);

/// Per-trajectory average of phi(u(t_m)) over grid times t_m in [burn_in, t], every `thinning` steps;
/// mean and standard error across the M trajectories.
Estimate time_average(const Observable& phi, std::span<const double> x, const Model& model, const MCConfig& mc);

enum class Coupling { Common, Independent };

struct TvReport {
    double value = 0.0;
    std::vector<double> per_observable;
};

/// Freedman-Diaconis bin edges over pooled samples.
std::vector<double> freedman_diaconis_edges(std::vector<double> pooled);
std::vector<std::size_t> histogram(std::span<const double> samples, std::span<const double> edges);
/// Half L1 distance between the normalized histograms of a and b on common edges.
double histogram_tv(std::span<const double> a, std::span<const double> b);

/// Max over observables of the histogram TV between endpoint samples from x and y at time t.
/// Common coupling drives both with the same noise; independent uses separate streams.
TvReport tv_distance_proxy(std::span<const double> x, std::span<const double> y, double t,
                           const std::vector<Observable>& observables, const Model& model, const MCConfig& mc,
                           Coupling coupling = Coupling::Common);

struct DerivativeFlow {
    PathSample u;
    PathSample U;
};

/// Derivative flow U(t) = D_x u(t) h along the truncated chain driven by noise `addr`.
DerivativeFlow derivative_flow(std::span<const double> x, std::span<const double> h, double T, const Model& model,
                               NoiseAddress addr);

struct GronwallFlowCheck {
    double lhs = 0.0;            // int_0^t ||A^{1/2} U||^2
    double rhs = 0.0;            // 2 ||h||^2 [1 + int K^4(s) exp(int_0^s K^4) ds]
    double rhs_displayed = 0.0;  // 2 ||h||^2 [1 + int K^4(s) exp(K^4(s)) ds]
    bool ok = false;
};

/// K(s) = 2 c0 max(1, sup|Theta'|) (a^3 + a), a = ||A^{1/4} u(s)||.
GronwallFlowCheck gronwall_flow_check(const DerivativeFlow& flow, std::span<const double> h, const Spectrum& s,
                                      double c0);

struct NoiseInverseCheck {
    double max_ratio = 0.0;
    double max_ratio_half = 0.0;
    bool ok = false;
};

/// max over random x of (sum x_k^2 / g_k^2) / (sum lambda_k x_k^2), plus the single modes, at n and n/2.
NoiseInverseCheck noise_inverse_bound_check(const Coloring& c, const Spectrum& s, std::size_t samples, CounterRng& rng);

/// Discrete Bismut-Elworthy estimator for d/dx E phi(u(t)) h on the truncated chain:
///   (1/N) E[phi(u_N) sum_m sum_k U_k(t_{m+1}) xi_{k,m+1} / sigma_k],
/// sigma_k the OU increment standard deviation and N = t / dt.
Estimate bismut_gradient(const Observable& phi, std::span<const double> x, std::span<const double> h,
                         const Model& model, const MCConfig& mc);

/// (phi(X^{x + delta h}) - phi(X^x)) / delta under common noise, averaged over M trajectories.
Estimate finite_difference_gradient(const Observable& phi, std::span<const double> x, std::span<const double> h,
                                    const Model& model, const MCConfig& mc, double delta);

struct LipschitzPair {
    double distance = 0.0;
    double ratio = 0.0;
    double stderr_ = 0.0;
};

struct LipschitzProbe {
    double max_ratio = 0.0;
    std::vector<LipschitzPair> pairs;  // skipped pairs (x == y) are omitted
};

/// |P_t phi(x) - P_t phi(y)| / ||x - y|| under common noise, per pair.
LipschitzProbe sf_lipschitz_probe(const Observable& phi,
                                  const std::vector<std::pair<SpectralField, SpectralField>>& pairs,
                                  const Model& model, const MCConfig& mc);

struct IrreducibilityReport {
    std::size_t hits = 0;
    std::size_t M = 0;
    double frequency = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
std::pair<double, double> clopper_pearson(std::size_t hits, std::size_t M, double confidence = 0.95);

/// Fraction of trajectories with ||A^{1/4}(u(T) - y)|| < delta, for u driven by z = zbar + Z with
/// Z the OU process of model.c (scale it down for the near-deterministic regime).
IrreducibilityReport irreducibility_probe(std::span<const double> x, std::span<const double> y, const PathSample& zbar,
                                          double T, double delta, const Model& model, const MCConfig& mc);

/// E f(N(mean, sd^2)) by adaptive Gauss-Kronrod over mean +- 12 sd.
double gaussian_expectation(const std::function<double(double)>& f, double mean, double sd);

}  // namespace sns
