#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sns/noise.hpp"
#include "sns/spectrum.hpp"
#include "sns/triads.hpp"

namespace sns {

enum class Integrator { ExponentialEuler, Etd2 };

std::string to_string(Integrator i);
Integrator integrator_from_string(const std::string& s);

struct SolverConfig {
    double dt = 1e-3;
    double T = 1.0;
    Integrator integrator = Integrator::ExponentialEuler;
    std::vector<double> gamma_monitor{0.25};
    double p = 4.0;
    double epsilon = 0.25;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    std::size_t steps() const;
};

/// Nonfinite or runaway state during time stepping.
class BlowUpError : public std::runtime_error {
  public:
    BlowUpError(std::size_t step, double time, double norm);
    std::size_t step() const { return step_; }
    double time() const { return time_; }
    double norm() const { return norm_; }

  private:
    std::size_t step_;
    double time_;
    double norm_;
};

/// States above this H-norm count as blown up.
inline constexpr double kBlowUpNorm = 1e8;

/// Quintic smoothstep cutoff: 1 on [0, R], 0 on [R+1, inf), C^1 in between.
struct Cutoff {
    double R = 5.0;

    double operator()(double r) const;
    double derivative(double r) const;
    /// sup |Theta'| = 15/8, attained at r = R + 1/2.
    static constexpr double max_derivative() { return 15.0 / 8.0; }
};

double cutoff_eval(const Cutoff& c, double r);
double cutoff_derivative(const Cutoff& c, double r);

/// phi-functions of the exponential integrators, per mode.
struct ExpCoefficients {
    std::vector<double> decay;  // e^{-lambda dt}
    std::vector<double> phi1;   // (1 - e^{-lambda dt}) / lambda
    std::vector<double> phi2;   // (e^{-lambda dt} - 1 + lambda dt) / (lambda^2 dt)

    ExpCoefficients() = default;
    ExpCoefficients(const Spectrum& s, double dt);
};

/// Steps the Galerkin system v' + A v + B(v + z) = 0 with exact linear part.
class VStepper {
  public:
    VStepper(const Spectrum& s, const TriadTable& t, double dt, Integrator integrator);

    /// Advances v in place; z_next is used only by ETD2.
    void step(std::span<double> v, std::span<const double> z_now, std::span<const double> z_next);
    /// v <- e^{-A dt} v - phi1 F for a precomputed forcing F (F = B(...)).
    void step_forced(std::span<double> v, std::span<const double> forcing) const;

    const ExpCoefficients& coefficients() const { return coef_; }
    double dt() const { return dt_; }

  private:
    const Spectrum& s_;
    const TriadTable& t_;
    double dt_;
    Integrator integrator_;
    ExpCoefficients coef_;
    std::vector<double> work_, nonlin_, nonlin2_, stage_;
};

/// One step of the Galerkin system from v with noise value z (z_next defaults to z).
SpectralField step_v(std::span<const double> v, std::span<const double> z, double dt, const Spectrum& s,
                     const TriadTable& t, Integrator integrator = Integrator::ExponentialEuler,
                     std::span<const double> z_next = {});

/// Path restricted to the grid k dt on [0, T]; throws unless the path grid refines it.
PathSample subsample(const PathSample& path, double dt, double T);
/// First m coefficients of every field.
PathSample truncate_path(const PathSample& path, std::size_t m);
/// Zero path on the grid k dt.
PathSample zero_path(std::size_t n, double dt, double T);

struct Trajectory {
    PathSample v;
    PathSample u;  // v + z
};

/// Integrates from v(0) = x with z read off `z_path` on the cfg grid. Throws BlowUpError.
Trajectory integrate(std::span<const double> x, const PathSample& z_path, const SolverConfig& cfg,
                     const Spectrum& s, const TriadTable& t);

/// H-norm of v(t_m) + int_0^{t_m} e^{-(t_m - r)A} B(u(r)) dr - e^{-t_m A} x for every grid time,
/// with B(u) interpolated linearly between grid points and integrated exactly against the semigroup.
std::vector<double> mild_residual_trace(const Trajectory& traj, std::span<const double> x, const Spectrum& s,
                                        const TriadTable& t);
double mild_residual(const Trajectory& traj, std::span<const double> x, const Spectrum& s, const TriadTable& t,
                     std::size_t grid_index);

/// int_0^T ||A^{1/4} v||^p dt by the trapezoidal rule on the trajectory grid.
double apriori_lp_monitor(const PathSample& v, const Spectrum& s, double p);
/// max_t ||A^gamma v(t)||.
double apriori_sup_monitor(const PathSample& v, const Spectrum& s, double gamma);

/// Energy check for z == 0 runs: every step satisfies
///   ||v_{m+1}||^2 - ||v_m||^2 <= 10 dt^2 max_m ||A v_m + B(v_m)||^2.
struct EnergyCheck {
    double max_increase = 0.0;
    double slack = 0.0;
    bool ok = false;
};
EnergyCheck energy_check(const PathSample& v, const Spectrum& s, const TriadTable& t, double dt);

struct LevelSetup {
    Spectrum s;
    TriadTable t;
};

/// d_i = max_t ||A^gamma (v_{n_{i+1}}(t) - v_{n_i}(t))|| with the coarse level zero-padded.
/// x and z_path are given at the finest level and truncated per level.
std::vector<double> galerkin_convergence_probe(std::span<const double> x, const PathSample& z_path,
                                               const std::vector<LevelSetup>& levels, const SolverConfig& cfg,
                                               double gamma);

/// max over grid times in [t0, T] of ||A^gamma u(t)||.
double regularization_probe(std::span<const double> x, const PathSample& z_path, const SolverConfig& cfg,
                            const Spectrum& s, const TriadTable& t, double t0, double gamma);

/// Exponential-Euler step of the truncated system
///   u <- e^{-A dt} u - phi1 Theta(||A^{1/4} u||^2) B(u) + amplitude * xi,
/// the noise increment being the exact OU increment over dt.
class TruncatedStepper {
  public:
    TruncatedStepper(const Spectrum& s, const TriadTable& t, const Coloring& c, double dt, Cutoff cutoff);

    void step(std::span<double> u, std::span<const double> xi);
    /// Drift linearization along the step from u: U <- e^{-A dt} U - phi1 DG(u) U, where
    /// G(u) = Theta(||A^{1/4} u||^2) B(u). Call before stepping u.
    void linearized_step(std::span<const double> u, std::span<double> U);
    /// Advances the tangent U along the step from u, then u itself, sharing B(u).
    void step_with_tangent(std::span<double> u, std::span<double> U, std::span<const double> xi);
    /// ||A^{1/4} u||^2
    double quarter_norm2(std::span<const double> u) const;

    const OuPropagator& propagator() const { return prop_; }
    const ExpCoefficients& coefficients() const { return coef_; }
    const Cutoff& cutoff() const { return cutoff_; }
    double dt() const { return dt_; }

  private:
    const Spectrum& s_;
    const TriadTable& t_;
    double dt_;
    Cutoff cutoff_;
    ExpCoefficients coef_;
    OuPropagator prop_;
    std::vector<double> sqrt_lambda_, nonlin_, lin_;
};

SpectralField step_truncated(std::span<const double> u, double dt, const Cutoff& cutoff, const Coloring& c,
                             const Spectrum& s, const TriadTable& t, std::span<const double> xi);

struct ControlPath {
    PathSample ubar;
    PathSample vbar;
    PathSample zbar;
};

/// Steering control: ubar is heat flow from x on [0, t0], a linear bridge on [t0, t1] and
/// e^{-(T-t)A} y on [t1, T]; vbar solves vbar' + A vbar = -B(ubar), vbar(0) = x, by exponential
/// Euler on the grid dt_syn; zbar = ubar - vbar.
ControlPath synthesize_control(std::span<const double> x, std::span<const double> y, double T, double t0, double t1,
                               double gamma, const Spectrum& s, const TriadTable& t, double dt_syn);

/// ||A^{1/4}(u(T) - y)|| after integrating with z = zbar on the cfg grid.
double verify_control(const PathSample& zbar, std::span<const double> x, std::span<const double> y,
                      const SolverConfig& cfg, const Spectrum& s, const TriadTable& t);

/// Discrete comparison for u(t) <= a t^-alpha + b int_0^t (t-s)^-beta u(s) ds on a grid starting at 0.
///
/// The convolution is discretized by product integration with left values; w solves the discrete
/// equality with w_0 = u_0, and M = max_{m >= 1} w_m t_m^alpha / a.
struct GronwallReport {
    bool hypothesis_holds = false;
    bool conclusion_holds = false;
    double M = 0.0;
    double max_hypothesis_excess = 0.0;
    double max_conclusion_ratio = 0.0;  // max_m u_m t_m^alpha / (a M)
};

/// Throws unless alpha, beta in [0, 1), a, b >= 0 and the grid starts at 0 and increases.
GronwallReport modified_gronwall_check(std::span<const double> times, std::span<const double> u, double a, double b,
                                       double alpha, double beta);
/// Smallest a making the discrete hypothesis hold for the given u, b, alpha, beta.
double gronwall_minimal_a(std::span<const double> times, std::span<const double> u, double b, double alpha,
                          double beta);

/// Heuristic step bound 0.5 / (c0 max|Theta'| sup ||A^{1/4} u||^2).
double step_size_guard(double c0, double sup_quarter_norm2);

}  // namespace sns
