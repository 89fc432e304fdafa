#include "sns/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sns {

namespace {

void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

void check_state(std::span<const double> v, std::size_t step, double time)
{
    double acc = 0.0;
    for (double x : v) acc += x * x;
    const double nrm = std::sqrt(acc);
    if (!std::isfinite(nrm) || nrm > kBlowUpNorm) throw BlowUpError(step, time, nrm);
}

double phi2_of(double lambda, double dt)
{
    const double x = lambda * dt;
    if (x < 1e-2) return dt * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0 + x * x * x * x / 720.0);
    return (std::exp(-x) - 1.0 + x) / (lambda * lambda * dt);
}

std::string format_blowup(std::size_t step, double time, double norm)
{
    std::ostringstream os;
    os << "numerical blow-up at step " << step << " (t = " << time << "), |state| = " << norm;
    return os.str();
}

}  // namespace

std::string to_string(Integrator i)
{
    return i == Integrator::ExponentialEuler ? "exponential-euler" : "etd2";
}

Integrator integrator_from_string(const std::string& s)
{
    if (s == "exponential-euler") return Integrator::ExponentialEuler;
    if (s == "etd2") return Integrator::Etd2;
    throw std::invalid_argument("unknown integrator '" + s + "'");
}

void SolverConfig::validate() const
{
    require(std::isfinite(dt) && dt > 0.0, "dt: must be positive");
    require(std::isfinite(T) && T >= dt, "T: must be at least dt");
    try {
        step_count(T, dt);
    } catch (const std::invalid_argument&) {
        require(false, "T: must be an integer multiple of dt");
    }
    require(epsilon > 0.0 && epsilon <= 0.25, "epsilon: must lie in (0, 1/4]");
    const double p_max = 4.0 / (1.0 - 2.0 * epsilon);
    require(p >= 4.0 && p < p_max, "p: must lie in [4, 4/(1-2 epsilon))");
    for (double g : gamma_monitor)
        require(g >= 0.0 && g < 0.25 + epsilon, "gamma_monitor: entries must lie in [0, 1/4 + epsilon)");
}

std::size_t SolverConfig::steps() const { return step_count(T, dt); }

BlowUpError::BlowUpError(std::size_t step, double time, double norm)
    : std::runtime_error(format_blowup(step, time, norm)), step_(step), time_(time), norm_(norm)
{
}

double Cutoff::operator()(double r) const
{
    const double s = r - R;
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    return 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double Cutoff::derivative(double r) const
{
    const double s = r - R;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return -30.0 * s * s * (s - 1.0) * (s - 1.0);
}

double cutoff_eval(const Cutoff& c, double r) { return c(r); }
double cutoff_derivative(const Cutoff& c, double r) { return c.derivative(r); }

ExpCoefficients::ExpCoefficients(const Spectrum& s, double dt)
    : decay(s.size()), phi1(s.size()), phi2(s.size())
{
    require(dt > 0.0, "dt: must be positive");
    for (std::size_t k = 0; k < s.size(); ++k) {
        decay[k] = std::exp(-s[k] * dt);
        phi1[k] = -std::expm1(-s[k] * dt) / s[k];
        phi2[k] = phi2_of(s[k], dt);
    }
}

VStepper::VStepper(const Spectrum& s, const TriadTable& t, double dt, Integrator integrator)
    : s_(s), t_(t), dt_(dt), integrator_(integrator), coef_(s, dt), work_(s.size()), nonlin_(s.size()),
      nonlin2_(s.size()), stage_(s.size())
{
    require(t.size() == s.size(), "triad table and spectrum sizes differ");
}

void VStepper::step_forced(std::span<double> v, std::span<const double> forcing) const
{
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = coef_.decay[k] * v[k] - coef_.phi1[k] * forcing[k];
}

void VStepper::step(std::span<double> v, std::span<const double> z_now, std::span<const double> z_next)
{
    const std::size_t n = v.size();
    if (z_now.size() != n) throw std::invalid_argument("step: z has the wrong size");
    if (t_.empty()) {
        for (std::size_t k = 0; k < n; ++k) v[k] *= coef_.decay[k];
        return;
    }
    for (std::size_t k = 0; k < n; ++k) work_[k] = v[k] + z_now[k];
    B_apply_into(work_, t_, nonlin_);
    if (integrator_ == Integrator::ExponentialEuler) {
        step_forced(v, nonlin_);
        return;
    }
    const auto zn = z_next.empty() ? z_now : z_next;
    for (std::size_t k = 0; k < n; ++k) {
        stage_[k] = coef_.decay[k] * v[k] - coef_.phi1[k] * nonlin_[k];
        work_[k] = stage_[k] + zn[k];
    }
    B_apply_into(work_, t_, nonlin2_);
    for (std::size_t k = 0; k < n; ++k) v[k] = stage_[k] - coef_.phi2[k] * (nonlin2_[k] - nonlin_[k]);
}

SpectralField step_v(std::span<const double> v, std::span<const double> z, double dt, const Spectrum& s,
                     const TriadTable& t, Integrator integrator, std::span<const double> z_next)
{
    require(v.size() == s.size() && z.size() == s.size(), "step_v: size mismatch");
    VStepper stepper(s, t, dt, integrator);
    SpectralField out(v.begin(), v.end());
    stepper.step(out, z, z_next);
    check_state(out, 1, dt);
    return out;
}

PathSample subsample(const PathSample& path, double dt, double T)
{
    require(path.size() >= 2, "noise path needs at least two points");
    const double fine = path.times[1] - path.times[0];
    const double ratio = dt / fine;
    const double r = std::round(ratio);
    require(r >= 1.0 && std::abs(ratio - r) <= 1e-9 * r, "noise path grid must refine the solver grid");
    const auto stride = static_cast<std::size_t>(r);
    const std::size_t steps = step_count(T, dt);
    require(steps * stride < path.size(), "noise path is shorter than the horizon");
    if (stride == 1 && steps + 1 == path.size()) return path;
    PathSample out;
    out.seed = path.seed;
    out.trajectory = path.trajectory;
    out.times.reserve(steps + 1);
    out.fields.reserve(steps + 1);
    for (std::size_t m = 0; m <= steps; ++m) {
        out.times.push_back(static_cast<double>(m) * dt);
        out.fields.push_back(path.fields[m * stride]);
    }
    return out;
}

PathSample truncate_path(const PathSample& path, std::size_t m)
{
    require(m >= 1 && m <= path.dim(), "truncation level out of range");
    PathSample out;
    out.seed = path.seed;
    out.trajectory = path.trajectory;
    out.times = path.times;
    out.fields.reserve(path.size());
    for (const auto& f : path.fields) out.fields.emplace_back(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(m));
    return out;
}

PathSample zero_path(std::size_t n, double dt, double T)
{
    const std::size_t steps = step_count(T, dt);
    PathSample out;
    out.times.reserve(steps + 1);
    for (std::size_t m = 0; m <= steps; ++m) out.times.push_back(static_cast<double>(m) * dt);
    out.fields.assign(steps + 1, SpectralField(n, 0.0));
    return out;
}

Trajectory integrate(std::span<const double> x, const PathSample& z_path, const SolverConfig& cfg, const Spectrum& s,
                     const TriadTable& t)
{
    cfg.validate();
    require(x.size() == s.size(), "integrate: initial datum has the wrong size");
    require(z_path.dim() == s.size(), "integrate: noise path has the wrong size");
    const auto z = subsample(z_path, cfg.dt, cfg.T);
    const std::size_t steps = cfg.steps();
    VStepper stepper(s, t, cfg.dt, cfg.integrator);
    Trajectory traj;
    traj.v.seed = traj.u.seed = z_path.seed;
    traj.v.trajectory = traj.u.trajectory = z_path.trajectory;
    traj.v.times = z.times;
    traj.u.times = z.times;
    traj.v.fields.reserve(steps + 1);
    traj.u.fields.reserve(steps + 1);
    SpectralField v(x.begin(), x.end());
    auto push = [&](std::size_t m) {
        traj.v.fields.push_back(v);
        SpectralField u(v);
        for (std::size_t k = 0; k < u.size(); ++k) u[k] += z.fields[m][k];
        traj.u.fields.push_back(std::move(u));
    };
    push(0);
    for (std::size_t m = 0; m < steps; ++m) {
        stepper.step(v, z.fields[m], z.fields[m + 1]);
        check_state(v, m + 1, z.times[m + 1]);
        push(m + 1);
    }
    return traj;
}

std::vector<double> mild_residual_trace(const Trajectory& traj, std::span<const double> x, const Spectrum& s,
                                        const TriadTable& t)
{
    const auto& v = traj.v;
    require(v.size() >= 2 && v.size() == traj.u.size(), "mild residual needs a trajectory");
    require(x.size() == s.size() && v.dim() == s.size(), "mild residual: size mismatch");
    const std::size_t n = s.size();
    const double dt = v.times[1] - v.times[0];
    const ExpCoefficients coef(s, dt);
    std::vector<double> integral(n, 0.0), f_prev(n, 0.0), f_next(n, 0.0);
    std::vector<double> out(v.size(), 0.0);
    if (!t.empty()) B_apply_into(traj.u.fields[0], t, f_prev);
    for (std::size_t m = 1; m < v.size(); ++m) {
        if (!t.empty()) B_apply_into(traj.u.fields[m], t, f_next);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            integral[k] = coef.decay[k] * integral[k] + (coef.phi1[k] - coef.phi2[k]) * f_prev[k] + coef.phi2[k] * f_next[k];
            const double d = v.fields[m][k] + integral[k] - std::exp(-v.times[m] * s[k]) * x[k];
            acc += d * d;
        }
        out[m] = std::sqrt(acc);
        std::swap(f_prev, f_next);
    }
    return out;
}

double mild_residual(const Trajectory& traj, std::span<const double> x, const Spectrum& s, const TriadTable& t,
                     std::size_t grid_index)
{
    require(grid_index < traj.v.size(), "mild residual: grid index out of range");
    if (grid_index == 0) {
        double acc = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) acc += (traj.v.fields[0][k] - x[k]) * (traj.v.fields[0][k] - x[k]);
        return std::sqrt(acc);
    }
    return mild_residual_trace(traj, x, s, t)[grid_index];
}

double apriori_lp_monitor(const PathSample& v, const Spectrum& s, double p)
{
    require(v.size() >= 2, "monitor needs at least two points");
    double acc = 0.0;
    double prev = std::pow(fractional_norm(v.fields[0], s, 0.25), p);
    for (std::size_t m = 1; m < v.size(); ++m) {
        const double cur = std::pow(fractional_norm(v.fields[m], s, 0.25), p);
        acc += 0.5 * (v.times[m] - v.times[m - 1]) * (prev + cur);
        prev = cur;
    }
    return acc;
}

double apriori_sup_monitor(const PathSample& v, const Spectrum& s, double gamma)
{
    double best = 0.0;
    for (const auto& f : v.fields) best = std::max(best, fractional_norm(f, s, gamma));
    return best;
}

EnergyCheck energy_check(const PathSample& v, const Spectrum& s, const TriadTable& t, double dt)
{
    EnergyCheck r;
    double max_drift2 = 0.0;
    std::vector<double> b(s.size(), 0.0);
    for (std::size_t m = 0; m < v.size(); ++m) {
        if (!t.empty()) B_apply_into(v.fields[m], t, b);
        double d2 = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double d = s[k] * v.fields[m][k] + b[k];
            d2 += d * d;
        }
        max_drift2 = std::max(max_drift2, d2);
        if (m > 0) {
            const double inc = dot(v.fields[m], v.fields[m]) - dot(v.fields[m - 1], v.fields[m - 1]);
            r.max_increase = std::max(r.max_increase, inc);
        }
    }
    r.slack = 10.0 * dt * dt * max_drift2;
    r.ok = r.max_increase <= r.slack;
    return r;
}

std::vector<double> galerkin_convergence_probe(std::span<const double> x, const PathSample& z_path,
                                               const std::vector<LevelSetup>& levels, const SolverConfig& cfg,
                                               double gamma)
{
    require(levels.size() >= 2, "convergence probe needs at least two levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
        require(levels[i].s.size() > levels[i - 1].s.size(), "levels must be strictly nested");
    require(x.size() >= levels.back().s.size() && z_path.dim() >= levels.back().s.size(),
            "initial datum and noise path must cover the finest level");
    std::vector<PathSample> runs;
    for (const auto& level : levels) {
        const std::size_t n = level.s.size();
        const auto z = truncate_path(z_path, n);
        runs.push_back(integrate(x.subspan(0, n), z, cfg, level.s, level.t).v);
    }
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        const auto& coarse = runs[i];
        const auto& fine = runs[i + 1];
        const auto& s = levels[i + 1].s;
        std::vector<double> w(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) w[k] = std::pow(s[k], 2.0 * gamma);
        double best = 0.0;
        for (std::size_t m = 0; m < fine.size(); ++m) {
            double acc = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) {
                const double c = k < coarse.dim() ? coarse.fields[m][k] : 0.0;
                const double diff = fine.fields[m][k] - c;
                acc += w[k] * diff * diff;
            }
            best = std::max(best, std::sqrt(acc));
        }
        d.push_back(best);
    }
    return d;
}

double regularization_probe(std::span<const double> x, const PathSample& z_path, const SolverConfig& cfg,
                            const Spectrum& s, const TriadTable& t, double t0, double gamma)
{
    require(t0 >= 0.0 && t0 <= cfg.T, "t0 must lie in [0, T]");
    const auto traj = integrate(x, z_path, cfg, s, t);
    double best = 0.0;
    for (std::size_t m = 0; m < traj.u.size(); ++m)
        if (traj.u.times[m] >= t0 - 1e-12) best = std::max(best, fractional_norm(traj.u.fields[m], s, gamma));
    return best;
}

TruncatedStepper::TruncatedStepper(const Spectrum& s, const TriadTable& t, const Coloring& c, double dt, Cutoff cutoff)
    : s_(s), t_(t), dt_(dt), cutoff_(cutoff), coef_(s, dt), prop_(c, s, dt), sqrt_lambda_(s.size()),
      nonlin_(s.size()), lin_(s.size())
{
    require(t.size() == s.size(), "triad table and spectrum sizes differ");
    for (std::size_t k = 0; k < s.size(); ++k) sqrt_lambda_[k] = std::sqrt(s[k]);
}

double TruncatedStepper::quarter_norm2(std::span<const double> u) const
{
    double acc = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) acc += sqrt_lambda_[k] * u[k] * u[k];
    return acc;
}

void TruncatedStepper::step(std::span<double> u, std::span<const double> xi)
{
    const double theta = cutoff_(quarter_norm2(u));
    const auto amp = prop_.amplitude();
    if (theta != 0.0 && !t_.empty()) {
        B_apply_into(u, t_, nonlin_);
        for (std::size_t k = 0; k < u.size(); ++k)
            u[k] = coef_.decay[k] * u[k] - coef_.phi1[k] * theta * nonlin_[k] + amp[k] * xi[k];
    } else {
        for (std::size_t k = 0; k < u.size(); ++k) u[k] = coef_.decay[k] * u[k] + amp[k] * xi[k];
    }
}

void TruncatedStepper::linearized_step(std::span<const double> u, std::span<double> U)
{
    const double r = quarter_norm2(u);
    const double theta = cutoff_(r);
    const double dtheta = cutoff_.derivative(r);
    if (t_.empty() || (theta == 0.0 && dtheta == 0.0)) {
        for (std::size_t k = 0; k < U.size(); ++k) U[k] *= coef_.decay[k];
        return;
    }
    double pair = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) pair += sqrt_lambda_[k] * u[k] * U[k];
    B_linearized_into(u, U, t_, lin_);
    if (dtheta != 0.0) B_apply_into(u, t_, nonlin_);
    for (std::size_t k = 0; k < U.size(); ++k) {
        double dg = theta * lin_[k];
        if (dtheta != 0.0) dg += dtheta * 2.0 * pair * nonlin_[k];
        U[k] = coef_.decay[k] * U[k] - coef_.phi1[k] * dg;
    }
}

void TruncatedStepper::step_with_tangent(std::span<double> u, std::span<double> U, std::span<const double> xi)
{
    const double r = quarter_norm2(u);
    const double theta = cutoff_(r);
    const double dtheta = cutoff_.derivative(r);
    const auto amp = prop_.amplitude();
    if (t_.empty() || (theta == 0.0 && dtheta == 0.0)) {
        for (std::size_t k = 0; k < u.size(); ++k) {
            U[k] *= coef_.decay[k];
            u[k] = coef_.decay[k] * u[k] + amp[k] * xi[k];
        }
        return;
    }
    double pair = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) pair += sqrt_lambda_[k] * u[k] * U[k];
    B_apply_into(u, t_, nonlin_);
    B_linearized_into(u, U, t_, lin_);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double dg = theta * lin_[k] + dtheta * 2.0 * pair * nonlin_[k];
        U[k] = coef_.decay[k] * U[k] - coef_.phi1[k] * dg;
        u[k] = coef_.decay[k] * u[k] - coef_.phi1[k] * theta * nonlin_[k] + amp[k] * xi[k];
    }
}

SpectralField step_truncated(std::span<const double> u, double dt, const Cutoff& cutoff, const Coloring& c,
                             const Spectrum& s, const TriadTable& t, std::span<const double> xi)
{
    require(u.size() == s.size() && xi.size() == s.size(), "step_truncated: size mismatch");
    TruncatedStepper stepper(s, t, c, dt, cutoff);
    SpectralField out(u.begin(), u.end());
    stepper.step(out, xi);
    check_state(out, 1, dt);
    return out;
}

ControlPath synthesize_control(std::span<const double> x, std::span<const double> y, double T, double t0, double t1,
                               double gamma, const Spectrum& s, const TriadTable& t, double dt_syn)
{
    require(0.0 < t0 && t0 < t1 && t1 < T, "control needs 0 < t0 < t1 < T");
    require(gamma > 0.25 && gamma < 0.5, "control regularity gamma must lie in (1/4, 1/2)");
    require(x.size() == s.size() && y.size() == s.size(), "control endpoints have the wrong size");
    const std::size_t steps = step_count(T, dt_syn);
    const std::size_t n = s.size();
    const auto start = semigroup_apply(x, s, t0);
    const auto finish = semigroup_apply(y, s, T - t1);
    auto ubar_at = [&](double time) {
        if (time <= t0) return semigroup_apply(x, s, time);
        if (time >= t1) return semigroup_apply(y, s, T - time);
        const double w = (time - t0) / (t1 - t0);
        SpectralField u(n);
        for (std::size_t k = 0; k < n; ++k) u[k] = start[k] + w * (finish[k] - start[k]);
        return u;
    };
    ControlPath out;
    VStepper stepper(s, t, dt_syn, Integrator::ExponentialEuler);
    SpectralField vbar(x.begin(), x.end()), forcing(n, 0.0);
    for (std::size_t m = 0; m <= steps; ++m) {
        const double time = static_cast<double>(m) * dt_syn;
        auto ubar = m == steps ? SpectralField(y.begin(), y.end()) : ubar_at(time);
        SpectralField zbar(n);
        for (std::size_t k = 0; k < n; ++k) zbar[k] = ubar[k] - vbar[k];
        if (m == 0) std::fill(zbar.begin(), zbar.end(), 0.0);
        for (auto* p : {&out.ubar, &out.vbar, &out.zbar}) p->times.push_back(time);
        out.vbar.fields.push_back(vbar);
        out.zbar.fields.push_back(std::move(zbar));
        if (m < steps) {
            if (!t.empty()) B_apply_into(ubar, t, forcing);
            stepper.step_forced(vbar, forcing);
            check_state(vbar, m + 1, time + dt_syn);
        }
        out.ubar.fields.push_back(std::move(ubar));
    }
    return out;
}

double verify_control(const PathSample& zbar, std::span<const double> x, std::span<const double> y,
                      const SolverConfig& cfg, const Spectrum& s, const TriadTable& t)
{
    const auto traj = integrate(x, zbar, cfg, s, t);
    const auto& uT = traj.u.back();
    SpectralField diff(uT.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = uT[k] - y[k];
    return fractional_norm(diff, s, 0.25);
}

namespace {

void check_gronwall_args(std::span<const double> times, std::span<const double> u, double b, double alpha,
                         double beta)
{
    require(times.size() >= 2 && times.size() == u.size(), "gronwall: times and values differ");
    require(times[0] == 0.0, "gronwall: grid must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i) require(times[i] > times[i - 1], "gronwall: grid must increase");
    require(alpha >= 0.0 && alpha < 1.0 && beta >= 0.0 && beta < 1.0, "gronwall: alpha, beta must lie in [0, 1)");
    require(b >= 0.0, "gronwall: b must be nonnegative");
}

// int_{t_j}^{t_{j+1}} (t_m - s)^{-beta} ds
double product_weight(std::span<const double> times, std::size_t m, std::size_t j, double beta)
{
    const double e = 1.0 - beta;
    return (std::pow(times[m] - times[j], e) - std::pow(times[m] - times[j + 1], e)) / e;
}

double convolution(std::span<const double> times, std::span<const double> u, std::size_t m, double beta)
{
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += product_weight(times, m, j, beta) * u[j];
    return acc;
}

}  // namespace

double gronwall_minimal_a(std::span<const double> times, std::span<const double> u, double b, double alpha,
                          double beta)
{
    check_gronwall_args(times, u, b, alpha, beta);
    double a = std::numeric_limits<double>::min();
    for (std::size_t m = alpha == 0.0 ? 0 : 1; m < times.size(); ++m) {
        const double need = (u[m] - b * convolution(times, u, m, beta)) * std::pow(times[m], alpha);
        a = std::max(a, need);
    }
    return a;
}

GronwallReport modified_gronwall_check(std::span<const double> times, std::span<const double> u, double a, double b,
                                       double alpha, double beta)
{
    check_gronwall_args(times, u, b, alpha, beta);
    require(a > 0.0, "gronwall: a must be positive");
    const std::size_t first = alpha == 0.0 ? 0 : 1;
    GronwallReport r;
    r.hypothesis_holds = true;
    std::vector<double> w(times.size());
    w[0] = u[0];
    for (std::size_t m = 0; m < times.size(); ++m) {
        const double forcing = m == 0 ? (alpha == 0.0 ? a : 0.0) : a * std::pow(times[m], -alpha);
        if (m > 0) w[m] = forcing + b * convolution(times, w, m, beta);
        if (m >= first) {
            if (u[m] < 0.0) r.hypothesis_holds = false;
            const double rhs = forcing + b * convolution(times, u, m, beta);
            const double excess = u[m] - rhs;
            r.max_hypothesis_excess = std::max(r.max_hypothesis_excess, excess);
            if (excess > kInequalitySlack * std::max(1.0, std::abs(rhs))) r.hypothesis_holds = false;
        }
    }
    for (std::size_t m = first; m < times.size(); ++m) r.M = std::max(r.M, w[m] * std::pow(times[m], alpha) / a);
    r.conclusion_holds = true;
    for (std::size_t m = first; m < times.size(); ++m) {
        const double bound = a * r.M * std::pow(times[m], -alpha);
        const double ratio = u[m] / bound;
        r.max_conclusion_ratio = std::max(r.max_conclusion_ratio, ratio);
        if (u[m] > bound * (1.0 + kInequalitySlack)) r.conclusion_holds = false;
    }
    return r;
}

double step_size_guard(double c0, double sup_quarter_norm2)
{
    const double denom = c0 * std::max(1.0, Cutoff::max_derivative()) * sup_quarter_norm2;
    return denom > 0.0 ? 0.5 / denom : std::numeric_limits<double>::infinity();
}

}  // namespace sns
