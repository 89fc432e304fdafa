#include "sns/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "sns/rng.hpp"

namespace sns {

namespace {

void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

void check_state(std::span<const double> u, std::size_t step, double dt)
{
    const double nrm = norm(u);
    if (!std::isfinite(nrm) || nrm > kBlowUpNorm) throw BlowUpError(step, static_cast<double>(step) * dt, nrm);
}

/// Runs body(i) for i < count across threads; rethrows the exception of the lowest failing index.
template <class F>
void parallel_for(std::size_t count, F&& body)
{
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 4)
    for (long long i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::size_t horizon_steps(double t, double dt)
{
    require(t >= 0.0, "t: must be nonnegative");
    require(dt > 0.0, "dt: must be positive");
    return t == 0.0 ? 0 : step_count(t, dt);
}

void check_model(const Model& m, std::size_t dim)
{
    require(m.s.size() == dim, "initial condition and spectrum sizes differ");
    require(m.t.size() == dim, "triad table and spectrum sizes differ");
    require(m.c.size() == dim, "coloring and spectrum sizes differ");
}

/// Advances u along the truncated chain for `steps` steps with noise from addr.
template <class Visit>
void run_chain(SpectralField& u, std::size_t steps, const Model& model, NoiseAddress addr, Visit&& visit)
{
    TruncatedStepper stepper(model.s, model.t, model.c, model.dt, model.cutoff);
    std::vector<double> xi(u.size());
    for (std::size_t m = 0; m < steps; ++m) {
        fill_noise_normals(addr.seed, addr.trajectory, static_cast<std::uint32_t>(m + 1), xi);
        stepper.step(u, xi);
        check_state(u, m + 1, model.dt);
        visit(m + 1, u);
    }
}

SpectralField endpoint(std::span<const double> x, std::size_t steps, const Model& model, NoiseAddress addr)
{
    SpectralField u(x.begin(), x.end());
    run_chain(u, steps, model, addr, [](std::size_t, const SpectralField&) {});
    return u;
}

double quantile_sorted(const std::vector<double>& v, double q)
{
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - w) + v[hi] * w;
}

double trapezoid(std::span<const double> t, std::span<const double> f)
{
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
    return acc;
}

}  // namespace

Observable Observable::coordinate(std::size_t k) { return {ObservableKind::ModeCoordinate, k, 0.0, 1.0}; }
Observable Observable::squared(std::size_t k) { return {ObservableKind::SquaredMode, k, 0.0, 1.0}; }
Observable Observable::fractional_norm(double gamma) { return {ObservableKind::FractionalNorm, 0, gamma, 1.0}; }
Observable Observable::constant(double value) { return {ObservableKind::Constant, 0, 0.0, value}; }

Observable Observable::bounded(std::size_t k, double scale)
{
    require(scale > 0.0, "bounded observable: scale must be positive");
    return {ObservableKind::BoundedTanh, k, 0.0, scale};
}

double Observable::operator()(std::span<const double> u, const Spectrum& s) const
{
    const auto at = [&](std::size_t k) {
        if (k >= u.size()) throw std::out_of_range("observable: mode index out of range");
        return u[k];
    };
    switch (kind) {
    case ObservableKind::ModeCoordinate: return at(mode);
    case ObservableKind::SquaredMode: return at(mode) * at(mode);
    case ObservableKind::FractionalNorm: return sns::fractional_norm(u, s, gamma);
    case ObservableKind::BoundedTanh: return std::tanh(at(mode) / scale);
    case ObservableKind::Constant: return scale;
    }
    return 0.0;
}

double Observable::derivative(double x) const
{
    switch (kind) {
    case ObservableKind::ModeCoordinate: return 1.0;
    case ObservableKind::SquaredMode: return 2.0 * x;
    case ObservableKind::BoundedTanh: {
        const double th = std::tanh(x / scale);
        return (1.0 - th * th) / scale;
    }
    case ObservableKind::Constant: return 0.0;
    case ObservableKind::FractionalNorm: break;
    }
    throw std::logic_error("observable: no coordinate derivative for a fractional norm");
}

bool Observable::is_bounded() const
{
    return kind == ObservableKind::BoundedTanh || kind == ObservableKind::Constant;
}

double Observable::sup_norm() const
{
    if (kind == ObservableKind::BoundedTanh) return 1.0;
    if (kind == ObservableKind::Constant) return std::abs(scale);
    return std::numeric_limits<double>::infinity();
}

std::string Observable::descriptor() const
{
    std::ostringstream os;
    switch (kind) {
    case ObservableKind::ModeCoordinate: os << "mode-coordinate(" << mode << ")"; break;
    case ObservableKind::SquaredMode: os << "squared-mode(" << mode << ")"; break;
    case ObservableKind::FractionalNorm: os << "fractional-norm(" << gamma << ")"; break;
    case ObservableKind::BoundedTanh: os << "tanh(" << mode << "," << scale << ")"; break;
    case ObservableKind::Constant: os << "constant(" << scale << ")"; break;
    }
    return os.str();
}

void MCConfig::validate() const
{
    require(M >= 2, "M: at least 2 samples are needed for a standard error");
    require(std::isfinite(t) && t >= 0.0, "t: must be finite and nonnegative");
    require(burn_in >= 0.0, "burn_in: must be nonnegative");
    require(thinning >= 1, "thinning: must be at least 1");
}

double pairwise_sum(std::span<const double> v)
{
    if (v.size() <= 8) {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

Estimate summarize(std::span<const double> samples)
{
    Estimate e;
    e.M = samples.size();
    if (samples.empty()) return e;
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) {
        e.mean = *lo;
        return e;
    }
    e.mean = pairwise_sum(samples) / static_cast<double>(e.M);
    if (e.M < 2) return e;
    std::vector<double> dev(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) dev[i] = (samples[i] - e.mean) * (samples[i] - e.mean);
    const double var = pairwise_sum(dev) / static_cast<double>(e.M - 1);
    e.stderr_ = std::sqrt(var / static_cast<double>(e.M));
    return e;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) { return mix64(seed ^ mix64(tag + 0x51a3d)); }

SpectralField simulate_u(std::span<const double> x, double t, const Model& model, NoiseAddress addr)
{
    check_model(model, x.size());
    return endpoint(x, horizon_steps(t, model.dt), model, addr);
}

std::vector<SpectralField> simulate_endpoints(std::span<const double> x, double t, const Model& model,
                                              std::uint64_t seed, std::size_t M)
{
    check_model(model, x.size());
    const std::size_t steps = horizon_steps(t, model.dt);
    std::vector<SpectralField> out(M);
    parallel_for(M, [&](std::size_t i) { out[i] = endpoint(x, steps, model, {seed, i}); });
    return out;
}

Estimate semigroup_estimate(const Observable& phi, std::span<const double> x, const Model& model, const MCConfig& mc)
{
    mc.validate();
    check_model(model, x.size());
    const std::size_t steps = horizon_steps(mc.t, model.dt);
    std::vector<double> vals(mc.M);
    parallel_for(mc.M, [&](std::size_t i) { vals[i] = phi(endpoint(x, steps, model, {mc.seed, i}), model.s); });
    return summarize(vals);
}

Estimate time_average(const Observable& phi, std::span<const double> x, const Model& model, const MCConfig& mc)
{
    mc.validate();
    require(mc.burn_in < mc.t, "burn_in: must be below the horizon");
    check_model(model, x.size());
    const std::size_t steps = horizon_steps(mc.t, model.dt);
    const auto first = static_cast<std::size_t>(std::ceil(mc.burn_in / model.dt - 1e-9));
    std::vector<double> vals(mc.M);
    parallel_for(mc.M, [&](std::size_t i) {
        std::vector<double> seen;
        SpectralField u(x.begin(), x.end());
        if (first == 0) seen.push_back(phi(u, model.s));
        run_chain(u, steps, model, {mc.seed, i}, [&](std::size_t m, const SpectralField& cur) {
            if (m >= first && (m - first) % mc.thinning == 0) seen.push_back(phi(cur, model.s));
        });
        vals[i] = pairwise_sum(seen) / static_cast<double>(seen.size());
    });
    return summarize(vals);
}

std::vector<double> freedman_diaconis_edges(std::vector<double> pooled)
{
    require(!pooled.empty(), "histogram: no samples");
    std::sort(pooled.begin(), pooled.end());
    const double lo = pooled.front();
    const double hi = pooled.back();
    require(std::isfinite(lo) && std::isfinite(hi), "histogram: nonfinite sample");
    if (hi == lo) return {lo - 0.5, lo + 0.5};
    const double N = static_cast<double>(pooled.size());
    const double iqr = quantile_sorted(pooled, 0.75) - quantile_sorted(pooled, 0.25);
    double width = 2.0 * iqr / std::cbrt(N);
    // Degenerate spread (atoms): Sturges' count over the range.
    if (!(width > 0.0)) width = (hi - lo) / std::ceil(std::log2(N) + 1.0);
    const double bins = std::min(std::ceil((hi - lo) / width), N);
    const auto count = static_cast<std::size_t>(std::max(1.0, bins));
    std::vector<double> edges(count + 1);
    for (std::size_t b = 0; b <= count; ++b) edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(count);
    edges.back() = hi;
    return edges;
}

std::vector<std::size_t> histogram(std::span<const double> samples, std::span<const double> edges)
{
    require(edges.size() >= 2, "histogram: need at least one bin");
    std::vector<std::size_t> counts(edges.size() - 1, 0);
    for (double x : samples) {
        if (x < edges.front() || x > edges.back()) continue;
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        auto b = static_cast<std::size_t>(it - edges.begin());
        b = b == 0 ? 0 : std::min(b - 1, counts.size() - 1);
        ++counts[b];
    }
    return counts;
}

double histogram_tv(std::span<const double> a, std::span<const double> b)
{
    require(!a.empty() && !b.empty(), "histogram_tv: empty sample");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto edges = freedman_diaconis_edges(std::move(pooled));
    const auto ha = histogram(a, edges);
    const auto hb = histogram(b, edges);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::vector<double> diff(ha.size());
    for (std::size_t i = 0; i < ha.size(); ++i)
        diff[i] = std::abs(static_cast<double>(ha[i]) / na - static_cast<double>(hb[i]) / nb);
    return std::min(1.0, 0.5 * pairwise_sum(diff));
}

TvReport tv_distance_proxy(std::span<const double> x, std::span<const double> y, double t,
                           const std::vector<Observable>& observables, const Model& model, const MCConfig& mc,
                           Coupling coupling)
{
    mc.validate();
    require(observables.size() >= 2, "tv_distance_proxy: at least two observables");
    require(x.size() == y.size(), "tv_distance_proxy: x and y sizes differ");
    const std::uint64_t seed_y = coupling == Coupling::Common ? mc.seed : derive_seed(mc.seed, 0x7f);
    const auto ex = simulate_endpoints(x, t, model, mc.seed, mc.M);
    const auto ey = simulate_endpoints(y, t, model, seed_y, mc.M);
    TvReport rep;
    for (const auto& phi : observables) {
        std::vector<double> a(mc.M), b(mc.M);
        for (std::size_t i = 0; i < mc.M; ++i) {
            a[i] = phi(ex[i], model.s);
            b[i] = phi(ey[i], model.s);
        }
        rep.per_observable.push_back(histogram_tv(a, b));
        rep.value = std::max(rep.value, rep.per_observable.back());
    }
    return rep;
}

DerivativeFlow derivative_flow(std::span<const double> x, std::span<const double> h, double T, const Model& model,
                               NoiseAddress addr)
{
    check_model(model, x.size());
    require(h.size() == x.size(), "derivative_flow: direction and state sizes differ");
    const std::size_t steps = horizon_steps(T, model.dt);
    TruncatedStepper stepper(model.s, model.t, model.c, model.dt, model.cutoff);
    DerivativeFlow flow;
    flow.u.seed = flow.U.seed = addr.seed;
    flow.u.trajectory = flow.U.trajectory = addr.trajectory;
    SpectralField u(x.begin(), x.end()), U(h.begin(), h.end());
    std::vector<double> xi(u.size());
    flow.u.times.push_back(0.0);
    flow.u.fields.push_back(u);
    flow.U.fields.push_back(U);
    for (std::size_t m = 0; m < steps; ++m) {
        fill_noise_normals(addr.seed, addr.trajectory, static_cast<std::uint32_t>(m + 1), xi);
        stepper.step_with_tangent(u, U, xi);
        check_state(u, m + 1, model.dt);
        check_state(U, m + 1, model.dt);
        flow.u.times.push_back(static_cast<double>(m + 1) * model.dt);
        flow.u.fields.push_back(u);
        flow.U.fields.push_back(U);
    }
    flow.U.times = flow.u.times;
    return flow;
}

GronwallFlowCheck gronwall_flow_check(const DerivativeFlow& flow, std::span<const double> h, const Spectrum& s,
                                      double c0)
{
    require(c0 >= 0.0, "gronwall_flow_check: c0 must be nonnegative");
    require(flow.u.size() == flow.U.size() && flow.u.size() >= 1, "gronwall_flow_check: u and U traces differ");
    const auto& times = flow.u.times;
    const std::size_t N = times.size();
    std::vector<double> v_norm2(N), k4(N);
    const double lead = 2.0 * c0 * std::max(1.0, Cutoff::max_derivative());
    double running = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto& U = flow.U.fields[i];
        double acc = 0.0;
        for (std::size_t k = 0; k < U.size(); ++k) acc += s[k] * U[k] * U[k];
        v_norm2[i] = acc;
        running = std::max(running, sns::fractional_norm(flow.u.fields[i], s, 0.25));
        const double K = lead * (running * running * running + running);
        k4[i] = K * K * K * K;
    }
    GronwallFlowCheck out;
    out.lhs = trapezoid(times, v_norm2);
    std::vector<double> inner(N, 0.0), correct(N), displayed(N);
    for (std::size_t i = 1; i < N; ++i) inner[i] = inner[i - 1] + 0.5 * (times[i] - times[i - 1]) * (k4[i] + k4[i - 1]);
    for (std::size_t i = 0; i < N; ++i) {
        correct[i] = k4[i] * std::exp(inner[i]);
        displayed[i] = k4[i] * std::exp(k4[i]);
    }
    const double h2 = dot(h, h);
    out.rhs = 2.0 * h2 * (1.0 + trapezoid(times, correct));
    out.rhs_displayed = 2.0 * h2 * (1.0 + trapezoid(times, displayed));
    out.ok = out.lhs <= out.rhs;
    return out;
}

NoiseInverseCheck noise_inverse_bound_check(const Coloring& c, const Spectrum& s, std::size_t samples, CounterRng& rng)
{
    require(c.size() == s.size() && s.size() >= 2, "noise_inverse_bound_check: coloring and spectrum sizes differ");
    const auto max_ratio = [&](std::size_t n) {
        double best = 0.0;
        for (std::size_t k = 0; k < n; ++k) best = std::max(best, 1.0 / (c[k] * c[k] * s[k]));
        for (std::size_t r = 0; r < samples; ++r) {
            double num = 0.0, den = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double x = rng.normal();
                num += x * x / (c[k] * c[k]);
                den += s[k] * x * x;
            }
            best = std::max(best, num / den);
        }
        return best;
    };
    NoiseInverseCheck out;
    out.max_ratio_half = max_ratio(s.size() / 2);
    out.max_ratio = max_ratio(s.size());
    out.ok = std::isfinite(out.max_ratio) && out.max_ratio <= 1.05 * out.max_ratio_half;
    return out;
}

Estimate bismut_gradient(const Observable& phi, std::span<const double> x, std::span<const double> h,
                         const Model& model, const MCConfig& mc)
{
    mc.validate();
    require(mc.t > 0.0, "bismut_gradient: t must be positive");
    check_model(model, x.size());
    require(h.size() == x.size(), "bismut_gradient: direction and state sizes differ");
    const std::size_t steps = horizon_steps(mc.t, model.dt);
    std::vector<double> vals(mc.M);
    parallel_for(mc.M, [&](std::size_t i) {
        TruncatedStepper stepper(model.s, model.t, model.c, model.dt, model.cutoff);
        const auto sigma = stepper.propagator().amplitude();
        SpectralField u(x.begin(), x.end()), U(h.begin(), h.end());
        std::vector<double> xi(u.size());
        double weight = 0.0;
        for (std::size_t m = 0; m < steps; ++m) {
            fill_noise_normals(mc.seed, i, static_cast<std::uint32_t>(m + 1), xi);
            stepper.step_with_tangent(u, U, xi);
            check_state(u, m + 1, model.dt);
            double acc = 0.0;
            for (std::size_t k = 0; k < u.size(); ++k) acc += U[k] * xi[k] / sigma[k];
            weight += acc;
        }
        vals[i] = phi(u, model.s) * weight / static_cast<double>(steps);
    });
    return summarize(vals);
}

Estimate finite_difference_gradient(const Observable& phi, std::span<const double> x, std::span<const double> h,
                                    const Model& model, const MCConfig& mc, double delta)
{
    mc.validate();
    require(delta > 0.0, "finite_difference_gradient: delta must be positive");
    check_model(model, x.size());
    require(h.size() == x.size(), "finite_difference_gradient: direction and state sizes differ");
    const std::size_t steps = horizon_steps(mc.t, model.dt);
    SpectralField xp(x.begin(), x.end());
    for (std::size_t k = 0; k < xp.size(); ++k) xp[k] += delta * h[k];
    std::vector<double> vals(mc.M);
    parallel_for(mc.M, [&](std::size_t i) {
        const NoiseAddress addr{mc.seed, i};
        vals[i] = (phi(endpoint(xp, steps, model, addr), model.s) - phi(endpoint(x, steps, model, addr), model.s)) /
                  delta;
    });
    return summarize(vals);
}

LipschitzProbe sf_lipschitz_probe(const Observable& phi,
                                  const std::vector<std::pair<SpectralField, SpectralField>>& pairs,
                                  const Model& model, const MCConfig& mc)
{
    mc.validate();
    const std::size_t steps = horizon_steps(mc.t, model.dt);
    LipschitzProbe out;
    for (const auto& [x, y] : pairs) {
        require(x.size() == y.size(), "sf_lipschitz_probe: pair sizes differ");
        if (x == y) continue;
        check_model(model, x.size());
        SpectralField d(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) d[k] = x[k] - y[k];
        const double dist = norm(d);
        std::vector<double> vals(mc.M);
        parallel_for(mc.M, [&](std::size_t i) {
            const NoiseAddress addr{mc.seed, i};
            vals[i] = phi(endpoint(x, steps, model, addr), model.s) - phi(endpoint(y, steps, model, addr), model.s);
        });
        const auto e = summarize(vals);
        out.pairs.push_back({dist, std::abs(e.mean) / dist, e.stderr_ / dist});
        out.max_ratio = std::max(out.max_ratio, out.pairs.back().ratio);
    }
    return out;
}

std::pair<double, double> clopper_pearson(std::size_t hits, std::size_t M, double confidence)
{
    require(M > 0 && hits <= M, "clopper_pearson: need 0 <= hits <= M, M > 0");
    require(confidence > 0.0 && confidence < 1.0, "clopper_pearson: confidence must lie in (0, 1)");
    const double alpha = 1.0 - confidence;
    const double k = static_cast<double>(hits);
    const double n = static_cast<double>(M);
    const double lo = hits == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
    const double hi = hits == M ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
    return {lo, hi};
}

IrreducibilityReport irreducibility_probe(std::span<const double> x, std::span<const double> y, const PathSample& zbar,
                                          double T, double delta, const Model& model, const MCConfig& mc)
{
    mc.validate();
    check_model(model, x.size());
    require(y.size() == x.size() && zbar.dim() == x.size(), "irreducibility_probe: sizes differ");
    require(delta >= 0.0, "irreducibility_probe: delta must be nonnegative");
    const std::size_t steps = horizon_steps(T, model.dt);
    const PathSample control = subsample(zbar, model.dt, T);
    std::vector<char> hit(mc.M, 0);
    parallel_for(mc.M, [&](std::size_t i) {
        VStepper stepper(model.s, model.t, model.dt, Integrator::ExponentialEuler);
        const OuPropagator prop(model.c, model.s, model.dt);
        SpectralField v(x.begin(), x.end()), Z(x.size(), 0.0), z(x.size()), xi(x.size());
        for (std::size_t m = 0; m < steps; ++m) {
            for (std::size_t k = 0; k < z.size(); ++k) z[k] = control.fields[m][k] + Z[k];
            stepper.step(v, z, z);
            fill_noise_normals(mc.seed, i, static_cast<std::uint32_t>(m + 1), xi);
            prop.advance(Z, xi);
            check_state(v, m + 1, model.dt);
        }
        SpectralField diff(x.size());
        for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = v[k] + control.fields[steps][k] + Z[k] - y[k];
        hit[i] = sns::fractional_norm(diff, model.s, 0.25) < delta ? 1 : 0;
    });
    IrreducibilityReport rep;
    rep.M = mc.M;
    for (char c : hit) rep.hits += static_cast<std::size_t>(c);
    rep.frequency = static_cast<double>(rep.hits) / static_cast<double>(rep.M);
    std::tie(rep.ci_low, rep.ci_high) = clopper_pearson(rep.hits, rep.M);
    return rep;
}

double gaussian_expectation(const std::function<double(double)>& f, double mean, double sd)
{
    require(sd >= 0.0, "gaussian_expectation: sd must be nonnegative");
    if (sd == 0.0) return f(mean);
    const double inv = 1.0 / (sd * std::sqrt(2.0 * M_PI));
    auto integrand = [&](double x) {
        const double r = (x - mean) / sd;
        return f(x) * inv * std::exp(-0.5 * r * r);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, mean - 12.0 * sd,
                                                                         mean + 12.0 * sd, 15, 1e-14);
}

}  // namespace sns
