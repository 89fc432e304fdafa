#include "sns/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "sns/rng.hpp"

namespace sns {

namespace {

void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

void check_positive(const std::vector<double>& g)
{
    for (std::size_t k = 0; k < g.size(); ++k)
        require(std::isfinite(g[k]) && g[k] > 0.0, "coloring amplitude g_" + std::to_string(k + 1) + " must be positive");
}

double ou_variance_factor(double lambda, double t)
{
    // (1 - e^{-2 lambda t}) / (2 lambda) without cancellation
    return -std::expm1(-2.0 * lambda * t) / (2.0 * lambda);
}

struct Regression {
    double slope = 0.0;
    double r2 = 0.0;
};

Regression fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    Regression r;
    r.slope = sxy / sxx;
    r.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return r;
}

HolderFit fit_holder(std::vector<double> lags, std::vector<double> moments)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (!(moments[i] > 0.0)) throw std::invalid_argument("holder fit: vanishing increments");
        lx.push_back(std::log(lags[i]));
        ly.push_back(std::log(moments[i]));
    }
    const auto reg = fit_line(lx, ly);
    HolderFit fit;
    fit.beta = 0.5 * reg.slope;
    fit.r2 = reg.r2;
    fit.lags = std::move(lags);
    fit.moments = std::move(moments);
    return fit;
}

std::vector<std::size_t> resolve_lags(std::span<const std::size_t> lags, std::size_t points)
{
    std::vector<std::size_t> out(lags.begin(), lags.end());
    if (out.empty()) out = dyadic_lags(points);
    if (out.size() < 2) throw std::invalid_argument("holder fit needs at least two lags");
    for (auto l : out)
        if (l == 0 || l >= points) throw std::invalid_argument("holder lag out of range");
    return out;
}

}  // namespace

std::string to_string(ColoringKind k)
{
    switch (k) {
    case ColoringKind::PowerLaw: return "power-law";
    case ColoringKind::SigmaSequence: return "sigma-sequence";
    case ColoringKind::Raw: return "raw";
    }
    return "?";
}

ColoringKind coloring_kind_from_string(const std::string& s)
{
    if (s == "power-law") return ColoringKind::PowerLaw;
    if (s == "sigma-sequence") return ColoringKind::SigmaSequence;
    if (s == "raw") return ColoringKind::Raw;
    throw std::invalid_argument("unknown coloring kind '" + s + "'");
}

Coloring Coloring::scaled(double factor) const
{
    require(factor > 0.0, "coloring scale factor must be positive");
    Coloring c = *this;
    for (auto& v : c.g) v *= factor;
    c.scale *= factor;
    return c;
}

Coloring Coloring::truncated(std::size_t m) const
{
    require(m >= 1 && m <= g.size(), "coloring truncation out of range");
    Coloring c = *this;
    c.g.resize(m);
    return c;
}

std::string Coloring::descriptor() const
{
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind) << " n=" << g.size() << " scale=" << scale << " eps=" << epsilon;
    if (kind == ColoringKind::PowerLaw) os << " gamma=" << gamma;
    if (kind == ColoringKind::SigmaSequence) os << " a=" << band_a << " b=" << band_b;
    return os.str();
}

Coloring power_law_coloring(const Spectrum& s, double gamma, double epsilon, double scale)
{
    require(gamma > 0.25 && gamma <= 0.5, "power-law gamma must lie in (1/4, 1/2]");
    if (epsilon < 0.0) epsilon = std::min(gamma - 0.25, 0.25);
    require(epsilon > 0.0 && epsilon <= 0.25, "epsilon must lie in (0, 1/4]");
    require(epsilon <= gamma - 0.25 + 1e-15, "epsilon exceeds gamma - 1/4: Ran(G) leaves D(A^(1/4+eps))");
    require(scale > 0.0, "coloring scale must be positive");
    Coloring c;
    c.kind = ColoringKind::PowerLaw;
    c.gamma = gamma;
    c.epsilon = epsilon;
    c.scale = scale;
    c.g.resize(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) c.g[k] = scale * std::pow(s[k], -gamma);
    return c;
}

Coloring constant_coloring(std::size_t n, double value, double epsilon)
{
    require(n >= 1, "coloring needs at least one mode");
    Coloring c;
    c.kind = ColoringKind::Raw;
    c.gamma = 0.0;
    c.epsilon = epsilon;
    c.g.assign(n, value);
    check_positive(c.g);
    return c;
}

Coloring make_coloring(const ColoringSpec& spec, const Spectrum& s)
{
    switch (spec.kind) {
    case ColoringKind::PowerLaw: return power_law_coloring(s, spec.gamma, spec.epsilon, spec.scale);
    case ColoringKind::SigmaSequence: {
        require(spec.sigma.size() == s.size(), "sigma sequence length must equal n");
        require(spec.epsilon > 0.0 && spec.epsilon <= 0.25, "epsilon must lie in (0, 1/4]");
        require(spec.band_a > 0.0 && spec.band_b >= spec.band_a, "sigma band needs 0 < a <= b");
        require(spec.scale > 0.0, "coloring scale must be positive");
        Coloring c;
        c.kind = ColoringKind::SigmaSequence;
        c.gamma = 0.0;
        c.epsilon = spec.epsilon;
        c.scale = spec.scale;
        c.band_a = spec.band_a;
        c.band_b = spec.band_b;
        c.g.resize(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double kk = static_cast<double>(k + 1);
            const double sig = spec.sigma[k];
            const double lo = spec.band_a * std::pow(kk, 0.25 + spec.epsilon);
            const double hi = spec.band_b * std::sqrt(kk);
            require(sig > 0.0, "sigma_" + std::to_string(k + 1) + " must be positive");
            require(sig >= lo * (1 - 1e-12) && sig <= hi * (1 + 1e-12),
                    "sigma_" + std::to_string(k + 1) + " leaves the band [a k^(1/4+eps), b k^(1/2)]");
            c.g[k] = spec.scale / sig;
        }
        return c;
    }
    case ColoringKind::Raw: {
        Coloring c;
        c.kind = ColoringKind::Raw;
        c.gamma = 0.0;
        c.epsilon = spec.epsilon > 0.0 ? spec.epsilon : 0.25;
        c.scale = spec.scale;
        if (spec.raw.size() == 1)
            c.g.assign(s.size(), spec.raw[0] * spec.scale);
        else {
            require(spec.raw.size() == s.size(), "raw amplitudes must have length 1 or n");
            c.g = spec.raw;
            for (auto& v : c.g) v *= spec.scale;
        }
        check_positive(c.g);
        return c;
    }
    }
    throw std::invalid_argument("unknown coloring kind");
}

RangeCondition validate_range_condition(const Coloring& c, const Spectrum& s, double epsilon)
{
    require(c.size() == s.size(), "coloring and spectrum sizes differ");
    check_positive(c.g);
    const std::size_t n = s.size();
    const std::size_t half = std::max<std::size_t>(1, n / 2);
    RangeCondition r;
    for (std::size_t k = 0; k < n; ++k) {
        const double up = std::pow(s[k], 0.25 + epsilon) * c[k];
        const double lo = 1.0 / (std::sqrt(s[k]) * c[k]);
        r.upper = std::max(r.upper, up);
        r.lower = std::max(r.lower, lo);
        if (k < half) {
            r.upper_half = std::max(r.upper_half, up);
            r.lower_half = std::max(r.lower_half, lo);
        }
    }
    const bool finite = std::isfinite(r.upper) && std::isfinite(r.lower);
    r.ok = finite && r.upper <= 1.05 * r.upper_half && r.lower <= 1.05 * r.lower_half;
    return r;
}

void PathSample::validate() const
{
    if (times.empty() || times.size() != fields.size()) throw std::invalid_argument("path: times and fields differ in length");
    if (times.front() != 0.0) throw std::invalid_argument("path must start at time 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("path times must strictly increase");
    for (const auto& f : fields)
        if (f.size() != fields.front().size()) throw std::invalid_argument("path fields differ in truncation");
}

OuPropagator::OuPropagator(const Coloring& c, const Spectrum& s, double dt)
    : dt_(dt), decay_(s.size()), amplitude_(s.size())
{
    require(dt > 0.0, "OU step requires dt > 0");
    require(c.size() == s.size(), "coloring and spectrum sizes differ");
    for (std::size_t k = 0; k < s.size(); ++k) {
        decay_[k] = std::exp(-s[k] * dt);
        amplitude_[k] = c[k] * std::sqrt(ou_variance_factor(s[k], dt));
    }
}

void OuPropagator::advance(std::span<double> z, std::span<const double> xi) const
{
    if (z.size() != decay_.size() || xi.size() != decay_.size()) throw std::invalid_argument("OU advance: size mismatch");
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = decay_[k] * z[k] + amplitude_[k] * xi[k];
}

SpectralField ou_step(std::span<const double> state, double dt, const Coloring& c, const Spectrum& s,
                      NoiseAddress addr, std::uint32_t step)
{
    OuPropagator prop(c, s, dt);
    SpectralField z(state.begin(), state.end());
    std::vector<double> xi(z.size());
    fill_noise_normals(addr.seed, addr.trajectory, step, xi);
    prop.advance(z, xi);
    return z;
}

std::size_t step_count(double T, double dt)
{
    require(dt > 0.0, "time step must be positive");
    require(T >= dt * (1 - 1e-12), "horizon must be at least one step");
    const double q = T / dt;
    const double r = std::round(q);
    require(std::abs(q - r) <= 1e-9 * r, "time step must divide the horizon");
    return static_cast<std::size_t>(r);
}

PathSample ou_sample_path(double T, double dt, const Coloring& c, const Spectrum& s, NoiseAddress addr,
                          std::size_t record_every)
{
    require(T > 0.0, "horizon must be positive");
    require(record_every >= 1, "record_every must be at least 1");
    const std::size_t steps = step_count(T, dt);
    require(steps % record_every == 0, "record interval must divide the step count");
    OuPropagator prop(c, s, dt);
    PathSample path;
    path.seed = addr.seed;
    path.trajectory = addr.trajectory;
    path.times.reserve(steps / record_every + 1);
    path.fields.reserve(steps / record_every + 1);
    SpectralField z(s.size(), 0.0);
    std::vector<double> xi(s.size());
    path.times.push_back(0.0);
    path.fields.push_back(z);
    for (std::size_t m = 0; m < steps; ++m) {
        fill_noise_normals(addr.seed, addr.trajectory, static_cast<std::uint32_t>(m + 1), xi);
        prop.advance(z, xi);
        if ((m + 1) % record_every == 0) {
            path.times.push_back(static_cast<double>(m + 1) * dt);
            path.fields.push_back(z);
        }
    }
    return path;
}

double increment_moment_oracle(const Coloring& c, const Spectrum& s, double gamma, double t, double h)
{
    require(t >= 0.0 && h > 0.0, "increment moment needs t >= 0 and h > 0");
    require(c.size() == s.size(), "coloring and spectrum sizes differ");
    double acc = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double lam = s[k];
        const double d = -std::expm1(-lam * h);
        acc += std::pow(lam, 2.0 * gamma) * c[k] * c[k] *
               (d * d * ou_variance_factor(lam, t) + ou_variance_factor(lam, h));
    }
    return acc;
}

std::vector<std::size_t> dyadic_lags(std::size_t points)
{
    std::vector<std::size_t> lags;
    for (std::size_t l = 1; 16 * l <= points; l *= 2) lags.push_back(l);
    return lags;
}

HolderFit holder_exponent_estimate(const PathSample& path, const Spectrum& s, double gamma,
                                   std::span<const std::size_t> lags)
{
    if (path.size() < 100) throw std::invalid_argument("holder estimate needs at least 100 path points");
    if (path.dim() != s.size()) throw std::invalid_argument("path and spectrum sizes differ");
    const auto use = resolve_lags(lags, path.size());
    std::vector<double> weight(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) weight[k] = std::pow(s[k], 2.0 * gamma);
    const double dt = path.times[1] - path.times[0];
    std::vector<double> hs, moments;
    for (auto lag : use) {
        const std::size_t count = path.size() - lag;
        double acc = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const auto& a = path.fields[i];
            const auto& b = path.fields[i + lag];
            double local = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                const double d = b[k] - a[k];
                local += weight[k] * d * d;
            }
            acc += local;
        }
        hs.push_back(static_cast<double>(lag) * dt);
        moments.push_back(acc / static_cast<double>(count));
    }
    return fit_holder(std::move(hs), std::move(moments));
}

HolderFit holder_exponent_oracle(const Coloring& c, const Spectrum& s, double gamma, double dt,
                                 std::size_t points, std::span<const std::size_t> lags)
{
    require(c.size() == s.size(), "coloring and spectrum sizes differ");
    const auto use = resolve_lags(lags, points);
    std::vector<double> hs, moments;
    for (auto lag : use) {
        const std::size_t count = points - lag;
        const double h = static_cast<double>(lag) * dt;
        double acc = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double lam = s[k];
            const double d = -std::expm1(-lam * h);
            // average over start indices i < count of (1 - e^{-2 lam i dt}) / (2 lam)
            const double q = std::exp(-2.0 * lam * dt);
            const double geom = q < 1.0 ? -std::expm1(static_cast<double>(count) * std::log(q)) / (1.0 - q)
                                        : static_cast<double>(count);
            const double avg_var = (1.0 - geom / static_cast<double>(count)) / (2.0 * lam);
            acc += std::pow(lam, 2.0 * gamma) * c[k] * c[k] * (d * d * avg_var + ou_variance_factor(lam, h));
        }
        hs.push_back(h);
        moments.push_back(acc);
    }
    return fit_holder(std::move(hs), std::move(moments));
}

HsIntegralCheck hs_integral_check(const Coloring& c, const Spectrum& s, double alpha)
{
    require(alpha < 0.5, "time integral diverges for alpha >= 1/2");
    require(c.size() == s.size(), "coloring and spectrum sizes differ");
    const std::size_t half = std::max<std::size_t>(1, s.size() / 2);
    const double a = 1.0 - 2.0 * alpha;
    HsIntegralCheck r;
    for (std::size_t k = 0; k < s.size(); ++k) {
        // int_0^1 t^{-2 alpha} e^{-2 lambda t} dt = (2 lambda)^{2 alpha - 1} gamma_lower(1 - 2 alpha, 2 lambda)
        const double x = 2.0 * s[k];
        const double term = c[k] * c[k] * std::pow(x, -a) * boost::math::tgamma_lower(a, x);
        r.value_n += term;
        if (k < half) r.value_half += term;
    }
    r.growth = (r.value_n - r.value_half) / r.value_half;
    r.saturating = r.growth < 0.05;
    return r;
}

}  // namespace sns
