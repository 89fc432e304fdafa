#include "sns/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sns/torus_basis.hpp"

namespace sns {

std::string to_string(Backend b) { return b == Backend::Torus ? "torus" : "synthetic"; }

Backend backend_from_string(const std::string& s)
{
    if (s == "torus") return Backend::Torus;
    if (s == "synthetic") return Backend::Synthetic;
    throw std::invalid_argument("unknown backend '" + s + "' (expected torus or synthetic)");
}

Spectrum Spectrum::synthetic(std::size_t n, double slope)
{
    if (n == 0) throw std::invalid_argument("spectrum: n must be positive");
    if (!(slope > 0.0) || !std::isfinite(slope))
        throw std::invalid_argument("spectrum: synthetic slope must be positive");
    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k) values[k] = slope * static_cast<double>(k + 1);
    return from_values(Backend::Synthetic, std::move(values), slope);
}

Spectrum Spectrum::torus(std::size_t n) { return spectrum_of(assemble_torus_basis(n)); }

Spectrum Spectrum::from_values(Backend backend, std::vector<double> values, double slope)
{
    if (values.empty()) throw std::invalid_argument("spectrum: n must be positive");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] > 0.0) || !std::isfinite(values[k]))
            throw std::invalid_argument("spectrum: eigenvalues must be positive and finite");
        if (k > 0 && values[k] < values[k - 1])
            throw std::invalid_argument("spectrum: eigenvalues must be nondecreasing");
    }
    Spectrum s;
    s.backend_ = backend;
    s.slope_ = slope;
    s.values_ = std::move(values);
    return s;
}

Spectrum Spectrum::truncated(std::size_t m) const
{
    if (m == 0 || m > size()) throw std::invalid_argument("spectrum: bad truncation level");
    Spectrum s = *this;
    s.values_.resize(m);
    return s;
}

std::string Spectrum::descriptor() const
{
    std::ostringstream os;
    os << to_string(backend_) << ":n=" << size();
    if (backend_ == Backend::Synthetic) os << ":c=" << slope_;
    return os.str();
}

Spectrum build_spectrum(Backend backend, std::size_t n, double slope)
{
    return backend == Backend::Torus ? Spectrum::torus(n) : Spectrum::synthetic(n, slope);
}

SpectralField unit_field(std::size_t n, std::size_t index)
{
    SpectralField e(n, 0.0);
    e.at(index) = 1.0;
    return e;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

namespace {

void require_shape(std::span<const double> x, const Spectrum& s)
{
    if (x.size() != s.size())
        throw std::invalid_argument("field length does not match the spectrum truncation");
}

}  // namespace

SpectralField fractional_apply(std::span<const double> x, const Spectrum& s, double alpha)
{
    require_shape(x, s);
    SpectralField out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::pow(s[k], alpha) * x[k];
    return out;
}

double fractional_norm(std::span<const double> x, const Spectrum& s, double alpha)
{
    require_shape(x, s);
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double c = std::pow(s[k], alpha) * x[k];
        acc += c * c;
    }
    return std::sqrt(acc);
}

SpectralField semigroup_apply(std::span<const double> x, const Spectrum& s, double t)
{
    require_shape(x, s);
    if (!(t >= 0.0)) throw std::invalid_argument("semigroup: time must be nonnegative");
    SpectralField out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::exp(-t * s[k]) * x[k];
    return out;
}

InequalityCheck smoothing_bound_check(const Spectrum& s, double alpha, double t)
{
    if (!(alpha > 0.0) || !(t > 0.0))
        throw std::invalid_argument("smoothing bound: alpha and t must be positive");
    InequalityCheck r;
    for (double lambda : s.values())
        r.lhs = std::max(r.lhs, std::pow(lambda, alpha) * std::exp(-t * lambda));
    r.rhs = std::pow(alpha / std::exp(1.0), alpha) * std::pow(t, -alpha);
    r.ok = r.lhs <= r.rhs * (1.0 + kInequalitySlack);
    return r;
}

InequalityCheck interpolation_check(std::span<const double> x, const Spectrum& s, double p, double q,
                                    double mix)
{
    if (!(p >= 0.0) || !(q > p)) throw std::invalid_argument("interpolation: need 0 <= p < q");
    if (!(mix > 0.0 && mix < 1.0)) throw std::invalid_argument("interpolation: mix must lie in (0,1)");
    const double r = mix * p + (1.0 - mix) * q;
    InequalityCheck c;
    c.lhs = fractional_norm(x, s, r);
    c.rhs = std::pow(fractional_norm(x, s, p), mix) * std::pow(fractional_norm(x, s, q), 1.0 - mix);
    c.ok = c.lhs <= c.rhs * (1.0 + kInequalitySlack);
    return c;
}

double hilbert_schmidt_tail(const Spectrum& s, double alpha)
{
    double acc = 0.0;
    for (double lambda : s.values()) acc += std::pow(lambda, -2.0 * alpha);
    return acc;
}

}  // namespace sns
