#include "sns/triads.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace sns {

TriadTable::TriadTable(std::size_t n) : n_(n), row_start_(n + 1, 0) {}

void TriadTable::finalize()
{
    std::sort(entries_.begin(), entries_.end(), [](const TriadEntry& a, const TriadEntry& b) {
        return std::tie(a.l, a.i, a.j) < std::tie(b.l, b.i, b.j);
    });
    row_start_.assign(n_ + 1, 0);
    for (const auto& e : entries_) ++row_start_[e.l + 1];
    for (std::size_t l = 0; l < n_; ++l) row_start_[l + 1] += row_start_[l];
}

std::span<const TriadEntry> TriadTable::row(std::size_t l) const
{
    return std::span<const TriadEntry>(entries_).subspan(row_start_[l], row_start_[l + 1] - row_start_[l]);
}

std::uint64_t TriadTable::content_hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t k = 0; k < len; ++k) {
            h ^= p[k];
            h *= 0x100000001b3ull;
        }
    };
    const std::uint64_t n = n_;
    feed(&n, sizeof n);
    for (const auto& e : entries_) {
        feed(&e.i, sizeof e.i);
        feed(&e.j, sizeof e.j);
        feed(&e.l, sizeof e.l);
        feed(&e.coeff, sizeof e.coeff);
    }
    return h;
}

TriadTable TriadTable::from_entries(std::size_t n, std::span<const TriadEntry> entries, Backend backend)
{
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, double> lookup;
    for (const auto& e : entries) {
        if (e.i >= n || e.j >= n || e.l >= n)
            throw std::invalid_argument("triad table: index out of range");
        if (!std::isfinite(e.coeff)) throw std::invalid_argument("triad table: nonfinite coefficient");
        lookup[{e.i, e.j, e.l}] += e.coeff;
    }
    TriadTable t(n);
    t.backend_ = backend;
    for (const auto& [key, c] : lookup) {
        const auto [i, j, l] = key;
        if (j == l) {
            if (std::abs(c) > 1e-12) throw std::invalid_argument("triad table: nonzero diagonal entry b_ijj");
            continue;
        }
        const auto it = lookup.find({i, l, j});
        const double partner = it == lookup.end() ? 0.0 : it->second;
        if (std::abs(c + partner) > 1e-12)
            throw std::invalid_argument("triad table: entries violate antisymmetry b_ijl = -b_ilj");
        if (j < l && c != 0.0) {
            t.entries_.push_back({i, j, l, c});
            t.entries_.push_back({i, l, j, -c});
        }
    }
    t.finalize();
    return t;
}

double triple_trig_integral(Parity pa, Wavevector ka, Parity pb, Wavevector kb, Parity pc, Wavevector kc)
{
    using cplx = std::complex<double>;
    // cos(t) = (e^{it} + e^{-it}) / 2,  sin(t) = (e^{it} - e^{-it}) / (2i)
    auto weight = [](Parity p, int s) {
        return p == Parity::Cos ? cplx(0.5, 0.0) : cplx(0.0, -0.5 * s);
    };
    cplx acc = 0.0;
    for (int sa : {1, -1})
        for (int sb : {1, -1})
            for (int sc : {1, -1}) {
                if (sa * ka.k1 + sb * kb.k1 + sc * kc.k1 != 0) continue;
                if (sa * ka.k2 + sb * kb.k2 + sc * kc.k2 != 0) continue;
                acc += weight(pa, sa) * weight(pb, sb) * weight(pc, sc);
            }
    return 4.0 * std::numbers::pi * std::numbers::pi * acc.real();
}

double torus_triad_coefficient(const BasisMode& ei, const BasisMode& ej, const BasisMode& el)
{
    // (e_i . grad) e_j . e_l = N^3 (p_i . k_j)(p_j . p_l) trig_i * trig_j' * trig_l
    const auto pi = ei.direction();
    const auto pj = ej.direction();
    const auto pl = el.direction();
    const double advect = pi[0] * ej.k.k1 + pi[1] * ej.k.k2;
    const double align = pj[0] * pl[0] + pj[1] * pl[1];
    if (advect == 0.0 || align == 0.0) return 0.0;
    // d/dt cos = -sin, d/dt sin = cos
    const Parity dparity = ej.parity == Parity::Cos ? Parity::Sin : Parity::Cos;
    const double dsign = ej.parity == Parity::Cos ? -1.0 : 1.0;
    const double integral = triple_trig_integral(ei.parity, ei.k, dparity, ej.k, el.parity, el.k);
    const double norm3 = ei.normalization * ej.normalization * el.normalization;
    return norm3 * advect * align * dsign * integral;
}

namespace {

Wavevector to_half_lattice(Wavevector k)
{
    if (k.k1 < 0 || (k.k1 == 0 && k.k2 < 0)) return {-k.k1, -k.k2};
    return k;
}

struct WavevectorLess {
    bool operator()(const Wavevector& a, const Wavevector& b) const
    {
        return std::tie(a.k1, a.k2) < std::tie(b.k1, b.k2);
    }
};

constexpr double kStructuralZero = 1e-14;

}  // namespace

TriadTable assemble_structure_constants(const std::vector<BasisMode>& basis)
{
    const std::size_t n = basis.size();
    std::map<Wavevector, std::vector<std::uint32_t>, WavevectorLess> by_wavevector;
    for (std::size_t m = 0; m < n; ++m) by_wavevector[basis[m].k].push_back(static_cast<std::uint32_t>(m));

    std::vector<std::vector<TriadEntry>> rows(n);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ls = 0; ls < static_cast<std::ptrdiff_t>(n); ++ls) {
        const auto l = static_cast<std::uint32_t>(ls);
        auto& row = rows[l];
        const Wavevector kl = basis[l].k;
        for (std::uint32_t i = 0; i < n; ++i) {
            const Wavevector ki = basis[i].k;
            std::vector<Wavevector> candidates;
            for (int si : {1, -1})
                for (int sl : {1, -1}) {
                    const Wavevector kj = to_half_lattice({si * ki.k1 + sl * kl.k1, si * ki.k2 + sl * kl.k2});
                    if (kj.k1 == 0 && kj.k2 == 0) continue;
                    if (std::find(candidates.begin(), candidates.end(), kj) == candidates.end())
                        candidates.push_back(kj);
                }
            for (const auto& kj : candidates) {
                const auto it = by_wavevector.find(kj);
                if (it == by_wavevector.end()) continue;
                for (std::uint32_t j : it->second) {
                    if (j == l) continue;
                    // The smaller of (j, l) owns the computed value; the mirror is its exact negation.
                    const double c = j < l ? torus_triad_coefficient(basis[i], basis[j], basis[l])
                                           : -torus_triad_coefficient(basis[i], basis[l], basis[j]);
                    if (std::abs(c) > kStructuralZero) row.push_back({i, j, l, c});
                }
            }
        }
    }

    TriadTable t(n);
    t.backend_ = Backend::Torus;
    for (auto& row : rows) t.entries_.insert(t.entries_.end(), row.begin(), row.end());
    t.finalize();
    return t;
}

TriadTable random_antisymmetric_triads(std::size_t n, double density, CounterRng& rng)
{
    std::vector<TriadEntry> entries;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t l = j + 1; l < n; ++l) {
                if (rng.uniform() > density) continue;
                const double c = rng.normal();
                entries.push_back({i, j, l, c});
                entries.push_back({i, l, j, -c});
            }
    return TriadTable::from_entries(n, entries, Backend::Synthetic);
}

namespace {

void require_size(std::span<const double> x, const TriadTable& t)
{
    if (x.size() != t.size()) throw std::invalid_argument("field length does not match the triad table");
}

}  // namespace

double b_eval(std::span<const double> x, std::span<const double> y, std::span<const double> z,
              const TriadTable& t)
{
    require_size(x, t);
    require_size(y, t);
    require_size(z, t);
    const auto n = static_cast<std::ptrdiff_t>(t.size());
    std::vector<double> partial(t.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t l = 0; l < n; ++l) {
        double acc = 0.0;
        for (const auto& e : t.row(l)) acc += x[e.i] * y[e.j] * e.coeff;
        partial[l] = acc * z[l];
    }
    // Fixed-order reduction so the result does not depend on the thread count.
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

double b_eval_serial(std::span<const double> x, std::span<const double> y, std::span<const double> z,
                     const TriadTable& t)
{
    require_size(x, t);
    require_size(y, t);
    require_size(z, t);
    double total = 0.0;
    for (std::size_t l = 0; l < t.size(); ++l) {
        double acc = 0.0;
        for (const auto& e : t.row(l)) acc += x[e.i] * y[e.j] * e.coeff;
        total += acc * z[l];
    }
    return total;
}

void B_apply_into(std::span<const double> x, const TriadTable& t, std::span<double> out)
{
    require_size(x, t);
    const auto n = static_cast<std::ptrdiff_t>(t.size());
#pragma omp parallel for schedule(static) if (t.nnz() > 20000)
    for (std::ptrdiff_t l = 0; l < n; ++l) {
        double acc = 0.0;
        for (const auto& e : t.row(l)) acc += x[e.i] * x[e.j] * e.coeff;
        out[l] = acc;
    }
}

SpectralField B_apply(std::span<const double> x, const TriadTable& t)
{
    SpectralField out(x.size());
    B_apply_into(x, t, out);
    return out;
}

SpectralField B_apply_serial(std::span<const double> x, const TriadTable& t)
{
    require_size(x, t);
    SpectralField out(t.size(), 0.0);
    for (std::size_t l = 0; l < t.size(); ++l) {
        double acc = 0.0;
        for (const auto& e : t.row(l)) acc += x[e.i] * x[e.j] * e.coeff;
        out[l] = acc;
    }
    return out;
}

void B_linearized_into(std::span<const double> u, std::span<const double> w, const TriadTable& t,
                       std::span<double> out)
{
    require_size(u, t);
    require_size(w, t);
    const auto n = static_cast<std::ptrdiff_t>(t.size());
#pragma omp parallel for schedule(static) if (t.nnz() > 20000)
    for (std::ptrdiff_t l = 0; l < n; ++l) {
        double acc = 0.0;
        for (const auto& e : t.row(l)) acc += (w[e.i] * u[e.j] + u[e.i] * w[e.j]) * e.coeff;
        out[l] = acc;
    }
}

void check_admissible(const BoundExponents& e)
{
    const bool ok = e.delta >= 0.0 && e.delta < 1.0 && e.theta >= 0.0 && e.rho >= 0.0 &&
                    e.theta + e.rho + e.delta >= 1.0 && e.rho + e.delta > 0.5;
    if (!ok)
        throw std::invalid_argument(
            "trilinear bound exponents must satisfy delta in [0,1), theta+rho+delta >= 1, rho+delta > 1/2");
}

double b_bound_ratio(std::span<const double> x, std::span<const double> y, std::span<const double> z,
                     const TriadTable& t, const Spectrum& s, const BoundExponents& e)
{
    const double denom =
        fractional_norm(x, s, e.theta) * fractional_norm(y, s, e.rho) * fractional_norm(z, s, e.delta);
    if (denom == 0.0) return 0.0;
    return std::abs(b_eval_serial(x, y, z, t)) / denom;
}

double b_bound_constant_probe(const TriadTable& t, const Spectrum& s, const BoundExponents& e,
                              std::size_t samples, CounterRng& rng)
{
    check_admissible(e);
    const std::size_t n = t.size();
    double best = 0.0;
    SpectralField x(n), y(n), z(n);
    for (std::size_t m = 0; m < samples; ++m) {
        if (m % 2 == 0 && !t.empty()) {
            // Single-mode triple on a random stored triad.
            const auto& entry = t.entries()[rng.below(t.nnz())];
            std::fill(x.begin(), x.end(), 0.0);
            std::fill(y.begin(), y.end(), 0.0);
            std::fill(z.begin(), z.end(), 0.0);
            x[entry.i] = 1.0;
            y[entry.j] = 1.0;
            z[entry.l] = 1.0;
        } else {
            // Dense Gaussian fields with random algebraic decay lambda^-s, s in [0.25, 1.5].
            for (auto* f : {&x, &y, &z}) {
                const double decay = rng.uniform(0.25, 1.5);
                for (std::size_t k = 0; k < n; ++k) (*f)[k] = rng.normal() * std::pow(s[k], -decay);
            }
        }
        best = std::max(best, b_bound_ratio(x, y, z, t, s, e));
    }
    return best;
}

// -- cache file --------------------------------------------------------------------------------
//
// Layout (host byte order):
//   char[8] "SNSTRIAD" | u32 version | u32 backend | u64 n | u64 content hash | u64 count
//   count x { u32 i | u32 j | u32 l | f64 coeff }   sorted by (l, i, j)

namespace {

constexpr char kMagic[8] = {'S', 'N', 'S', 'T', 'R', 'I', 'A', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& os, const T& v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is)
{
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("triad cache: truncated file");
    return v;
}

}  // namespace

void save_triad_table(const TriadTable& t, const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("triad cache: cannot write " + tmp);
        os.write(kMagic, sizeof kMagic);
        put(os, kFormatVersion);
        put(os, static_cast<std::uint32_t>(t.backend() == Backend::Torus ? 0 : 1));
        put(os, static_cast<std::uint64_t>(t.size()));
        put(os, t.content_hash());
        put(os, static_cast<std::uint64_t>(t.nnz()));
        for (const auto& e : t.entries()) {
            put(os, e.i);
            put(os, e.j);
            put(os, e.l);
            put(os, e.coeff);
        }
        if (!os) throw std::runtime_error("triad cache: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

TriadTable load_triad_table(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("triad cache: cannot open " + path.string());
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("triad cache: bad magic in " + path.string());
    if (get<std::uint32_t>(is) != kFormatVersion) throw std::runtime_error("triad cache: unsupported version");
    const auto backend = get<std::uint32_t>(is);
    if (backend > 1) throw std::runtime_error("triad cache: bad backend tag");
    const auto n = get<std::uint64_t>(is);
    const auto hash = get<std::uint64_t>(is);
    const auto count = get<std::uint64_t>(is);

    TriadTable t(n);
    t.backend_ = backend == 0 ? Backend::Torus : Backend::Synthetic;
    t.entries_.reserve(count);
    for (std::uint64_t m = 0; m < count; ++m) {
        TriadEntry e;
        e.i = get<std::uint32_t>(is);
        e.j = get<std::uint32_t>(is);
        e.l = get<std::uint32_t>(is);
        e.coeff = get<double>(is);
        if (e.i >= n || e.j >= n || e.l >= n) throw std::runtime_error("triad cache: index out of range");
        t.entries_.push_back(e);
    }
    t.finalize();
    if (t.content_hash() != hash) throw std::runtime_error("triad cache: content hash mismatch");
    return t;
}

TriadTable cached_torus_triads(std::size_t n, const std::filesystem::path& cache_dir)
{
    if (cache_dir.empty()) return assemble_structure_constants(assemble_torus_basis(n));
    const auto path = cache_dir / ("triads-torus-n" + std::to_string(n) + "-v" + std::to_string(kFormatVersion) + ".bin");
    if (std::filesystem::exists(path)) {
        try {
            return load_triad_table(path);
        } catch (const std::runtime_error&) {
            // fall through and rebuild a corrupt entry
        }
    }
    auto t = assemble_structure_constants(assemble_torus_basis(n));
    save_triad_table(t, path);
    return t;
}

}  // namespace sns
