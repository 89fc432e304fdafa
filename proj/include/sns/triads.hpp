#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sns/rng.hpp"
#include "sns/spectrum.hpp"
#include "sns/torus_basis.hpp"

namespace sns {

struct TriadEntry {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    std::uint32_t l = 0;
    double coeff = 0.0;
};

/// Sparse structure constants b_ijl = b(e_i, e_j, e_l) of the Galerkin nonlinearity.
///
/// Entries are sorted by (l, i, j) and grouped into rows by output index l. Antisymmetry in the
/// last two slots is canonical: whenever (i, j, l, c) is stored, so is (i, l, j, -c) bit for bit,
/// and no (i, j, j) entry is ever stored.
class TriadTable {
  public:
    TriadTable() = default;
    /// Empty table on n modes: the linear (B == 0) backend.
    explicit TriadTable(std::size_t n);

    /// Canonicalizes user-supplied entries. Throws if some pair (i,j,l), (i,l,j) fails
    /// antisymmetry beyond 1e-12, a diagonal entry (i,j,j) is nonzero, or an index is out of range.
    static TriadTable from_entries(std::size_t n, std::span<const TriadEntry> entries, Backend backend);

    std::size_t size() const { return n_; }
    std::size_t nnz() const { return entries_.size(); }
    Backend backend() const { return backend_; }
    std::span<const TriadEntry> entries() const { return entries_; }
    /// Entries with output index l.
    std::span<const TriadEntry> row(std::size_t l) const;
    bool empty() const { return entries_.empty(); }

    /// FNV-1a over the canonical entry stream.
    std::uint64_t content_hash() const;

  private:
    friend TriadTable assemble_structure_constants(const std::vector<BasisMode>& basis);
    friend TriadTable load_triad_table(const std::filesystem::path& path);
    void finalize();  // sorts and builds row offsets

    std::size_t n_ = 0;
    Backend backend_ = Backend::Synthetic;
    std::vector<TriadEntry> entries_;
    std::vector<std::size_t> row_start_;
};

/// Exact integral over [0,2pi)^2 of the product of three trig factors trig_a(k_a . x).
double triple_trig_integral(Parity pa, Wavevector ka, Parity pb, Wavevector kb, Parity pc, Wavevector kc);

/// Analytic b(e_i, e_j, e_l) for three torus modes.
double torus_triad_coefficient(const BasisMode& ei, const BasisMode& ej, const BasisMode& el);

/// Torus structure constants, assembled row by row in parallel over l.
TriadTable assemble_structure_constants(const std::vector<BasisMode>& basis);

/// Random sparse antisymmetric tensor for synthetic (shell-model-like) tests.
TriadTable random_antisymmetric_triads(std::size_t n, double density, CounterRng& rng);

// -- evaluation kernels ------------------------------------------------------------------------
// Each kernel has an OpenMP version parallel over the output index and a serial reference.

/// b(x, y, z) = sum x_i y_j z_l b_ijl
double b_eval(std::span<const double> x, std::span<const double> y, std::span<const double> z,
              const TriadTable& t);
double b_eval_serial(std::span<const double> x, std::span<const double> y, std::span<const double> z,
                     const TriadTable& t);

/// (B_n(x))_l = sum_ij x_i x_j b_ijl
SpectralField B_apply(std::span<const double> x, const TriadTable& t);
void B_apply_into(std::span<const double> x, const TriadTable& t, std::span<double> out);
SpectralField B_apply_serial(std::span<const double> x, const TriadTable& t);

/// Linearization of B_n at u in direction w: b(w, u, e_l) + b(u, w, e_l).
void B_linearized_into(std::span<const double> u, std::span<const double> w, const TriadTable& t,
                       std::span<double> out);

// -- bound probing -----------------------------------------------------------------------------

struct BoundExponents {
    double theta = 0.25;
    double rho = 0.25;
    double delta = 0.5;
};

/// Throws unless delta in [0,1), theta, rho >= 0, theta + rho + delta >= 1, rho + delta > 1/2.
void check_admissible(const BoundExponents& e);

/// Ratio |b(x,y,z)| / (||A^theta x|| ||A^rho y|| ||A^delta z||); 0 if any norm vanishes.
double b_bound_ratio(std::span<const double> x, std::span<const double> y, std::span<const double> z,
                     const TriadTable& t, const Spectrum& s, const BoundExponents& e);

/// Empirical c0: max ratio over `samples` random triples (random stored triads and random dense
/// fields with spectral decay).
double b_bound_constant_probe(const TriadTable& t, const Spectrum& s, const BoundExponents& e,
                              std::size_t samples, CounterRng& rng);

// -- cache -------------------------------------------------------------------------------------

void save_triad_table(const TriadTable& t, const std::filesystem::path& path);
/// Throws on malformed files or a hash mismatch.
TriadTable load_triad_table(const std::filesystem::path& path);

/// Torus table for n modes, loaded from `cache_dir` if present and valid, otherwise assembled
/// and written there. An empty cache_dir disables caching.
TriadTable cached_torus_triads(std::size_t n, const std::filesystem::path& cache_dir);

}  // namespace sns
