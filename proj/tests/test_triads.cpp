#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "sns/rng.hpp"
#include "sns/torus_basis.hpp"
#include "sns/triads.hpp"

using namespace sns;

namespace {

// Trapezoidal quadrature of (e_i . grad e_j) . e_l on a grid x grid periodic mesh. Exact for
// trig polynomials whose wavenumbers stay below grid/2.
double quadrature_triad(const BasisMode& ei, const BasisMode& ej, const BasisMode& el, int grid)
{
    const double h = 2.0 * std::numbers::pi / grid;
    double acc = 0.0;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
            const double x = a * h, y = b * h;
            const auto u = ei.velocity(x, y);
            const auto g = ej.gradient(x, y);
            const auto w = el.velocity(x, y);
            const double adv0 = u[0] * g[0] + u[1] * g[1];
            const double adv1 = u[0] * g[2] + u[1] * g[3];
            acc += adv0 * w[0] + adv1 * w[1];
        }
    return acc * h * h;
}

double quadrature_inner(const BasisMode& a, const BasisMode& b, int grid)
{
    const double h = 2.0 * std::numbers::pi / grid;
    double acc = 0.0;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            const auto u = a.velocity(i * h, j * h);
            const auto v = b.velocity(i * h, j * h);
            acc += u[0] * v[0] + u[1] * v[1];
        }
    return acc * h * h;
}

// Dense tensor straight from the analytic formula, without the sparse closure search.
std::vector<double> dense_tensor(const std::vector<BasisMode>& basis)
{
    const std::size_t n = basis.size();
    std::vector<double> b(n * n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l)
                b[(i * n + j) * n + l] = torus_triad_coefficient(basis[i], basis[j], basis[l]);
    return b;
}

SpectralField dense_B(const std::vector<double>& b, const SpectralField& x)
{
    const std::size_t n = x.size();
    SpectralField out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) out[l] += x[i] * x[j] * b[(i * n + j) * n + l];
    return out;
}

SpectralField random_field(std::size_t n, CounterRng& rng)
{
    SpectralField x(n);
    for (auto& v : x) v = rng.normal();
    return x;
}

int find_mode(const std::vector<BasisMode>& basis, Wavevector k, Parity p)
{
    for (std::size_t m = 0; m < basis.size(); ++m)
        if (basis[m].k == k && basis[m].parity == p) return static_cast<int>(m);
    return -1;
}

}  // namespace

TEST_CASE("assemble_torus_basis ordering")
{
    const auto b4 = assemble_torus_basis(4);
    REQUIRE(b4.size() == 4);
    CHECK(b4[0].k == Wavevector{0, 1});
    CHECK(b4[0].parity == Parity::Cos);
    CHECK(b4[1].k == Wavevector{0, 1});
    CHECK(b4[1].parity == Parity::Sin);
    CHECK(b4[2].k == Wavevector{1, 0});
    CHECK(b4[3].k == Wavevector{1, 0});
    for (const auto& m : b4) CHECK(m.eigenvalue() == 1.0);

    const auto b1 = assemble_torus_basis(1);
    REQUIRE(b1.size() == 1);
    CHECK(b1[0].eigenvalue() == 1.0);

    const auto b8 = assemble_torus_basis(8);
    CHECK(b8[4].k == Wavevector{1, -1});
    CHECK(b8[6].k == Wavevector{1, 1});
}

TEST_CASE("torus modes are orthonormal and divergence free")
{
    const auto basis = assemble_torus_basis(24);
    for (std::size_t a = 0; a < basis.size(); ++a) {
        CHECK(std::abs(quadrature_inner(basis[a], basis[a], 64) - 1.0) < 1e-10);
        for (std::size_t b = a + 1; b < basis.size(); b += 5)
            CHECK(std::abs(quadrature_inner(basis[a], basis[b], 64)) < 1e-10);
        const auto g = basis[a].gradient(0.3, 1.7);
        CHECK(std::abs(g[0] + g[3]) < 1e-14);
    }
}

TEST_CASE("single-mode nonlinearity vanishes")
{
    const auto basis = assemble_torus_basis(40);
    const auto table = assemble_structure_constants(basis);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto b = B_apply(unit_field(basis.size(), i), table);
        for (double v : b) CHECK(v == 0.0);
    }
}

TEST_CASE("analytic triad coefficients match quadrature")
{
    const auto basis = assemble_torus_basis(32);
    double largest = 0.0;
    for (Parity pi : {Parity::Cos, Parity::Sin})
        for (Parity pj : {Parity::Cos, Parity::Sin})
            for (Parity pl : {Parity::Cos, Parity::Sin}) {
                const int i = find_mode(basis, {1, 0}, pi);
                const int j = find_mode(basis, {0, 1}, pj);
                const int l = find_mode(basis, {1, 1}, pl);
                REQUIRE(i >= 0);
                REQUIRE(j >= 0);
                REQUIRE(l >= 0);
                const double analytic = torus_triad_coefficient(basis[i], basis[j], basis[l]);
                largest = std::max(largest, std::abs(analytic));
                CHECK(std::abs(analytic - quadrature_triad(basis[i], basis[j], basis[l], 128)) < 1e-8);
            }
    CHECK(largest > 1e-3);

    // random stored (nonzero) triads and random unrestricted triples
    const auto table = assemble_structure_constants(basis);
    CounterRng rng(17, 0);
    for (int trial = 0; trial < 24; ++trial) {
        const auto& e = table.entries()[rng.below(table.nnz())];
        const double q = quadrature_triad(basis[e.i], basis[e.j], basis[e.l], 128);
        CHECK(std::abs(e.coeff - q) < 1e-8);
        const auto a = rng.below(32), b = rng.below(32), c = rng.below(32);
        CHECK(std::abs(torus_triad_coefficient(basis[a], basis[b], basis[c]) -
                       quadrature_triad(basis[a], basis[b], basis[c], 128)) < 1e-8);
    }
}

TEST_CASE("structure constants obey the triad selection rule and antisymmetry")
{
    const auto basis = assemble_torus_basis(64);
    const auto table = assemble_structure_constants(basis);
    CHECK(table.nnz() > 0);
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, double> lookup;
    for (const auto& e : table.entries()) lookup[{e.i, e.j, e.l}] = e.coeff;
    for (const auto& e : table.entries()) {
        CHECK(e.j != e.l);
        const auto it = lookup.find({e.i, e.l, e.j});
        REQUIRE(it != lookup.end());
        CHECK(it->second == -e.coeff);
        const auto ki = basis[e.i].k, kj = basis[e.j].k, kl = basis[e.l].k;
        bool closes = false;
        for (int s1 : {1, -1})
            for (int s2 : {1, -1})
                closes = closes || (ki.k1 + s1 * kj.k1 + s2 * kl.k1 == 0 && ki.k2 + s1 * kj.k2 + s2 * kl.k2 == 0);
        CHECK(closes);
    }
}

TEST_CASE("b_eval antisymmetry and energy conservation")
{
    const auto basis = assemble_torus_basis(48);
    const auto table = assemble_structure_constants(basis);
    CounterRng rng(23, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = random_field(48, rng), y = random_field(48, rng), z = random_field(48, rng);
        const double byz = b_eval(x, y, z, table), bzy = b_eval(x, z, y, table);
        CHECK(std::abs(byz + bzy) <= 1e-13 * (std::abs(byz) + 1.0));
        double scale = 0.0;
        for (const auto& e : table.entries()) scale += std::abs(x[e.i] * x[e.j] * x[e.l] * e.coeff);
        CHECK(std::abs(b_eval(x, x, x, table)) <= 1e-10 * scale);
        const auto bx = B_apply(x, table);
        CHECK(std::abs(dot(bx, x)) <= 1e-10 * scale);
    }
}

TEST_CASE("sparse kernels agree with dense triple loop")
{
    CounterRng rng(29, 0);
    for (std::size_t n : {2u, 5u, 8u, 13u, 16u}) {
        const auto basis = assemble_torus_basis(n);
        const auto table = assemble_structure_constants(basis);
        const auto dense = dense_tensor(basis);
        for (int trial = 0; trial < 20; ++trial) {
            auto x = random_field(n, rng);
            if (trial == 0) {  // two-mode input
                std::fill(x.begin(), x.end(), 0.0);
                x[0] = 1.3;
                x[n - 1] = -0.4;
            }
            const auto oracle = dense_B(dense, x);
            const auto sparse = B_apply(x, table);
            const auto serial = B_apply_serial(x, table);
            for (std::size_t l = 0; l < n; ++l) {
                CHECK(std::abs(sparse[l] - oracle[l]) <= 1e-12);
                CHECK(serial[l] == sparse[l]);
            }
            const auto y = random_field(n, rng), z = random_field(n, rng);
            double b_dense = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    for (std::size_t l = 0; l < n; ++l) b_dense += x[i] * y[j] * z[l] * dense[(i * n + j) * n + l];
            CHECK(std::abs(b_eval(x, y, z, table) - b_dense) <= 1e-12);
            CHECK(b_eval(x, y, z, table) == b_eval_serial(x, y, z, table));
        }
    }
}

TEST_CASE("linearized nonlinearity is the derivative of B")
{
    const auto table = assemble_structure_constants(assemble_torus_basis(32));
    CounterRng rng(31, 0);
    const auto u = random_field(32, rng), w = random_field(32, rng);
    SpectralField lin(32);
    B_linearized_into(u, w, table, lin);
    const double eps = 1e-6;
    SpectralField up(u), um(u);
    for (std::size_t k = 0; k < 32; ++k) {
        up[k] += eps * w[k];
        um[k] -= eps * w[k];
    }
    const auto bp = B_apply(up, table), bm = B_apply(um, table);
    for (std::size_t l = 0; l < 32; ++l) CHECK(std::abs((bp[l] - bm[l]) / (2 * eps) - lin[l]) < 1e-7);
}

TEST_CASE("synthetic tables")
{
    std::vector<TriadEntry> good{{0, 1, 2, 0.5}, {0, 2, 1, -0.5}, {2, 0, 1, 1.0}, {2, 1, 0, -1.0}};
    const auto t = TriadTable::from_entries(3, good, Backend::Synthetic);
    CHECK(t.nnz() == 4);
    CounterRng rng(2, 2);
    const auto x = random_field(3, rng);
    CHECK(std::abs(b_eval(x, x, x, t)) < 1e-15);

    std::vector<TriadEntry> bad{{0, 1, 2, 0.5}, {0, 2, 1, -0.4}};
    CHECK_THROWS_AS(TriadTable::from_entries(3, bad, Backend::Synthetic), std::invalid_argument);
    std::vector<TriadEntry> lonely{{0, 1, 2, 0.5}};
    CHECK_THROWS_AS(TriadTable::from_entries(3, lonely, Backend::Synthetic), std::invalid_argument);
    std::vector<TriadEntry> diag{{0, 1, 1, 0.5}};
    CHECK_THROWS_AS(TriadTable::from_entries(3, diag, Backend::Synthetic), std::invalid_argument);
    std::vector<TriadEntry> tiny{{0, 1, 2, 0.5}, {0, 2, 1, -0.5 + 1e-14}};
    const auto canon = TriadTable::from_entries(3, tiny, Backend::Synthetic);
    CHECK(canon.entries()[0].coeff == -canon.entries()[1].coeff);

    const auto random = random_antisymmetric_triads(12, 0.2, rng);
    const auto y = random_field(12, rng);
    CHECK(std::abs(dot(B_apply(y, random), y)) < 1e-12);
}

TEST_CASE("b_bound_constant_probe")
{
    CHECK_THROWS_AS(check_admissible({0.0, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(check_admissible({0.5, 0.5, 1.0}), std::invalid_argument);
    CHECK_NOTHROW(check_admissible({0.25, 0.25, 0.5}));

    const auto basis = assemble_torus_basis(16);
    const auto s = spectrum_of(basis);
    const auto table = assemble_structure_constants(basis);
    const SpectralField zero(16, 0.0);
    CounterRng rng(1, 1);
    const auto x = random_field(16, rng);
    CHECK(b_bound_ratio(zero, x, x, table, s, {}) == 0.0);
    CHECK(b_bound_ratio(x, x, zero, table, s, {}) == 0.0);

    std::vector<double> c0;
    for (std::size_t n : {16u, 32u, 64u}) {
        const auto bn = assemble_torus_basis(n);
        CounterRng probe_rng(5, n);
        c0.push_back(b_bound_constant_probe(assemble_structure_constants(bn), spectrum_of(bn), {}, 4000, probe_rng));
    }
    for (double c : c0) {
        CHECK(std::isfinite(c));
        CHECK(c > 0.0);
    }
    const double lo = *std::min_element(c0.begin(), c0.end());
    const double hi = *std::max_element(c0.begin(), c0.end());
    CHECK(hi <= 1.25 * lo);
}

TEST_CASE("triad cache round trip")
{
    const auto dir = std::filesystem::temp_directory_path() / "sns_triad_cache_test";
    std::filesystem::remove_all(dir);
    const auto built = cached_torus_triads(20, dir);
    const auto loaded = cached_torus_triads(20, dir);
    CHECK(built.content_hash() == loaded.content_hash());
    CHECK(built.nnz() == loaded.nnz());
    CHECK(loaded.backend() == Backend::Torus);

    const auto path = dir / "copy.bin";
    save_triad_table(built, path);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-3, std::ios::end);
        f.put('\x7f');
    }
    CHECK_THROWS(load_triad_table(path));
    std::filesystem::remove_all(dir);
}

TEST_CASE("B_apply cost tracks the number of stored triads")
{
    std::vector<double> per_call;
    std::vector<std::size_t> nnz;
    for (std::size_t n : {16u, 32u, 64u, 128u}) {
        const auto table = assemble_structure_constants(assemble_torus_basis(n));
        CounterRng rng(3, n);
        const auto x = random_field(n, rng);
        SpectralField out(n);
        const int reps = static_cast<int>(2e6 / static_cast<double>(table.nnz() + n)) + 1;
        double best = 1e30;
        for (int round = 0; round < 3; ++round) {
            const auto t0 = std::chrono::steady_clock::now();
            for (int r = 0; r < reps; ++r) B_apply_into(x, table, out);
            const auto t1 = std::chrono::steady_clock::now();
            best = std::min(best, std::chrono::duration<double>(t1 - t0).count() / reps);
        }
        per_call.push_back(best);
        nnz.push_back(table.nnz());
    }
    for (std::size_t k = 1; k < per_call.size(); ++k) {
        CHECK(nnz[k] > nnz[k - 1]);
        CHECK(per_call[k] > per_call[k - 1]);
    }
    // time per stored triad stays within a constant band
    const double first = per_call.front() / nnz.front(), last = per_call.back() / nnz.back();
    CHECK(last < 4.0 * first);
}
