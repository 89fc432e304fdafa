#include <cmath>
#include <vector>

#include "doctest.h"
#include "sns/rng.hpp"

using namespace sns;

TEST_CASE("Philox4x32-10 known-answer vectors")
{
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("noise normals are addressable and order independent")
{
    std::vector<double> row(33);
    fill_noise_normals(42, 7, 19, row);
    for (std::uint32_t m = 0; m < row.size(); ++m) CHECK(row[m] == noise_normal(42, 7, m, 19));

    // a shorter truncation sees the same leading variates
    std::vector<double> shorter(16);
    fill_noise_normals(42, 7, 19, shorter);
    for (std::size_t m = 0; m < shorter.size(); ++m) CHECK(shorter[m] == row[m]);

    CHECK(noise_normal(42, 7, 0, 19) != noise_normal(43, 7, 0, 19));
    CHECK(noise_normal(42, 7, 0, 19) != noise_normal(42, 8, 0, 19));
    CHECK(noise_normal(42, 7, 0, 19) != noise_normal(42, 7, 0, 20));
}

TEST_CASE("noise normals have standard moments")
{
    const int count = 200000;
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0, cross = 0.0;
    for (int k = 0; k < count; ++k) {
        const double a = noise_normal(1, k / 100, 2 * (k % 50), static_cast<std::uint32_t>(k));
        const double b = noise_normal(1, k / 100, 2 * (k % 50) + 1, static_cast<std::uint32_t>(k));
        sum += a;
        sum2 += a * a;
        sum4 += a * a * a * a;
        cross += a * b;
    }
    const double n = count;
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sum2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(sum4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
    CHECK(std::abs(cross / n) < 4.0 / std::sqrt(n));
}

TEST_CASE("CounterRng streams")
{
    CounterRng a(9, 1), b(9, 1), c(9, 2);
    for (int k = 0; k < 100; ++k) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        CHECK(va != c.next_u64());
    }
    CounterRng parent(9, 1);
    auto s1 = parent.split(0), s2 = parent.split(1), s1b = parent.split(0);
    const double u = s1.uniform();
    CHECK(u == s1b.uniform());
    CHECK(u != s2.uniform());

    CounterRng r(5, 5);
    double lo = 1.0, hi = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double v = r.uniform();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        CHECK(r.below(7) < 7u);
    }
    CHECK(lo > 0.0);
    CHECK(hi <= 1.0);
}
