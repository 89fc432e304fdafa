#include "sns/rng.hpp"

#include <cmath>
#include <numbers>

namespace sns {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline Philox4x32::Key key_of(std::uint64_t seed)
{
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

inline std::uint64_t join(std::uint32_t hi, std::uint32_t lo)
{
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key)
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double to_unit_open_closed(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

namespace {

inline void box_muller(const Philox4x32::Counter& w, double& z0, double& z1)
{
    const double u1 = to_unit_open_closed(join(w[0], w[1]));
    const double u2 = to_unit_open_closed(join(w[2], w[3]));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(angle);
    z1 = r * std::sin(angle);
}

inline Philox4x32::Counter noise_block(std::uint64_t seed, std::uint64_t trajectory, std::uint32_t pair,
                                       std::uint32_t step)
{
    return Philox4x32::block(
        {pair, step, static_cast<std::uint32_t>(trajectory), static_cast<std::uint32_t>(trajectory >> 32)},
        key_of(seed));
}

}  // namespace

double noise_normal(std::uint64_t seed, std::uint64_t trajectory, std::uint32_t mode, std::uint32_t step)
{
    double z0, z1;
    box_muller(noise_block(seed, trajectory, mode / 2, step), z0, z1);
    return (mode % 2 == 0) ? z0 : z1;
}

void fill_noise_normals(std::uint64_t seed, std::uint64_t trajectory, std::uint32_t step,
                        std::span<double> out)
{
    const std::size_t n = out.size();
    for (std::size_t m = 0; m < n; m += 2) {
        double z0, z1;
        box_muller(noise_block(seed, trajectory, static_cast<std::uint32_t>(m / 2), step), z0, z1);
        out[m] = z0;
        if (m + 1 < n) out[m + 1] = z1;
    }
}

// Auxiliary streams use a distinct counter layout: word 3 carries a tag bit so they never alias the
// noise addresses above for the same seed.
CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(mix64(stream)) {}

std::uint64_t CounterRng::next_u64()
{
    if (used_ >= 4) {
        buffer_ = Philox4x32::block({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(stream_),
                                     static_cast<std::uint32_t>(stream_ >> 32),
                                     static_cast<std::uint32_t>(counter_ >> 32) | 0x80000000u},
                                    key_of(seed_));
        ++counter_;
        used_ = 0;
    }
    const std::uint64_t v = join(buffer_[used_], buffer_[used_ + 1]);
    used_ += 2;
    return v;
}

double CounterRng::uniform() { return to_unit_open_closed(next_u64()); }

double CounterRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double CounterRng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_normal_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t bound)
{
    // Rejection keeps the draw unbiased for any bound.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
        const std::uint64_t v = next_u64();
        if (v < limit) return v % bound;
    }
}

CounterRng CounterRng::split(std::uint64_t child) const
{
    CounterRng r(seed_, 0);
    r.stream_ = mix64(stream_ ^ mix64(child + 0x632be59bd9b4e019ull));
    return r;
}

}  // namespace sns
