#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace sns {

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
/// Stateless: every output block is a pure function of (counter, key).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key);
};

/// SplitMix64 finalizer, used to derive child stream identifiers.
std::uint64_t mix64(std::uint64_t z);

/// Uniform double in (0, 1] from 64 random bits.
double to_unit_open_closed(std::uint64_t bits);

/// Standard normal variates addressed by (seed, trajectory, mode, step).
///
/// Modes 2m and 2m+1 share one Philox block through Box-Muller, so each address maps to a fixed
/// variate independent of how many modes, trajectories or threads are in use.
double noise_normal(std::uint64_t seed, std::uint64_t trajectory, std::uint32_t mode, std::uint32_t step);

/// Fills out[m] = noise_normal(seed, trajectory, m, step) for m < out.size().
void fill_noise_normals(std::uint64_t seed, std::uint64_t trajectory, std::uint32_t step,
                        std::span<double> out);

/// Sequential generator over a single counter-based stream; used for sampling random test fields,
/// pairs and other auxiliary draws.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform();  // in (0, 1]
    double uniform(double lo, double hi);
    double normal();
    std::uint64_t below(std::uint64_t bound);  // uniform in [0, bound)

    /// Independent child stream; deterministic in (seed, stream, child).
    CounterRng split(std::uint64_t child) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sns
