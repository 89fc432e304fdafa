// Serial reference kernels against their OpenMP versions.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "sns/ergodicity.hpp"
#include "sns/triads.hpp"

using namespace sns;

template <class F>
double seconds_per_call(F&& f, int reps)
{
    f();
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

int main()
{
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-14s %6s %10s %12s %12s %8s\n", "kernel", "n", "nnz", "serial_s", "omp_s", "speedup");
    volatile double sink = 0.0;
    for (std::size_t n : {64, 128, 256}) {
        const auto t = cached_torus_triads(n, "");
        CounterRng rng(1, n);
        SpectralField x(n), y(n), z(n);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = rng.normal();
            y[k] = rng.normal();
            z[k] = rng.normal();
        }
        const int reps = n <= 128 ? 200 : 50;
        const double bs = seconds_per_call([&] { sink = sink + B_apply_serial(x, t)[0]; }, reps);
        const double bp = seconds_per_call([&] { sink = sink + B_apply(x, t)[0]; }, reps);
        std::printf("%-14s %6zu %10zu %12.3e %12.3e %8.2f\n", "B_apply", n, t.nnz(), bs, bp, bs / bp);
        const double es = seconds_per_call([&] { sink = sink + b_eval_serial(x, y, z, t); }, reps);
        const double ep = seconds_per_call([&] { sink = sink + b_eval(x, y, z, t); }, reps);
        std::printf("%-14s %6zu %10zu %12.3e %12.3e %8.2f\n", "b_eval", n, t.nnz(), es, ep, es / ep);
    }

    // Monte Carlo batch: one worker against all workers
    const std::size_t n = 32;
    const auto s = Spectrum::torus(n);
    const auto t = cached_torus_triads(n, "");
    const auto c = power_law_coloring(s, 0.5, -1.0, 0.5);
    const Model model{s, t, c, Cutoff{5.0}, 1e-2};
    SpectralField x(n, 0.0);
    x[0] = 0.8;
    const int all = omp_get_max_threads();
    omp_set_num_threads(1);
    const double one = seconds_per_call([&] { sink = sink + simulate_endpoints(x, 1.0, model, 3, 256)[0][0]; }, 3);
    omp_set_num_threads(all);
    const double many = seconds_per_call([&] { sink = sink + simulate_endpoints(x, 1.0, model, 3, 256)[0][0]; }, 3);
    std::printf("%-14s %6zu %10d %12.3e %12.3e %8.2f\n", "endpoints", n, 256, one, many, one / many);
    return 0;
}
