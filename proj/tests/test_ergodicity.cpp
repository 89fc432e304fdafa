#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "sns/ergodicity.hpp"
#include "sns/rng.hpp"

using namespace sns;

namespace {

double dist(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(acc);
}

double within(const Estimate& e, double expected) { return std::abs(e.mean - expected) / e.stderr_; }

double combined(const Estimate& a, const Estimate& b)
{
    return std::abs(a.mean - b.mean) / std::hypot(a.stderr_, b.stderr_);
}

SpectralField low_mode_x(std::size_t n)
{
    SpectralField x(n, 0.0);
    x[0] = 0.8;
    x[3] = -0.5;
    x[6] = 0.3;
    x[9 % n] = 0.2;
    return x;
}

/// Linear Gaussian endpoint law of mode k from x at time t.
struct Marginal {
    double mean, sd;
};

Marginal linear_marginal(const Spectrum& s, const Coloring& c, std::span<const double> x, std::size_t k, double t)
{
    const double var = c[k] * c[k] * -std::expm1(-2.0 * s[k] * t) / (2.0 * s[k]);
    return {std::exp(-s[k] * t) * x[k], std::sqrt(var)};
}

}  // namespace

TEST_CASE("observables")
{
    const auto s = Spectrum::torus(8);
    SpectralField u{0.5, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0};
    CHECK(Observable::coordinate(1)(u, s) == -2.0);
    CHECK(Observable::squared(1)(u, s) == 4.0);
    CHECK(Observable::fractional_norm(0.25)(u, s) == fractional_norm(u, s, 0.25));
    CHECK(Observable::constant(1.0)(u, s) == 1.0);
    const auto b = Observable::bounded(7, 0.5);
    CHECK(b(u, s) == std::tanh(6.0));
    CHECK(b.is_bounded());
    CHECK(b.sup_norm() == 1.0);
    CHECK_FALSE(Observable::coordinate(0).is_bounded());
    for (double x : {-1e3, -2.0, 0.0, 0.3, 50.0}) {
        SpectralField v(8, 0.0);
        v[7] = x;
        CHECK(std::abs(b(v, s)) <= 1.0);
    }
    CHECK(b.derivative(0.2) == doctest::Approx((std::tanh(0.2002 / 0.5) - std::tanh(0.1998 / 0.5)) / 4e-4).epsilon(1e-6));
    CHECK_THROWS_AS(Observable::bounded(0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Observable::coordinate(9)(u, s), std::out_of_range);
    CHECK(b.descriptor() == "tanh(7,0.5)");
}

TEST_CASE("summaries and pairwise sums")
{
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i % 7);
    const auto e = summarize(v);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= 1000.0;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    CHECK(e.mean == doctest::Approx(mean).epsilon(1e-14));
    CHECK(e.stderr_ == doctest::Approx(std::sqrt(var / 999.0 / 1000.0)).epsilon(1e-12));
    CHECK(e.M == 1000);
    const std::vector<double> same(37, 1.0);
    CHECK(summarize(same).stderr_ == 0.0);
    CHECK(pairwise_sum(same) == 37.0);
    MCConfig mc;
    mc.M = 1;
    CHECK_THROWS_AS(mc.validate(), std::invalid_argument);
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("gaussian_expectation")
{
    CHECK(gaussian_expectation([](double x) { return x * x; }, 0.3, 0.7) == doctest::Approx(0.09 + 0.49).epsilon(1e-12));
    CHECK(std::abs(gaussian_expectation([](double x) { return std::tanh(x); }, 0.0, 1.3)) < 1e-14);
    CHECK(gaussian_expectation([](double x) { return std::cos(x); }, 0.0, 0.5) ==
          doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
    CHECK(gaussian_expectation([](double x) { return x; }, 2.0, 0.0) == 2.0);
}

TEST_CASE("simulate_u examples")
{
    const std::size_t n = 8;
    const auto s = Spectrum::torus(n);
    const auto c = power_law_coloring(s, 0.5);
    const TriadTable linear(n);
    const Model model{s, linear, c, Cutoff{5.0}, 1e-2};
    const auto x = low_mode_x(n);
    CHECK(simulate_u(x, 0.0, model, {1, 0}) == x);

    const double t = 0.5;
    const auto ends = simulate_endpoints(x, t, model, 17, 10000);
    for (std::size_t k : {0u, 3u, 6u, 7u}) {
        std::vector<double> col(ends.size()), sq(ends.size());
        const auto law = linear_marginal(s, c, x, k, t);
        for (std::size_t i = 0; i < ends.size(); ++i) {
            col[i] = ends[i][k];
            sq[i] = (ends[i][k] - law.mean) * (ends[i][k] - law.mean);
        }
        CHECK(within(summarize(col), law.mean) < 3.0);
        CHECK(within(summarize(sq), law.sd * law.sd) < 3.0);
    }
    CHECK(simulate_endpoints(x, t, model, 17, 3)[2] == simulate_u(x, t, model, {17, 2}));
}

TEST_CASE("simulate_u without cutoff reproduces integrate")
{
    const std::size_t n = 16;
    const auto s = Spectrum::torus(n);
    const auto t = cached_torus_triads(n, "");
    const auto c = power_law_coloring(s, 0.5, -1.0, 0.5);
    const Model model{s, t, c, Cutoff{std::numeric_limits<double>::infinity()}, 1e-3};
    const auto x = low_mode_x(n);
    const auto u = simulate_u(x, 1.0, model, {33, 4});
    SolverConfig cfg;
    const auto traj = integrate(x, ou_sample_path(1.0, 1e-3, c, s, {33, 4}), cfg, s, t);
    CHECK(dist(u, traj.u.back()) <= 1e-12);
}

TEST_CASE("simulate_u golden endpoint")
{
    std::ifstream in(std::string(SNS_GOLDEN_DIR) + "/simulate_u_endpoint.json");
    REQUIRE(in.good());
    const auto g = nlohmann::json::parse(in);
    const std::size_t n = g["n"];
    const auto s = Spectrum::torus(n);
    const auto t = cached_torus_triads(n, "");
    const auto c = power_law_coloring(s, g["coloring"]["gamma"], -1.0, g["coloring"]["scale"]);
    const Model model{s, t, c, Cutoff{g["cutoff_R"].get<double>()}, g["dt"].get<double>()};
    SpectralField x(n, 0.0);
    for (auto& [k, v] : g["x"].items()) x[std::stoul(k)] = v.get<double>();
    const auto u = simulate_u(x, g["t"], model, {g["seed"].get<std::uint64_t>(), g["trajectory"].get<std::uint64_t>()});
    CHECK(dist(u, g["u_t"].get<std::vector<double>>()) <= 1e-12);
}

TEST_CASE("semigroup_estimate examples")
{
    const std::size_t n = 8;
    const auto s = Spectrum::torus(n);
    const auto c = power_law_coloring(s, 0.5);
    const TriadTable linear(n);
    const Model model{s, linear, c, Cutoff{5.0}, 1e-2};
    const auto x = low_mode_x(n);
    MCConfig mc;
    mc.M = 4000;
    mc.t = 0.7;
    const auto e = semigroup_estimate(Observable::coordinate(0), x, model, mc);
    CHECK(within(e, std::exp(-s[0] * 0.7) * x[0]) < 3.0);

    mc.t = 0.0;
    const auto phi = Observable::bounded(3, 0.4);
    const auto e0 = semigroup_estimate(phi, x, model, mc);
    CHECK(e0.mean == phi(x, s));
    CHECK(e0.stderr_ == 0.0);

    const auto t = cached_torus_triads(n, "");
    const Model nonlinear{s, t, c, Cutoff{5.0}, 1e-2};
    mc.t = 1.0;
    mc.M = 500;
    const auto eb = semigroup_estimate(phi, x, nonlinear, mc);
    CHECK(std::abs(eb.mean) <= 1.0);
}

TEST_CASE("time_average examples")
{
    const std::size_t n = 8;
    const auto s = Spectrum::torus(n);
    const auto c = power_law_coloring(s, 0.5);
    const TriadTable linear(n);
    const Model model{s, linear, c, Cutoff{5.0}, 1e-2};
    MCConfig mc;
    mc.M = 200;
    mc.t = 30.0;
    mc.burn_in = 10.0 / s[0];
    const SpectralField zero(n, 0.0);
    const auto e = time_average(Observable::squared(0), zero, model, mc);
    CHECK(within(e, c[0] * c[0] / (2.0 * s[0])) < 3.0);

    const auto one = time_average(Observable::constant(1.0), low_mode_x(n), model, mc);
    CHECK(one.mean == 1.0);
    CHECK(one.stderr_ == 0.0);

    mc.burn_in = 30.0;
    CHECK_THROWS_AS(time_average(Observable::squared(0), zero, model, mc), std::invalid_argument);

    // Initial-condition independence on the nonlinear system, independent streams per start.
    const auto t = cached_torus_triads(n, "");
    const auto cs = power_law_coloring(s, 0.5, -1.0, 0.5);
    const Model nonlinear{s, t, cs, Cutoff{5.0}, 1e-2};
    mc.burn_in = 5.0;
    mc.t = 25.0;
    mc.thinning = 5;
    SpectralField x1 = low_mode_x(n), x2(n, 0.0);
    x2[1] = -0.7;
    x2[4] = 0.5;
    mc.seed = derive_seed(3, 1);
    const auto a = time_average(Observable::squared(0), x1, nonlinear, mc);
    mc.seed = derive_seed(3, 2);
    const auto b = time_average(Observable::squared(0), x2, nonlinear, mc);
    CHECK(combined(a, b) < 3.0);
}

TEST_CASE("histogram tools")
{
    const auto edges = freedman_diaconis_edges({0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0});
    CHECK(edges.front() == 0.0);
    CHECK(edges.back() == 7.0);
    const std::vector<double> pts{0.0, 3.5, 7.0, 7.0};
    std::size_t total = 0;
    for (auto c : histogram(pts, edges)) total += c;
    CHECK(total == 4);
    const auto single = freedman_diaconis_edges({2.0, 2.0, 2.0});
    CHECK(single.size() == 2);
    const std::vector<double> a(50, 0.0), b(50, 1.0);
    CHECK(histogram_tv(a, b) == 1.0);
    CHECK(histogram_tv(a, a) == 0.0);
}

TEST_CASE("tv_distance_proxy examples")
{
    const std::size_t n = 8;
    const auto s = Spectrum::torus(n);
    const auto t = cached_torus_triads(n, "");
    const auto c = power_law_coloring(s, 0.5, -1.0, 0.5);
    const Model model{s, t, c, Cutoff{5.0}, 1e-2};
    const std::vector<Observable> obs{Observable::coordinate(0), Observable::coordinate(1)};
    SpectralField x(n, 0.0), y(n, 0.0);
    x[0] = 1.0;
    y[0] = -1.0;
    y[1] = 0.6;
    MCConfig mc;
    mc.M = 2000;
    CHECK(tv_distance_proxy(x, y, 0.0, obs, model, mc).value == 1.0);
    CHECK_THROWS_AS(tv_distance_proxy(x, y, 1.0, {obs[0]}, model, mc), std::invalid_argument);

    std::vector<double> trend;
    for (double time : {0.5, 1.0, 2.0, 4.0}) {
        trend.push_back(tv_distance_proxy(x, y, time, obs, model, mc).value);
        const double same = tv_distance_proxy(x, x, time, obs, model, mc).value;
        CHECK(same == 0.0);
        const double floor = tv_distance_proxy(x, x, time, obs, model, mc, Coupling::Independent).value;
        CHECK(floor > 0.0);
        CHECK(floor <= 3.0 * 2.0 / std::sqrt(static_cast<double>(mc.M)));
    }
    for (std::size_t i = 1; i < trend.size(); ++i) CHECK(trend[i] < trend[i - 1]);
}

TEST_CASE("derivative_flow examples")
{
    const std::size_t n = 16;
    const auto s = Spectrum::torus(n);
    const auto c = power_law_coloring(s, 0.5, -1.0, 0.5);
    const auto x = low_mode_x(n);
    SpectralField h(n);
    for (std::size_t k = 0; k < n; ++k) h[k] = 1.0 / (k + 1.0);

    const TriadTable linear(n);
    const Model lin{s, linear, c, Cutoff{5.0}, 1e-3};
    const auto flow = derivative_flow(x, h, 1.0, lin, {2, 0});
    for (std::size_t m = 0; m < flow.U.size(); m += 50)
        CHECK(dist(flow.U.fields[m], semigroup_apply(h, s, flow.U.times[m])) <= 1e-12);

    const auto t = cached_torus_triads(n, "");
    const Model model{s, t, c, Cutoff{5.0}, 1e-3};
    const auto zero_h = derivative_flow(x, SpectralField(n, 0.0), 0.5, model, {2, 0});
    for (const auto& U : zero_h.U.fields) CHECK(norm(U) == 0.0);

    const auto nl = derivative_flow(x, h, 1.0, model, {2, 0});
    CHECK(dist(nl.u.back(), simulate_u(x, 1.0, model, {2, 0})) == 0.0);
    std::vector<double> err;
    for (double delta : {1e-2, 1e-3}) {
        SpectralField xp = x;
        for (std::size_t k = 0; k < n; ++k) xp[k] += delta * h[k];
        const auto a = simulate_u(xp, 1.0, model, {2, 0});
        const auto b = simulate_u(x, 1.0, model, {2, 0});
        SpectralField fd(n);
        for (std::size_t k = 0; k < n; ++k) fd[k] = (a[k] - b[k]) / delta;
        err.push_back(dist(nl.U.back(), fd));
    }
    CHECK(err[1] < err[0]);
    CHECK(err[0] / err[1] == doctest::Approx(10.0).epsilon(0.3));
}

TEST_CASE("gronwall_flow_check examples")
{
    const std::size_t n = 16;
    const auto s = Spectrum::torus(n);
    const auto c = power_law_coloring(s, 0.5, -1.0, 0.5);
    const auto x = low_mode_x(n);
    SpectralField h(n);
    for (std::size_t k = 0; k < n; ++k) h[k] = 1.0 / (k + 1.0);

    const TriadTable linear(n);
    const Model lin{s, linear, c, Cutoff{5.0}, 1e-3};
    const auto flow = derivative_flow(x, h, 1.0, lin, {2, 0});
    const auto g = gronwall_flow_check(flow, h, s, 0.0);
    double exact = 0.0;
    for (std::size_t k = 0; k < n; ++k) exact += h[k] * h[k] * -std::expm1(-2.0 * s[k]) / 2.0;
    CHECK(g.lhs == doctest::Approx(exact).epsilon(1e-5));
    CHECK(g.rhs == doctest::Approx(2.0 * dot(h, h)));
    CHECK(g.ok);

    const auto t = cached_torus_triads(n, "");
    const Model model{s, t, c, Cutoff{5.0}, 1e-3};
    CounterRng rng(4, 4);
    const double c0 = b_bound_constant_probe(t, s, {}, 2000, rng);
    const auto zero = gronwall_flow_check(derivative_flow(x, SpectralField(n, 0.0), 1.0, model, {3, 0}), SpectralField(n, 0.0), s, c0);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.ok);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto rep = gronwall_flow_check(derivative_flow(x, h, 1.0, model, {seed, 0}), h, s, c0);
        CHECK(rep.ok);
        CHECK(rep.lhs > 0.0);
        CHECK(rep.rhs_displayed > 0.0);
    }
}

TEST_CASE("noise_inverse_bound_check examples")
{
    CounterRng rng(6, 6);
    const auto s = Spectrum::torus(64);
    const auto half = power_law_coloring(s, 0.5);
    const auto r = noise_inverse_bound_check(half, s, 200, rng);
    CHECK(r.max_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.ok);
    // Single mode e_k gives 1 / (g_k^2 lambda_k), the largest of which bounds every mixture.
    const auto c3 = power_law_coloring(s, 0.3);
    double best = 0.0;
    for (std::size_t k = 0; k < 64; ++k) best = std::max(best, 1.0 / (c3[k] * c3[k] * s[k]));
    const auto r3 = noise_inverse_bound_check(c3, s, 200, rng);
    CHECK(r3.max_ratio == doctest::Approx(best).epsilon(1e-12));
    CHECK(r3.ok);
    const auto s32 = Spectrum::torus(32);
    const auto r32 = noise_inverse_bound_check(power_law_coloring(s32, 0.3), s32, 200, rng);
    CHECK(r3.max_ratio <= 1.05 * r32.max_ratio);
    // Too smooth a coloring (g_k = lambda_k^{-3/4}) leaves V outside the range: the ratio grows with n.
    ColoringSpec smooth;
    smooth.kind = ColoringKind::Raw;
    for (std::size_t k = 0; k < 64; ++k) smooth.raw.push_back(std::pow(s[k], -0.75));
    CHECK_FALSE(noise_inverse_bound_check(make_coloring(smooth, s), s, 10, rng).ok);
    CHECK(noise_inverse_bound_check(constant_coloring(64), s, 10, rng).ok);
}

TEST_CASE("gradient estimators on the linear backend")
{
    const std::size_t n = 8;
    const auto s = Spectrum::torus(n);
    const auto c = power_law_coloring(s, 0.5);
    const TriadTable linear(n);
    const Model model{s, linear, c, Cutoff{5.0}, 1e-2};
    const auto x = low_mode_x(n);
    const auto h = unit_field(n, 0);
    MCConfig mc;
    mc.M = 10000;
    mc.t = 1.0;
    mc.seed = 77;

    const auto lin = bismut_gradient(Observable::coordinate(0), x, h, model, mc);
    CHECK(within(lin, std::exp(-s[0])) < 3.0);

    const double scale = 0.5;
    const auto phi = Observable::bounded(0, scale);
    const auto law = linear_marginal(s, c, x, 0, 1.0);
    const double oracle =
        std::exp(-s[0]) * gaussian_expectation([&](double v) { return phi.derivative(v); }, law.mean, law.sd);
    const auto bg = bismut_gradient(phi, x, h, model, mc);
    CHECK(within(bg, oracle) < 3.0);
    const auto fd = finite_difference_gradient(phi, x, h, model, mc, 1e-4);
    CHECK(within(fd, oracle) < 3.0);
    const auto fd2 = finite_difference_gradient(phi, x, h, model, mc, 1e-2);
    CHECK(combined(fd, fd2) < 3.0);

    const auto flat = bismut_gradient(phi, x, SpectralField(n, 0.0), model, mc);
    CHECK(flat.mean == 0.0);
    CHECK(flat.stderr_ == 0.0);
    mc.t = 0.0;
    CHECK_THROWS_AS(bismut_gradient(phi, x, h, model, mc), std::invalid_argument);
}

TEST_CASE("bismut agrees with finite differences on the truncated torus system")
{
    const std::size_t n = 16;
    const auto s = Spectrum::torus(n);
    const auto t = cached_torus_triads(n, "");
    const auto c = power_law_coloring(s, 0.5, -1.0, 0.5);
    const Model model{s, t, c, Cutoff{5.0}, 1e-2};
    const auto x = low_mode_x(n);
    MCConfig mc;
    mc.M = 4000;
    mc.seed = 5;
    const auto h = unit_field(n, 1);
    const auto phi = Observable::bounded(1, 0.3);
    const auto bg = bismut_gradient(phi, x, h, model, mc);
    mc.seed = derive_seed(5, 1);
    const auto fd = finite_difference_gradient(phi, x, h, model, mc, 1e-3);
    CHECK(combined(bg, fd) < 3.0);
}

TEST_CASE("sf_lipschitz_probe examples")
{
    const std::size_t n = 8;
    const auto s = Spectrum::torus(n);
    const auto c = power_law_coloring(s, 0.5);
    const TriadTable linear(n);
    const Model model{s, linear, c, Cutoff{5.0}, 1e-2};
    MCConfig mc;
    mc.M = 4000;
    const auto phi = Observable::bounded(0, 0.5);
    const auto x = low_mode_x(n);
    std::vector<std::pair<SpectralField, SpectralField>> pairs{{x, x}};
    const auto skipped = sf_lipschitz_probe(phi, pairs, model, mc);
    CHECK(skipped.pairs.empty());
    CHECK(skipped.max_ratio == 0.0);

    // Gaussian Lipschitz constant of x -> E tanh((e^{-lambda t} x_0 + sd Z) / scale), attained at mean 0.
    const auto law = linear_marginal(s, c, x, 0, 1.0);
    const double L =
        std::exp(-s[0]) * gaussian_expectation([&](double v) { return phi.derivative(v); }, 0.0, law.sd);
    CounterRng rng(10, 1);
    pairs.clear();
    for (int i = 0; i < 5; ++i) {
        SpectralField a = x, b = x;
        a[0] = rng.uniform(-1.0, 1.0);
        b[0] = a[0] + 0.1;
        b[2] += 0.05;
        pairs.push_back({a, b});
    }
    const auto probe = sf_lipschitz_probe(phi, pairs, model, mc);
    CHECK(probe.pairs.size() == 5);
    for (const auto& p : probe.pairs) CHECK(p.ratio <= L + 3.0 * p.stderr_);
}

TEST_CASE("clopper_pearson")
{
    auto [lo, hi] = clopper_pearson(0, 10);
    CHECK(lo == 0.0);
    CHECK(hi == doctest::Approx(1.0 - std::pow(0.025, 0.1)).epsilon(1e-12));
    std::tie(lo, hi) = clopper_pearson(10, 10);
    CHECK(lo == doctest::Approx(std::pow(0.025, 0.1)).epsilon(1e-12));
    CHECK(hi == 1.0);
    std::tie(lo, hi) = clopper_pearson(5, 10);
    CHECK(lo == doctest::Approx(0.18708602).epsilon(1e-7));
    CHECK(hi == doctest::Approx(0.81291398).epsilon(1e-7));
    CHECK_THROWS_AS(clopper_pearson(11, 10), std::invalid_argument);
}

TEST_CASE("irreducibility_probe examples")
{
    const std::size_t n = 16;
    const auto s = Spectrum::torus(n);
    const auto t = cached_torus_triads(n, "");
    const auto c = power_law_coloring(s, 0.5, -1.0, 0.01);
    const Model model{s, t, c, Cutoff{std::numeric_limits<double>::infinity()}, 1e-3};
    const auto x = low_mode_x(n);
    SpectralField y(n, 0.0);
    y[1] = -0.4;
    y[3] = 0.35;
    const auto ctl = synthesize_control(x, y, 1.0, 0.25, 0.75, 0.3, s, t, 1e-4);
    MCConfig mc;
    mc.M = 50;
    const auto none = irreducibility_probe(x, y, ctl.zbar, 1.0, 0.0, model, mc);
    CHECK(none.hits == 0);
    CHECK(none.ci_low == 0.0);
    const auto all = irreducibility_probe(x, y, ctl.zbar, 1.0, 1e3, model, mc);
    CHECK(all.frequency == 1.0);
    CHECK(all.ci_high == 1.0);
    CHECK(all.ci_low > 0.9);
}
