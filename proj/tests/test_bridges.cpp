#include <doctest.h>

#include <cmath>

#include "mlshe/bridges.hpp"
#include "mlshe/she.hpp"

using namespace mlshe;

TEST_CASE("bridge sampler marginals") {
    rng::Stream stream(41);
    SUBCASE("endpoints are exact") {
        auto p = sample_bridge(1.25, -0.75, 2.0, 64, stream);
        CHECK(p.front() == 1.25);
        CHECK(p.back() == -0.75);
    }
    SUBCASE("midpoint mean and variance") {
        const int n = 20000, steps = 32;
        const double x = 1.0, y = -1.0, t = 1.0;
        double sum = 0.0, sumsq = 0.0;
        for (int s = 0; s < n; ++s) {
            auto p = sample_bridge(x, y, t, steps, stream);
            const double v = p[steps / 2];
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / n, var = sumsq / n - mean * mean;
        CHECK(std::abs(mean - 0.0) < 3.0 * std::sqrt(0.25 / n));
        CHECK(std::abs(var - t / 4.0) < 3.0 * (t / 4.0) * std::sqrt(2.0 / n));
    }
}

TEST_CASE("non-intersecting rejection sampler") {
    SUBCASE("n=1 accepts everything") {
        auto ens = sample_nonintersecting(WeylPoint{0.0}, WeylPoint{0.0}, 1.0, 16, 3, 10, 5);
        CHECK(ens.acceptance_rate == 1.0);
        CHECK(ens.samples.size() == 5);
    }
    SUBCASE("acceptance rate matches the reflection formula") {
        // difference of two independent bridges has diffusivity 2, so the
        // no-hit probability for x = y = (2,0), t = 1 is 1 - exp(-2*2/1)
        const int proposals = 10000;
        auto ens = sample_nonintersecting(WeylPoint{2.0, 0.0}, WeylPoint{2.0, 0.0}, 1.0, 8192, 5,
                                          200000, proposals, false);
        const double p = 1.0 - std::exp(-4.0);
        const double se = std::sqrt(p * (1.0 - p) / ens.proposals);
        CHECK(std::abs(ens.acceptance_rate - p) < 3.0 * se + 2e-3);
    }
    SUBCASE("acceptance rate matches the Karlin-McGregor ratio off-diagonal") {
        WeylPoint x{1.5, 0.0}, y{2.0, 0.3};
        const double t = 0.7;
        auto ens = sample_nonintersecting(x, y, t, 4096, 6, 200000, 4000, false);
        const double target = km_density(t, x, y) /
                              (heat_kernel(t, x[0] - y[0]) * heat_kernel(t, x[1] - y[1]));
        const double se = std::sqrt(target * (1.0 - target) / ens.proposals);
        CHECK(std::abs(ens.acceptance_rate - target) < 3.0 * se + 3e-3);
    }
    SUBCASE("accepted samples are strictly ordered at all stored times") {
        auto ens = sample_nonintersecting(WeylPoint{0.5, 0.0}, WeylPoint{0.4, -0.1}, 0.5, 256, 7, 100000, 10);
        for (const auto& sample : ens.samples)
            for (int k = 0; k <= ens.steps; ++k) CHECK(sample[0][k] > sample[1][k]);
    }
    SUBCASE("watermelon endpoints are offset and matched exactly") {
        auto ens = sample_nonintersecting(WeylPoint{1.0, 1.0}, WeylPoint{1.0, 1.0}, 1.0, 128, 8, 100000, 3);
        CHECK(ens.offset_applied);
        CHECK(ens.x[0] - ens.x[1] == doctest::Approx(1e-2));
        for (const auto& sample : ens.samples) {
            CHECK(sample[0][0] == ens.x[0]);
            CHECK(sample[1][0] == ens.x[1]);
            CHECK(sample[0].back() == ens.y[0]);
            CHECK(sample[1].back() == ens.y[1]);
        }
    }
    SUBCASE("watermelon offset bias is O(delta): halving changes little") {
        // compare the mean midpoint gap of the top two paths at the default
        // offset and at half of it; the difference is within sampling error
        // plus an O(delta) allowance
        auto mean_gap = [](double delta, std::uint64_t seed) {
            auto ens = sample_nonintersecting(WeylPoint{0.0, 0.0}, WeylPoint{0.0, 0.0}, 1.0, 256,
                                              seed, 4000000, 400, true, delta);
            double acc = 0.0;
            for (const auto& s : ens.samples) acc += s[0][128] - s[1][128];
            return acc / ens.samples.size();
        };
        const double g1 = mean_gap(0.01, 71), g2 = mean_gap(0.005, 72);
        CHECK(std::abs(g1 - g2) < 0.05 * g1 + 0.01);
    }
    SUBCASE("local-time estimates are stable under step doubling") {
        auto e1 = rk_squared_mc(1, 1, 1.0, WeylPoint{0.0}, WeylPoint{0.0}, 2000, 73, 2048);
        auto e2 = rk_squared_mc(1, 1, 1.0, WeylPoint{0.0}, WeylPoint{0.0}, 2000, 74, 4096);
        CHECK(std::abs(e1.estimate - e2.estimate) < 3.0 * (e1.std_error + e2.std_error) + 0.02);
    }
    SUBCASE("max_tries exhaustion is an error") {
        CHECK_THROWS_AS(sample_nonintersecting(WeylPoint{0.01, 0.0}, WeylPoint{0.01, 0.0}, 4.0, 64, 9, 3, 1),
                        std::runtime_error);
    }
}

TEST_CASE("band local-time estimator") {
    SUBCASE("linear crossing of slope one has unit local time") {
        const int steps = 2048;
        std::vector<double> a(steps + 1), b(steps + 1, 0.0);
        for (int k = 0; k <= steps; ++k) a[k] = static_cast<double>(k) / steps - 0.5;
        const double est = local_time_at_zero(a, b, 0.02, 1.0 / steps);
        CHECK(est == doctest::Approx(1.0).epsilon(0.03));
    }
    SUBCASE("paths never inside the band give zero") {
        std::vector<double> a(65, 1.0), b(65, 0.0);
        CHECK(local_time_at_zero(a, b, 0.1, 1.0 / 64) == 0.0);
    }
    SUBCASE("nonnegative and monotone under band refinement on linear paths") {
        const int steps = 4096;
        std::vector<double> a(steps + 1), b(steps + 1, 0.0);
        for (int k = 0; k <= steps; ++k) a[k] = 2.0 * k / steps - 1.0; // slope 2
        double prev = -1.0;
        for (double eps : {0.2, 0.1, 0.05}) {
            const double est = local_time_at_zero(a, b, eps, 1.0 / steps);
            CHECK(est >= 0.0);
            if (prev >= 0.0) CHECK(est <= prev * 1.05);
            prev = est;
        }
    }
    CHECK_THROWS_AS(local_time_at_zero({0.0, 0.0}, {0.0, 0.0}, -1.0, 0.5), std::invalid_argument);
}

TEST_CASE("r1_squared_exact") {
    CHECK(r1_squared_exact(1.0) == doctest::Approx(0.8862269254527580).epsilon(1e-12));
    CHECK(r1_squared_exact(4.0) == doctest::Approx(2.0 * r1_squared_exact(1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(r1_squared_exact(0.0), std::invalid_argument);

    SUBCASE("numerical double quadrature of R_1^2 agrees") {
        // int_0^1 int_R (p_s(y) p_{1-s}(y) / p_1(0))^2 dy ds with the
        // substitution s = sin^2(pi u / 2) flattening the endpoint
        // singularity: ds / sqrt(s(1-s)) = pi du.
        const int nu = 400, ny = 400;
        double acc = 0.0;
        for (int iu = 0; iu < nu; ++iu) {
            const double u = (iu + 0.5) / nu;
            const double s = std::sin(kPi * u / 2.0) * std::sin(kPi * u / 2.0);
            const double jac = (kPi / 2.0) * std::sin(kPi * u) / nu; // ds
            // p_s p_{1-s} is a Gaussian of variance s(1-s); scale the y grid
            // to resolve it near the endpoints
            const double sigma = std::sqrt(s * (1.0 - s));
            const double lo = -8.0 * sigma, hi = 8.0 * sigma, hy = (hi - lo) / ny;
            double inner = 0.0;
            for (int iy = 0; iy <= ny; ++iy) {
                const double wy = (iy == 0 || iy == ny) ? 0.5 : 1.0;
                const double yv = lo + iy * hy;
                const double r1 = heat_kernel(s, yv) * heat_kernel(1.0 - s, yv) / heat_kernel(1.0, 0.0);
                inner += wy * hy * r1 * r1;
            }
            acc += inner * jac;
        }
        CHECK(acc == doctest::Approx(r1_squared_exact(1.0)).epsilon(1e-4));
    }
}

TEST_CASE("local-time moments by monte carlo") {
    SUBCASE("k=1 n=1 pinned pair reproduces sqrt(pi)/2") {
        auto est = rk_squared_mc(1, 1, 1.0, WeylPoint{0.0}, WeylPoint{0.0}, 2000, 13, 8192);
        CHECK(std::abs(est.estimate - r1_squared_exact(1.0)) < 3.0 * est.std_error + 0.01);
    }
    SUBCASE("k=2 obeys Jensen against k=1") {
        auto e1 = rk_squared_mc(1, 1, 1.0, WeylPoint{0.0}, WeylPoint{0.0}, 1500, 14, 4096);
        auto e2 = rk_squared_mc(2, 1, 1.0, WeylPoint{0.0}, WeylPoint{0.0}, 1500, 14, 4096);
        CHECK(e2.estimate >= e1.estimate * e1.estimate / 2.0 - 3.0 * e2.std_error);
    }
    SUBCASE("well separated layers decouple") {
        WeylPoint x{10.0, 0.0};
        auto est = rk_squared_mc(1, 2, 1.0, x, x, 800, 15, 4096);
        CHECK(std::abs(est.estimate - 2.0 * r1_squared_exact(1.0)) < 3.0 * est.std_error + 0.02);
    }
}

TEST_CASE("exponential moment estimator") {
    SUBCASE("a=0 gives exactly one") {
        auto est = exp_moment_mc(0.0, 1, 1.0, WeylPoint{0.0}, WeylPoint{0.0}, 50, 16, 512);
        CHECK(est.estimate == 1.0);
        CHECK(est.std_error == 0.0);
    }
    SUBCASE("positive a gives at least one, with the ratio prefactor") {
        auto est = exp_moment_mc(0.5, 1, 1.0, WeylPoint{0.3}, WeylPoint{-0.2}, 200, 17, 1024);
        CHECK(est.estimate >= 1.0);
        CHECK(est.prefactor ==
              doctest::Approx(std::pow(heat_kernel(1.0, 0.5), 2)).epsilon(1e-12));
        CHECK(est.saturated == 0);
    }
    SUBCASE("series and direct estimates agree on shared samples") {
        // E[e^L] vs sum_{k<=6} E[L^k]/k! computed from the same sample set
        const int samples = 1200, steps = 4096;
        const double eps = default_band_eps(1.0, steps);
        double direct = 0.0, series = 0.0, diffsq = 0.0;
        for (int s = 0; s < samples; ++s) {
            const double lt = detail::pairwise_local_time_sum(WeylPoint{0.0}, WeylPoint{0.0}, 1.0,
                                                              steps, eps, rng::derive_seed(18, s), 100);
            double partial = 0.0, term = 1.0;
            for (int k = 1; k <= 6; ++k) {
                term *= lt / k;
                partial += term;
            }
            const double d = std::exp(lt) - (1.0 + partial);
            direct += std::exp(lt);
            series += 1.0 + partial;
            diffsq += d * d;
        }
        direct /= samples;
        series /= samples;
        const double tail_mean = direct - series; // tail of the exponential series, >= 0
        CHECK(tail_mean >= 0.0);
        CHECK(tail_mean < 0.05 * direct);
    }
}

TEST_CASE("solver second moment ties to the local-time exponential moment") {
    // E[Z_1(t,0,0)^2] / p_t(0)^2 = E[exp(sum L)] for two independent pinned
    // bridges: the chaos expansion squares to the k!-weighted local-time
    // moments. Both sides by Monte Carlo, compared within a joint interval
    // that also carries the lattice bias allowance of the solver.
    const double t = 0.5;
    GridSpec g(-4.0, 4.0, 321, t, 1600);
    const int seeds = 600;
    std::vector<double> vals(seeds);
    parallel_for(seeds, [&](std::size_t s) {
        NoiseField noise = sample_noise(g, rng::derive_seed(777001, s));
        FieldTrajectory u = solve_she(g, noise, InitialData::delta(0.0));
        const double v = u(g.nt, g.nearest_node(0.0));
        vals[s] = v * v;
    });
    double sum = 0.0, sumsq = 0.0;
    for (double v : vals) {
        sum += v;
        sumsq += v * v;
    }
    const double p2 = std::pow(heat_kernel(t, 0.0), 2);
    const double lhs = sum / seeds / p2;
    const double lhs_se = std::sqrt((sumsq / seeds - (sum / seeds) * (sum / seeds)) / seeds) / p2;

    auto rhs = exp_moment_mc(1.0, 1, t, WeylPoint{0.0}, WeylPoint{0.0}, 1500, 777002, 4096);
    CHECK(rhs.saturated == 0);
    const double joint = 3.0 * (lhs_se + rhs.std_error) + 0.1 * rhs.estimate;
    CHECK(std::abs(lhs - rhs.estimate) < joint);
}
