#include <doctest.h>

#include <cmath>

#include "mlshe/analysis.hpp"
#include "mlshe/rng.hpp"

using namespace mlshe;

TEST_CASE("holder exponent estimator") {
    SUBCASE("smooth sinusoid reads as resolution-capped smooth") {
        std::vector<std::vector<double>> slices;
        for (int s = 0; s < 25; ++s) {
            std::vector<double> row(512);
            for (int i = 0; i < 512; ++i) row[i] = std::sin(0.01 * i + 0.3 * s);
            slices.push_back(std::move(row));
        }
        auto rep = holder_exponent(slices, 0.01, Direction::space, {2, 4, 8, 16, 32});
        CHECK(rep.alpha_hat >= 0.95);
    }
    SUBCASE("random walks read as alpha = 1/2") {
        std::vector<std::vector<double>> slices;
        for (int s = 0; s < 200; ++s) {
            rng::Stream stream(rng::derive_seed(7, s));
            std::vector<double> row(2048);
            double acc = 0.0;
            for (int i = 0; i < 2048; ++i) {
                acc += stream.normal();
                row[i] = acc;
            }
            slices.push_back(std::move(row));
        }
        auto rep = holder_exponent(slices, 1.0, Direction::space, {2, 4, 8, 16, 32});
        CHECK(rep.alpha_hat == doctest::Approx(0.5).epsilon(0.1));
        CHECK(std::abs(rep.alpha_hat - 0.5) < 0.05);
    }
    SUBCASE("constant field is an error") {
        std::vector<std::vector<double>> slices(25, std::vector<double>(128, 1.0));
        CHECK_THROWS_AS(holder_exponent(slices, 1.0, Direction::space, {2, 4, 8, 16, 32}),
                        std::invalid_argument);
    }
    SUBCASE("input validation") {
        std::vector<std::vector<double>> few(5, std::vector<double>(128, 0.0));
        CHECK_THROWS_AS(holder_exponent(few, 1.0, Direction::space, {2, 4, 8, 16, 32}),
                        std::invalid_argument);
        std::vector<std::vector<double>> ok(25, std::vector<double>(128, 0.0));
        CHECK_THROWS_AS(holder_exponent(ok, 1.0, Direction::space, {2, 4}), std::invalid_argument);
    }
}

TEST_CASE("positivity report") {
    SUBCASE("all ones") {
        auto rep = positivity_report(std::vector<double>(100, 1.0), 0.0);
        CHECK(rep.fraction_positive == 1.0);
        CHECK(rep.min_value == 1.0);
    }
    SUBCASE("one negative entry among many") {
        std::vector<double> v(1000000, 1.0);
        v[31337] = -1.0;
        auto rep = positivity_report(v, 0.0);
        CHECK(rep.fraction_positive == doctest::Approx(1.0 - 1e-6));
        CHECK(rep.min_value == -1.0);
        CHECK(rep.argmin == 31337);
    }
    CHECK_THROWS_AS(positivity_report({}, 0.0), std::invalid_argument);
}

TEST_CASE("two-sample comparison") {
    auto gaussians = [](int n, double mean, double sd, std::uint64_t seed) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = mean + sd * rng::normal(seed, i);
        return v;
    };
    SUBCASE("identical sets pass") {
        auto a = gaussians(500, 0.0, 1.0, 11);
        auto cmp = compare_ensembles(a, a);
        CHECK(cmp.pass);
    }
    SUBCASE("sets shifted by ten standard errors fail") {
        auto a = gaussians(500, 0.0, 1.0, 12);
        auto b = gaussians(500, 10.0 / std::sqrt(500.0), 1.0, 13);
        auto cmp = compare_ensembles(a, b);
        CHECK_FALSE(cmp.mean_overlap);
        CHECK_FALSE(cmp.pass);
    }
    SUBCASE("same law, different seeds pass") {
        auto a = gaussians(800, 0.3, 0.7, 14);
        auto b = gaussians(800, 0.3, 0.7, 15);
        CHECK(compare_ensembles(a, b).pass);
    }
    SUBCASE("undersized sets are rejected") {
        auto a = gaussians(50, 0.0, 1.0, 16);
        CHECK_THROWS_AS(compare_ensembles(a, a), std::invalid_argument);
    }
}

TEST_CASE("kernel continuity check: n=1 heat kernel case") {
    // classical case: the three integrals scale like r, h^alpha (alpha -> 1/2
    // with a log for the temporal one), and h^{1/2}
    ContinuitySpec spec;
    spec.ns = 12;
    spec.ny = 120;
    auto chk = kernel_continuity_check(WeylPoint{0.0}, 0.5, {0.02, 0.04, 0.08, 0.16}, spec);
    CHECK(chk.spatial_slope == doctest::Approx(1.0).epsilon(0.1));
    CHECK(chk.tail_slope == doctest::Approx(0.5).epsilon(0.12));
    CHECK(chk.temporal_slope > 0.3);
    CHECK(chk.temporal_slope < 0.65);
    // ratio-bound form: one constant C with lhs <= C |x-z| across the sweep,
    // i.e. the ratios lhs/|x-z| stay within a narrow band
    double rmin = 1e300, rmax = 0.0;
    for (std::size_t i = 0; i < chk.increments.size(); ++i) {
        const double r = chk.spatial_lhs[i] / chk.increments[i];
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    CHECK(rmax / rmin < 1.5);
    SUBCASE("zero increment integrates to zero") {
        // x = z makes the spatial integrand identically zero
        std::vector<double> xs{0.0}, zs{0.0};
        const double d = one_point_kernel(0.3, WeylPoint(xs), 0.7) - one_point_kernel(0.3, WeylPoint(zs), 0.7);
        CHECK(d == 0.0);
    }
}
