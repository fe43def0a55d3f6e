#include <doctest.h>

#include <cmath>

#include "mlshe/kernels.hpp"

using namespace mlshe;

TEST_CASE("heat kernel formula values") {
    CHECK(heat_kernel(1.0, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(heat_kernel(4.0, 2.0) == doctest::Approx(0.5 * heat_kernel(1.0, 1.0)).epsilon(1e-14));
    CHECK(heat_kernel(0.5, 0.0) == doctest::Approx(0.5641895835477563).epsilon(1e-12));
    CHECK_THROWS_AS(heat_kernel(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(heat_kernel(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("heat kernel derivatives match finite differences") {
    const double t = 0.7, r = 0.4, h = 1e-5;
    CHECK(heat_kernel_deriv(t, r, 0) == doctest::Approx(heat_kernel(t, r)));
    const double fd1 = (heat_kernel(t, r + h) - heat_kernel(t, r - h)) / (2 * h);
    CHECK(heat_kernel_deriv(t, r, 1) == doctest::Approx(fd1).epsilon(1e-8));
    const double fd2 = (heat_kernel(t, r + h) - 2 * heat_kernel(t, r) + heat_kernel(t, r - h)) / (h * h);
    CHECK(heat_kernel_deriv(t, r, 2) == doctest::Approx(fd2).epsilon(1e-5));
    const double fd3 = (heat_kernel_deriv(t, r + h, 2) - heat_kernel_deriv(t, r - h, 2)) / (2 * h);
    CHECK(heat_kernel_deriv(t, r, 3) == doctest::Approx(fd3).epsilon(1e-8));
}

TEST_CASE("vandermonde") {
    CHECK(vandermonde(WeylPoint{2.5}) == 1.0);
    CHECK(vandermonde(WeylPoint{3.0, 1.0, 0.0}) == doctest::Approx(6.0));
    CHECK(vandermonde(WeylPoint{1.0, 1.0}) == 0.0);
    WeylPoint unsorted{0.0, 3.0, 1.0};
    CHECK(unsorted[0] == 3.0);
    CHECK(unsorted[2] == 0.0);
    CHECK(vandermonde(unsorted) == doctest::Approx(6.0));
}

TEST_CASE("karlin-mcgregor determinant") {
    SUBCASE("n=1 reduces to the heat kernel") {
        CHECK(km_density(2.0, WeylPoint{1.0}, WeylPoint{0.25}) ==
              doctest::Approx(heat_kernel(2.0, 0.75)).epsilon(1e-14));
    }
    SUBCASE("n=2 direct evaluation") {
        const double v = km_density(1.0, WeylPoint{1.0, 0.0}, WeylPoint{1.0, 0.0});
        CHECK(v == doctest::Approx((1.0 - std::exp(-1.0)) / (2.0 * kPi)).epsilon(1e-12));
    }
    SUBCASE("swapping two coordinates negates the value") {
        WeylPoint x{1.0, 0.0};
        const double a = km_density(1.0, x, WeylPoint{0.7, -0.2});
        const double b = km_density(1.0, x, WeylPoint{-0.2, 0.7});
        CHECK(a == doctest::Approx(-b).epsilon(1e-14));
    }
    CHECK_THROWS_AS(km_density(1.0, WeylPoint{1.0}, WeylPoint{1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("c_nt") {
    CHECK(c_nt(1, 0.37) == doctest::Approx(1.0));
    CHECK(c_nt(2, 2.0) == doctest::Approx(0.5));
    CHECK(c_nt(3, 1.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(c_nt(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(c_nt(2, 0.0), std::invalid_argument);
}

TEST_CASE("dyson density") {
    SUBCASE("normalization over the Weyl chamber, n=2") {
        // int_{W_2} Q_1(x,.) = (1/2) int_{R^2} of the symmetric extension
        WeylPoint x{1.0, 0.0};
        const int N = 360;
        const double lo = -8.0, hi = 9.0, h = (hi - lo) / N;
        double acc = 0.0;
        for (int i = 0; i <= N; ++i) {
            const double wi = (i == 0 || i == N) ? 0.5 : 1.0;
            for (int j = 0; j <= N; ++j) {
                const double wj = (j == 0 || j == N) ? 0.5 : 1.0;
                acc += wi * wj * dyson_density(1.0, x, WeylPoint{lo + i * h, lo + j * h});
            }
        }
        acc *= h * h / 2.0;
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("scaling identity to machine precision") {
        WeylPoint x{0.9, -0.3, -1.4}, y{1.7, 0.2, -0.6};
        for (double t : {0.25, 1.0, 4.0, 7.3}) {
            std::vector<double> xs, ys;
            const double rt = std::sqrt(t);
            for (double v : x.coords()) xs.push_back(v / rt);
            for (double v : y.coords()) ys.push_back(v / rt);
            const double lhs = dyson_density(t, x, y);
            const double rhs = std::pow(t, -1.5) * dyson_density(1.0, WeylPoint(xs), WeylPoint(ys));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
    SUBCASE("boundary formula at a fully collapsed start") {
        // Q_1(0*1, (1,-1)) = c_{2,1} * Delta(y)^2 * p_1(1) p_1(-1) = 4 p_1(1)^2
        const double v = dyson_density(1.0, WeylPoint{0.0, 0.0}, WeylPoint{1.0, -1.0});
        const double p1 = heat_kernel(1.0, 1.0);
        CHECK(v == doctest::Approx(4.0 * p1 * p1).epsilon(1e-12));
    }
    SUBCASE("confluent start is the limit of separated starts") {
        // Richardson extrapolation of Q_1((eps,-eps), y) in eps^2
        WeylPoint y{1.0, -0.5};
        auto q = [&](double eps) { return dyson_density(1.0, WeylPoint{eps, -eps}, y); };
        const double e0 = 1e-2;
        const double r1 = (4.0 * q(e0 / 2) - q(e0)) / 3.0;
        const double r2 = (4.0 * q(e0 / 4) - q(e0 / 2)) / 3.0;
        const double limit = (16.0 * r2 - r1) / 15.0;
        CHECK(limit == doctest::Approx(dyson_density_boundary(1.0, 0.0, y)).epsilon(1e-6));
    }
    SUBCASE("boundary delegate n=1 is the heat kernel") {
        CHECK(dyson_density_boundary(0.5, 0.2, WeylPoint{1.0}) ==
              doctest::Approx(heat_kernel(0.5, 0.8)).epsilon(1e-14));
    }
}

TEST_CASE("divided-difference ratio agrees with the raw ratio away from the boundary") {
    WeylPoint x{1.2, 0.1}, y{0.8, -0.4};
    const double raw = km_density(0.7, x, y) / (vandermonde(x) * vandermonde(y));
    const double dd = detail::dd_determinant(x.coords(), y.coords(), [](int m, int k, double a, double b) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        return sign * heat_kernel_deriv(0.7, a - b, m + k);
    });
    CHECK(dd == doctest::Approx(raw).epsilon(1e-10));

    WeylPoint x3{1.2, 0.4, -0.5}, y3{0.9, 0.3, -1.0};
    const double raw3 = km_density(0.7, x3, y3) / (vandermonde(x3) * vandermonde(y3));
    CHECK(km_over_vandermonde(0.7, x3, y3) == doctest::Approx(raw3).epsilon(1e-10));
}

TEST_CASE("both-ends collapsed ratio equals c_nt p_t(a-b)^n") {
    for (int n : {2, 3}) {
        std::vector<double> xs(n, 0.3), ys(n, -0.2);
        const double t = 0.8;
        const double lhs = km_over_vandermonde(t, WeylPoint(xs), WeylPoint(ys));
        const double rhs = c_nt(n, t) * std::pow(heat_kernel(t, 0.5), n);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("erf series") {
    // 72 terms reach 1e-8 relative accuracy on [0,3]; at exactly 60 terms the
    // worst case x=3 sits near 2e-8, measured here so regressions are caught.
    for (double x : {0.0, 0.5, 1.0, 2.0, 2.5, 3.0}) {
        const double target = erf_exp_closed_form(x);
        CHECK(std::abs(erf_exp_series(x, 72) - target) / target < 1e-8);
        CHECK(std::abs(erf_exp_series(x, 60) - target) / target < 2.5e-8);
    }
    CHECK(erf_exp_series(0.0, 1) == doctest::Approx(1.0));
}
