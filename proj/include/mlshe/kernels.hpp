#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mlshe/weyl.hpp"

namespace mlshe {

inline constexpr double kPi = 3.14159265358979323846;

// Heat kernel p_t(r) = (2*pi*t)^{-1/2} exp(-r^2/2t).
inline double heat_kernel(double t, double r) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
    return std::exp(-r * r / (2.0 * t)) / std::sqrt(2.0 * kPi * t);
}

// d^k/dr^k p_t(r) via probabilists' Hermite polynomials.
inline double heat_kernel_deriv(double t, double r, int k) {
    const double q = r / std::sqrt(t);
    double he0 = 1.0, he1 = q;
    double he = (k == 0) ? he0 : he1;
    for (int m = 1; m < k; ++m) {
        const double next = q * he1 - m * he0;
        he0 = he1;
        he1 = next;
        he = next;
    }
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return sign * he * heat_kernel(t, r) / std::pow(t, 0.5 * k);
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// c_{n,t} = (prod_{i=1}^{n-1} i!)^{-1} t^{-n(n-1)/2}.
inline double c_nt(int n, double t) {
    if (n < 1) throw std::invalid_argument("c_nt: n must be at least 1");
    if (!(t > 0.0)) throw std::invalid_argument("c_nt: t must be positive");
    double prod = 1.0;
    for (int i = 1; i <= n - 1; ++i) prod *= factorial(i);
    return std::pow(t, -0.5 * n * (n - 1)) / prod;
}

inline double c_n(int n) { return c_nt(n, 1.0); }

// Transition density of Brownian motion killed at the Weyl chamber boundary,
// det[p_t(x_i - y_j)]. Honors the sign of unsorted constructor input through
// the recorded parities.
inline double km_density(double t, const WeylPoint& x, const WeylPoint& y) {
    if (!(t > 0.0)) throw std::invalid_argument("km_density: t must be positive");
    if (x.n() != y.n()) throw std::invalid_argument("km_density: dimension mismatch");
    const int n = x.n();
    if (n == 1) return x.parity() * y.parity() * heat_kernel(t, x[0] - y[0]);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = heat_kernel(t, x[i] - y[j]);
    return x.parity() * y.parity() * m.determinant();
}

namespace detail {

// Bivariate confluent divided differences. `deriv(m, k, a, b)` must return
// d^m/da^m d^k/db^k f(a,b). Returns det[ f[x_1..x_i ; y_1..y_j] ]_{i,j=1..n},
// which equals det[f(x_i,y_j)] / (V(x) V(y)) with V the Vandermonde in
// ascending order, and extends smoothly to repeated nodes.
inline double dd_determinant(std::vector<double> xs, std::vector<double> ys,
                             const std::function<double(int, int, double, double)>& deriv) {
    const int n = static_cast<int>(xs.size());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    // Snap nearly coincident nodes so the confluent branch takes over before
    // the raw difference quotient loses too many digits.
    auto snap = [](std::vector<double>& v) {
        const double tol = 1e-12 * std::max(1.0, std::abs(v.back()) + std::abs(v.front()));
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] - v[i - 1] < tol) v[i] = v[i - 1];
    };
    snap(xs);
    snap(ys);

    // g[k][i] = divided difference over x_1..x_i of d^k/db^k f(., b) at b,
    // computed lazily per (j-block); we build the full matrix A[i][j].
    // Inner: for fixed derivative order m in a, dd over y_1..y_j of
    // d^m/da^m f(a, .) — confluent 1-D tables in both slots.
    auto dd_y = [&](int m, double a, int j) {
        // Newton table over ys[0..j-1] for b -> d^m/da^m f(a,b);
        // table[s] holds f[y_s..y_{s+r}] at level r.
        std::vector<double> table(j);
        for (int s = 0; s < j; ++s) table[s] = deriv(m, 0, a, ys[s]);
        std::vector<double> lead(j);
        lead[0] = table[0];
        for (int r = 1; r < j; ++r) {
            for (int s = 0; s + r < j; ++s) {
                const double lo = ys[s], hi = ys[s + r];
                if (hi - lo < 1e-300) {
                    table[s] = deriv(m, r, a, lo) / factorial(r);
                } else {
                    table[s] = (table[s + 1] - table[s]) / (hi - lo);
                }
            }
            lead[r] = table[0];
        }
        return lead; // lead[j'-1] = f[y_1..y_j'] for j' = 1..j
    };

    // A[i][j] = dd over x_1..x_{i+1} and y_1..y_{j+1}.
    Eigen::MatrixXd A(n, n);
    // For each x-level we need x-divided differences of a -> f[a; y_1..y_j].
    // Build column-wise: for column j, compute the x-Newton table whose
    // values at repeated x nodes use d^m/da^m.
    for (int j = 0; j < n; ++j) {
        std::vector<double> table(n);
        for (int s = 0; s < n; ++s) table[s] = dd_y(0, xs[s], j + 1)[j];
        A(0, j) = table[0];
        for (int r = 1; r < n; ++r) {
            for (int s = 0; s + r < n; ++s) {
                const double lo = xs[s], hi = xs[s + r];
                if (hi - lo < 1e-300) {
                    table[s] = dd_y(r, lo, j + 1)[j] / factorial(r);
                } else {
                    table[s] = (table[s + 1] - table[s]) / (hi - lo);
                }
            }
            A(r, j) = table[0];
        }
    }
    if (n == 1) return A(0, 0);
    return A.determinant();
}

} // namespace detail

// Smooth ratio S_t(x,y) = det[p_t(x_i-y_j)] / (Delta(x) Delta(y)).
// Symmetric in (x,y), strictly positive, and well defined on the whole of
// R^n x R^n including coincident coordinates (divided-difference evaluation
// below the confluence threshold).
inline double km_over_vandermonde(double t, const WeylPoint& x, const WeylPoint& y) {
    if (!(t > 0.0)) throw std::invalid_argument("km_over_vandermonde: t must be positive");
    if (x.n() != y.n()) throw std::invalid_argument("km_over_vandermonde: dimension mismatch");
    const int n = x.n();
    if (n == 1) return heat_kernel(t, x[0] - y[0]);
    const double scale = std::max({1.0, x.span(), y.span()});
    const double threshold = 1e-6 * scale;
    if (x.min_gap() > threshold && y.min_gap() > threshold) {
        return km_density(t, x, y) / (vandermonde(x) * vandermonde(y)) * (x.parity() * y.parity());
    }
    auto deriv = [t](int m, int k, double a, double b) {
        // d^m/da^m d^k/db^k p_t(a-b) = (-1)^k p_t^{(m+k)}(a-b)
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        return sign * heat_kernel_deriv(t, a - b, m + k);
    };
    return detail::dd_determinant(x.coords(), y.coords(), deriv);
}

// Q_t(a*1, y) = c_{n,t} Delta(y)^2 prod_i p_t(y_i - a).
inline double dyson_density_boundary(double t, double a, const WeylPoint& y) {
    if (!(t > 0.0)) throw std::invalid_argument("dyson_density_boundary: t must be positive");
    const int n = y.n();
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= heat_kernel(t, y[i] - a);
    const double vdm = vandermonde(y);
    return c_nt(n, t) * vdm * vdm * prod;
}

// Transition density of Dyson Brownian motion, extended by symmetry to all
// of R^n x R^n: Q_t(x,y) = Delta(y)/Delta(x) det[p_t(x_i-y_j)]
//                        = S_t(x,y) Delta(y)^2.
inline double dyson_density(double t, const WeylPoint& x, const WeylPoint& y) {
    if (x.all_equal()) return dyson_density_boundary(t, x[0], y);
    const double vy = vandermonde(y);
    return km_over_vandermonde(t, x, y) * vy * vy;
}

// Partial sum of e^{x^2}(1+erf(x)) = sum_{k>=1} x^{k-1}/Gamma((k+1)/2).
inline double erf_exp_series(double x, int terms) {
    if (terms < 1) throw std::invalid_argument("erf_exp_series: need at least one term");
    double acc = 0.0;
    for (int k = 1; k <= terms; ++k) acc += std::pow(x, k - 1) / std::tgamma(0.5 * (k + 1));
    return acc;
}

inline double erf_exp_closed_form(double x) { return std::exp(x * x) * (1.0 + std::erf(x)); }

} // namespace mlshe
