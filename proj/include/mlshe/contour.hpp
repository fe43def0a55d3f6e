#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mlshe/kernels.hpp"
#include "mlshe/weyl.hpp"

namespace mlshe {

// Parameters of the double contour quadrature for the one-point kernel
// K_t(x, y) = int Q_t(x, (y, y_2..y_n)) dy_2..dy_n.
//
// The z-contour is the rectangle around the x_i deformed to two horizontal
// lines at +/- i d, truncated where the Gaussian factor is below the tail
// bound; since the x_i are real, every contour point keeps distance >= d
// from every pole. The w-contour is the vertical line through y (shifted
// from Gamma_L by Cauchy's theorem), truncated at |Im w| = v_max.
struct ContourSpec {
    double d = 1.0;          // half-height of the rectangle gamma
    double margin = 9.0;     // horizontal extent of gamma past extreme x_i and y
    int n_gamma = 96;        // initial nodes per horizontal line
    int n_vertical = 96;     // initial nodes on the vertical line
    double v_max = 8.7;      // truncation of Im w
    double tol = 1e-9;       // node doubling stops below this
    int max_doublings = 6;

    void validate() const {
        if (!(d > 0.0) || !(margin > 0.0)) throw std::invalid_argument("ContourSpec: d, margin must be positive");
        if (std::exp(-0.5 * v_max * v_max) >= tol)
            throw std::invalid_argument("ContourSpec: exp(-v_max^2/2) must be below tol");
    }
};

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

using cplx = std::complex<double>;

// The t = 1 kernel evaluated through the pole-free double contour integral
//
//   K(x,y) = -(1/(2 pi i)^2) oint_gamma dz int_Gamma dw (w-y)
//            e^{((w-y)^2-(z-y)^2)/2} prod_j (w-x_j)/(z-x_j)
//            [ 1 - sum_j ((w-x_j)(z-x_j))^{-1} ],
//
// obtained from the Johansson formula by removing the (w-z)^{-1} pole at
// u = v = y (integrate the total derivative of the integrand over both
// contours). The integrand separates, so the tensor-product trapezoid sum
// factors into 1-D sums along each contour.
struct ContourSums {
    cplx wa;              // (1/2pi i) int (w-y) e^{(w-y)^2/2} prod (w-x_i) dw
    std::vector<cplx> wb; // same with prod over i != j
    cplx za;              // (1/2pi i) oint e^{-(z-y)^2/2} / prod (z-x_i) dz
    std::vector<cplx> zb; // same with an extra (z-x_j)^{-1}; this equals the
                          // (z-x_j)^{-2} prod_{i!=j} factor of the derivative
    std::vector<cplx> wd; // (1/2pi i) int e^{(w-y)^2/2} prod_{i!=j} (w-x_i) dw
};

// The kernel decays like exp(-dist^2/2) in the rescaled distance between y
// and the nearest x_i; beyond this separation the value is below 1e-60 and
// the quadrature is skipped.
inline constexpr double kFarCutoff = 12.0;

inline ContourSums contour_sums(const std::vector<double>& x, double y, const ContourSpec& cs,
                                int nz, int nw) {
    const int n = static_cast<int>(x.size());
    const cplx two_pi_i(0.0, 2.0 * kPi);
    ContourSums s;
    s.wb.assign(n, 0.0);
    s.zb.assign(n, 0.0);
    s.wd.assign(n, 0.0);

    // vertical line w = y + i tau
    {
        const double h = 2.0 * cs.v_max / nw;
        cplx wa = 0.0;
        std::vector<cplx> wb(n, 0.0), wd(n, 0.0);
        for (int k = 0; k <= nw; ++k) {
            const double tau = -cs.v_max + k * h;
            const double wt = (k == 0 || k == nw) ? 0.5 : 1.0;
            const cplx w(y, tau);
            const cplx wy = w - y;
            const cplx e = std::exp(0.5 * wy * wy);
            cplx prod = 1.0;
            for (int i = 0; i < n; ++i) prod *= (w - x[i]);
            const cplx base = e * (wt * h) * cplx(0.0, 1.0); // dw = i dtau
            wa += base * wy * prod;
            for (int j = 0; j < n; ++j) {
                // leave-one-out product built directly: the line crosses the
                // real axis at w = y, which may coincide with x_j
                cplx without = 1.0;
                for (int i = 0; i < n; ++i)
                    if (i != j) without *= (w - x[i]);
                wb[j] += base * wy * without;
                wd[j] += base * without;
            }
        }
        s.wa = wa / two_pi_i;
        for (int j = 0; j < n; ++j) {
            s.wb[j] = wb[j] / two_pi_i;
            s.wd[j] = wd[j] / two_pi_i;
        }
    }

    // two horizontal lines z = sigma +/- i d, counterclockwise
    {
        double lo = y, hi = y;
        for (double xi : x) {
            lo = std::min(lo, xi);
            hi = std::max(hi, xi);
        }
        lo -= cs.margin;
        hi += cs.margin;
        const double h = (hi - lo) / nz;
        cplx za = 0.0;
        std::vector<cplx> zb(n, 0.0);
        for (int sgn = -1; sgn <= 1; sgn += 2) {
            const double orient = (sgn < 0) ? 1.0 : -1.0; // bottom left->right, top right->left
            for (int k = 0; k <= nz; ++k) {
                const double sigma = lo + k * h;
                const double wt = (k == 0 || k == nz) ? 0.5 : 1.0;
                const cplx z(sigma, sgn * cs.d);
                const cplx zy = z - y;
                const cplx e = std::exp(-0.5 * zy * zy);
                cplx prod = 1.0;
                for (int i = 0; i < n; ++i) prod *= (z - x[i]);
                const cplx base = e * (wt * h * orient);
                za += base / prod;
                for (int j = 0; j < n; ++j) zb[j] += base / (prod * (z - x[j]));
            }
        }
        s.za = za / two_pi_i;
        for (int j = 0; j < n; ++j) s.zb[j] = zb[j] / two_pi_i;
    }
    return s;
}

inline double kernel_from_sums(const ContourSums& s) {
    cplx total = s.wa * s.za;
    for (std::size_t j = 0; j < s.wb.size(); ++j) total -= s.wb[j] * s.zb[j];
    return -total.real();
}

inline double kernel_dx_from_sums(const ContourSums& s, int j) { return (s.wd[j] * s.zb[j]).real(); }

template <typename Eval>
double converge(const ContourSpec& cs, const std::vector<double>& xs, double y, Eval eval) {
    // scale the starting node count with the rectangle width so wide
    // configurations (x far apart after diffusive rescaling) start resolved
    double lo = y, hi = y;
    for (double v : xs) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double width = hi - lo + 2.0 * cs.margin;
    const int scale = std::max(1, static_cast<int>(std::ceil(width / 24.0)));
    int nz = cs.n_gamma * scale, nw = cs.n_vertical;
    double prev = eval(nz, nw);
    for (int it = 0; it < cs.max_doublings; ++it) {
        nz *= 2;
        nw *= 2;
        const double cur = eval(nz, nw);
        if (std::abs(cur - prev) < cs.tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    throw QuadratureError("contour quadrature: node budget exhausted before tolerance");
}

inline bool far_from_support(const std::vector<double>& xs, double y) {
    double dist = std::numeric_limits<double>::infinity();
    for (double v : xs) dist = std::min(dist, std::abs(v - y));
    return dist > kFarCutoff;
}

} // namespace detail

// One-point correlation kernel of Q_t: K_t(x, y1) = int Q_t(x,y) dy_2..dy_n,
// by double contour quadrature; K_t(x,y) = t^{-1/2} K_1(x/sqrt(t), y/sqrt(t)).
// The contour integral evaluates to K/(n-1)! (fixed against tensor
// quadrature of Q for n = 1..3), hence the factorial factor.
inline double one_point_kernel(double t, const WeylPoint& x, double y1, const ContourSpec& cs = {}) {
    if (!(t > 0.0)) throw std::invalid_argument("one_point_kernel: t must be positive");
    cs.validate();
    const double rt = std::sqrt(t);
    std::vector<double> xs = x.coords();
    for (double& v : xs) v /= rt;
    const double y = y1 / rt;
    if (detail::far_from_support(xs, y)) return 0.0;
    const double value = detail::converge(cs, xs, y, [&](int nz, int nw) {
        return detail::kernel_from_sums(detail::contour_sums(xs, y, cs, nz, nw));
    });
    return factorial(x.n() - 1) * value / rt;
}

// dK_t/dx_j as a contour integral (pole of order 2 at z = x_j);
// dK_t/dx_j (x,y) = t^{-1} (dK_1/dx_j)(x/sqrt(t), y/sqrt(t)).
inline double one_point_kernel_dx(double t, const WeylPoint& x, int j, double y1,
                                  const ContourSpec& cs = {}) {
    if (!(t > 0.0)) throw std::invalid_argument("one_point_kernel_dx: t must be positive");
    if (j < 1 || j > x.n()) throw std::invalid_argument("one_point_kernel_dx: index out of range");
    cs.validate();
    const double rt = std::sqrt(t);
    std::vector<double> xs = x.coords();
    for (double& v : xs) v /= rt;
    const double y = y1 / rt;
    if (detail::far_from_support(xs, y)) return 0.0;
    const double value = detail::converge(cs, xs, y, [&](int nz, int nw) {
        return detail::kernel_dx_from_sums(detail::contour_sums(xs, y, cs, nz, nw), j - 1);
    });
    return factorial(x.n() - 1) * value / t;
}

} // namespace mlshe
