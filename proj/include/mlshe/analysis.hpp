#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlshe/contour.hpp"
#include "mlshe/weyl.hpp"

namespace mlshe {

enum class Direction { space, time };

struct HolderReport {
    Direction direction = Direction::space;
    std::vector<int> lags;
    std::vector<double> structure; // E|f(.+h) - f(.)|^2 per lag
    double alpha_hat = 0.0;
    double alpha_se = 0.0;
    double intercept = 0.0;
    int ensemble_size = 0;
};

// Structure-function regression: fits log E|f(.+h)-f(.)|^2 = 2 alpha log h + c
// over the lag range. Slices are rows of equal spacing `delta` in the chosen
// direction.
inline HolderReport holder_exponent(const std::vector<std::vector<double>>& slices, double delta,
                                    Direction direction, const std::vector<int>& lags) {
    if (slices.size() < 20) throw std::invalid_argument("holder_exponent: need at least 20 slices");
    if (lags.size() < 2) throw std::invalid_argument("holder_exponent: need at least 2 lags");
    const double lag_span = static_cast<double>(lags.back()) / lags.front();
    if (lag_span < 10.0) throw std::invalid_argument("holder_exponent: lags must span at least a decade");

    HolderReport rep;
    rep.direction = direction;
    rep.lags = lags;
    rep.ensemble_size = static_cast<int>(slices.size());

    for (int lag : lags) {
        double acc = 0.0;
        long cnt = 0;
        for (const auto& s : slices) {
            if (static_cast<std::size_t>(lag) >= s.size())
                throw std::invalid_argument("holder_exponent: lag outside the slice range");
            for (std::size_t i = 0; i + lag < s.size(); ++i) {
                const double d = s[i + lag] - s[i];
                acc += d * d;
                ++cnt;
            }
        }
        const double sf = acc / cnt;
        if (!(sf > 0.0)) throw std::invalid_argument("holder_exponent: degenerate (constant) field");
        rep.structure.push_back(sf);
    }

    // least squares of y = log sf against x = log h
    const int m = static_cast<int>(lags.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        const double x = std::log(lags[i] * delta);
        const double y = std::log(rep.structure[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    rep.alpha_hat = 0.5 * slope;
    rep.intercept = (sy - slope * sx) / m;
    double rss = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = std::log(lags[i] * delta);
        const double y = std::log(rep.structure[i]);
        const double fit = rep.intercept + slope * x;
        rss += (y - fit) * (y - fit);
    }
    if (m > 2) rep.alpha_se = 0.5 * std::sqrt(rss / (m - 2) / (sxx - sx * sx / m));
    return rep;
}

struct PositivityReport {
    double fraction_positive = 0.0;
    double min_value = 0.0;
    std::size_t argmin = 0;
};

inline PositivityReport positivity_report(const std::vector<double>& values, double threshold) {
    if (values.empty()) throw std::invalid_argument("positivity_report: empty field");
    PositivityReport rep;
    rep.min_value = values[0];
    long positive = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > threshold) ++positive;
        if (values[i] < rep.min_value) {
            rep.min_value = values[i];
            rep.argmin = i;
        }
    }
    rep.fraction_positive = static_cast<double>(positive) / values.size();
    return rep;
}

struct ContinuityCheck {
    // log-log slopes of the three kernel integrals against the increment
    double spatial_slope = 0.0;      // expect 1 in |x-z|
    double temporal_slope = 0.0;     // expect ~alpha in |t-u|
    double tail_slope = 0.0;         // expect 1/2 in |t-u|
    std::vector<double> spatial_lhs; // integral values per increment
    std::vector<double> temporal_lhs;
    std::vector<double> tail_lhs;
    std::vector<double> increments;
};

namespace detail {

inline double fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const int m = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// int_R K_s-difference^2 dy by trapezoid over the kernel support.
template <typename F>
double y_integral(F&& f, double lo, double hi, int ny) {
    const double h = (hi - lo) / ny;
    double acc = 0.0;
    for (int i = 0; i <= ny; ++i) {
        const double w = (i == 0 || i == ny) ? 0.5 : 1.0;
        acc += w * h * f(lo + i * h);
    }
    return acc;
}

} // namespace detail

struct ContinuitySpec {
    int ns = 16;        // nodes of the substituted time quadrature
    int ny = 160;       // nodes of the y quadrature
    double y_pad = 8.0; // y range beyond the extreme x_i
    ContourSpec contour = [] {
        ContourSpec cs;
        cs.tol = 1e-7;
        return cs;
    }();
};

// Quadrature of the three kernel-increment integrals over a sweep of
// increments, with fitted log-log slopes:
//   (a) int_0^T int (K_s(x,y) - K_s(x + r, y))^2 dy ds   ~ r
//   (b) int_0^u int (K_{s+h}(x,y) - K_s(x,y))^2 dy ds    ~ h^alpha
//   (c) int_u^t int K_{t-s}(x,y)^2 dy ds                 ~ h^{1/2}
// The s-integrals substitute u = sqrt(s) (flattening the s^{-1/2} endpoint)
// and, for (a), split the u-range at the transition scale u ~ r. The y-range
// follows the kernel support, x_i +- 10 sqrt(s), so the bumps stay resolved
// down to the smallest s.
inline ContinuityCheck kernel_continuity_check(const WeylPoint& x, double T,
                                               const std::vector<double>& increments,
                                               const ContinuitySpec& spec = {}) {
    if (x.n() > 3) throw std::invalid_argument("kernel_continuity_check: n must be at most 3");
    ContinuityCheck out;
    out.increments = increments;

    auto k_at = [&](double s, const std::vector<double>& xs, double y) {
        return one_point_kernel(s, WeylPoint(xs), y, spec.contour);
    };

    // integral over s in (0, s_max] of inner(s) with the sqrt substitution
    // u = sqrt(s), split at the transition scale u_split (clamped so both
    // pieces always exist). The u-integrands here tend to a positive constant
    // at u = 0, so the floor at piece/60 removes a mass proportional to the
    // piece scale - the same fraction for every increment, leaving the
    // log-log slopes unbiased.
    auto s_quadrature = [&](double s_max, double u_split, auto&& inner) {
        double acc = 0.0;
        const double u_max = std::sqrt(s_max);
        const double us = std::min(u_split > 0.0 ? u_split : 0.5 * u_max, 0.5 * u_max);
        const std::pair<double, double> pieces[3] = {
            {us / 240.0, us / 8.0}, {us / 8.0, us}, {us, u_max}};
        for (const auto& [a, b] : pieces) {
            const double hu = (b - a) / spec.ns;
            for (int is = 0; is < spec.ns; ++is) {
                const double u = a + (is + 0.5) * hu;
                acc += 2.0 * u * hu * inner(u * u);
            }
        }
        return acc;
    };

    // node count resolving both the window and the narrowest kernel bump
    auto nodes_for = [&](double window, double bump) {
        return std::max(spec.ny, static_cast<int>(std::ceil(window / (bump / 2.5))));
    };

    for (double inc : increments) {
        std::vector<double> xs = x.coords(), zs = x.coords();
        for (double& v : zs) v += inc;

        // (a) spatial: shift every coordinate by inc
        out.spatial_lhs.push_back(s_quadrature(T, 3.0 * inc, [&](double s) {
            const double w = 10.0 * std::sqrt(s);
            const double lo = x[x.n() - 1] - w, hi = x[0] + inc + w;
            return detail::y_integral(
                [&](double y) {
                    const double d = k_at(s, xs, y) - k_at(s, zs, y);
                    return d * d;
                },
                lo, hi, nodes_for(hi - lo, std::sqrt(s)));
        }));

        // (b) temporal increment at fixed x: the window follows the wider
        // kernel K_{s+inc}, the resolution the narrower K_s
        out.temporal_lhs.push_back(s_quadrature(T, 3.0 * std::sqrt(inc), [&](double s) {
            const double w = 10.0 * std::sqrt(s + inc);
            const double lo = x[x.n() - 1] - w, hi = x[0] + w;
            return detail::y_integral(
                [&](double y) {
                    const double d = k_at(s + inc, xs, y) - k_at(s, xs, y);
                    return d * d;
                },
                lo, hi, nodes_for(hi - lo, std::sqrt(s)));
        }));

        // (c) tail integral int_0^inc int K_sigma^2
        out.tail_lhs.push_back(s_quadrature(inc, 0.0, [&](double s) {
            const double w = 10.0 * std::sqrt(s);
            const double lo = x[x.n() - 1] - w, hi = x[0] + w;
            return detail::y_integral(
                [&](double y) {
                    const double k = k_at(s, xs, y);
                    return k * k;
                },
                lo, hi, nodes_for(hi - lo, std::sqrt(s)));
        }));
    }

    out.spatial_slope = detail::fit_loglog(increments, out.spatial_lhs);
    out.temporal_slope = detail::fit_loglog(increments, out.temporal_lhs);
    out.tail_slope = detail::fit_loglog(increments, out.tail_lhs);
    return out;
}

struct EnsembleComparison {
    double mean_a = 0.0, mean_b = 0.0;
    double var_a = 0.0, var_b = 0.0;
    double se_mean_a = 0.0, se_mean_b = 0.0;
    bool mean_overlap = false; // 99% intervals intersect
    bool var_overlap = false;
    bool pass = false;
};

// Two-sample comparison of means and variances with 99% z-intervals; the
// test passes when both pairs of intervals overlap. The variance interval
// uses the fourth-moment standard error sqrt((m4 - var^2)/n), which stays
// calibrated on the heavy-tailed ensembles this compares (the normal-theory
// var*sqrt(2/n) understates it several-fold there).
inline EnsembleComparison compare_ensembles(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 100 || b.size() < 100)
        throw std::invalid_argument("compare_ensembles: each set needs at least 100 samples");
    EnsembleComparison cmp;
    auto stats = [](const std::vector<double>& v, double& mean, double& var, double& se_var) {
        const double n = static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += x;
        mean = s / n;
        double c2 = 0.0, c4 = 0.0;
        for (double x : v) {
            const double d = x - mean;
            c2 += d * d;
            c4 += d * d * d * d;
        }
        c2 /= n;
        c4 /= n;
        var = c2 * n / (n - 1.0);
        se_var = std::sqrt(std::max(0.0, c4 - c2 * c2) / n);
    };
    double se_var_a, se_var_b;
    stats(a, cmp.mean_a, cmp.var_a, se_var_a);
    stats(b, cmp.mean_b, cmp.var_b, se_var_b);
    cmp.se_mean_a = std::sqrt(cmp.var_a / a.size());
    cmp.se_mean_b = std::sqrt(cmp.var_b / b.size());
    const double z99 = 2.5758293035489004;
    cmp.mean_overlap = std::abs(cmp.mean_a - cmp.mean_b) <= z99 * (cmp.se_mean_a + cmp.se_mean_b);
    cmp.var_overlap = std::abs(cmp.var_a - cmp.var_b) <= z99 * (se_var_a + se_var_b);
    cmp.pass = cmp.mean_overlap && cmp.var_overlap;
    return cmp;
}

} // namespace mlshe
