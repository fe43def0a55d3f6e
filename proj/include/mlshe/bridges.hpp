#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mlshe/kernels.hpp"
#include "mlshe/rng.hpp"
#include "mlshe/weyl.hpp"

namespace mlshe {

// Exact Gaussian bridge x -> y on [0,t] by sequential conditional sampling;
// the marginal at time s is N(x + (s/t)(y-x), s(t-s)/t).
inline std::vector<double> sample_bridge(double x, double y, double t, int steps, rng::Stream& stream) {
    if (steps < 1) throw std::invalid_argument("sample_bridge: steps must be positive");
    std::vector<double> path(steps + 1);
    path[0] = x;
    path[steps] = y;
    const double ds = t / steps;
    for (int k = 1; k < steps; ++k) {
        const double remaining = t - (k - 1) * ds;
        const double mean = path[k - 1] + ds * (y - path[k - 1]) / remaining;
        const double var = ds * (remaining - ds) / remaining;
        path[k] = mean + std::sqrt(var) * stream.normal();
    }
    return path;
}

// Sampled non-intersecting bridges with rejection statistics.
struct BridgeEnsemble {
    int n = 0;
    int steps = 0;
    double t = 0.0;
    std::vector<double> x; // endpoints actually used (after any offset)
    std::vector<double> y;
    std::vector<std::vector<std::vector<double>>> samples; // [sample][path][time]
    long proposals = 0;
    long accepted = 0;
    double acceptance_rate = 0.0;
    bool offset_applied = false;
};

namespace detail {

// Spread tied clusters of a sorted-descending endpoint list by delta so the
// rejection sampler has a positive acceptance probability (watermelon
// configurations have exact acceptance probability zero).
inline std::vector<double> spread_ties(const std::vector<double>& v, double delta) {
    std::vector<double> out = v;
    std::size_t i = 0;
    while (i < out.size()) {
        std::size_t j = i;
        while (j + 1 < out.size() && out[i] - out[j + 1] <= 0.0) ++j;
        const std::size_t len = j - i + 1;
        if (len > 1) {
            const double center = out[i];
            for (std::size_t r = 0; r < len; ++r) out[i + r] = center + (0.5 * (len - 1) - r) * delta;
        }
        i = j + 1;
    }
    return out;
}

inline bool strictly_ordered(const std::vector<std::vector<double>>& paths, int steps) {
    const int n = static_cast<int>(paths.size());
    for (int k = 0; k <= steps; ++k)
        for (int i = 0; i + 1 < n; ++i)
            if (!(paths[i][k] > paths[i + 1][k])) return false;
    return true;
}

} // namespace detail

// Rejection sampler: draw n independent bridges, accept iff strictly ordered
// at every stored time. Coincident endpoints are offset by 1e-2 sqrt(t)
// (O(delta) bias, measured by halving delta in the tests; delta_override
// exists for exactly that measurement).
inline BridgeEnsemble sample_nonintersecting(const WeylPoint& x, const WeylPoint& y, double t, int steps,
                                             std::uint64_t seed, long max_tries, int n_samples = 1,
                                             bool keep_paths = true, double delta_override = 0.0) {
    if (x.n() != y.n()) throw std::invalid_argument("sample_nonintersecting: dimension mismatch");
    if (!(t > 0.0)) throw std::invalid_argument("sample_nonintersecting: t must be positive");
    const int n = x.n();
    BridgeEnsemble ens;
    ens.n = n;
    ens.steps = steps;
    ens.t = t;
    const double delta = delta_override > 0.0 ? delta_override : 1e-2 * std::sqrt(t);
    ens.x = x.min_gap() > 0.0 ? x.coords() : detail::spread_ties(x.coords(), delta);
    ens.y = y.min_gap() > 0.0 ? y.coords() : detail::spread_ties(y.coords(), delta);
    ens.offset_applied = ens.x != x.coords() || ens.y != y.coords();

    rng::Stream stream(seed);
    for (int s = 0; s < n_samples; ++s) {
        long tries = 0;
        for (;;) {
            if (tries++ >= max_tries)
                throw std::runtime_error("sample_nonintersecting: max_tries exhausted");
            ++ens.proposals;
            std::vector<std::vector<double>> paths(n);
            for (int i = 0; i < n; ++i) paths[i] = sample_bridge(ens.x[i], ens.y[i], t, steps, stream);
            if (n == 1 || detail::strictly_ordered(paths, steps)) {
                ++ens.accepted;
                if (keep_paths) ens.samples.push_back(std::move(paths));
                break;
            }
        }
    }
    ens.acceptance_rate = static_cast<double>(ens.accepted) / static_cast<double>(ens.proposals);
    return ens;
}

// Band estimator of the local time at 0 of a-b with two-point Richardson
// extrapolation in eps. Interior nodes only: pinned endpoints carry no band
// information and would inject a spurious ds/(2 eps) spike.
inline double local_time_at_zero(const std::vector<double>& a, const std::vector<double>& b, double eps,
                                 double ds) {
    if (!(eps > 0.0)) throw std::invalid_argument("local_time_at_zero: eps must be positive");
    if (a.size() != b.size()) throw std::invalid_argument("local_time_at_zero: paths must share the grid");
    long hits_full = 0, hits_half = 0;
    for (std::size_t k = 1; k + 1 < a.size(); ++k) {
        const double d = std::abs(a[k] - b[k]);
        if (d <= eps) {
            ++hits_full;
            if (d <= 0.5 * eps) ++hits_half;
        }
    }
    const double l_full = hits_full * ds / (2.0 * eps);
    const double l_half = hits_half * ds / eps;
    return (4.0 * l_half - l_full) / 3.0;
}

// int_0^t int R_1^2 for a single 0 -> 0 bridge pair equals E[L_t(X-Y)] and
// has the closed form sqrt(pi t)/2: with X_s, Y_s independent N(0, s(t-s)/t),
// the density of X_s - Y_s at 0 is (4 pi s(t-s)/t)^{-1/2}, and the time
// integral is the Beta(1/2,1/2) integral, giving (1/2) sqrt(pi t).
inline double r1_squared_exact(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("r1_squared_exact: t must be positive");
    return 0.5 * std::sqrt(kPi * t);
}

struct MomentEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

namespace detail {

// Sum of the n^2 pairwise local times between two independent
// non-intersecting families sharing endpoints.
inline double pairwise_local_time_sum(const WeylPoint& x, const WeylPoint& y, double t, int steps,
                                      double eps, std::uint64_t seed, long max_tries) {
    BridgeEnsemble ex = sample_nonintersecting(x, y, t, steps, rng::derive_seed(seed, 1), max_tries);
    BridgeEnsemble ey = sample_nonintersecting(x, y, t, steps, rng::derive_seed(seed, 2), max_tries);
    const double ds = t / steps;
    double total = 0.0;
    for (int i = 0; i < x.n(); ++i)
        for (int j = 0; j < x.n(); ++j)
            total += local_time_at_zero(ex.samples[0][i], ey.samples[0][j], eps, ds);
    return total;
}

} // namespace detail

inline double default_band_eps(double t, int steps) { return 0.05 * std::sqrt(t / steps); }

// Monte Carlo of (1/k!) E[(sum_{ij} L_t(X^i - Y^j))^k].
inline MomentEstimate rk_squared_mc(int k, int n, double t, const WeylPoint& x, const WeylPoint& y,
                                    long samples, std::uint64_t seed, int steps = 2048,
                                    long max_tries = 1000000) {
    if (k < 1) throw std::invalid_argument("rk_squared_mc: k must be at least 1");
    if (x.n() != n || y.n() != n) throw std::invalid_argument("rk_squared_mc: dimension mismatch");
    const double eps = default_band_eps(t, steps);
    const double kfact = factorial(k);
    double sum = 0.0, sumsq = 0.0;
    for (long s = 0; s < samples; ++s) {
        const double lt = detail::pairwise_local_time_sum(x, y, t, steps, eps,
                                                          rng::derive_seed(seed, s), max_tries);
        const double v = std::pow(lt, k) / kfact;
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / samples;
    const double var = std::max(0.0, sumsq / samples - mean * mean);
    return {mean, std::sqrt(var / (samples - 1))};
}

struct ExpMomentEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double prefactor = 0.0; // (p_n^*/(Delta Delta))^2 at (t,x,y)
    long saturated = 0;     // samples whose exponent exceeded 700
};

// Monte Carlo of E[exp(a sum_{ij} L_t(X^i - Y^j))].
inline ExpMomentEstimate exp_moment_mc(double a, int n, double t, const WeylPoint& x, const WeylPoint& y,
                                       long samples, std::uint64_t seed, int steps = 2048,
                                       long max_tries = 1000000) {
    if (a < 0.0) throw std::invalid_argument("exp_moment_mc: a must be non-negative");
    if (x.n() != n || y.n() != n) throw std::invalid_argument("exp_moment_mc: dimension mismatch");
    const double eps = default_band_eps(t, steps);
    ExpMomentEstimate out;
    const double s_ratio = km_over_vandermonde(t, x, y);
    out.prefactor = s_ratio * s_ratio;
    double sum = 0.0, sumsq = 0.0;
    for (long s = 0; s < samples; ++s) {
        const double lt = detail::pairwise_local_time_sum(x, y, t, steps, eps,
                                                          rng::derive_seed(seed, s), max_tries);
        const double expo = a * lt;
        if (expo > 700.0) {
            ++out.saturated;
            continue;
        }
        const double v = std::exp(expo);
        sum += v;
        sumsq += v * v;
    }
    const long used = samples - out.saturated;
    if (used < 2) throw std::runtime_error("exp_moment_mc: too many saturated samples");
    out.estimate = sum / used;
    const double var = std::max(0.0, sumsq / used - out.estimate * out.estimate);
    out.std_error = std::sqrt(var / (used - 1));
    return out;
}

} // namespace mlshe
