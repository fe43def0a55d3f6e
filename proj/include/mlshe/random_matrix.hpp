#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mlshe/kernels.hpp"
#include "mlshe/rng.hpp"
#include "mlshe/weyl.hpp"

namespace mlshe {

// GUE draw matching the density P_1(Y) = 2^{-n/2} pi^{-n^2/2} e^{-Tr Y^2/2}:
// diagonal entries N(0,1), off-diagonal real/imaginary parts N(0,1/2).
inline Eigen::MatrixXcd gue_matrix(int n, rng::Stream& stream) {
    Eigen::MatrixXcd m(n, n);
    const double off = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i) {
        m(i, i) = std::complex<double>(stream.normal(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            const std::complex<double> v(off * stream.normal(), off * stream.normal());
            m(i, j) = v;
            m(j, i) = std::conj(v);
        }
    }
    return m;
}

inline WeylPoint eigenvalues_sorted(const Eigen::MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    std::vector<double> v(ev.data(), ev.data() + ev.size());
    return WeylPoint(std::move(v));
}

// Eigenvalues of one GUE draw, sorted non-increasing.
inline WeylPoint sample_gue(int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_gue: n must be at least 1");
    rng::Stream stream(seed);
    return eigenvalues_sorted(gue_matrix(n, stream));
}

// Haar unitary: Ginibre draw, QR, then column phases normalized by diag(R).
inline Eigen::MatrixXcd haar_unitary(int n, rng::Stream& stream) {
    Eigen::MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = std::complex<double>(stream.normal(), stream.normal());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        std::complex<double> phase = r(j, j) / std::abs(r(j, j));
        q.col(j) *= phase;
    }
    return q;
}

struct HcizEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    long bound_violations = 0; // per-sample uniform bound failures (should stay 0)
};

// Monte Carlo of the HCIZ integral c_n * int exp(Tr Y U X U^dag) dU, which
// equals det[e^{x_i y_j}]/(Delta(x) Delta(y)). Every sampled integrand is
// checked against the uniform bound
//   exp(-Tr(D_y - U D_x U^dag)^2 / 2) <= prod_i exp(-(y_i - x_i)^2 / 2).
inline HcizEstimate hciz_mc(const WeylPoint& x, const WeylPoint& y, long samples, std::uint64_t seed) {
    if (x.n() != y.n()) throw std::invalid_argument("hciz_mc: dimension mismatch");
    const int n = x.n();
    if (n == 1) return {std::exp(x[0] * y[0]), 0.0, 0};
    if (samples < 2) throw std::invalid_argument("hciz_mc: need at least 2 samples");

    double bound_rhs = 0.0; // sum (y_i - x_i)^2 over the sorted pairing
    for (int i = 0; i < n; ++i) bound_rhs += (y[i] - x[i]) * (y[i] - x[i]);

    Eigen::MatrixXcd dx = Eigen::MatrixXcd::Zero(n, n), dy = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        dx(i, i) = x[i];
        dy(i, i) = y[i];
    }
    const double cn = c_n(n);
    double sum = 0.0, sumsq = 0.0;
    long violations = 0;
    rng::Stream stream(seed);
    for (long s = 0; s < samples; ++s) {
        const Eigen::MatrixXcd u = haar_unitary(n, stream);
        const Eigen::MatrixXcd m = u * dx * u.adjoint();
        const double tr = (dy * m).trace().real();
        const double diff_sq = (dy - m).squaredNorm(); // Tr (D_y - UD_xU^dag)^2 for Hermitian
        if (diff_sq < bound_rhs * (1.0 - 1e-10) - 1e-12) ++violations;
        const double v = cn * std::exp(tr);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / samples;
    const double var = std::max(0.0, sumsq / samples - mean * mean);
    return {mean, std::sqrt(var / (samples - 1)), violations};
}

// det[e^{x_i y_j}]/(Delta(x) Delta(y)), with confluent points handled by the
// same divided-difference scheme as the heat-kernel ratio.
inline double hciz_target(const WeylPoint& x, const WeylPoint& y) {
    if (x.n() != y.n()) throw std::invalid_argument("hciz_target: dimension mismatch");
    const int n = x.n();
    if (n == 1) return std::exp(x[0] * y[0]);
    const double scale = std::max({1.0, x.span(), y.span()});
    if (x.min_gap() > 1e-6 * scale && y.min_gap() > 1e-6 * scale) {
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = std::exp(x[i] * y[j]);
        return m.determinant() / (vandermonde(x) * vandermonde(y));
    }
    auto deriv = [](int m, int k, double a, double b) {
        // d^m/da^m d^k/db^k e^{ab} = sum_l C(m,l) k!/(k-l)! a^{k-l} b^{m-l} e^{ab}
        double acc = 0.0;
        for (int l = 0; l <= std::min(m, k); ++l) {
            double c = 1.0;
            for (int i = 0; i < l; ++i) c *= static_cast<double>(m - i) * (k - i) / (i + 1);
            acc += c * std::pow(a, k - l) * std::pow(b, m - l);
        }
        return acc * std::exp(a * b);
    };
    return detail::dd_determinant(x.coords(), y.coords(), deriv);
}

struct CornerEstimate {
    double beta = 0.0;
    double std_error = 0.0;
};

// beta(n) = P_GUE[all eigenvalues >= 0] / 2, by Monte Carlo.
inline CornerEstimate gue_corner_probability(int n, long samples, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gue_corner_probability: n must be at least 1");
    if (samples < 2) throw std::invalid_argument("gue_corner_probability: need at least 2 samples");
    long hits = 0;
    for (long s = 0; s < samples; ++s) {
        const WeylPoint ev = sample_gue(n, rng::derive_seed(seed, static_cast<std::uint64_t>(s)));
        if (ev[ev.n() - 1] >= 0.0) ++hits;
    }
    const double p = static_cast<double>(hits) / samples;
    return {p / 2.0, std::sqrt(p * (1.0 - p) / samples) / 2.0};
}

} // namespace mlshe
