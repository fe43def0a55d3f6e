#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlshe/kernels.hpp"
#include "mlshe/she.hpp"
#include "mlshe/weyl.hpp"

namespace mlshe {

struct ExtrapolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// K_n(t,x,y) = det[u(t, x_i, y_j)]: determinant over a family of SHE
// solutions sharing one noise realization. The family order fixes the rows;
// the parity of an unsorted y is honored through WeylPoint.
inline double k_n(const std::vector<FieldTrajectory>& family, double t, const WeylPoint& y) {
    const int n = static_cast<int>(family.size());
    if (n == 0) throw std::invalid_argument("k_n: empty family");
    if (y.n() != n) throw std::invalid_argument("k_n: dimension mismatch");
    if (n == 1) return y.parity() * family[0].at(t, y[0]);
    if (y.min_gap() == 0.0) return 0.0; // repeated determinant columns
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = family[i].at(t, y[j]);
    return y.parity() * m.determinant();
}

namespace detail {

// Starting points of one extrapolation block: n points with spacing h,
// symmetric around a (descending order).
inline std::vector<double> block_starts(int n, double a, double h) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = a + (0.5 * (n - 1) - i) * h;
    return xs;
}

inline double ratio(const std::vector<FieldTrajectory>& family, double t,
                    const std::vector<double>& xs, const WeylPoint& y) {
    const double vx = vandermonde(xs);
    // k_n carries y.parity(), so divide by the original-order Vandermonde
    // (parity times the sorted value); the ratio is permutation invariant.
    const double vy = y.parity() * vandermonde(y);
    return k_n(family, t, y) / (vx * vy);
}

} // namespace detail

// Default gap sequence for boundary extrapolation: h in {8dx, 4dx, 2dx}
// keeps every start and every evaluation point on grid nodes for all n.
inline std::vector<double> boundary_h_sequence(double dx) { return {8.0 * dx, 4.0 * dx, 2.0 * dx}; }

// Starting points for a boundary family around a: one block per h.
inline std::vector<double> boundary_family_starts(int n, double a, const std::vector<double>& h_seq) {
    std::vector<double> xs;
    for (double h : h_seq)
        for (double v : detail::block_starts(n, a, h)) xs.push_back(v);
    return xs;
}

struct BoundaryExtrapolation {
    double value = 0.0;            // extrapolated limit
    std::vector<double> h;         // gap sequence, largest first
    std::vector<double> m_of_h;    // raw M_n values per gap
    double cauchy_ratio = 0.0;     // |d2/d1| of successive differences
    bool cauchy = false;           // ratio < 0.6
};

// M_n = K_n / (Delta(x) Delta(y)) when both Vandermondes clear the
// confluence threshold; otherwise Richardson extrapolation along the
// shrinking gap sequence. A fully collapsed request (x = a*1, y = b*1)
// requires a family laid out by boundary_family_starts.
inline double m_n(const std::vector<FieldTrajectory>& family, double t, const WeylPoint& x,
                  const WeylPoint& y);

// Extrapolated boundary value M_n(t, a1, b1) from a three-block family.
inline BoundaryExtrapolation m_n_boundary(const std::vector<FieldTrajectory>& family, double t,
                                          double a, double b) {
    if (family.size() % 3 != 0 || family.empty())
        throw std::invalid_argument("m_n_boundary: family must hold three h-blocks");
    const int n = static_cast<int>(family.size()) / 3;
    BoundaryExtrapolation out;
    for (int blk = 0; blk < 3; ++blk) {
        std::vector<FieldTrajectory> block(family.begin() + blk * n, family.begin() + (blk + 1) * n);
        std::vector<double> xs(n);
        for (int i = 0; i < n; ++i) {
            if (block[i].init().kind != InitialData::Kind::delta)
                throw std::invalid_argument("m_n_boundary: family must use delta initial data");
            xs[i] = block[i].init().x0;
        }
        const double h = (n > 1) ? xs[0] - xs[1] : 2.0 * block[0].grid().dx() * std::pow(2.0, 2 - blk);
        const WeylPoint yb(detail::block_starts(n, b, h));
        out.h.push_back(h);
        out.m_of_h.push_back(detail::ratio(block, t, xs, yb));
    }
    if (!(out.h[0] > out.h[1] && out.h[1] > out.h[2]))
        throw std::invalid_argument("m_n_boundary: blocks must be ordered largest gap first");
    const double d1 = out.m_of_h[1] - out.m_of_h[0];
    const double d2 = out.m_of_h[2] - out.m_of_h[1];
    out.cauchy_ratio = (d1 == 0.0) ? 0.0 : std::abs(d2 / d1);
    out.cauchy = out.cauchy_ratio < 0.6;
    // two Richardson stages eliminating the h^2 and h^4 terms; with noise the
    // raw values also carry the field's Holder-1/2 wiggle, which this cannot
    // remove (the cauchy diagnostics report it), but the limit stays
    // consistent as dx -> 0.
    const double r1 = (4.0 * out.m_of_h[1] - out.m_of_h[0]) / 3.0;
    const double r2 = (4.0 * out.m_of_h[2] - out.m_of_h[1]) / 3.0;
    out.value = (16.0 * r2 - r1) / 15.0;
    double span = 0.0;
    for (double v : out.m_of_h) span = std::max(span, std::abs(v));
    if (!std::isfinite(out.value) || std::abs(out.value) > 10.0 * span + 1e-9) {
        std::ostringstream msg;
        msg << "m_n boundary extrapolation not converging; h-sequence";
        for (std::size_t i = 0; i < out.h.size(); ++i)
            msg << " (h=" << out.h[i] << ", M=" << out.m_of_h[i] << ")";
        throw ExtrapolationError(msg.str());
    }
    return out;
}

inline double m_n(const std::vector<FieldTrajectory>& family, double t, const WeylPoint& x,
                  const WeylPoint& y) {
    const int n = x.n();
    if (y.n() != n) throw std::invalid_argument("m_n: dimension mismatch");
    if (n == 1) return family.at(0).at(t, y[0]);
    const double dx = family.at(0).grid().dx();
    const double scale = std::max(1.0, std::max(x.span(), y.span()));
    const double threshold = 1e-6 * scale;

    if (x.min_gap() <= threshold) {
        if (x.span() > threshold || y.span() > threshold)
            throw std::invalid_argument(
                "m_n: partially collapsed x needs a boundary family (see m_n_boundary)");
        return m_n_boundary(family, t, x[0], y[0]).value;
    }
    if (static_cast<int>(family.size()) != n)
        throw std::invalid_argument("m_n: family size must match the dimension");
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = family[i].init().x0;

    if (y.min_gap() > threshold) return detail::ratio(family, t, xs, y);

    // y-side confluence: spread tied clusters by shrinking gaps h, h/2, h/4
    // and extrapolate (interpolation supplies off-grid values).
    auto spread = [&](double h) {
        std::vector<double> ys = y.coords();
        std::size_t i = 0;
        while (i < ys.size()) {
            std::size_t jj = i;
            while (jj + 1 < ys.size() && ys[i] - ys[jj + 1] <= threshold) ++jj;
            const std::size_t len = jj - i + 1;
            if (len > 1) {
                const double center = ys[i];
                for (std::size_t r = 0; r < len; ++r)
                    ys[i + r] = center + (0.5 * (len - 1) - r) * h;
            }
            i = jj + 1;
        }
        return detail::ratio(family, t, xs, WeylPoint(ys));
    };
    const double h0 = 4.0 * dx;
    const double m0 = spread(h0), m1 = spread(h0 / 2), m2 = spread(h0 / 4);
    const double r1 = (4.0 * m1 - m0) / 3.0;
    const double r2 = (4.0 * m2 - m1) / 3.0;
    const double value = (16.0 * r2 - r1) / 15.0;
    const double span = std::max({std::abs(m0), std::abs(m1), std::abs(m2)});
    if (!std::isfinite(value) || std::abs(value) > 10.0 * span + 1e-9) {
        std::ostringstream msg;
        msg << "m_n: y-extrapolation not converging; h-sequence (" << h0 << ", " << h0 / 2 << ", "
            << h0 / 4 << ") values (" << m0 << ", " << m1 << ", " << m2 << ")";
        throw ExtrapolationError(msg.str());
    }
    return value;
}

// Z_n(t,a,b) = M_n(t, a1, b1) / c_{n,t}, from a boundary family.
struct ZnValue {
    double value = 0.0;
    BoundaryExtrapolation extrapolation;
};

inline ZnValue z_n(const std::vector<FieldTrajectory>& family, double t, double a, double b) {
    // n = 1 needs no extrapolation: Z_1 = u(t,a,b). Passed either as a single
    // trajectory or as three identical blocks.
    bool single_layer = family.size() == 1;
    if (family.size() == 3) {
        single_layer = true;
        for (const auto& tr : family)
            if (std::abs(tr.init().x0 - a) > 1e-12) single_layer = false;
    }
    if (single_layer) {
        ZnValue out;
        out.value = family.at(0).at(t, b);
        return out;
    }
    if (family.size() == 3)
        throw std::invalid_argument("z_n: an n=3 boundary family needs nine trajectories");
    const int n = static_cast<int>(family.size()) / 3;
    ZnValue out;
    out.extrapolation = m_n_boundary(family, t, a, b);
    out.value = out.extrapolation.value / c_nt(n, t);
    return out;
}

// h_k = log(Z_k / Z_{k-1}) with Z_0 = 1.
inline std::vector<double> h_n(const std::vector<double>& z_values) {
    std::vector<double> out;
    out.reserve(z_values.size());
    double prev = 1.0;
    for (std::size_t k = 0; k < z_values.size(); ++k) {
        if (!(z_values[k] > 0.0)) {
            std::ostringstream msg;
            msg << "h_n: Z_" << (k + 1) << " = " << z_values[k] << " is not positive";
            throw std::domain_error(msg.str());
        }
        out.push_back(std::log(z_values[k] / prev));
        prev = z_values[k];
    }
    return out;
}

// K_n and M_n sampled over sorted grid tuples at a fixed time.
struct LayerField {
    double t = 0.0;
    int n = 0;
    std::vector<double> x;                   // start configuration
    std::vector<std::vector<int>> y_indices; // strictly decreasing node tuples
    std::vector<double> k_values;
    std::vector<double> m_values;            // NaN where the ratio is confluent
};

inline LayerField evaluate_layer_field(const std::vector<FieldTrajectory>& family, double t,
                                       int stride = 1) {
    const int n = static_cast<int>(family.size());
    if (n < 1 || n > 3) throw std::invalid_argument("evaluate_layer_field: n must be 1..3");
    const GridSpec& g = family.front().grid();
    LayerField out;
    out.t = t;
    out.n = n;
    for (const auto& tr : family) out.x.push_back(tr.init().x0);
    const double vx = vandermonde(out.x);

    std::vector<int> nodes;
    for (int i = 0; i < g.nx; i += stride) nodes.push_back(i);
    const int m = static_cast<int>(nodes.size());

    auto emit = [&](const std::vector<int>& idx) {
        std::vector<double> ys;
        for (int id : idx) ys.push_back(g.node(id));
        WeylPoint y(ys);
        const double k = k_n(family, t, y);
        out.y_indices.push_back(idx);
        out.k_values.push_back(k);
        const double vy = vandermonde(y);
        out.m_values.push_back(vx * vy != 0.0 ? k / (vx * vy)
                                              : std::numeric_limits<double>::quiet_NaN());
    };

    if (n == 1) {
        for (int a = 0; a < m; ++a) emit({nodes[a]});
    } else if (n == 2) {
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) emit({nodes[b], nodes[a]});
    } else {
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                for (int c = b + 1; c < m; ++c) emit({nodes[c], nodes[b], nodes[a]});
    }
    return out;
}

} // namespace mlshe
