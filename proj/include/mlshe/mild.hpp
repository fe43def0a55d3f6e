#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlshe/contour.hpp"
#include "mlshe/kernels.hpp"
#include "mlshe/noise.hpp"
#include "mlshe/rng.hpp"
#include "mlshe/weyl.hpp"

namespace mlshe {

// Permutation-symmetric initial data with a finite sup bound. Symmetry and
// the bound are spot-checked at construction on a fixed sample of points.
class SymmetricInitialData {
  public:
    SymmetricInitialData(int n, std::function<double(const std::vector<double>&)> g, double bound)
        : n_(n), g_(std::move(g)), bound_(bound) {
        if (n_ < 1) throw std::invalid_argument("SymmetricInitialData: n must be positive");
        if (!(bound_ >= 0.0) || !std::isfinite(bound_))
            throw std::invalid_argument("SymmetricInitialData: bound must be finite");
        spot_check();
    }

    int n() const { return n_; }
    double bound() const { return bound_; }
    double operator()(const std::vector<double>& y) const { return g_(y); }

  private:
    void spot_check() const {
        for (int rep = 0; rep < 16; ++rep) {
            std::vector<double> y(n_);
            for (int i = 0; i < n_; ++i)
                y[i] = 6.0 * rng::uniform01(0xA5F00Du, 16 * rep + i) - 3.0;
            const double base = g_(y);
            if (std::abs(base) > bound_ * (1.0 + 1e-12))
                throw std::invalid_argument("SymmetricInitialData: |g| exceeds the declared bound");
            std::vector<double> perm = y;
            for (int i = 0; i + 1 < n_; ++i) {
                std::swap(perm[i], perm[i + 1]);
                if (std::abs(g_(perm) - base) > 1e-10 * (1.0 + std::abs(base)))
                    throw std::invalid_argument("SymmetricInitialData: g is not permutation symmetric");
            }
        }
    }

    int n_;
    std::function<double(const std::vector<double>&)> g_;
    double bound_;
};

struct PicardOptions {
    double y_min = -1.5;        // report window (the truncation box is wider)
    double y_max = 1.5;
    int k_max = 8;
    double tol = 1e-6;
    double margin_sigmas = 6.0; // box = window +- margin_sigmas * sqrt(t_max)
    int probe_points = 5;       // window nodes feeding the probe tuples
};

// Field of one Picard run on the truncation-box grid; the y-grid per
// dimension is a contiguous run of noise-grid nodes.
class PicardState {
  public:
    int n = 0;
    GridSpec noise_grid;
    double t_offset = 0.0; // absolute time of row 0 (nonzero after a restart)
    int box_lo = 0;        // first noise node of the box
    int nb = 0;            // nodes per dimension
    int iterations = 0;
    bool converged = false;
    std::vector<double> d;                // sup-differences over the probe set
    std::vector<std::vector<int>> probes; // strictly ordered node tuples (box-relative)
    std::vector<double> field;            // [(rows) * nb^n], time-major

    std::size_t points_per_row() const {
        std::size_t p = 1;
        for (int a = 0; a < n; ++a) p *= static_cast<std::size_t>(nb);
        return p;
    }
    int rows() const { return static_cast<int>(field.size() / points_per_row()); }
    double node(int rel) const { return noise_grid.node(box_lo + rel); }

    double value(int row, const std::vector<int>& rel_idx) const {
        std::size_t flat = 0;
        for (int a = 0; a < n; ++a) flat = flat * nb + rel_idx[a];
        return field[static_cast<std::size_t>(row) * points_per_row() + flat];
    }

    // value at an absolute grid time and grid-node coordinates
    double at(double t, const std::vector<double>& y) const {
        const int row = noise_grid.time_row(t - t_offset);
        if (row < 0 || row >= rows()) throw std::invalid_argument("PicardState::at: time out of range");
        std::vector<int> idx(n);
        for (int a = 0; a < n; ++a) {
            const int node_abs = noise_grid.nearest_node(y[a]);
            if (std::abs(noise_grid.node(node_abs) - y[a]) > 1e-9)
                throw std::invalid_argument("PicardState::at: y is not a grid node");
            idx[a] = node_abs - box_lo;
            if (idx[a] < 0 || idx[a] >= nb)
                throw std::invalid_argument("PicardState::at: y outside the box");
        }
        return value(row, idx);
    }
};

namespace detail {

// Cell-averaged heat kernel on the grid: entry (a,b) holds
// int_{cell b} p_tau(node_a - u) du; Toeplitz, stored by offset a-b.
// Mass-exact for any tau/dx ratio, unlike point sampling which breaks down
// for tau << dx^2.
inline std::vector<double> cell_kernel(double tau, double dx, int nb) {
    std::vector<double> row(2 * nb - 1);
    const double inv = 1.0 / std::sqrt(2.0 * tau);
    for (int off = -(nb - 1); off <= nb - 1; ++off) {
        const double d = off * dx;
        row[off + nb - 1] = 0.5 * (std::erf((d + 0.5 * dx) * inv) - std::erf((d - 0.5 * dx) * inv));
    }
    return row;
}

// Contract an n-dim tensor with the Toeplitz kernel along every dimension.
inline void sep_convolve(int n, int nb, const std::vector<double>& kernel_row,
                         std::vector<double>& tensor, std::vector<double>& scratch) {
    const std::size_t total = tensor.size();
    for (int dim = 0; dim < n; ++dim) {
        std::size_t stride = 1;
        for (int a = dim + 1; a < n; ++a) stride *= nb;
        const std::size_t outer = total / (stride * nb);
        scratch.assign(total, 0.0);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < stride; ++in) {
                const std::size_t base = o * stride * nb + in;
                for (int a = 0; a < nb; ++a) {
                    double acc = 0.0;
                    const double* krow = kernel_row.data() + (a + nb - 1);
                    for (int b = 0; b < nb; ++b) acc += krow[-b] * tensor[base + b * stride];
                    scratch[base + a * stride] = acc;
                }
            }
        }
        tensor.swap(scratch);
    }
}

template <typename Fn>
void enumerate_tuples(int n, int nb, Fn&& fn) {
    std::vector<int> idx(n, 0);
    for (;;) {
        fn(idx);
        int a = n - 1;
        while (a >= 0 && ++idx[a] == nb) idx[a--] = 0;
        if (a < 0) return;
    }
}

inline bool has_tie(const std::vector<int>& idx) {
    for (std::size_t a = 0; a + 1 < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b)
            if (idx[a] == idx[b]) return true;
    return false;
}

// Replace the (dynamically inert) diagonal entries of an m-field row by the
// average of adjacent off-diagonal values so reports see finite numbers.
inline void fill_diagonal(int n, int nb, double* row_field) {
    if (n == 1) return;
    enumerate_tuples(n, nb, [&](const std::vector<int>& id) {
        if (!has_tie(id)) return;
        double acc = 0.0;
        int cnt = 0;
        std::vector<int> nbr = id;
        for (int a = 0; a < n; ++a) {
            for (int delta : {-1, 1}) {
                nbr = id;
                nbr[a] += delta;
                if (nbr[a] < 0 || nbr[a] >= nb || has_tie(nbr)) continue;
                std::size_t flat = 0;
                for (int p = 0; p < n; ++p) flat = flat * nb + nbr[p];
                acc += row_field[flat];
                ++cnt;
            }
        }
        std::size_t flat = 0;
        for (int p = 0; p < n; ++p) flat = flat * nb + id[p];
        row_field[flat] = cnt > 0 ? acc / cnt : 0.0;
    });
}

} // namespace detail

// J_n(t,y) = (1/n!) int g(y') Q_t(y,y') dy' by midpoint tensor quadrature,
// refined until stable. The box must cover every permutation of y (the mass
// of Q_t(y,.) sits at all of them), so it spans [min y - 8 sqrt(t),
// max y + 8 sqrt(t)] in each dimension.
inline double j_term(const SymmetricInitialData& g, double t, const WeylPoint& y, double tol = 1e-3) {
    if (!(t > 0.0)) throw std::invalid_argument("j_term: t must be positive");
    const int n = g.n();
    if (y.n() != n) throw std::invalid_argument("j_term: dimension mismatch");
    const double lo = y[n - 1] - 8.0 * std::sqrt(t);
    const double hi = y[0] + 8.0 * std::sqrt(t);

    auto evaluate = [&](int nodes_per_sigma) {
        const double h = std::sqrt(t) / nodes_per_sigma;
        const int nb = static_cast<int>(std::ceil((hi - lo) / h));
        double acc = 0.0;
        std::vector<double> yp(n);
        detail::enumerate_tuples(n, nb, [&](const std::vector<int>& idx) {
            for (int a = 0; a < n; ++a) yp[a] = lo + (idx[a] + 0.5) * h;
            acc += dyson_density(t, y, WeylPoint(yp)) * g(yp);
        });
        return acc * std::pow(h, n) / factorial(n);
    };

    double prev = evaluate(4);
    for (int nodes = 8; nodes <= 32; nodes *= 2) {
        const double cur = evaluate(nodes);
        if (std::abs(cur - prev) < tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    throw QuadratureError("j_term: quadrature did not converge within the refinement budget");
}

// Solves m(t,y) = J_n(t,y) + A_n int_0^t int Q_{t-s}(y,y') m(s,y') dy'_* W(ds,dy_1')
// by Picard iteration on the (time row) x (box node)^n grid.
//
// Discretization: the stochastic term for output row l sums over earlier
// noise rows j < l. Antisymmetrizing the integrand turns the permutation sum
// of the Dyson kernel into one separable cell-kernel convolution: with
// A_n = 1/(n-1)! absorbing the permutation count, the row-j contribution is
//   sepconv( Pbar_{(l-j)dt}, Delta(y') m(j,y') sum_a xi_j(y'_a) ) / Delta(y)
// times sqrt(dt dx). Diagonal outputs (Delta(y) = 0) never feed back into
// the dynamics (they enter only through Delta(y') m) and are filled by
// neighbor averages for reporting.
inline PicardState picard_solve(const SymmetricInitialData& g, const NoiseField& noise,
                                const PicardOptions& opt = {}) {
    const int n = g.n();
    if (n > 3) throw std::invalid_argument("picard_solve: n must be at most 3 (cost guard)");
    if (opt.k_max < 1) throw std::invalid_argument("picard_solve: k_max must be positive");
    const GridSpec& grid = noise.grid();
    const double dx = grid.dx(), dt = grid.dt();
    const double margin = opt.margin_sigmas * std::sqrt(grid.t_max());

    PicardState st;
    st.n = n;
    st.noise_grid = grid;
    {
        const int lo = grid.nearest_node(opt.y_min - margin);
        const int hi = grid.nearest_node(opt.y_max + margin);
        if (grid.node(lo) > opt.y_min - margin + 1e-9 || grid.node(hi) < opt.y_max + margin - 1e-9)
            throw std::invalid_argument("picard_solve: noise grid does not cover the truncation box");
        st.box_lo = lo;
        st.nb = hi - lo + 1;
    }
    const int nb = st.nb, nt = grid.nt;
    const std::size_t per_row = st.points_per_row();

    // probe set: strictly ordered tuples of spread window nodes
    {
        std::vector<int> window_nodes;
        for (int p = 0; p < opt.probe_points; ++p) {
            const double yv = opt.y_min + (opt.y_max - opt.y_min) * p /
                                              std::max(1, opt.probe_points - 1);
            window_nodes.push_back(grid.nearest_node(yv) - st.box_lo);
        }
        std::sort(window_nodes.begin(), window_nodes.end());
        window_nodes.erase(std::unique(window_nodes.begin(), window_nodes.end()), window_nodes.end());
        std::vector<int> tuple(n);
        const auto add = [&](auto&& self, int depth, int start) -> void {
            if (depth == n) {
                st.probes.push_back(tuple);
                return;
            }
            for (int p = start; p < static_cast<int>(window_nodes.size()); ++p) {
                tuple[depth] = window_nodes[p];
                self(self, depth + 1, p + 1);
            }
        };
        add(add, 0, 0);
    }

    // cell kernels per time difference
    std::vector<std::vector<double>> pbar(nt + 1);
    for (int l = 1; l <= nt; ++l) pbar[l] = detail::cell_kernel(l * dt, dx, nb);

    // Vandermonde of the node tuples and g on the box grid
    std::vector<double> vdm(per_row), g0(per_row);
    {
        std::vector<double> yp(n);
        std::size_t flat = 0;
        detail::enumerate_tuples(n, nb, [&](const std::vector<int>& idx) {
            double prod = 1.0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) prod *= (idx[i] - idx[j]) * dx;
            vdm[flat] = prod;
            for (int a = 0; a < n; ++a) yp[a] = st.node(idx[a]);
            g0[flat] = g(yp);
            ++flat;
        });
    }

    // J rows: J(l, .) = sepconv(Pbar_l, Delta g) / Delta, row 0 = g
    std::vector<double> jterm(static_cast<std::size_t>(nt + 1) * per_row);
    {
        std::vector<double> work(per_row), scratch(per_row);
        std::copy(g0.begin(), g0.end(), jterm.begin());
        for (int l = 1; l <= nt; ++l) {
            for (std::size_t k = 0; k < per_row; ++k) work[k] = vdm[k] * g0[k];
            detail::sep_convolve(n, nb, pbar[l], work, scratch);
            double* row = jterm.data() + static_cast<std::size_t>(l) * per_row;
            for (std::size_t k = 0; k < per_row; ++k) row[k] = vdm[k] != 0.0 ? work[k] / vdm[k] : 0.0;
            detail::fill_diagonal(n, nb, row);
        }
    }

    // sum of noise draws over the tuple coordinates, per time row
    const double walsh_scale = std::sqrt(dt * dx);
    std::vector<double> xi_sum(static_cast<std::size_t>(nt) * per_row);
    for (int j = 0; j < nt; ++j) {
        const double* xi = noise.row(j);
        double* dst = xi_sum.data() + static_cast<std::size_t>(j) * per_row;
        std::size_t flat = 0;
        detail::enumerate_tuples(n, nb, [&](const std::vector<int>& idx) {
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += xi[st.box_lo + idx[a]];
            dst[flat++] = s;
        });
    }

    std::vector<double> prev = jterm; // m^0 = J
    std::vector<double> cur(jterm.size());
    std::vector<double> work(per_row), scratch(per_row), acc(per_row);

    for (int k = 1; k <= opt.k_max; ++k) {
        std::copy(jterm.begin(), jterm.end(), cur.begin());
        for (int l = 1; l <= nt; ++l) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int j = 0; j < l; ++j) {
                const double* mrow = prev.data() + static_cast<std::size_t>(j) * per_row;
                const double* xrow = xi_sum.data() + static_cast<std::size_t>(j) * per_row;
                for (std::size_t q = 0; q < per_row; ++q) work[q] = vdm[q] * mrow[q] * xrow[q];
                detail::sep_convolve(n, nb, pbar[l - j], work, scratch);
                for (std::size_t q = 0; q < per_row; ++q) acc[q] += work[q];
            }
            double* row = cur.data() + static_cast<std::size_t>(l) * per_row;
            for (std::size_t q = 0; q < per_row; ++q)
                if (vdm[q] != 0.0) row[q] += walsh_scale * acc[q] / vdm[q];
            detail::fill_diagonal(n, nb, row);
        }
        // sup-difference over the probe set at the half and final rows
        double dk = 0.0;
        for (const auto& tuple : st.probes) {
            std::size_t flat = 0;
            for (int a = 0; a < n; ++a) flat = flat * nb + tuple[a];
            for (int row : {nt / 2, nt}) {
                const std::size_t off = static_cast<std::size_t>(row) * per_row + flat;
                dk = std::max(dk, std::abs(cur[off] - prev[off]));
            }
        }
        st.d.push_back(dk);
        st.iterations = k;
        prev.swap(cur);
        if (dk < opt.tol) {
            st.converged = true;
            break;
        }
    }
    st.field = std::move(prev);
    return st;
}

struct DecayReport {
    bool pass = false;
    std::vector<double> ratios;   // d_{k+1} / d_k
    double fitted_log_rate = 0.0; // slope of log d_k + log Gamma((k+1)/2 + 1) vs (k+1)/2
};

// Checks the super-exponential envelope d_k^2 <= K^2 z^{k+1} t^{(k+1)/2} /
// Gamma((k+1)/2 + 1): the Gamma denominator forces the ratios d_{k+1}/d_k to
// decrease eventually, which a plain geometric sequence does not satisfy.
// On short noisy sequences "eventually decreasing" is read operationally:
// the later ratios must dip clearly below the first one.
inline DecayReport picard_decay_check(const std::vector<double>& d) {
    if (d.size() < 3) throw std::invalid_argument("picard_decay_check: need at least 3 iterations");
    DecayReport rep;
    for (std::size_t k = 0; k + 1 < d.size(); ++k)
        rep.ratios.push_back(d[k] > 0.0 ? d[k + 1] / d[k] : 0.0);
    double tail_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = rep.ratios.size() / 2; k < rep.ratios.size(); ++k)
        tail_min = std::min(tail_min, rep.ratios[k]);
    rep.pass = tail_min < rep.ratios.front() * 0.9;
    // least-squares fit of log d_k against the envelope shape
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (!(d[k] > 0.0)) continue;
        const double x = 0.5 * (k + 1.0);
        const double y = std::log(d[k]) + std::lgamma(0.5 * (k + 1.0) + 1.0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    if (cnt >= 2) rep.fitted_log_rate = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return rep;
}

inline DecayReport picard_decay_check(const PicardState& st) { return picard_decay_check(st.d); }

// Restart: solve on [tau, tau + extra_t] with the row of `prior` at tau as
// initial data and the noise rows at times >= tau. Output rows are indexed
// by absolute time tau + s.
inline PicardState restart_solve(const PicardState& prior, const NoiseField& noise, double tau,
                                 double extra_t, const PicardOptions& opt = {}) {
    const GridSpec& grid = noise.grid();
    const int row_tau = grid.time_row(tau - prior.t_offset);
    if (row_tau < 0 || row_tau >= prior.rows())
        throw std::invalid_argument("restart_solve: tau outside the prior field");

    // initial data backed by the stored grid row
    const std::size_t per_row = prior.points_per_row();
    std::vector<double> row(prior.field.begin() + row_tau * per_row,
                            prior.field.begin() + (row_tau + 1) * per_row);
    double bound = 0.0;
    for (double v : row) bound = std::max(bound, std::abs(v));
    const int n = prior.n, nb = prior.nb, box_lo = prior.box_lo;
    const GridSpec pgrid = prior.noise_grid;
    auto eval = [row = std::move(row), n, nb, box_lo, pgrid](const std::vector<double>& y) {
        std::vector<int> idx(n);
        for (int a = 0; a < n; ++a) {
            int node = pgrid.nearest_node(y[a]) - box_lo;
            node = std::max(0, std::min(nb - 1, node));
            idx[a] = node;
        }
        std::sort(idx.begin(), idx.end()); // symmetric lookup
        std::size_t flat = 0;
        for (int a = 0; a < n; ++a) flat = flat * nb + idx[a];
        return row[flat];
    };
    SymmetricInitialData g(n, eval, bound * (1.0 + 1e-9) + 1e-300);

    const int row0 = grid.time_row(tau);
    const int extra_rows = grid.time_row(extra_t);
    if (row0 + extra_rows > grid.nt)
        throw std::invalid_argument("restart_solve: tau + extra_t exceeds the noise horizon");

    if (extra_rows == 0) {
        PicardState st;
        st.n = n;
        st.noise_grid = GridSpec(grid.x_min, grid.x_max, grid.nx, grid.dt(), 1, grid.boundary);
        st.t_offset = tau;
        st.box_lo = prior.box_lo;
        st.nb = prior.nb;
        st.field.assign(prior.field.begin() + row_tau * per_row,
                        prior.field.begin() + (row_tau + 1) * per_row);
        return st;
    }

    // shifted noise: rows row0 .. row0 + extra_rows - 1
    std::vector<double> xi;
    xi.reserve(static_cast<std::size_t>(extra_rows) * grid.nx);
    for (int j = row0; j < row0 + extra_rows; ++j)
        xi.insert(xi.end(), noise.row(j), noise.row(j) + grid.nx);
    GridSpec sub(grid.x_min, grid.x_max, grid.nx, extra_rows * grid.dt(), extra_rows, grid.boundary);
    NoiseField shifted(sub, std::move(xi), noise.seed());

    PicardState st = picard_solve(g, shifted, opt);
    st.t_offset = tau;
    return st;
}

struct WeakCompareReport {
    double min_difference = 0.0;
    std::vector<int> argmin_tuple;
    int argmin_row = 0;
    long points = 0;
    long violations = 0;    // points with diff < -1e-9 * scale (roundoff floor)
    double scale = 1.0;     // 1 + sup |solution1|
};

// Runs the Picard solver for g1 and g2 against the identical noise and
// reports the minimum of (solution1 - solution2) over the grid.
inline WeakCompareReport weak_compare(const SymmetricInitialData& g1, const SymmetricInitialData& g2,
                                      const NoiseField& noise, const PicardOptions& opt = {}) {
    if (g1.n() != g2.n()) throw std::invalid_argument("weak_compare: dimension mismatch");
    // precondition g1 >= g2, checked on the box grid
    PicardState s1 = picard_solve(g1, noise, opt);
    {
        const int n = g1.n();
        std::vector<double> yp(n);
        bool ok = true;
        detail::enumerate_tuples(n, s1.nb, [&](const std::vector<int>& idx) {
            for (int a = 0; a < n; ++a) yp[a] = s1.node(idx[a]);
            if (g1(yp) < g2(yp) - 1e-12) ok = false;
        });
        if (!ok) throw std::invalid_argument("weak_compare: g1 >= g2 fails on the grid");
    }
    PicardState s2 = picard_solve(g2, noise, opt);

    WeakCompareReport rep;
    rep.min_difference = std::numeric_limits<double>::infinity();
    for (double v : s1.field) rep.scale = std::max(rep.scale, 1.0 + std::abs(v));
    const double floor = -1e-9 * rep.scale;
    const std::size_t per_row = s1.points_per_row();
    for (int row = 0; row < s1.rows(); ++row) {
        std::size_t flat = 0;
        detail::enumerate_tuples(s1.n, s1.nb, [&](const std::vector<int>& idx) {
            const std::size_t off = static_cast<std::size_t>(row) * per_row + flat;
            const double diff = s1.field[off] - s2.field[off];
            ++rep.points;
            if (diff < rep.min_difference) {
                rep.min_difference = diff;
                rep.argmin_tuple = idx;
                rep.argmin_row = row;
            }
            if (diff < floor) ++rep.violations;
            ++flat;
        });
    }
    return rep;
}

// Chaos partial sums S_0..S_kmax of Z_1(t,x,y): S_0 = p_t(x-y) and S_k adds
// the k-fold Walsh integral of R_k over the simplex, discretized with
// midpoint times (strictly increasing time cells, each counted once).
inline std::vector<double> chaos_z1(const NoiseField& noise, double t, double x, double y,
                                    int k_max = 3) {
    if (k_max < 0 || k_max > 3)
        throw std::invalid_argument("chaos_z1: k_max must be between 0 and 3 (cost guard)");
    const GridSpec& g = noise.grid();
    if (t > g.t_max() * (1 + 1e-12)) throw std::invalid_argument("chaos_z1: t exceeds the horizon");
    const int nt = g.time_row(t), nx = g.nx;
    const double dt = g.dt(), dx = g.dx();
    const double scale = std::sqrt(dt * dx);

    std::vector<double> sums{heat_kernel(t, x - y)};
    if (k_max == 0) return sums;

    // level fields G_r(j,i): the r-fold iterated integrand up to (s_j, x_i)
    auto mid = [&](int j) { return (j + 0.5) * dt; };
    std::vector<double> glev(static_cast<std::size_t>(nt) * nx);
    for (int j = 0; j < nt; ++j)
        for (int i = 0; i < nx; ++i)
            glev[static_cast<std::size_t>(j) * nx + i] = heat_kernel(mid(j), x - g.node(i));

    // cached p_{(j-j')dt}(node_i - node_i') by time lag and space offset
    std::vector<std::vector<double>> plag(nt);
    for (int lag = 1; lag < nt; ++lag) {
        plag[lag].resize(2 * nx - 1);
        for (int off = -(nx - 1); off <= nx - 1; ++off)
            plag[lag][off + nx - 1] = heat_kernel(lag * dt, off * dx);
    }

    for (int level = 1; level <= k_max; ++level) {
        // close the level: S_level = S_{level-1} + sum p_{t - s_j}(y - x_i) G xi
        double add = 0.0;
        for (int j = 0; j < nt; ++j) {
            const double* xi = noise.row(j);
            const double* gl = glev.data() + static_cast<std::size_t>(j) * nx;
            double rowacc = 0.0;
            for (int i = 0; i < nx; ++i)
                rowacc += heat_kernel(t - mid(j), y - g.node(i)) * gl[i] * xi[i];
            add += rowacc;
        }
        sums.push_back(sums.back() + add * scale);
        if (level == k_max) break;

        // lift to the next level: G'(j,i) = sum_{j'<j} p * G * xi
        std::vector<double> next(glev.size(), 0.0);
        for (int j = 1; j < nt; ++j) {
            double* dst = next.data() + static_cast<std::size_t>(j) * nx;
            for (int jp = 0; jp < j; ++jp) {
                const double* xi = noise.row(jp);
                const double* gl = glev.data() + static_cast<std::size_t>(jp) * nx;
                const double* pl = plag[j - jp].data() + (nx - 1);
                for (int i = 0; i < nx; ++i) {
                    double acc = 0.0;
                    for (int ip = 0; ip < nx; ++ip) acc += pl[i - ip] * gl[ip] * xi[ip];
                    dst[i] += acc;
                }
            }
            for (int i = 0; i < nx; ++i) dst[i] *= scale;
        }
        glev.swap(next);
    }
    return sums;
}

struct MomentBound {
    double a_constant = 0.0; // A = 2 sqrt(C4) A_n pi^(1/4), read off the decay analysis
    double c_p = 0.0;
    double bound = 0.0; // 2 K^2 e^{A^2 c_p^4 t} (1 + erf(A c_p^2 sqrt(t)))
};

// One-sided p-th moment bound for the bounded-data solution, evaluated with
// the series utility. c4 is the measured constant of int K_t^2 <= C4/sqrt(t).
inline MomentBound moment_bound(int n, double t, int p, double k_pg, double c4) {
    if (n < 1 || p < 2) throw std::invalid_argument("moment_bound: need n >= 1 and p >= 2");
    MomentBound mb;
    mb.c_p = 2.0 * std::sqrt(static_cast<double>(p));
    const double a_n = 1.0 / factorial(n - 1);
    mb.a_constant = 2.0 * std::sqrt(c4) * a_n * std::pow(kPi, 0.25);
    const double arg = mb.a_constant * mb.c_p * mb.c_p * std::sqrt(t);
    // sum the series to convergence with recursive terms: the term at k + 2
    // is the term at k times arg^2 / ((k+1)/2), which avoids the overflow of
    // pow/tgamma at large arguments
    double series = 0.0;
    double term_even = 1.0 / std::tgamma(1.0);        // k = 1
    double term_odd = arg / std::tgamma(1.5);         // k = 2
    for (int k = 1; k <= 2000; k += 2) {
        series += term_even + term_odd;
        if (term_even + term_odd < 1e-12 * series) break;
        term_even *= arg * arg / (0.5 * (k + 1));
        term_odd *= arg * arg / (0.5 * (k + 2));
    }
    mb.bound = 2.0 * k_pg * k_pg * series;
    return mb;
}

} // namespace mlshe
