#pragma once

#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mlshe/grid.hpp"
#include "mlshe/kernels.hpp"
#include "mlshe/noise.hpp"
#include "mlshe/parallel.hpp"

namespace mlshe {

// Initial data for the SHE solver: a delta of mass 1 (discretized as 1/dx at
// the nearest node) or a function sampled at the nodes.
struct InitialData {
    enum class Kind { delta, function };
    Kind kind = Kind::delta;
    double x0 = 0.0;
    std::function<double(double)> fn;

    static InitialData delta(double at) {
        InitialData d;
        d.kind = Kind::delta;
        d.x0 = at;
        return d;
    }
    static InitialData function(std::function<double(double)> f) {
        InitialData d;
        d.kind = Kind::function;
        d.fn = std::move(f);
        return d;
    }

    std::vector<double> discretize(const GridSpec& g) const {
        std::vector<double> row(g.nx, 0.0);
        if (kind == Kind::delta) {
            row[g.nearest_node(x0)] = 1.0 / g.dx();
        } else {
            for (int i = 0; i < g.nx; ++i) row[i] = fn(g.node(i));
        }
        return row;
    }
};

// Solution values of one SHE run over the full space-time grid.
// Row m holds u(m*dt, .); row 0 is the discretized initial condition.
class FieldTrajectory {
  public:
    FieldTrajectory(GridSpec grid, std::vector<double> values, InitialData init)
        : grid_(grid), values_(std::move(values)), init_(std::move(init)) {
        if (values_.size() != static_cast<std::size_t>(grid_.nt + 1) * grid_.nx)
            throw std::invalid_argument("FieldTrajectory: shape mismatch");
    }

    const GridSpec& grid() const { return grid_; }
    const InitialData& init() const { return init_; }

    double operator()(int m, int i) const { return values_[static_cast<std::size_t>(m) * grid_.nx + i]; }
    const double* row(int m) const { return values_.data() + static_cast<std::size_t>(m) * grid_.nx; }

    // u(t, y): t must be grid aligned; y linearly interpolated between nodes.
    double at(double t, double y) const {
        const int m = grid_.time_row(t);
        const double pos = (y - grid_.x_min) / grid_.dx();
        int i = static_cast<int>(std::floor(pos));
        if (i < 0 || i >= grid_.nx - 1) {
            if (std::abs(pos - (grid_.nx - 1)) < 1e-9) return (*this)(m, grid_.nx - 1);
            if (std::abs(pos) < 1e-9) return (*this)(m, 0);
            throw std::invalid_argument("FieldTrajectory::at: y outside the spatial window");
        }
        const double w = pos - i;
        return (1.0 - w) * (*this)(m, i) + w * (*this)(m, i + 1);
    }

    double min_value(double t_from) const {
        const int m0 = grid_.time_row(t_from);
        double mn = values_[static_cast<std::size_t>(m0) * grid_.nx];
        for (std::size_t k = static_cast<std::size_t>(m0) * grid_.nx; k < values_.size(); ++k)
            mn = std::min(mn, values_[k]);
        return mn;
    }

    const std::vector<double>& data() const { return values_; }

    // binary export with the noise-field header scheme (payload has nt+1
    // rows); see docs/file-formats.md
    void save(const std::string& path) const;
    static FieldTrajectory load(const std::string& path);

    // one CSV row per node of the slice at grid time t
    void save_csv_slice(const std::string& path, double t) const;

  private:
    GridSpec grid_;
    std::vector<double> values_;
    InitialData init_;
};

// Explicit one-step-mild scheme for the multiplicative SHE
//   u_{m+1,i} = sum_j P_dt(i,j) u_{m,j} dx + u_{m,i} xi[m][i] sqrt(dt/dx),
// with P_dt the one-step heat kernel on the grid (three-point stencil with
// weights lambda, 1-2lambda, lambda; lambda = dt/(2 dx^2) <= 1/4) and
// pointwise Ito noise coupling (the noise multiplies the pre-step value of
// its own cell). Boundary mode periodic wraps the stencil; absorbing kills
// mass leaving the window.
inline FieldTrajectory solve_she(const GridSpec& grid, const NoiseField& noise, const InitialData& init) {
    if (!grid.solver_stable())
        throw std::invalid_argument("solve_she: stability requires dt <= dx^2/2");
    if (!noise.grid().same_mesh(grid)) throw std::invalid_argument("solve_she: noise grid mismatch");

    const int nx = grid.nx, nt = grid.nt;
    const double lam = grid.dt() / (2.0 * grid.dx() * grid.dx());
    const double noise_scale = std::sqrt(grid.dt() / grid.dx());
    const bool periodic = grid.boundary == BoundaryMode::periodic;

    std::vector<double> values(static_cast<std::size_t>(nt + 1) * nx);
    std::vector<double> row0 = init.discretize(grid);
    std::copy(row0.begin(), row0.end(), values.begin());

    for (int m = 0; m < nt; ++m) {
        const double* u = values.data() + static_cast<std::size_t>(m) * nx;
        double* v = values.data() + static_cast<std::size_t>(m + 1) * nx;
        const double* xi = noise.row(m);
        for (int i = 0; i < nx; ++i) {
            double left, right;
            if (periodic) {
                left = u[(i - 1 + nx) % nx];
                right = u[(i + 1) % nx];
            } else {
                left = (i > 0) ? u[i - 1] : 0.0;
                right = (i < nx - 1) ? u[i + 1] : 0.0;
            }
            v[i] = lam * (left + right) + (1.0 - 2.0 * lam) * u[i] + u[i] * xi[i] * noise_scale;
        }
    }
    return FieldTrajectory(grid, std::move(values), init);
}

// --- binary format -------------------------------------------------------
// Same layout as the noise field (docs/file-formats.md) with magic
// "MLSHETR1" and nt+1 payload rows; the seed slot stores the init location
// for delta data and an all-ones marker for function data.

inline void FieldTrajectory::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("FieldTrajectory::save: cannot open " + path);
    const char magic[8] = {'M', 'L', 'S', 'H', 'E', 'T', 'R', '1'};
    out.write(magic, 8);
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(1u);
    put_u32(grid_.boundary == BoundaryMode::periodic ? 0u : 1u);
    put_f64(grid_.x_min);
    put_f64(grid_.x_max);
    put_u64(static_cast<std::uint64_t>(grid_.nx));
    put_f64(grid_.dt());
    put_u64(static_cast<std::uint64_t>(grid_.nt));
    if (init_.kind == InitialData::Kind::delta) {
        std::uint64_t bits;
        std::memcpy(&bits, &init_.x0, 8);
        put_u64(bits);
    } else {
        put_u64(~0ULL);
    }
    out.write(reinterpret_cast<const char*>(values_.data()),
              static_cast<std::streamsize>(values_.size() * 8));
    if (!out) throw std::runtime_error("FieldTrajectory::save: write failed for " + path);
}

inline FieldTrajectory FieldTrajectory::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("FieldTrajectory::load: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "MLSHETR1", 8) != 0) throw std::runtime_error("FieldTrajectory::load: bad magic");
    auto get_u32 = [&] { std::uint32_t v; in.read(reinterpret_cast<char*>(&v), 4); return v; };
    auto get_u64 = [&] { std::uint64_t v; in.read(reinterpret_cast<char*>(&v), 8); return v; };
    auto get_f64 = [&] { double v; in.read(reinterpret_cast<char*>(&v), 8); return v; };
    if (get_u32() != 1u) throw std::runtime_error("FieldTrajectory::load: unsupported version");
    const std::uint32_t mode = get_u32();
    const double x_min = get_f64();
    const double x_max = get_f64();
    const auto nx = static_cast<int>(get_u64());
    const double dt = get_f64();
    const auto nt = static_cast<int>(get_u64());
    const std::uint64_t init_bits = get_u64();
    GridSpec grid(x_min, x_max, nx, dt * nt, nt,
                  mode == 0 ? BoundaryMode::periodic : BoundaryMode::absorbing);
    std::vector<double> values(static_cast<std::size_t>(nt + 1) * nx);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * 8));
    if (!in) throw std::runtime_error("FieldTrajectory::load: truncated payload in " + path);
    InitialData init;
    if (init_bits != ~0ULL) {
        double x0;
        std::memcpy(&x0, &init_bits, 8);
        init = InitialData::delta(x0);
    } else {
        init = InitialData::function([](double) { return 0.0; }); // sampled data, evaluator not stored
    }
    return FieldTrajectory(grid, std::move(values), init);
}

inline void FieldTrajectory::save_csv_slice(const std::string& path, double t) const {
    const int m = grid_.time_row(t);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("FieldTrajectory::save_csv_slice: cannot open " + path);
    out << "t,y,u\n";
    char buf[96];
    for (int i = 0; i < grid_.nx; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", t, grid_.node(i), (*this)(m, i));
        out << buf;
    }
}

// One delta-initial-data trajectory per starting point, all consuming the
// identical noise realization.
inline std::vector<FieldTrajectory> solve_family(const GridSpec& grid, const NoiseField& noise,
                                                 const std::vector<double>& x0s, int workers = 0) {
    std::vector<FieldTrajectory> out;
    out.reserve(x0s.size());
    if (workers <= 1 || x0s.size() <= 1) {
        for (double x0 : x0s) out.push_back(solve_she(grid, noise, InitialData::delta(x0)));
        return out;
    }
    std::vector<std::unique_ptr<FieldTrajectory>> slots(x0s.size());
    parallel_for(x0s.size(), [&](std::size_t k) {
        slots[k] = std::make_unique<FieldTrajectory>(solve_she(grid, noise, InitialData::delta(x0s[k])));
    }, workers);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

} // namespace mlshe
