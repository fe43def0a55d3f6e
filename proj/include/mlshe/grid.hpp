#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mlshe {

enum class BoundaryMode { periodic, absorbing };

// Space-time discretization shared by the noise and the solvers.
// Space nodes x_i = x_min + i*dx, i = 0..nx-1, seen as centers of cells of
// width dx. Time rows j = 0..nt-1 cover [j*dt, (j+1)*dt); t_max == nt*dt.
struct GridSpec {
    double x_min = -4.0;
    double x_max = 4.0;
    int nx = 401;
    int nt = 1;
    double dt_ = 0.0;
    BoundaryMode boundary = BoundaryMode::periodic;

    GridSpec() { dt_ = 1.0; }

    GridSpec(double xmin, double xmax, int nx_, double tmax, int nt_,
             BoundaryMode mode = BoundaryMode::periodic)
        : x_min(xmin), x_max(xmax), nx(nx_), nt(nt_), boundary(mode) {
        if (!(xmax > xmin)) throw std::invalid_argument("GridSpec: x_max must exceed x_min");
        if (nx_ < 2) throw std::invalid_argument("GridSpec: nx must be at least 2");
        if (nt_ < 1) throw std::invalid_argument("GridSpec: nt must be positive");
        if (!(tmax > 0.0)) throw std::invalid_argument("GridSpec: t_max must be positive");
        dt_ = tmax / nt_;
    }

    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dt() const { return dt_; }
    double t_max() const { return nt * dt_; }

    // dt <= dx^2/2 is required by the explicit SHE solver.
    bool solver_stable() const { return dt_ <= dx() * dx() / 2.0 * (1.0 + 1e-12); }

    double node(int i) const { return x_min + i * dx(); }
    double time(int j) const { return j * dt_; }

    int nearest_node(double x) const {
        int i = static_cast<int>(std::lround((x - x_min) / dx()));
        if (i < 0) i = 0;
        if (i >= nx) i = nx - 1;
        return i;
    }

    bool time_aligned(double t) const {
        const double k = t / dt_;
        return std::abs(k - std::lround(k)) < 1e-9 * (1.0 + std::abs(k));
    }

    int time_row(double t) const {
        if (!time_aligned(t)) throw std::invalid_argument("time not aligned with the grid");
        return static_cast<int>(std::lround(t / dt_));
    }

    bool same_mesh(const GridSpec& o) const {
        return x_min == o.x_min && x_max == o.x_max && nx == o.nx && nt == o.nt &&
               dt_ == o.dt_ && boundary == o.boundary;
    }
};

} // namespace mlshe
