#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mlshe/grid.hpp"
#include "mlshe/rng.hpp"

namespace mlshe {

// One realization of discretized space-time white noise. Entries are raw
// unit normals; the Walsh increment over cell (j,i) is xi(j,i)*sqrt(dt*dx).
// Immutable after construction and safe to share across threads.
class NoiseField {
  public:
    NoiseField(GridSpec grid, std::vector<double> xi, std::uint64_t seed)
        : grid_(grid), xi_(std::move(xi)), seed_(seed) {
        if (xi_.size() != static_cast<std::size_t>(grid_.nt) * grid_.nx)
            throw std::invalid_argument("NoiseField: matrix shape does not match grid");
    }

    static NoiseField zeros(const GridSpec& grid) {
        return NoiseField(grid, std::vector<double>(static_cast<std::size_t>(grid.nt) * grid.nx, 0.0), 0);
    }

    const GridSpec& grid() const { return grid_; }
    std::uint64_t seed() const { return seed_; }

    // Row j = time cell [j*dt,(j+1)*dt), column i = space node i. Row-major.
    double operator()(int j, int i) const { return xi_[static_cast<std::size_t>(j) * grid_.nx + i]; }
    const double* row(int j) const { return xi_.data() + static_cast<std::size_t>(j) * grid_.nx; }
    const std::vector<double>& data() const { return xi_; }

    void save(const std::string& path) const;
    static NoiseField load(const std::string& path);

  private:
    GridSpec grid_;
    std::vector<double> xi_;
    std::uint64_t seed_;
};

// i.i.d. standard normals, one per cell, fully determined by (grid, seed).
inline NoiseField sample_noise(const GridSpec& grid, std::uint64_t seed) {
    std::vector<double> xi(static_cast<std::size_t>(grid.nt) * grid.nx);
    for (std::size_t c = 0; c < xi.size(); ++c) xi[c] = rng::normal(seed, c);
    return NoiseField(grid, std::move(xi), seed);
}

// Discretized Walsh integral: sum over cells with s_j = j*dt < t_end of
// f(s_j, x_i) * xi(j,i) * sqrt(dt*dx).
inline double walsh_integrate(const NoiseField& noise, const std::function<double(double, double)>& f,
                              double t_end) {
    const GridSpec& g = noise.grid();
    if (t_end > g.t_max() * (1.0 + 1e-12))
        throw std::invalid_argument("walsh_integrate: t_end exceeds the grid horizon");
    const double scale = std::sqrt(g.dt() * g.dx());
    double acc = 0.0;
    for (int j = 0; j < g.nt; ++j) {
        const double s = g.time(j);
        if (!(s < t_end - 1e-12 * g.dt())) break;
        const double* row = noise.row(j);
        for (int i = 0; i < g.nx; ++i) acc += f(s, g.node(i)) * row[i] * scale;
    }
    return acc;
}

// Time-reversed noise about t: rows j < t/dt become rows (t/dt - 1 - j);
// rows at or beyond t/dt are unchanged.
inline NoiseField time_reverse(const NoiseField& noise, double t) {
    const GridSpec& g = noise.grid();
    if (t > g.t_max() * (1.0 + 1e-12)) throw std::invalid_argument("time_reverse: t exceeds horizon");
    const int k = g.time_row(t);
    std::vector<double> xi(noise.data());
    for (int j = 0; j < k; ++j) {
        const double* src = noise.row(k - 1 - j);
        std::memcpy(xi.data() + static_cast<std::size_t>(j) * g.nx, src, sizeof(double) * g.nx);
    }
    return NoiseField(g, std::move(xi), noise.seed());
}

// --- binary format -----------------------------------------------------
// Little-endian layout, documented in docs/file-formats.md:
//   bytes 0..7   magic "MLSHENF1"
//   u32          version (1)
//   u32          boundary mode (0 periodic, 1 absorbing)
//   f64 x_min, f64 x_max, u64 nx, f64 dt, u64 nt, u64 seed
//   f64 payload  nt*nx entries, row-major (time rows, space columns)

inline void NoiseField::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("NoiseField::save: cannot open " + path);
    const char magic[8] = {'M', 'L', 'S', 'H', 'E', 'N', 'F', '1'};
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
    put_u64(seed_);
    out.write(reinterpret_cast<const char*>(xi_.data()), static_cast<std::streamsize>(xi_.size() * 8));
    if (!out) throw std::runtime_error("NoiseField::save: write failed for " + path);
}

inline NoiseField NoiseField::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("NoiseField::load: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "MLSHENF1", 8) != 0) throw std::runtime_error("NoiseField::load: bad magic");
    auto get_u32 = [&] { std::uint32_t v; in.read(reinterpret_cast<char*>(&v), 4); return v; };
    auto get_u64 = [&] { std::uint64_t v; in.read(reinterpret_cast<char*>(&v), 8); return v; };
    auto get_f64 = [&] { double v; in.read(reinterpret_cast<char*>(&v), 8); return v; };
    const std::uint32_t version = get_u32();
    if (version != 1u) throw std::runtime_error("NoiseField::load: unsupported version");
    const std::uint32_t mode = get_u32();
    const double x_min = get_f64();
    const double x_max = get_f64();
    const auto nx = static_cast<int>(get_u64());
    const double dt = get_f64();
    const auto nt = static_cast<int>(get_u64());
    const std::uint64_t seed = get_u64();
    GridSpec grid(x_min, x_max, nx, dt * nt, nt,
                  mode == 0 ? BoundaryMode::periodic : BoundaryMode::absorbing);
    std::vector<double> xi(static_cast<std::size_t>(nt) * nx);
    in.read(reinterpret_cast<char*>(xi.data()), static_cast<std::streamsize>(xi.size() * 8));
    if (!in) throw std::runtime_error("NoiseField::load: truncated payload in " + path);
    return NoiseField(grid, std::move(xi), seed);
}

} // namespace mlshe
