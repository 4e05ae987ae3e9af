#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "chsim/diagnostics.hpp"
#include "chsim/errors.hpp"
#include "chsim/grid.hpp"
#include "chsim/models.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot and image writers assume a little-endian host");

namespace chsim {

// ---------------------------------------------------------------------------
// CSV time series
// ---------------------------------------------------------------------------

inline const char* csv_header() { return "step,time,energy,mass,volume,u_min,u_max,overshoot\n"; }

/// One CSV row with full 17-significant-digit decimal output.
inline std::string csv_row(const DiagRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step,
                  r.time, r.energy, r.mass, r.volume, r.u_min, r.u_max, r.overshoot);
    return buf;
}

// ---------------------------------------------------------------------------
// Snapshot files ("CHF1")
// ---------------------------------------------------------------------------
//
// Little-endian layout:
//   bytes 0..3   magic "CHF1"
//   u32          format version (1)
//   u32          dimension d
//   u64 * d      per-axis sample counts
//   f64 * d      per-axis box lengths
//   f64          interface width eps
//   f64          physical time
//   f64 * total  u samples, row-major
//   f64 * total  mu samples, row-major

struct Snapshot {
    GridSpec grid;
    double eps = 0.0;
    double time = 0.0;
    Field u;
    Field mu;
};

namespace detail {

template <class T>
inline void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
inline void get(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

} // namespace detail

inline void write_snapshot(const std::string& path, const SimState& s, double eps) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open snapshot file for writing: " + path);
    const GridSpec& g = s.u.grid();
    os.write("CHF1", 4);
    detail::put(os, std::uint32_t{1});
    detail::put(os, static_cast<std::uint32_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) detail::put(os, static_cast<std::uint64_t>(g.size(a)));
    for (int a = 0; a < g.dim(); ++a) detail::put(os, g.length(a));
    detail::put(os, eps);
    detail::put(os, s.time);
    os.write(reinterpret_cast<const char*>(s.u.data()),
             static_cast<std::streamsize>(g.total() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(s.mu.data()),
             static_cast<std::streamsize>(g.total() * sizeof(double)));
    if (!os) throw IoError("failed while writing snapshot: " + path);
}

inline Snapshot read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open snapshot file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CHF1", 4) != 0)
        throw IoError("not a CHF1 snapshot: " + path);
    std::uint32_t version = 0, dim = 0;
    detail::get(is, version);
    detail::get(is, dim);
    if (version != 1) throw IoError("unsupported snapshot version in " + path);
    if (dim != 2 && dim != 3) throw IoError("snapshot has unsupported dimension in " + path);
    std::vector<std::size_t> sizes(dim);
    std::vector<double> lengths(dim);
    for (auto& n : sizes) {
        std::uint64_t v = 0;
        detail::get(is, v);
        n = static_cast<std::size_t>(v);
    }
    for (auto& l : lengths) detail::get(is, l);
    double eps = 0.0, time = 0.0;
    detail::get(is, eps);
    detail::get(is, time);
    if (!is) throw IoError("truncated snapshot header: " + path);
    GridSpec grid(sizes, lengths);
    Field u(grid), mu(grid);
    is.read(reinterpret_cast<char*>(u.data()),
            static_cast<std::streamsize>(grid.total() * sizeof(double)));
    is.read(reinterpret_cast<char*>(mu.data()),
            static_cast<std::streamsize>(grid.total() * sizeof(double)));
    if (!is) throw IoError("truncated snapshot payload: " + path);
    return Snapshot{grid, eps, time, std::move(u), std::move(mu)};
}

// ---------------------------------------------------------------------------
// Grayscale images (binary PGM), for zero-dependency visual inspection
// ---------------------------------------------------------------------------

/// Write a 2D field as binary 8-bit PGM; u is clamped to [0,1] and mapped to
/// [0,255].
inline void write_pgm(const std::string& path, const Field& f) {
    const GridSpec& g = f.grid();
    if (g.dim() != 2) throw Error("write_pgm: needs a 2D field");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open image file for writing: " + path);
    os << "P5\n" << g.size(1) << " " << g.size(0) << "\n255\n";
    std::vector<unsigned char> row(g.size(1));
    std::size_t flat = 0;
    for (std::size_t i0 = 0; i0 < g.size(0); ++i0) {
        for (std::size_t i1 = 0; i1 < g.size(1); ++i1, ++flat) {
            const double v = std::min(1.0, std::max(0.0, f[flat]));
            row[i1] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size()));
    }
    if (!os) throw IoError("failed while writing image: " + path);
}

/// Mid-plane slice of a 3D field perpendicular to `axis` (index N_axis/2),
/// returned as a 2D field on the remaining axes.
inline Field midplane_slice(const Field& f, int axis) {
    const GridSpec& g = f.grid();
    if (g.dim() != 3) throw Error("midplane_slice: needs a 3D field");
    if (axis < 0 || axis > 2) throw Error("midplane_slice: axis out of range");
    std::vector<std::size_t> sizes;
    std::vector<double> lengths;
    for (int a = 0; a < 3; ++a) {
        if (a == axis) continue;
        sizes.push_back(g.size(a));
        lengths.push_back(g.length(a));
    }
    GridSpec g2(sizes, lengths);
    Field out(g2);
    std::array<std::size_t, 3> idx{0, 0, 0};
    idx[static_cast<std::size_t>(axis)] = g.size(axis) / 2;
    std::size_t flat = 0;
    const int a0 = axis == 0 ? 1 : 0;
    const int a1 = axis == 2 ? 1 : 2;
    for (std::size_t i = 0; i < g.size(a0); ++i) {
        idx[static_cast<std::size_t>(a0)] = i;
        for (std::size_t j = 0; j < g.size(a1); ++j, ++flat) {
            idx[static_cast<std::size_t>(a1)] = j;
            out[flat] = f[flatten(g, {idx.data(), 3})];
        }
    }
    return out;
}

} // namespace chsim
