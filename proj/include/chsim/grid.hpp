#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <new>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chsim/errors.hpp"

namespace chsim {

/// 64-byte aligned allocator so field buffers satisfy the SIMD alignment the
/// FFT plans are created with.
template <class T>
struct AlignedAlloc {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U>&) noexcept {}

    T* allocate(std::size_t n) {
        if (n == 0) return nullptr;
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{alignment}));
    }
    void deallocate(T* p, std::size_t) noexcept {
        ::operator delete(p, std::align_val_t{alignment});
    }
    template <class U>
    bool operator==(const AlignedAlloc<U>&) const noexcept {
        return true;
    }
};

using RealVec = std::vector<double, AlignedAlloc<double>>;
using ComplexVec = std::vector<std::complex<double>, AlignedAlloc<std::complex<double>>>;

/// Periodic box [0,L_1]x...x[0,L_d] sampled with N_i points per axis.
/// Sample i on axis a sits at x = i * L_a / N_a; storage is row-major with
/// the last axis fastest.
class GridSpec {
public:
    GridSpec(std::vector<std::size_t> sizes, std::vector<double> lengths)
        : sizes_(std::move(sizes)), lengths_(std::move(lengths)) {
        if (sizes_.size() != 2 && sizes_.size() != 3)
            throw ConfigError("grid: dimension must be 2 or 3, got " +
                              std::to_string(sizes_.size()));
        if (lengths_.size() != sizes_.size())
            throw ConfigError("grid: sizes and lengths disagree on dimension");
        std::size_t total = 1;
        for (std::size_t a = 0; a < sizes_.size(); ++a) {
            const std::size_t n = sizes_[a];
            if (n < 4 || n % 2 != 0)
                throw ConfigError("grid: axis " + std::to_string(a) +
                                  " sample count must be even and >= 4, got " +
                                  std::to_string(n));
            if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a]))
                throw ConfigError("grid: axis " + std::to_string(a) +
                                  " length must be a positive finite real");
            if (total > max_total_samples / n)
                throw ConfigError("grid: total sample count exceeds the supported range");
            total *= n;
        }
        total_ = total;
    }

    /// Convenience: uniform N per axis on the unit box.
    static GridSpec square(int dim, std::size_t n, double length = 1.0) {
        return GridSpec(std::vector<std::size_t>(static_cast<std::size_t>(dim), n),
                        std::vector<double>(static_cast<std::size_t>(dim), length));
    }

    int dim() const { return static_cast<int>(sizes_.size()); }
    std::size_t size(int axis) const { return sizes_[static_cast<std::size_t>(axis)]; }
    double length(int axis) const { return lengths_[static_cast<std::size_t>(axis)]; }
    double spacing(int axis) const {
        return lengths_[static_cast<std::size_t>(axis)] /
               static_cast<double>(sizes_[static_cast<std::size_t>(axis)]);
    }
    const std::vector<std::size_t>& sizes() const { return sizes_; }
    const std::vector<double>& lengths() const { return lengths_; }

    std::size_t total() const { return total_; }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim(); ++a) v *= spacing(a);
        return v;
    }
    double box_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim(); ++a) v *= length(a);
        return v;
    }
    double max_spacing() const {
        double h = 0.0;
        for (int a = 0; a < dim(); ++a) h = std::max(h, spacing(a));
        return h;
    }

    bool operator==(const GridSpec& o) const {
        return sizes_ == o.sizes_ && lengths_ == o.lengths_;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }

private:
    static constexpr std::size_t max_total_samples = std::size_t{1} << 34;

    std::vector<std::size_t> sizes_;
    std::vector<double> lengths_;
    std::size_t total_ = 0;
};

/// Real scalar samples on a grid, row-major (last axis fastest).
class Field {
public:
    explicit Field(GridSpec grid)
        : grid_(std::move(grid)), values_(grid_.total(), 0.0) {}
    Field(GridSpec grid, RealVec values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.total())
            throw Error("field: value count does not match the grid");
    }

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    RealVec& values() { return values_; }
    const RealVec& values() const { return values_; }

private:
    GridSpec grid_;
    RealVec values_;
};

/// Complex Fourier coefficients indexed by wavenumber tuple. Storage order
/// matches the sample grid; storage index i on an axis of size N carries the
/// signed wavenumber k = i for i < N/2 and k = i - N otherwise, so the index
/// set per axis is [-N/2, N/2 - 1].
class SpectralField {
public:
    explicit SpectralField(GridSpec grid)
        : grid_(std::move(grid)), coeffs_(grid_.total(), std::complex<double>{0.0, 0.0}) {}
    SpectralField(GridSpec grid, ComplexVec coeffs)
        : grid_(std::move(grid)), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != grid_.total())
            throw Error("spectral field: coefficient count does not match the grid");
    }

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return coeffs_.size(); }
    std::complex<double>* data() { return coeffs_.data(); }
    const std::complex<double>* data() const { return coeffs_.data(); }
    std::complex<double>& operator[](std::size_t i) { return coeffs_[i]; }
    const std::complex<double>& operator[](std::size_t i) const { return coeffs_[i]; }

    /// Zero-wavenumber coefficient. With the unnormalized forward transform it
    /// equals the sum of the samples, i.e. (prod N_i) * mean.
    std::complex<double> zero_mode() const { return coeffs_[0]; }

private:
    GridSpec grid_;
    ComplexVec coeffs_;
};

/// Signed wavenumber for storage index i on an axis with N samples.
inline long wavenumber(std::size_t i, std::size_t n) {
    return i < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

/// Index of the first non-finite value, if any.
inline std::optional<std::size_t> first_non_finite(const Field& f) {
    const double* v = f.data();
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(v[i])) return i;
    return std::nullopt;
}

/// Decode a flat row-major index into per-axis indices.
inline std::array<std::size_t, 3> unflatten(const GridSpec& g, std::size_t flat) {
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int a = g.dim() - 1; a >= 0; --a) {
        const std::size_t n = g.size(a);
        idx[static_cast<std::size_t>(a)] = flat % n;
        flat /= n;
    }
    return idx;
}

/// Flat row-major index from per-axis indices.
inline std::size_t flatten(const GridSpec& g, std::span<const std::size_t> idx) {
    std::size_t flat = 0;
    for (int a = 0; a < g.dim(); ++a)
        flat = flat * g.size(a) + idx[static_cast<std::size_t>(a)];
    return flat;
}

inline double field_mean(const Field& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
    return s / static_cast<double>(f.size());
}

inline double field_min(const Field& f) {
    double m = f[0];
    for (std::size_t i = 1; i < f.size(); ++i) m = std::min(m, f[i]);
    return m;
}

inline double field_max(const Field& f) {
    double m = f[0];
    for (std::size_t i = 1; i < f.size(); ++i) m = std::max(m, f[i]);
    return m;
}

inline double field_max_abs(const Field& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

} // namespace chsim
