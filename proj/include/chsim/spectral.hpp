#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "chsim/errors.hpp"
#include "chsim/grid.hpp"

namespace chsim {

namespace detail {

struct PlanKey {
    std::vector<std::size_t> sizes;
    int sign;
    bool operator==(const PlanKey& o) const { return sign == o.sign && sizes == o.sizes; }
};

struct PlanKeyHash {
    std::size_t operator()(const PlanKey& k) const {
        std::size_t h = static_cast<std::size_t>(k.sign) * 0x9e3779b97f4a7c15ull;
        for (std::size_t n : k.sizes) h = h * 0x100000001b3ull ^ n;
        return h;
    }
};

/// Process-wide cache of FFTW plans, one per (grid sizes, direction).
/// Planning is serialized (FFTW's planner is not thread safe); execution via
/// the new-array interface is lock-free. All execution buffers use the same
/// 64-byte alignment the plans were created with.
class FftEngine {
public:
    static FftEngine& instance() {
        static FftEngine e;
        return e;
    }

    void execute(const GridSpec& g, int sign, const std::complex<double>* in,
                 std::complex<double>* out) {
        fftw_plan p = plan_for(g, sign);
        // Out-of-place c2c transforms leave the input array intact.
        fftw_execute_dft(p,
                         reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

private:
    FftEngine() {
        if (const char* env = std::getenv("CHSIM_THREADS")) {
            const int n = std::atoi(env);
            if (n > 1) {
                fftw_init_threads();
                threads_ = n;
            }
        }
    }

    fftw_plan plan_for(const GridSpec& g, int sign) {
        PlanKey key{g.sizes(), sign};
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        if (threads_ > 1) fftw_plan_with_nthreads(threads_);
        ComplexVec a(g.total()), b(g.total());
        std::vector<int> n(g.sizes().begin(), g.sizes().end());
        fftw_plan p = fftw_plan_dft(g.dim(), n.data(),
                                    reinterpret_cast<fftw_complex*>(a.data()),
                                    reinterpret_cast<fftw_complex*>(b.data()),
                                    sign, FFTW_ESTIMATE);
        if (!p) throw Error("fft: plan creation failed");
        plans_.emplace(std::move(key), p);
        return p;
    }

    std::mutex mutex_;
    std::unordered_map<PlanKey, fftw_plan, PlanKeyHash> plans_;
    int threads_ = 1;
};

inline ComplexVec& scratch_buffer(std::size_t n) {
    thread_local ComplexVec buf;
    if (buf.size() < n) buf.resize(n);
    return buf;
}

/// Visit every mode as fn(flat_index, k) with k the signed wavenumber tuple.
template <class Fn>
inline void for_each_mode(const GridSpec& g, Fn&& fn) {
    std::array<std::vector<long>, 3> k;
    for (int a = 0; a < g.dim(); ++a) {
        k[static_cast<std::size_t>(a)].resize(g.size(a));
        for (std::size_t i = 0; i < g.size(a); ++i)
            k[static_cast<std::size_t>(a)][i] = wavenumber(i, g.size(a));
    }
    std::size_t flat = 0;
    if (g.dim() == 2) {
        for (std::size_t i0 = 0; i0 < g.size(0); ++i0)
            for (std::size_t i1 = 0; i1 < g.size(1); ++i1, ++flat)
                fn(flat, std::array<long, 3>{k[0][i0], k[1][i1], 0});
    } else {
        for (std::size_t i0 = 0; i0 < g.size(0); ++i0)
            for (std::size_t i1 = 0; i1 < g.size(1); ++i1)
                for (std::size_t i2 = 0; i2 < g.size(2); ++i2, ++flat)
                    fn(flat, std::array<long, 3>{k[0][i0], k[1][i1], k[2][i2]});
    }
}

/// |xi|^2 = sum (k_a / L_a)^2 for one mode.
inline double xi_squared(const GridSpec& g, const std::array<long, 3>& k) {
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double x = static_cast<double>(k[static_cast<std::size_t>(a)]) / g.length(a);
        s += x * x;
    }
    return s;
}

} // namespace detail

/// Relative imaginary residue above this after an inverse transform signals a
/// symmetry-breaking bug upstream and is reported as an error.
inline constexpr double hermitian_tolerance = 1e-10;

/// Unnormalized forward DFT: coeff(k) = sum_j f_j exp(-2*pi*i xi_k . x_j).
/// The zero-mode coefficient equals the sum of the samples, i.e.
/// (prod N_i) * mean(f); inverse() applies the 1/(prod N_i) factor so that
/// inverse(forward(f)) == f.
inline SpectralField forward(const Field& f) {
    if (auto bad = first_non_finite(f))
        throw Error("forward transform: non-finite input value at flat index " +
                    std::to_string(*bad));
    const GridSpec& g = f.grid();
    ComplexVec& in = detail::scratch_buffer(g.total());
    for (std::size_t i = 0; i < g.total(); ++i) in[i] = {f[i], 0.0};
    SpectralField out(g);
    detail::FftEngine::instance().execute(g, FFTW_FORWARD, in.data(), out.data());
    return out;
}

/// Inverse DFT scaled by 1/(prod N_i). The result of a Hermitian-symmetric
/// spectrum is real; the rounding-level imaginary residue is measured and
/// dropped, and a residue above hermitian_tolerance (relative max-norm) is an
/// error.
inline Field inverse(const SpectralField& F) {
    const GridSpec& g = F.grid();
    ComplexVec& out = detail::scratch_buffer(g.total());
    detail::FftEngine::instance().execute(g, FFTW_BACKWARD, F.data(), out.data());
    const double scale = 1.0 / static_cast<double>(g.total());
    Field f(g);
    double max_re = 0.0, max_im = 0.0;
    for (std::size_t i = 0; i < g.total(); ++i) {
        const double re = out[i].real() * scale;
        const double im = out[i].imag() * scale;
        f[i] = re;
        max_re = std::max(max_re, std::abs(re));
        max_im = std::max(max_im, std::abs(im));
    }
    const double denom = std::max(max_re, std::numeric_limits<double>::min());
    if (max_im > hermitian_tolerance * std::max(denom, max_im)) {
        throw Error("inverse transform: imaginary residue " + std::to_string(max_im) +
                    " exceeds tolerance; spectrum is not Hermitian-symmetric");
    }
    return f;
}

/// Linear operator diagonal in the Fourier basis: one real multiplier per
/// wavenumber tuple. Immutable after construction and safe to share across
/// threads.
class SymbolOperator {
public:
    SymbolOperator(GridSpec grid, RealVec multipliers)
        : grid_(std::move(grid)), mult_(std::move(multipliers)) {
        if (mult_.size() != grid_.total())
            throw Error("symbol operator: multiplier count does not match the grid");
    }

    const GridSpec& grid() const { return grid_; }
    std::span<const double> multipliers() const { return {mult_.data(), mult_.size()}; }
    double zero_mode() const { return mult_[0]; }

    /// Multiply a spectrum by the symbol, in place.
    void apply_to_spectrum(SpectralField& F) const {
        if (F.grid() != grid_) throw Error("symbol operator: grid mismatch");
        for (std::size_t i = 0; i < mult_.size(); ++i) F[i] *= mult_[i];
    }

private:
    GridSpec grid_;
    RealVec mult_;
};

/// Precompute a symbol operator from a scalar rule of |xi|^2, where
/// xi = (k_1/L_1, ..., k_d/L_d). The rule must be finite on every grid mode.
template <class Rule>
inline SymbolOperator build_symbol(const GridSpec& g, Rule&& rule) {
    RealVec mult(g.total());
    detail::for_each_mode(g, [&](std::size_t flat, const std::array<long, 3>& k) {
        const double m = rule(detail::xi_squared(g, k));
        if (!std::isfinite(m))
            throw Error("symbol rule produced a non-finite multiplier at wavenumber (" +
                        std::to_string(k[0]) + "," + std::to_string(k[1]) + "," +
                        std::to_string(k[2]) + ")");
        mult[flat] = m;
    });
    return SymbolOperator(g, std::move(mult));
}

/// Pointwise product of multipliers; apply(compose(A,B), f) == apply(A, apply(B, f)).
inline SymbolOperator compose(const SymbolOperator& a, const SymbolOperator& b) {
    if (a.grid() != b.grid()) throw Error("symbol compose: grid mismatch");
    RealVec mult(a.grid().total());
    for (std::size_t i = 0; i < mult.size(); ++i)
        mult[i] = a.multipliers()[i] * b.multipliers()[i];
    return SymbolOperator(a.grid(), std::move(mult));
}

inline Field apply_symbol(const SymbolOperator& op, const Field& f) {
    if (f.grid() != op.grid()) throw Error("apply_symbol: grid mismatch");
    SpectralField F = forward(f);
    op.apply_to_spectrum(F);
    return inverse(F);
}

namespace detail {

/// -4*pi^2*|xi|^2 table (the Laplacian symbol, Nyquist modes kept).
inline RealVec laplacian_table(const GridSpec& g) {
    RealVec lap(g.total());
    constexpr double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    for_each_mode(g, [&](std::size_t flat, const std::array<long, 3>& k) {
        lap[flat] = -four_pi2 * xi_squared(g, k);
    });
    return lap;
}

/// First-derivative factor along `axis`: 2*pi*k/L, with the unpaired Nyquist
/// mode k = -N/2 zeroed to keep the operator real-valued and skew-adjoint.
inline double derivative_factor(const GridSpec& g, int axis, long k) {
    if (k == -static_cast<long>(g.size(axis)) / 2) return 0.0;
    return 2.0 * std::numbers::pi * static_cast<double>(k) / g.length(axis);
}

/// In-place d/dx_axis on a spectrum (multiply by i * 2*pi*k/L).
inline void differentiate_spectrum(const GridSpec& g, int axis, const SpectralField& in,
                                   SpectralField& out) {
    for_each_mode(g, [&](std::size_t flat, const std::array<long, 3>& k) {
        const double c = derivative_factor(g, axis, k[static_cast<std::size_t>(axis)]);
        const std::complex<double> v = in[flat];
        out[flat] = {-c * v.imag(), c * v.real()};
    });
}

} // namespace detail

/// Spectral Laplacian: mode k is multiplied by -4*pi^2*|xi_k|^2.
inline Field laplacian(const Field& f) {
    SpectralField F = forward(f);
    const RealVec lap = detail::laplacian_table(f.grid());
    for (std::size_t i = 0; i < lap.size(); ++i) F[i] *= lap[i];
    return inverse(F);
}

/// Spectral gradient, one component per axis (Nyquist first-derivative modes
/// zeroed).
inline std::vector<Field> gradient(const Field& f) {
    const GridSpec& g = f.grid();
    SpectralField F = forward(f);
    SpectralField D(g);
    std::vector<Field> out;
    out.reserve(static_cast<std::size_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) {
        detail::differentiate_spectrum(g, a, F, D);
        out.push_back(inverse(D));
    }
    return out;
}

/// Spectral divergence of a vector field (same derivative rule as gradient).
inline Field divergence(std::span<const Field> v) {
    if (v.empty()) throw Error("divergence: empty vector field");
    const GridSpec& g = v[0].grid();
    if (static_cast<int>(v.size()) != g.dim())
        throw Error("divergence: component count does not match the grid dimension");
    for (const Field& c : v)
        if (c.grid() != g) throw Error("divergence: components on mismatched grids");
    SpectralField acc(g);
    for (int a = 0; a < g.dim(); ++a) {
        SpectralField Fa = forward(v[static_cast<std::size_t>(a)]);
        detail::for_each_mode(g, [&](std::size_t flat, const std::array<long, 3>& k) {
            const double c = detail::derivative_factor(g, a, k[static_cast<std::size_t>(a)]);
            const std::complex<double> x = Fa[flat];
            acc[flat] += std::complex<double>{-c * x.imag(), c * x.real()};
        });
    }
    return inverse(acc);
}

inline Field divergence(const std::vector<Field>& v) {
    return divergence(std::span<const Field>(v.data(), v.size()));
}

/// 2/3-rule spectral filter: zero every mode with 3*|k_a| >= N_a on any axis.
/// Off by default everywhere; exposed for optional dealiasing of nonlinear
/// terms.
inline SpectralField dealias_two_thirds(SpectralField F) {
    const GridSpec& g = F.grid();
    detail::for_each_mode(g, [&](std::size_t flat, const std::array<long, 3>& k) {
        for (int a = 0; a < g.dim(); ++a) {
            if (3 * std::labs(k[static_cast<std::size_t>(a)]) >=
                static_cast<long>(g.size(a))) {
                F[flat] = {0.0, 0.0};
                break;
            }
        }
    });
    return F;
}

} // namespace chsim
