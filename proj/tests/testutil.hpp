#pragma once

// Shared test helpers. The discrete-Fourier-transform oracle here is an
// independent O(N^2) direct summation used to check the production transforms;
// it must stay free of any chsim/spectral.hpp machinery.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "chsim/grid.hpp"

namespace testutil {

/// Deterministic random field with a fixed bit mapping (identical on every
/// platform), values uniform in [lo, hi).
inline chsim::Field random_field(const chsim::GridSpec& g, std::uint64_t seed, double lo = -1.0,
                                 double hi = 1.0) {
    std::mt19937_64 rng(seed);
    chsim::Field f(g);
    for (std::size_t i = 0; i < g.total(); ++i) {
        const double v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        f[i] = lo + (hi - lo) * v;
    }
    return f;
}

/// Direct unnormalized DFT: c_k = sum_j f_j exp(-2 pi i sum_a j_a k_a / N_a),
/// with k in storage order (k = i for i < N/2, i - N otherwise; the complex
/// exponential is N-periodic in k so the storage index can be used directly).
inline std::vector<std::complex<double>> brute_dft(const chsim::Field& f) {
    const chsim::GridSpec& g = f.grid();
    const int d = g.dim();
    std::vector<std::complex<double>> out(g.total());
    std::vector<std::size_t> jdx(static_cast<std::size_t>(d)), kdx(static_cast<std::size_t>(d));
    for (std::size_t kflat = 0; kflat < g.total(); ++kflat) {
        // decode k
        {
            std::size_t rest = kflat;
            for (int a = d - 1; a >= 0; --a) {
                kdx[static_cast<std::size_t>(a)] = rest % g.size(a);
                rest /= g.size(a);
            }
        }
        long double re = 0.0L, im = 0.0L;
        for (std::size_t jflat = 0; jflat < g.total(); ++jflat) {
            std::size_t rest = jflat;
            for (int a = d - 1; a >= 0; --a) {
                jdx[static_cast<std::size_t>(a)] = rest % g.size(a);
                rest /= g.size(a);
            }
            double phase = 0.0;
            for (int a = 0; a < d; ++a)
                phase += static_cast<double>(jdx[static_cast<std::size_t>(a)] *
                                             kdx[static_cast<std::size_t>(a)]) /
                         static_cast<double>(g.size(a));
            const double angle = -2.0 * std::numbers::pi * phase;
            re += static_cast<long double>(f[jflat]) * std::cos(angle);
            im += static_cast<long double>(f[jflat]) * std::sin(angle);
        }
        out[kflat] = {static_cast<double>(re), static_cast<double>(im)};
    }
    return out;
}

/// Direct inverse DFT (1/N-normalized), returning complex samples.
inline std::vector<std::complex<double>> brute_idft(const std::vector<std::complex<double>>& c,
                                                    const chsim::GridSpec& g) {
    const int d = g.dim();
    std::vector<std::complex<double>> out(g.total());
    std::vector<std::size_t> jdx(static_cast<std::size_t>(d)), kdx(static_cast<std::size_t>(d));
    for (std::size_t jflat = 0; jflat < g.total(); ++jflat) {
        {
            std::size_t rest = jflat;
            for (int a = d - 1; a >= 0; --a) {
                jdx[static_cast<std::size_t>(a)] = rest % g.size(a);
                rest /= g.size(a);
            }
        }
        long double re = 0.0L, im = 0.0L;
        for (std::size_t kflat = 0; kflat < g.total(); ++kflat) {
            std::size_t rest = kflat;
            for (int a = d - 1; a >= 0; --a) {
                kdx[static_cast<std::size_t>(a)] = rest % g.size(a);
                rest /= g.size(a);
            }
            double phase = 0.0;
            for (int a = 0; a < d; ++a)
                phase += static_cast<double>(jdx[static_cast<std::size_t>(a)] *
                                             kdx[static_cast<std::size_t>(a)]) /
                         static_cast<double>(g.size(a));
            const double angle = 2.0 * std::numbers::pi * phase;
            re += static_cast<long double>(c[kflat].real()) * std::cos(angle) -
                  static_cast<long double>(c[kflat].imag()) * std::sin(angle);
            im += static_cast<long double>(c[kflat].real()) * std::sin(angle) +
                  static_cast<long double>(c[kflat].imag()) * std::cos(angle);
        }
        const long double n = static_cast<long double>(g.total());
        out[jflat] = {static_cast<double>(re / n), static_cast<double>(im / n)};
    }
    return out;
}

inline double max_abs(const std::vector<std::complex<double>>& v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

/// max_i |a_i - b_i| / max_i |b_i|
inline double rel_maxnorm_diff(const chsim::SpectralField& a,
                               const std::vector<std::complex<double>>& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return diff / std::max(scale, 1e-300);
}

inline double rel_maxnorm_diff(const chsim::Field& a, const chsim::Field& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return diff / std::max(scale, 1e-300);
}

/// Cyclic translation of a field by integer offsets per axis.
inline chsim::Field translate(const chsim::Field& f, const std::vector<long>& shift) {
    const chsim::GridSpec& g = f.grid();
    chsim::Field out(g);
    for (std::size_t flat = 0; flat < g.total(); ++flat) {
        auto idx = chsim::unflatten(g, flat);
        std::array<std::size_t, 3> src{0, 0, 0};
        for (int a = 0; a < g.dim(); ++a) {
            const long n = static_cast<long>(g.size(a));
            long s = (static_cast<long>(idx[static_cast<std::size_t>(a)]) -
                      shift[static_cast<std::size_t>(a)]) % n;
            if (s < 0) s += n;
            src[static_cast<std::size_t>(a)] = static_cast<std::size_t>(s);
        }
        out[flat] = f[chsim::flatten(g, {src.data(), static_cast<std::size_t>(g.dim())})];
    }
    return out;
}

} // namespace testutil
