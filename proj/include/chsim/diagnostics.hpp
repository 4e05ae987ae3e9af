#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "chsim/errors.hpp"
#include "chsim/grid.hpp"
#include "chsim/models.hpp"
#include "chsim/spectral.hpp"

namespace chsim {

/// One row of the time-series log.
struct DiagRecord {
    long step = 0;
    double time = 0.0;
    double energy = 0.0;
    double mass = 0.0;
    double volume = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    double overshoot = 0.0;
};

/// Rescaled free energy E(u) = int |grad u|^2 / 2 + W(u)/eps^2, the quantity
/// the steppers dissipate (their chemical potential is W'(u)/eps^2 - lap u).
/// The gradient term is evaluated spectrally through Parseval's identity with
/// the full Laplacian symbol, so it matches the operators used by the schemes;
/// the W term is a pointwise sum times the cell volume.
inline double energy(const Field& u, double eps) {
    const GridSpec& g = u.grid();
    SpectralField F = forward(u);
    constexpr double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    double grad2 = 0.0;
    detail::for_each_mode(g, [&](std::size_t flat, const std::array<long, 3>& k) {
        grad2 += four_pi2 * detail::xi_squared(g, k) * std::norm(F[flat]);
    });
    grad2 /= static_cast<double>(g.total()); // Parseval: sum_j |grad u|^2_j
    double well = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) well += W(u[i]);
    const double inv_eps2 = 1.0 / (eps * eps);
    return g.cell_volume() * (0.5 * grad2 + inv_eps2 * well);
}

/// Unrescaled form int eps/2 |grad u|^2 + W(u)/eps = eps * energy(u, eps).
inline double energy_original(const Field& u, double eps) { return eps * energy(u, eps); }

/// int u dx (plain sum times cell volume; spectrally accurate for smooth
/// periodic fields).
inline double mass(const Field& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i];
    return s * u.grid().cell_volume();
}

/// Second-order volume int 6 G(u) dx with 6 G(s) = 3 s^2 - 2 s^3: a pure
/// phase integrates exactly to the volume of the set it fills.
inline double volume6G(const Field& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u[i];
        s += v * v * (3.0 - 2.0 * v);
    }
    return s * u.grid().cell_volume();
}

/// Excursion of u outside [0,1]: max(-min u, max u - 1, 0).
inline double overshoot(const Field& u) {
    return std::max({-field_min(u), field_max(u) - 1.0, 0.0});
}

inline DiagRecord diagnose(const SimState& s, double eps) {
    DiagRecord r;
    r.step = s.step;
    r.time = s.time;
    r.energy = energy(s.u, eps);
    r.mass = mass(s.u);
    r.volume = volume6G(s.u);
    r.u_min = field_min(s.u);
    r.u_max = field_max(s.u);
    r.overshoot = std::max({-r.u_min, r.u_max - 1.0, 0.0});
    return r;
}

/// 1D restriction of u along `axis`; the other indices are fixed from
/// `offsets` (a full index tuple whose entry on `axis` is ignored). Returns
/// (coordinate, value) pairs.
inline std::vector<std::pair<double, double>> profile_slice(const Field& u, int axis,
                                                            std::span<const std::size_t> offsets) {
    const GridSpec& g = u.grid();
    if (axis < 0 || axis >= g.dim()) throw Error("profile_slice: axis out of range");
    if (static_cast<int>(offsets.size()) != g.dim())
        throw Error("profile_slice: offsets must list one index per axis");
    for (int a = 0; a < g.dim(); ++a) {
        if (a != axis && offsets[static_cast<std::size_t>(a)] >= g.size(a))
            throw Error("profile_slice: offset out of range on axis " + std::to_string(a));
    }
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) idx[static_cast<std::size_t>(a)] = offsets[static_cast<std::size_t>(a)];
    std::vector<std::pair<double, double>> out;
    out.reserve(g.size(axis));
    for (std::size_t i = 0; i < g.size(axis); ++i) {
        idx[static_cast<std::size_t>(axis)] = i;
        out.emplace_back(static_cast<double>(i) * g.spacing(axis),
                         u[flatten(g, {idx.data(), static_cast<std::size_t>(g.dim())})]);
    }
    return out;
}

/// Radius of a single roughly spherical phase region, from the 6G volume:
/// sqrt(V/pi) in 2D, (3V/(4 pi))^(1/3) in 3D.
inline double interface_radius(const Field& u) {
    const double v = volume6G(u);
    if (v < -1e-12 * u.grid().box_volume())
        throw Error("interface_radius: negative volume");
    const double vol = std::max(v, 0.0);
    if (u.grid().dim() == 2) return std::sqrt(vol / std::numbers::pi);
    return std::cbrt(3.0 * vol / (4.0 * std::numbers::pi));
}

namespace detail {

/// Label the superlevel set {u >= threshold} under face adjacency with
/// periodic wrap. Returns the label field (-1 outside) and the component
/// count.
inline std::pair<std::vector<int>, int> label_components(const Field& u, double threshold) {
    const GridSpec& g = u.grid();
    const int d = g.dim();
    std::vector<int> label(g.total(), -1);
    std::vector<std::size_t> stack;
    int count = 0;
    std::array<std::size_t, 3> strides{0, 0, 0};
    {
        std::size_t s = 1;
        for (int a = d - 1; a >= 0; --a) {
            strides[static_cast<std::size_t>(a)] = s;
            s *= g.size(a);
        }
    }
    for (std::size_t start = 0; start < g.total(); ++start) {
        if (u[start] < threshold || label[start] >= 0) continue;
        label[start] = count;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            const auto idx = unflatten(g, cur);
            for (int a = 0; a < d; ++a) {
                const std::size_t n = g.size(a);
                const std::size_t stride = strides[static_cast<std::size_t>(a)];
                const std::size_t i = idx[static_cast<std::size_t>(a)];
                const std::size_t fwd = i + 1 < n ? cur + stride : cur - (n - 1) * stride;
                const std::size_t bwd = i > 0 ? cur - stride : cur + (n - 1) * stride;
                for (std::size_t nb : {fwd, bwd}) {
                    if (u[nb] >= threshold && label[nb] < 0) {
                        label[nb] = count;
                        stack.push_back(nb);
                    }
                }
            }
        }
        ++count;
    }
    return {std::move(label), count};
}

} // namespace detail

/// Number of connected components of {u >= threshold} (face adjacency,
/// periodic wrap).
inline int connected_components(const Field& u, double threshold = 0.5) {
    return detail::label_components(u, threshold).second;
}

/// Per-component 6G volumes of {u >= threshold}, sorted descending. Interface
/// mass below the threshold is not attributed, so values are comparable
/// between states measured the same way, not absolute set volumes.
inline std::vector<double> component_volumes(const Field& u, double threshold = 0.5) {
    auto [label, count] = detail::label_components(u, threshold);
    std::vector<double> vol(static_cast<std::size_t>(count), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (label[i] >= 0) {
            const double v = u[i];
            vol[static_cast<std::size_t>(label[i])] += v * v * (3.0 - 2.0 * v);
        }
    }
    const double cell = u.grid().cell_volume();
    for (double& v : vol) v *= cell;
    std::sort(vol.rbegin(), vol.rend());
    return vol;
}

// ---------------------------------------------------------------------------
// Quadrature oracle for the profile constants
// ---------------------------------------------------------------------------

namespace detail {

template <class F>
inline double adaptive_simpson_rec(const F& f, double a, double m, double b, double fa,
                                   double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    if (depth <= 0) throw Error("quadrature did not converge to the requested tolerance");
    return adaptive_simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
inline double adaptive_simpson(const F& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

} // namespace detail

enum class MobilityKind { Quartic, Quadratic };

/// Mobility profile used by the constants oracle: s^2(1-s)^2 or s(1-s).
inline double mobility_profile(MobilityKind kind, double s) {
    const double t = s * (1.0 - s);
    return kind == MobilityKind::Quartic ? t * t : t;
}

struct ProfileConstants {
    double c_W = 0.0;             ///< int q'(z)^2 dz
    double c_M = 0.0;             ///< int M(q(z)) dz
    double c_N = 0.0;             ///< int q'(z) / N(q(z)) dz with N = 1/sqrt(M)
    double velocity_factor = 0.0; ///< c_W c_M / c_N^2
};

/// Quadrature of the closed-form profile integrands over [-radius, radius];
/// the integrands decay like exp(-|z|), so any radius >= 40 gives the full-
/// line value to far below the tolerance.
inline ProfileConstants constants_oracle(MobilityKind kind, double tol = 1e-10,
                                         double radius = 40.0) {
    if (!(tol > 0.0)) throw Error("constants_oracle: tolerance must be > 0");
    ProfileConstants c;
    c.c_W = detail::adaptive_simpson(
        [](double z) { const double qp = profile_q_prime(z); return qp * qp; }, -radius,
        radius, tol);
    c.c_M = detail::adaptive_simpson(
        [kind](double z) { return mobility_profile(kind, profile_q(z)); }, -radius, radius,
        tol);
    c.c_N = detail::adaptive_simpson(
        [kind](double z) {
            return profile_q_prime(z) * std::sqrt(mobility_profile(kind, profile_q(z)));
        },
        -radius, radius, tol);
    c.velocity_factor = c.c_W * c.c_M / (c.c_N * c.c_N);
    return c;
}

/// The alternative c_M integrand int M(q)/(q(1-q)) dz. For the quartic
/// mobility it evaluates to 1; for the quadratic mobility the integrand has a
/// constant tail and the value grows linearly with the truncation radius, so
/// int M(q) dz (see constants_oracle) is the form consistent with the known
/// values of both mobilities.
inline double c_M_ratio_form(MobilityKind kind, double tol = 1e-10, double radius = 40.0) {
    return detail::adaptive_simpson(
        [kind](double z) {
            const double q = profile_q(z);
            return mobility_profile(kind, q) / (q * (1.0 - q));
        },
        -radius, radius, tol);
}

/// Convergence order from two measurements at interface widths eps_coarse >
/// eps_fine: log(v_c/v_f) / log(e_c/e_f).
inline double order_estimate(double value_coarse, double value_fine, double eps_coarse,
                             double eps_fine) {
    if (!(value_coarse > 0.0) || !(value_fine > 0.0))
        throw Error("order_estimate: values must be positive");
    if (!(eps_coarse > eps_fine) || !(eps_fine > 0.0))
        throw Error("order_estimate: need eps_coarse > eps_fine > 0");
    return std::log(value_coarse / value_fine) / std::log(eps_coarse / eps_fine);
}

} // namespace chsim
