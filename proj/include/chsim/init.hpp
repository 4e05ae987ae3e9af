#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "chsim/errors.hpp"
#include "chsim/grid.hpp"
#include "chsim/models.hpp"

namespace chsim {

struct BallSpec {
    std::array<double, 3> center{0.5, 0.5, 0.5};
    double radius = 0.0;
};

enum class ShapeKind { Ball, BallUnion, Tube, Plate, Blob, Noise };

/// Geometry of an initial condition, in box coordinates. Distances respect
/// the torus (minimum-image convention); the sign convention is negative
/// inside, so the generated phase is ~1 inside and the interface is the
/// 1/2-level set.
class Shape {
public:
    static Shape ball(BallSpec b) {
        Shape s(ShapeKind::Ball);
        s.balls_ = {b};
        return s;
    }
    static Shape ball_union(std::vector<BallSpec> balls) {
        if (balls.empty()) throw ConfigError("init: ball union needs at least one ball");
        Shape s(ShapeKind::BallUnion);
        s.balls_ = std::move(balls);
        return s;
    }
    /// Smooth union of overlapping balls; `smoothing` is the blending length
    /// (default 0.3 x smallest radius).
    static Shape blob(std::vector<BallSpec> balls, double smoothing = 0.0) {
        if (balls.empty()) throw ConfigError("init: blob needs at least one ball");
        Shape s(ShapeKind::Blob);
        s.balls_ = std::move(balls);
        if (smoothing <= 0.0) {
            double rmin = s.balls_[0].radius;
            for (const auto& b : s.balls_) rmin = std::min(rmin, b.radius);
            smoothing = 0.3 * rmin;
        }
        s.smoothing_ = smoothing;
        return s;
    }
    /// Cylinder of given radius around a line through `center` along `axis`;
    /// half_length > 0 caps it to a segment (rounded ends), otherwise the
    /// tube wraps around the torus.
    static Shape tube(int axis, std::array<double, 3> center, double radius,
                      double half_length = 0.0) {
        Shape s(ShapeKind::Tube);
        s.axis_ = axis;
        s.center_point_ = center;
        s.radius_ = radius;
        s.half_extent_ = half_length;
        return s;
    }
    /// Slab |x_axis - center| <= half_thickness spanning the other axes.
    static Shape plate(int axis, double center, double half_thickness) {
        Shape s(ShapeKind::Plate);
        s.axis_ = axis;
        s.center_coord_ = center;
        s.half_extent_ = half_thickness;
        return s;
    }
    static Shape noise(double amplitude, std::uint64_t seed) {
        Shape s(ShapeKind::Noise);
        s.amplitude_ = amplitude;
        s.seed_ = seed;
        return s;
    }

    ShapeKind kind() const { return kind_; }
    const std::vector<BallSpec>& balls() const { return balls_; }
    int axis() const { return axis_; }
    const std::array<double, 3>& center_point() const { return center_point_; }
    double center_coord() const { return center_coord_; }
    double radius() const { return radius_; }
    double half_extent() const { return half_extent_; }
    double smoothing() const { return smoothing_; }
    double amplitude() const { return amplitude_; }
    std::uint64_t seed() const { return seed_; }

private:
    explicit Shape(ShapeKind k) : kind_(k) {}

    ShapeKind kind_;
    std::vector<BallSpec> balls_;
    int axis_ = 0;
    std::array<double, 3> center_point_{0.5, 0.5, 0.5};
    double center_coord_ = 0.5;
    double radius_ = 0.0;
    double half_extent_ = 0.0;
    double smoothing_ = 0.0;
    double amplitude_ = 1.0;
    std::uint64_t seed_ = 0;
};

namespace detail {

/// Shortest periodic displacement of x from c on an axis of length L.
inline double min_image(double x, double c, double L) {
    return std::remainder(x - c, L);
}

inline double ball_distance(const BallSpec& b, std::span<const double> x, const GridSpec& g) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double d = min_image(x[static_cast<std::size_t>(a)],
                                   b.center[static_cast<std::size_t>(a)], g.length(a));
        r2 += d * d;
    }
    return std::sqrt(r2) - b.radius;
}

inline double tube_distance(const Shape& s, std::span<const double> x, const GridSpec& g) {
    const int ax = s.axis();
    double transverse2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        if (a == ax) continue;
        const double d = min_image(x[static_cast<std::size_t>(a)],
                                   s.center_point()[static_cast<std::size_t>(a)], g.length(a));
        transverse2 += d * d;
    }
    if (s.half_extent() <= 0.0) return std::sqrt(transverse2) - s.radius();
    // Capped segment: clamp the axial offset, giving rounded tube ends.
    double along = min_image(x[static_cast<std::size_t>(ax)],
                             s.center_point()[static_cast<std::size_t>(ax)], g.length(ax));
    along = std::max(0.0, std::abs(along) - s.half_extent());
    return std::sqrt(transverse2 + along * along) - s.radius();
}

} // namespace detail

/// Signed distance to the shape boundary, negative inside, minimum-image on
/// the periodic box. Exact for balls, unions, tubes and plates; the blob uses
/// an exponential smooth-min of the per-ball distances.
inline double signed_distance(const Shape& s, std::span<const double> x, const GridSpec& g) {
    switch (s.kind()) {
        case ShapeKind::Ball:
            return detail::ball_distance(s.balls()[0], x, g);
        case ShapeKind::BallUnion: {
            double d = detail::ball_distance(s.balls()[0], x, g);
            for (std::size_t i = 1; i < s.balls().size(); ++i)
                d = std::min(d, detail::ball_distance(s.balls()[i], x, g));
            return d;
        }
        case ShapeKind::Blob: {
            const double rho = s.smoothing();
            double dmin = detail::ball_distance(s.balls()[0], x, g);
            for (std::size_t i = 1; i < s.balls().size(); ++i)
                dmin = std::min(dmin, detail::ball_distance(s.balls()[i], x, g));
            double acc = 0.0;
            for (const BallSpec& b : s.balls())
                acc += std::exp(-(detail::ball_distance(b, x, g) - dmin) / rho);
            return dmin - rho * std::log(acc);
        }
        case ShapeKind::Tube:
            return detail::tube_distance(s, x, g);
        case ShapeKind::Plate:
            return std::abs(detail::min_image(x[static_cast<std::size_t>(s.axis())],
                                              s.center_coord(), g.length(s.axis()))) -
                   s.half_extent();
        default:
            throw Error("signed_distance: noise has no geometry");
    }
}

namespace detail {

inline void check_ball_clearance(const BallSpec& b, const GridSpec& g, double eps,
                                 const char* what) {
    for (int a = 0; a < g.dim(); ++a) {
        const double c = b.center[static_cast<std::size_t>(a)];
        const double margin = b.radius + 3.0 * eps;
        if (c - margin < 0.0 || c + margin > g.length(a))
            throw ConfigError(std::string("init: ") + what +
                              " must keep a 3*eps clearance to the box boundary");
    }
}

inline void validate_shape(const Shape& s, const GridSpec& g, double eps) {
    switch (s.kind()) {
        case ShapeKind::Ball:
        case ShapeKind::Blob:
            for (const BallSpec& b : s.balls())
                check_ball_clearance(b, g, eps, s.kind() == ShapeKind::Ball ? "ball" : "blob");
            break;
        case ShapeKind::BallUnion: {
            for (const BallSpec& b : s.balls()) check_ball_clearance(b, g, eps, "ball union");
            for (std::size_t i = 0; i < s.balls().size(); ++i) {
                for (std::size_t j = i + 1; j < s.balls().size(); ++j) {
                    const BallSpec& bi = s.balls()[i];
                    const BallSpec& bj = s.balls()[j];
                    double r2 = 0.0;
                    for (int a = 0; a < g.dim(); ++a) {
                        const double d = min_image(bi.center[static_cast<std::size_t>(a)],
                                                   bj.center[static_cast<std::size_t>(a)],
                                                   g.length(a));
                        r2 += d * d;
                    }
                    if (std::sqrt(r2) < bi.radius + bj.radius + 6.0 * eps)
                        throw ConfigError("init: ball union components must be pairwise "
                                          "disjoint with a gap of at least 6*eps");
                }
            }
            break;
        }
        case ShapeKind::Tube: {
            if (s.radius() <= 0.0) throw ConfigError("init: tube radius must be > 0");
            for (int a = 0; a < g.dim(); ++a) {
                if (a == s.axis()) continue;
                if (2.0 * (s.radius() + 3.0 * eps) >= g.length(a))
                    throw ConfigError("init: tube too wide for the box cross-section");
            }
            if (s.half_extent() > 0.0 &&
                s.half_extent() + s.radius() + 3.0 * eps > 0.5 * g.length(s.axis()))
                throw ConfigError("init: tube segment too long for the box");
            break;
        }
        case ShapeKind::Plate:
            if (s.half_extent() <= 0.0) throw ConfigError("init: plate half-thickness must be > 0");
            if (s.half_extent() + 3.0 * eps > 0.5 * g.length(s.axis()))
                throw ConfigError("init: plate too thick for the box");
            break;
        default:
            break;
    }
    if (s.kind() != ShapeKind::Noise && s.axis() >= g.dim())
        throw ConfigError("init: shape axis out of range for the grid dimension");
}

} // namespace detail

/// Uniform noise in [1/2 - amplitude/2, 1/2 + amplitude/2], sampled from a
/// seeded mt19937_64 with a fixed bit-to-double mapping so identical seeds
/// give bit-identical fields on every platform.
inline Field noise_field(const GridSpec& g, double amplitude, std::uint64_t seed) {
    if (!(amplitude >= 0.0 && amplitude <= 1.0))
        throw ConfigError("init: noise amplitude must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    Field f(g);
    for (std::size_t i = 0; i < g.total(); ++i) {
        const double v = static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0,1)
        f[i] = 0.5 + amplitude * (v - 0.5);
    }
    return f;
}

/// Initial state for a shape. Geometric data gets the constitutive potential
/// mu0 = W'(u0)/eps^2 - lap(u0); noise data starts from mu0 = 0 instead. The
/// constitutive potential of white noise is dominated by -lap(u) at the grid
/// scale, and feeding that into the explicit mobility fluxes kicks the
/// degenerate-mobility and two-mobility schemes out of their stability basin
/// on the first step, while the lagged potential builds up consistently from
/// zero.
inline SimState make_initial_state(const Shape& shape, const GridSpec& g,
                                   const ModelParams& p);

/// Phase field u(x) = q(d(x)/eps) sampled on the grid: ~1 inside the shape,
/// ~0 outside, 1/2 on the boundary, values strictly inside (0,1).
/// Warns (not fatal) when eps is below 1.5x the coarsest spacing, since
/// refinement studies intentionally run close to that limit.
inline Field phase_from_shape(const Shape& shape, const GridSpec& g, double eps) {
    if (shape.kind() == ShapeKind::Noise)
        return noise_field(g, shape.amplitude(), shape.seed());
    if (!(eps > 0.0)) throw ConfigError("init: eps must be > 0");
    detail::validate_shape(shape, g, eps);
    if (eps < 1.5 * g.max_spacing())
        std::fprintf(stderr,
                     "chsim: warning: interface width eps = %g is below 1.5*h = %g; "
                     "the profile is under-resolved\n",
                     eps, 1.5 * g.max_spacing());
    Field f(g);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    std::size_t flat = 0;
    if (g.dim() == 2) {
        for (std::size_t i0 = 0; i0 < g.size(0); ++i0) {
            x[0] = static_cast<double>(i0) * g.spacing(0);
            for (std::size_t i1 = 0; i1 < g.size(1); ++i1, ++flat) {
                x[1] = static_cast<double>(i1) * g.spacing(1);
                f[flat] = profile_q(signed_distance(shape, {x.data(), 2}, g) / eps);
            }
        }
    } else {
        for (std::size_t i0 = 0; i0 < g.size(0); ++i0) {
            x[0] = static_cast<double>(i0) * g.spacing(0);
            for (std::size_t i1 = 0; i1 < g.size(1); ++i1) {
                x[1] = static_cast<double>(i1) * g.spacing(1);
                for (std::size_t i2 = 0; i2 < g.size(2); ++i2, ++flat) {
                    x[2] = static_cast<double>(i2) * g.spacing(2);
                    f[flat] = profile_q(signed_distance(shape, {x.data(), 3}, g) / eps);
                }
            }
        }
    }
    return f;
}

inline SimState make_initial_state(const Shape& shape, const GridSpec& g,
                                   const ModelParams& p) {
    Field u = phase_from_shape(shape, g, p.epsilon);
    if (shape.kind() == ShapeKind::Noise)
        return SimState{std::move(u), Field(g), 0, 0.0};
    return make_state(std::move(u), p);
}

} // namespace chsim
