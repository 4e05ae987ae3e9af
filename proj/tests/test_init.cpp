#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "chsim/diagnostics.hpp"
#include "chsim/init.hpp"
#include "testutil.hpp"

using namespace chsim;

TEST_CASE("signed_distance: ball center, boundary, and periodic wrap") {
    GridSpec g = GridSpec::square(2, 16);
    Shape ball = Shape::ball({{0.5, 0.5, 0.0}, 0.2});
    std::array<double, 2> center{0.5, 0.5};
    CHECK(signed_distance(ball, center, g) == Catch::Approx(-0.2).margin(1e-15));
    std::array<double, 2> on_boundary{0.7, 0.5};
    CHECK(signed_distance(ball, on_boundary, g) == Catch::Approx(0.0).margin(1e-15));
    // Nearest copy through the periodic boundary: x=0.05 vs center 0.9.
    Shape near_edge = Shape::ball({{0.9, 0.5, 0.0}, 0.05});
    std::array<double, 2> across{0.05, 0.5};
    CHECK(signed_distance(near_edge, across, g) == Catch::Approx(0.15 - 0.05).margin(1e-15));
}

TEST_CASE("signed_distance: union is the pointwise minimum of the parts") {
    GridSpec g = GridSpec::square(3, 16);
    BallSpec b1{{0.3, 0.3, 0.3}, 0.1};
    BallSpec b2{{0.7, 0.7, 0.6}, 0.15};
    Shape uni = Shape::ball_union({b1, b2});
    Shape s1 = Shape::ball(b1);
    Shape s2 = Shape::ball(b2);
    for (std::size_t flat = 0; flat < g.total(); ++flat) {
        const auto idx = unflatten(g, flat);
        std::array<double, 3> x{static_cast<double>(idx[0]) * g.spacing(0),
                                static_cast<double>(idx[1]) * g.spacing(1),
                                static_cast<double>(idx[2]) * g.spacing(2)};
        const double expect = std::min(signed_distance(s1, x, g), signed_distance(s2, x, g));
        CHECK(signed_distance(uni, x, g) == Catch::Approx(expect).margin(1e-14));
    }
}

TEST_CASE("signed_distance: tube and plate geometry") {
    GridSpec g = GridSpec::square(3, 16);
    Shape tube = Shape::tube(0, {0.5, 0.5, 0.5}, 0.1);
    std::array<double, 3> on_axis{0.2, 0.5, 0.5};
    CHECK(signed_distance(tube, on_axis, g) == Catch::Approx(-0.1).margin(1e-15));
    std::array<double, 3> off{0.9, 0.5, 0.75};
    CHECK(signed_distance(tube, off, g) == Catch::Approx(0.15).margin(1e-15));

    Shape capped = Shape::tube(0, {0.5, 0.5, 0.5}, 0.1, 0.2);
    std::array<double, 3> past_end{0.8, 0.5, 0.5}; // 0.1 beyond the cap
    CHECK(signed_distance(capped, past_end, g) == Catch::Approx(0.0).margin(1e-15));

    Shape plate = Shape::plate(2, 0.5, 0.05);
    std::array<double, 3> inside{0.1, 0.9, 0.52};
    CHECK(signed_distance(plate, inside, g) == Catch::Approx(-0.03).margin(1e-15));
    std::array<double, 3> outside{0.1, 0.9, 0.7};
    CHECK(signed_distance(plate, outside, g) == Catch::Approx(0.15).margin(1e-15));
}

TEST_CASE("phase_from_shape: interface value, saturation, monotonicity, range") {
    GridSpec g = GridSpec::square(2, 128);
    const double eps = 2.0 / 128.0;
    Shape disk = Shape::ball({{0.5, 0.5, 0.0}, 0.25});
    Field u = phase_from_shape(disk, g, eps);

    // On the interface u = 1/2 (sample a lattice point exactly on the circle).
    std::array<double, 2> east{0.75, 0.5};
    CHECK(profile_q(signed_distance(disk, east, g) / eps) == 0.5);
    const std::size_t east_flat = flatten(g, std::array<std::size_t, 2>{96, 64});
    CHECK(u[east_flat] == Catch::Approx(0.5).margin(1e-12));

    double umin = 1.0, umax = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        umin = std::min(umin, u[i]);
        umax = std::max(umax, u[i]);
    }
    CHECK(umin > 0.0);
    CHECK(umax < 1.0);
    CHECK(umax > 1.0 - 1e-4); // deep inside: saturated
    CHECK(umin < 1e-4);       // far outside: saturated

    // Monotone in the signed distance along a radius through the center.
    for (std::size_t i1 = 64; i1 + 1 < 128; ++i1) {
        const double a = u[flatten(g, std::array<std::size_t, 2>{64, i1})];
        const double b = u[flatten(g, std::array<std::size_t, 2>{64, i1 + 1})];
        CHECK(a >= b - 1e-15);
    }
}

TEST_CASE("phase_from_shape: disk volume matches the analytic area within 1%") {
    GridSpec g = GridSpec::square(2, 256);
    const double eps = 2.0 / 256.0;
    Field u = phase_from_shape(Shape::ball({{0.5, 0.5, 0.0}, 0.2}), g, eps);
    const double area = volume6G(u);
    CHECK(area == Catch::Approx(std::numbers::pi * 0.04).epsilon(0.01));
}

TEST_CASE("phase_from_shape: clearance violations are configuration errors") {
    GridSpec g = GridSpec::square(2, 64);
    const double eps = 2.0 / 64.0;
    // Ball radius 0.2 centered 0.1 from the wall: no 3*eps clearance.
    CHECK_THROWS_AS(phase_from_shape(Shape::ball({{0.1, 0.5, 0.0}, 0.2}), g, eps),
                    ConfigError);
    // Union with a gap below 6*eps.
    CHECK_THROWS_AS(phase_from_shape(Shape::ball_union({BallSpec{{0.4, 0.5, 0.0}, 0.1},
                                                        BallSpec{{0.62, 0.5, 0.0}, 0.1}}),
                                     g, eps),
                    ConfigError);
}

TEST_CASE("blob: overlapping balls form one connected region") {
    GridSpec g = GridSpec::square(2, 128);
    const double eps = 2.0 / 128.0;
    Shape blob = Shape::blob({BallSpec{{0.42, 0.45, 0.0}, 0.14}, BallSpec{{0.58, 0.48, 0.0}, 0.12},
                              BallSpec{{0.50, 0.61, 0.0}, 0.13}});
    Field u = phase_from_shape(blob, g, eps);
    CHECK(connected_components(u, 0.5) == 1);
    // Smooth union stays within (0,1) and contains each ball's center region.
    for (const BallSpec& b : blob.balls()) {
        std::array<std::size_t, 2> idx{
            static_cast<std::size_t>(b.center[0] * 128.0 + 0.5),
            static_cast<std::size_t>(b.center[1] * 128.0 + 0.5)};
        CHECK(u[flatten(g, idx)] > 0.9);
    }
}

TEST_CASE("noise_field: determinism, amplitude zero, range, and sample mean") {
    GridSpec g = GridSpec::square(2, 64);
    Field a = noise_field(g, 1.0, 12345);
    Field b = noise_field(g, 1.0, 12345);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    Field c = noise_field(g, 1.0, 54321);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - c[i]));
    CHECK(diff > 0.0);

    Field flat = noise_field(g, 0.0, 9);
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat[i] == 0.5);

    const double amp = 0.5;
    Field d = noise_field(g, amp, 2024);
    double lo = 1.0, hi = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        lo = std::min(lo, d[i]);
        hi = std::max(hi, d[i]);
    }
    CHECK(lo >= 0.5 - amp / 2.0);
    CHECK(hi < 0.5 + amp / 2.0);
    // Mean within 3 sigma = 3 a / sqrt(12 N)
    const double bound = 3.0 * amp / std::sqrt(12.0 * static_cast<double>(g.total()));
    CHECK(std::abs(field_mean(d) - 0.5) < bound);

    CHECK_THROWS_AS(noise_field(g, 1.5, 1), ConfigError);
}
