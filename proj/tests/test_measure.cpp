#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wgres/errors.hpp"
#include "wgres/measure.hpp"

#include <cmath>

using namespace wgres;

TEST_CASE("disk mass converges to pi r^2") {
    for (int order : {20, 28}) {
        auto m = disk_measure(0.0, -3.0, 1.0, order);
        CHECK(std::abs(m.total_mass - M_PI) < 1e-10);
        CHECK(m.nodes.size() == static_cast<std::size_t>(order * (2 * order + 1)));
    }
}

TEST_CASE("rectangle mass is exact") {
    auto m = rectangle_measure(-0.5, 0.5, -4.0, -2.0, 12);
    CHECK(m.total_mass == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("sum of weights equals total mass identically") {
    auto m = disk_measure(1.0, -3.0, 0.7, 16);
    double s = 0.0;
    for (const auto& n : m.nodes) s += n.w;
    CHECK(s == m.total_mass);
}

TEST_CASE("area quadrature self-convergence under order doubling") {
    auto f = [](double x1, double x2) { return std::exp(-std::hypot(x1, x2)); };
    auto lo = disk_measure(0.2, -2.5, 1.0, 24).integrate(f);
    auto hi = disk_measure(0.2, -2.5, 1.0, 48).integrate(f);
    CHECK(std::abs(lo - hi) < 1e-10);
}

TEST_CASE("segment and circle curve masses") {
    auto seg = polyline_measure({{0.0, -3.0}, {2.0, -3.0}}, 16);
    CHECK(seg.total_mass == doctest::Approx(2.0).epsilon(1e-12));
    auto loop = circle_measure(0.0, -4.0, 0.8, 12);
    CHECK(loop.total_mass == doctest::Approx(2.0 * M_PI * 0.8).epsilon(1e-10));
}

TEST_CASE("reparameterization invariance of curve integrals") {
    auto f = [](double x1, double x2) { return std::cos(x1) * std::exp(0.3 * x2); };
    // same straight arc, as one piece and as three pieces
    auto a = polyline_measure({{-1.0, -3.0}, {2.0, -4.5}}, 24);
    auto b = polyline_measure({{-1.0, -3.0}, {0.2, -3.6}, {0.5, -3.75}, {2.0, -4.5}}, 24);
    CHECK(std::abs(a.integrate(f) - b.integrate(f)) < 1e-10);
}

TEST_CASE("distance to strip") {
    double d = 2.0;
    auto disk = disk_measure(0.0, d + 1.5 + 1.0, 1.0, 8);
    CHECK(distance_to_strip(disk, d) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(measure_side(disk, d) == StripSide::above);

    auto below = disk_measure(3.0, -2.25, 1.0, 8);
    CHECK(distance_to_strip(below, d) == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(measure_side(below, d) == StripSide::below);

    auto seg = polyline_measure({{0.0, d + 1.0}, {3.0, d + 2.0}}, 8);
    CHECK(distance_to_strip(seg, d) == doctest::Approx(1.0).epsilon(1e-14));

    // brute-force minimum over the nodes can only be larger (nodes are interior)
    double brute = 1e300;
    for (const auto& n : below.nodes) brute = std::min(brute, -n.x2);
    CHECK(brute >= distance_to_strip(below, d) - 1e-12);
    CHECK(brute <= distance_to_strip(below, d) + 0.2);

    CHECK_THROWS_AS(distance_to_strip(disk_measure(0.0, 1.0, 0.5, 4), d), GeometryError);
}

TEST_CASE("horizontal translation invariance of the distance") {
    double d = 2.0;
    auto m = disk_measure(0.0, -3.0, 1.0, 8);
    auto shifted = translated(m, 17.5, 0.0);
    CHECK(distance_to_strip(m, d) == distance_to_strip(shifted, d));
}
