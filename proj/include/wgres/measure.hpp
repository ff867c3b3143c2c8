#ifndef WGRES_MEASURE_HPP
#define WGRES_MEASURE_HPP

#include "wgres/transverse.hpp" // StripSide

#include <array>
#include <string>
#include <vector>

namespace wgres {

enum class MeasureKind { area, curve };

struct QuadNode {
    double x1, x2;
    double w;
};

enum class GeomKind { custom, disk, rectangle, polyline, circle };

/// Quadrature representation of a compactly supported Kato measure:
/// area measure of a regular well or arclength measure of a delta trap.
struct KatoMeasure {
    MeasureKind kind = MeasureKind::area;
    std::vector<QuadNode> nodes;
    double total_mass = 0.0;
    std::string descriptor;
    // exact geometric extent in x2 (not the node hull), used for rho
    double geom_lo_x2 = 0.0;
    double geom_hi_x2 = 0.0;
    // geometry provenance; enables closed-form support integrals in the
    // singularity-subtracted Nystrom rule
    GeomKind geom = GeomKind::custom;
    std::array<double, 4> geom_params{};            // disk: cx, cx2, radius; rect: extents
    std::vector<std::array<double, 2>> geom_points; // polyline vertices

    template <typename F>
    auto integrate(F&& f) const {
        auto acc = f(nodes[0].x1, nodes[0].x2) * nodes[0].w;
        for (std::size_t i = 1; i < nodes.size(); ++i)
            acc += f(nodes[i].x1, nodes[i].x2) * nodes[i].w;
        return acc;
    }
};

/// Disk well: polar Gauss-Legendre in r, midpoint (trapezoid) ring in theta.
KatoMeasure disk_measure(double cx, double cx2, double radius, int order);

/// Axis-aligned rectangle well, tensor Gauss-Legendre.
KatoMeasure rectangle_measure(double x1_lo, double x1_hi, double x2_lo, double x2_hi, int order);

/// Delta trap on an open polyline, composite Gauss-Legendre in arclength.
KatoMeasure polyline_measure(const std::vector<std::array<double, 2>>& points, int order);

/// Delta trap on a circle (loop), uniform arclength nodes.
KatoMeasure circle_measure(double cx, double cx2, double radius, int order);

/// rho = min over the support of the vertical distance to the strip R x [0,d]
/// (the horizontal coordinate is free, so this is the true distance).
/// Throws GeometryError if the support touches or straddles the strip.
double distance_to_strip(const KatoMeasure& measure, double d);

StripSide measure_side(const KatoMeasure& measure, double d);

KatoMeasure translated(const KatoMeasure& measure, double dx1, double dx2);

} // namespace wgres

#endif
