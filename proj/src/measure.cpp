#include "wgres/measure.hpp"
#include "wgres/errors.hpp"
#include "wgres/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace wgres {

KatoMeasure disk_measure(double cx, double cx2, double radius, int order) {
    if (radius <= 0.0 || order < 1) throw ConfigError("disk_measure: bad radius or order");
    KatoMeasure m;
    m.kind = MeasureKind::area;
    const GaussRule& radial = gauss_legendre(order);
    int ntheta = 2 * order + 1;
    for (int i = 0; i < order; ++i) {
        double r = 0.5 * radius * (radial.nodes[i] + 1.0);
        double wr = 0.5 * radius * radial.weights[i] * r; // polar Jacobian
        for (int j = 0; j < ntheta; ++j) {
            double th = 2.0 * M_PI * (j + 0.5) / ntheta;
            m.nodes.push_back({cx + r * std::cos(th), cx2 + r * std::sin(th),
                               wr * 2.0 * M_PI / ntheta});
        }
    }
    for (const auto& n : m.nodes) m.total_mass += n.w;
    m.geom_lo_x2 = cx2 - radius;
    m.geom_hi_x2 = cx2 + radius;
    m.geom = GeomKind::disk;
    m.geom_params = {cx, cx2, radius, 0.0};
    std::ostringstream os;
    os << "disk center=(" << cx << "," << cx2 << ") radius=" << radius << " order=" << order;
    m.descriptor = os.str();
    return m;
}

KatoMeasure rectangle_measure(double x1_lo, double x1_hi, double x2_lo, double x2_hi, int order) {
    if (x1_hi <= x1_lo || x2_hi <= x2_lo || order < 1)
        throw ConfigError("rectangle_measure: bad extent or order");
    KatoMeasure m;
    m.kind = MeasureKind::area;
    const GaussRule& rule = gauss_legendre(order);
    double c1 = 0.5 * (x1_lo + x1_hi), h1 = 0.5 * (x1_hi - x1_lo);
    double c2 = 0.5 * (x2_lo + x2_hi), h2 = 0.5 * (x2_hi - x2_lo);
    for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j)
            m.nodes.push_back({c1 + h1 * rule.nodes[i], c2 + h2 * rule.nodes[j],
                               h1 * h2 * rule.weights[i] * rule.weights[j]});
    for (const auto& n : m.nodes) m.total_mass += n.w;
    m.geom_lo_x2 = x2_lo;
    m.geom_hi_x2 = x2_hi;
    m.geom = GeomKind::rectangle;
    m.geom_params = {x1_lo, x1_hi, x2_lo, x2_hi};
    std::ostringstream os;
    os << "rectangle [" << x1_lo << "," << x1_hi << "]x[" << x2_lo << "," << x2_hi
       << "] order=" << order;
    m.descriptor = os.str();
    return m;
}

KatoMeasure polyline_measure(const std::vector<std::array<double, 2>>& points, int order) {
    if (points.size() < 2 || order < 1) throw ConfigError("polyline_measure: need >= 2 points");
    KatoMeasure m;
    m.kind = MeasureKind::curve;
    m.geom_lo_x2 = points[0][1];
    m.geom_hi_x2 = points[0][1];

    std::vector<double> cumulative{0.0};
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        double len = std::hypot(points[k + 1][0] - points[k][0],
                                points[k + 1][1] - points[k][1]);
        if (len <= 0.0) throw ConfigError("polyline_measure: degenerate piece");
        cumulative.push_back(cumulative.back() + len);
        m.geom_lo_x2 = std::min({m.geom_lo_x2, points[k][1], points[k + 1][1]});
        m.geom_hi_x2 = std::max({m.geom_hi_x2, points[k][1], points[k + 1][1]});
    }
    const double total = cumulative.back();

    // Cosine-graded arclength nodes, s = (L/2)(1 - cos u): the clustering at
    // the open ends absorbs the inverse-square-root edge behavior of trap
    // charge densities, which a uniform rule only resolves at first order.
    int count = order * static_cast<int>(points.size() - 1);
    const GaussRule& rule = gauss_legendre(count);
    std::size_t piece = 0;
    for (int i = 0; i < count; ++i) {
        double u = 0.5 * M_PI * (rule.nodes[i] + 1.0);
        double s = 0.5 * total * (1.0 - std::cos(u));
        double w = 0.25 * M_PI * total * std::sin(u) * rule.weights[i];
        while (piece + 2 < cumulative.size() && s > cumulative[piece + 1]) ++piece;
        double t = (s - cumulative[piece]) / (cumulative[piece + 1] - cumulative[piece]);
        m.nodes.push_back(
            {points[piece][0] + t * (points[piece + 1][0] - points[piece][0]),
             points[piece][1] + t * (points[piece + 1][1] - points[piece][1]), w});
    }
    for (const auto& n : m.nodes) m.total_mass += n.w;
    m.geom = GeomKind::polyline;
    m.geom_points = points;
    std::ostringstream os;
    os << "polyline points=" << points.size() << " order=" << order;
    m.descriptor = os.str();
    return m;
}

KatoMeasure circle_measure(double cx, double cx2, double radius, int order) {
    if (radius <= 0.0 || order < 1) throw ConfigError("circle_measure: bad radius or order");
    KatoMeasure m;
    m.kind = MeasureKind::curve;
    int n = 8 * order;
    double h = 2.0 * M_PI * radius / n;
    for (int j = 0; j < n; ++j) {
        double th = 2.0 * M_PI * (j + 0.5) / n;
        m.nodes.push_back({cx + radius * std::cos(th), cx2 + radius * std::sin(th), h});
    }
    m.total_mass = h * n;
    m.geom_lo_x2 = cx2 - radius;
    m.geom_hi_x2 = cx2 + radius;
    m.geom = GeomKind::circle;
    m.geom_params = {cx, cx2, radius, 0.0};
    std::ostringstream os;
    os << "circle center=(" << cx << "," << cx2 << ") radius=" << radius << " order=" << order;
    m.descriptor = os.str();
    return m;
}

double distance_to_strip(const KatoMeasure& measure, double d) {
    if (measure.geom_hi_x2 < 0.0) return -measure.geom_hi_x2;
    if (measure.geom_lo_x2 > d) return measure.geom_lo_x2 - d;
    throw GeometryError("measure support touches or straddles the strip");
}

StripSide measure_side(const KatoMeasure& measure, double d) {
    distance_to_strip(measure, d); // validates disjointness
    return measure.geom_hi_x2 < 0.0 ? StripSide::below : StripSide::above;
}

KatoMeasure translated(const KatoMeasure& measure, double dx1, double dx2) {
    KatoMeasure m = measure;
    for (auto& n : m.nodes) {
        n.x1 += dx1;
        n.x2 += dx2;
    }
    m.geom_lo_x2 += dx2;
    m.geom_hi_x2 += dx2;
    if (m.geom == GeomKind::disk || m.geom == GeomKind::circle) {
        m.geom_params[0] += dx1;
        m.geom_params[1] += dx2;
    } else if (m.geom == GeomKind::rectangle) {
        m.geom_params[0] += dx1;
        m.geom_params[1] += dx1;
        m.geom_params[2] += dx2;
        m.geom_params[3] += dx2;
    }
    for (auto& p : m.geom_points) {
        p[0] += dx1;
        p[1] += dx2;
    }
    return m;
}

} // namespace wgres
