// Planar geometry for land-use polygons: point/segment primitives,
// ring containment and exact polygon-to-polygon boundary distance.
// Coordinates are assumed to be in a projected (metric) CRS.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace citymine {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double sq_dist(const Point& a, const Point& b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

struct Box {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();

    bool valid() const { return min_x <= max_x && min_y <= max_y; }

    void expand(const Point& p) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }

    void expand(const Box& o) {
        min_x = std::min(min_x, o.min_x);
        min_y = std::min(min_y, o.min_y);
        max_x = std::max(max_x, o.max_x);
        max_y = std::max(max_y, o.max_y);
    }

    bool intersects(const Box& o, double pad = 0.0) const {
        return min_x <= o.max_x + pad && o.min_x <= max_x + pad &&
               min_y <= o.max_y + pad && o.min_y <= max_y + pad;
    }

    double distance(const Box& o) const {
        double dx = std::max({0.0, min_x - o.max_x, o.min_x - max_x});
        double dy = std::max({0.0, min_y - o.max_y, o.min_y - max_y});
        return std::sqrt(dx * dx + dy * dy);
    }
};

// A ring is stored closed: front() == back().
using Ring = std::vector<Point>;

struct Polygon {
    Ring outer;
    std::vector<Ring> holes;

    Box bbox() const {
        Box b;
        for (const Point& p : outer) b.expand(p);
        return b;
    }
};

inline double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    double dx = b.x - a.x, dy = b.y - a.y;
    double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    double qx = a.x + t * dx - p.x, qy = a.y + t * dy - p.y;
    return std::sqrt(qx * qx + qy * qy);
}

namespace detail {

inline bool on_collinear_segment(const Point& p, const Point& a, const Point& b) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

} // namespace detail

inline bool segments_intersect(const Point& a1, const Point& a2,
                               const Point& b1, const Point& b2) {
    double d1 = cross(b1, b2, a1);
    double d2 = cross(b1, b2, a2);
    double d3 = cross(a1, a2, b1);
    double d4 = cross(a1, a2, b2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && detail::on_collinear_segment(a1, b1, b2)) return true;
    if (d2 == 0 && detail::on_collinear_segment(a2, b1, b2)) return true;
    if (d3 == 0 && detail::on_collinear_segment(b1, a1, a2)) return true;
    if (d4 == 0 && detail::on_collinear_segment(b2, a1, a2)) return true;
    return false;
}

inline double segment_segment_distance(const Point& a1, const Point& a2,
                                       const Point& b1, const Point& b2) {
    if (segments_intersect(a1, a2, b1, b2)) return 0.0;
    return std::min({point_segment_distance(a1, b1, b2),
                     point_segment_distance(a2, b1, b2),
                     point_segment_distance(b1, a1, a2),
                     point_segment_distance(b2, a1, a2)});
}

// Even-odd crossing test over a closed ring. Boundary points may land on
// either side; callers that care about boundaries test segments first.
inline bool point_in_ring(const Point& p, const Ring& ring) {
    if (ring.size() < 4) return false;
    std::size_t n = ring.size() - 1; // unique vertices
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

// Containment in the solid region: inside the outer ring, outside all holes.
inline bool polygon_contains_point(const Polygon& poly, const Point& p) {
    if (!point_in_ring(p, poly.outer)) return false;
    for (const Ring& h : poly.holes)
        if (point_in_ring(p, h)) return false;
    return true;
}

namespace detail {

template <typename Fn>
inline void for_each_ring(const Polygon& poly, Fn&& fn) {
    fn(poly.outer);
    for (const Ring& h : poly.holes) fn(h);
}

} // namespace detail

// Minimum distance between two polygons. Zero when boundaries touch or
// cross, or when one polygon lies inside the solid region of the other.
// A polygon inside another's hole keeps its positive distance to the
// hole boundary.
inline double polygon_distance(const Polygon& a, const Polygon& b) {
    double best = std::numeric_limits<double>::infinity();
    bool crossed = false;
    detail::for_each_ring(a, [&](const Ring& ra) {
        if (crossed) return;
        detail::for_each_ring(b, [&](const Ring& rb) {
            if (crossed) return;
            for (std::size_t i = 0; i + 1 < ra.size() && !crossed; ++i) {
                for (std::size_t j = 0; j + 1 < rb.size(); ++j) {
                    double d = segment_segment_distance(ra[i], ra[i + 1], rb[j], rb[j + 1]);
                    if (d < best) best = d;
                    if (best == 0.0) { crossed = true; break; }
                }
            }
        });
    });
    if (crossed) return 0.0;
    if (!a.outer.empty() && polygon_contains_point(b, a.outer.front())) return 0.0;
    if (!b.outer.empty() && polygon_contains_point(a, b.outer.front())) return 0.0;
    return best;
}

} // namespace citymine
