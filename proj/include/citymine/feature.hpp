// Land-use feature model and layer validation.
#pragma once

#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "citymine/geometry.hpp"

namespace citymine {

struct LandUseFeature {
    std::string id;
    std::string code;
    Polygon polygon;
};

struct LandUseLayer {
    std::string city_name;
    std::string code_attribute;
    std::vector<LandUseFeature> features;
};

struct ValidationReport {
    std::vector<std::pair<std::string, std::string>> errors;   // (feature id, message)
    std::vector<std::pair<std::string, std::string>> warnings; // (feature id, message)
    std::size_t feature_count = 0;
    std::size_t distinct_code_count = 0;

    bool ok() const { return errors.empty(); }
};

namespace detail {

inline double ring_area(const Ring& ring) {
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        a += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
    return 0.5 * a;
}

inline std::size_t distinct_vertex_count(const Ring& ring) {
    std::set<std::pair<double, double>> seen;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        seen.insert({ring[i].x, ring[i].y});
    if (!ring.empty() && ring.front().x == ring.back().x && ring.front().y == ring.back().y)
        ; // closing vertex already counted
    else if (!ring.empty())
        seen.insert({ring.back().x, ring.back().y});
    return seen.size();
}

// Non-adjacent segment pairs that touch or cross.
inline bool ring_self_intersects(const Ring& ring) {
    if (ring.size() < 5) return false;
    std::size_t nseg = ring.size() - 1;
    for (std::size_t i = 0; i < nseg; ++i) {
        for (std::size_t j = i + 2; j < nseg; ++j) {
            if (i == 0 && j == nseg - 1) continue; // adjacent around the closure
            if (segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]))
                return true;
        }
    }
    return false;
}

inline bool ring_finite(const Ring& ring) {
    for (const Point& p : ring)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    return true;
}

} // namespace detail

inline ValidationReport validate_layer(const LandUseLayer& layer) {
    ValidationReport rep;
    rep.feature_count = layer.features.size();
    std::set<std::string> ids;
    std::set<std::string> codes;
    for (const LandUseFeature& f : layer.features) {
        codes.insert(f.code);
        if (!ids.insert(f.id).second)
            rep.errors.emplace_back(f.id, "duplicate feature id");
        std::vector<const Ring*> rings;
        rings.push_back(&f.polygon.outer);
        for (const Ring& h : f.polygon.holes) rings.push_back(&h);
        for (const Ring* r : rings) {
            if (!detail::ring_finite(*r)) {
                rep.errors.emplace_back(f.id, "non-finite coordinate");
                continue;
            }
            if (detail::distinct_vertex_count(*r) < 3) {
                rep.errors.emplace_back(f.id, "degenerate ring: fewer than 3 distinct vertices");
                continue;
            }
            if (detail::ring_area(*r) == 0.0) {
                rep.errors.emplace_back(f.id, "degenerate ring: zero area");
                continue;
            }
            if (detail::ring_self_intersects(*r))
                rep.warnings.emplace_back(f.id, "self-intersecting ring");
        }
    }
    rep.distinct_code_count = codes.size();
    return rep;
}

} // namespace citymine
