// GeoJSON FeatureCollection loading and re-export (RFC 7946 geometry
// encoding, Polygon and MultiPolygon only). Coordinates are treated as
// planar meters; no reprojection.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "citymine/errors.hpp"
#include "citymine/feature.hpp"

namespace citymine {

namespace detail {

inline Ring parse_ring(const nlohmann::json& arr, const std::string& feature_name) {
    if (!arr.is_array() || arr.size() < 3)
        throw DataError("feature '" + feature_name + "': ring must be an array of at least 3 positions");
    Ring ring;
    ring.reserve(arr.size() + 1);
    for (const auto& pos : arr) {
        if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
            throw DataError("feature '" + feature_name + "': position must be [x, y, ...]");
        ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
    }
    // normalize closure
    if (ring.front().x != ring.back().x || ring.front().y != ring.back().y)
        ring.push_back(ring.front());
    return ring;
}

inline Polygon parse_polygon_coords(const nlohmann::json& coords, const std::string& feature_name) {
    if (!coords.is_array() || coords.empty())
        throw DataError("feature '" + feature_name + "': Polygon coordinates must be a non-empty array of rings");
    Polygon poly;
    poly.outer = parse_ring(coords[0], feature_name);
    for (std::size_t i = 1; i < coords.size(); ++i)
        poly.holes.push_back(parse_ring(coords[i], feature_name));
    return poly;
}

inline std::string json_to_token(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (d == static_cast<long long>(d)) return std::to_string(static_cast<long long>(d));
        return nlohmann::json(d).dump();
    }
    return v.dump();
}

} // namespace detail

inline LandUseLayer parse_feature_collection(const nlohmann::json& doc,
                                             const std::string& code_attribute,
                                             const std::string& city_name) {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features"))
        throw DataError("not a GeoJSON FeatureCollection");
    LandUseLayer layer;
    layer.city_name = city_name;
    layer.code_attribute = code_attribute;
    std::size_t index = 0;
    for (const auto& feat : doc["features"]) {
        std::string id = feat.contains("id") ? detail::json_to_token(feat["id"])
                                             : "feature-" + std::to_string(index);
        if (!feat.is_object() || feat.value("type", "") != "Feature")
            throw DataError("feature '" + id + "': not a Feature object");
        if (!feat.contains("properties") || !feat["properties"].is_object() ||
            !feat["properties"].contains(code_attribute))
            throw DataError("feature '" + id + "': missing code attribute '" + code_attribute + "'");
        std::string code = detail::json_to_token(feat["properties"][code_attribute]);
        if (code.empty() || code.find_first_of(" \t\r\n") != std::string::npos)
            throw DataError("feature '" + id + "': code must be a non-empty whitespace-free token");
        if (!feat.contains("geometry") || !feat["geometry"].is_object())
            throw DataError("feature '" + id + "': missing geometry");
        const auto& geom = feat["geometry"];
        std::string gtype = geom.value("type", "");
        if (gtype == "Polygon") {
            layer.features.push_back({id, code, detail::parse_polygon_coords(geom["coordinates"], id)});
        } else if (gtype == "MultiPolygon") {
            const auto& parts = geom["coordinates"];
            if (!parts.is_array())
                throw DataError("feature '" + id + "': MultiPolygon coordinates must be an array");
            std::size_t part_index = 0;
            for (const auto& part : parts) {
                std::string part_id = id + "-" + std::to_string(part_index++);
                layer.features.push_back({part_id, code, detail::parse_polygon_coords(part, part_id)});
            }
        } else {
            throw DataError("feature '" + id + "': unsupported geometry type '" + gtype + "'");
        }
        ++index;
    }
    if (layer.features.empty())
        throw DataError("FeatureCollection has no polygon features");
    return layer;
}

inline LandUseLayer load_feature_collection(const std::filesystem::path& path,
                                            const std::string& code_attribute,
                                            const std::string& city_name) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed GeoJSON in " + path.string() + ": " + e.what());
    }
    return parse_feature_collection(doc, code_attribute, city_name);
}

inline nlohmann::json feature_collection_to_json(const LandUseLayer& layer) {
    nlohmann::json features = nlohmann::json::array();
    for (const LandUseFeature& f : layer.features) {
        nlohmann::json rings = nlohmann::json::array();
        auto ring_json = [](const Ring& r) {
            nlohmann::json arr = nlohmann::json::array();
            for (const Point& p : r) arr.push_back({p.x, p.y});
            return arr;
        };
        rings.push_back(ring_json(f.polygon.outer));
        for (const Ring& h : f.polygon.holes) rings.push_back(ring_json(h));
        features.push_back({{"type", "Feature"},
                            {"id", f.id},
                            {"properties", {{layer.code_attribute, f.code}}},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

inline void write_feature_collection(const LandUseLayer& layer, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << feature_collection_to_json(layer).dump(2) << '\n';
}

} // namespace citymine
