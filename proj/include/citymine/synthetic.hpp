// Seeded synthetic city generator used by the demo bundle and the
// end-to-end tests. Cities come in two structural families that differ in
// which land-use code pairs are adjacent: residential/agriculture grids
// versus residential/forest grids.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "citymine/errors.hpp"
#include "citymine/feature.hpp"
#include "citymine/geojson.hpp"
#include "citymine/rng.hpp"

namespace citymine {

// family 0: codes 11100/21000 alternating; family 1: codes 11100/31000.
// A seeded handful of cells become roads (12210) so that co-location
// profiles vary within a family without blurring the family signature.
inline LandUseLayer make_synthetic_city(const std::string& name, int family, std::uint64_t seed) {
    const int grid = 6;
    const double cell = 100.0, pitch = 120.0;
    const char* alt_code = family == 0 ? "21000" : "31000";
    Rng rng(seed);

    std::set<int> dropped;
    while (dropped.size() < 3)
        dropped.insert(static_cast<int>(rng.bounded(grid * grid)));
    std::set<int> roads;
    std::size_t n_roads = 2 + rng.bounded(3);
    while (roads.size() < n_roads) {
        int cell_idx = static_cast<int>(rng.bounded(grid * grid));
        if (!dropped.count(cell_idx)) roads.insert(cell_idx);
    }

    LandUseLayer layer;
    layer.city_name = name;
    layer.code_attribute = "code_2018";
    for (int r = 0; r < grid; ++r) {
        for (int c = 0; c < grid; ++c) {
            if (dropped.count(r * grid + c)) continue;
            // shrink jitter keeps every gap well under the 100 m buffer
            double inset_l = rng.uniform(0.0, 8.0), inset_r = rng.uniform(0.0, 8.0);
            double inset_b = rng.uniform(0.0, 8.0), inset_t = rng.uniform(0.0, 8.0);
            double x1 = c * pitch + inset_l, x2 = c * pitch + cell - inset_r;
            double y1 = r * pitch + inset_b, y2 = r * pitch + cell - inset_t;
            LandUseFeature f;
            f.id = "r" + std::to_string(r) + "c" + std::to_string(c);
            f.code = roads.count(r * grid + c) ? "12210"
                                               : (r + c) % 2 == 0 ? "11100" : alt_code;
            f.polygon.outer = {{x1, y1}, {x2, y1}, {x2, y2}, {x1, y2}, {x1, y1}};
            layer.features.push_back(std::move(f));
        }
    }
    return layer;
}

struct DemoBundle {
    std::filesystem::path config_path;
    std::vector<std::pair<std::string, std::filesystem::path>> cities;
};

// Six cities, three per family, plus a ready-to-run pipeline config.
inline DemoBundle write_demo_bundle(const std::filesystem::path& dir, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    const std::vector<std::pair<std::string, int>> plan = {
        {"ALDER", 0}, {"BIRCH", 0}, {"CEDAR", 0}, {"DOGWOOD", 1}, {"ELM", 1}, {"FIR", 1}};
    DemoBundle bundle;
    nlohmann::json inputs = nlohmann::json::array();
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& [city, family] = plan[i];
        LandUseLayer layer = make_synthetic_city(city, family, seed * 1000 + i);
        std::filesystem::path path = dir / (city + ".geojson");
        write_feature_collection(layer, path);
        bundle.cities.emplace_back(city, path);
        inputs.push_back({{"city", city}, {"path", city + ".geojson"}});
    }
    nlohmann::json config = {{"inputs", inputs},
                             {"code_attribute", "code_2018"},
                             {"buffer_distance_m", 100.0},
                             {"minsup_relative", 0.10},
                             {"embedding", {{"method", "pca"}}},
                             {"k_min", 2},
                             {"k_max", 5},
                             {"seed", seed},
                             {"output_dir", "out"}};
    bundle.config_path = dir / "config.json";
    std::ofstream out(bundle.config_path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + bundle.config_path.string());
    out << config.dump(2) << '\n';
    return bundle;
}

} // namespace citymine
