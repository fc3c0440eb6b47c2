// Shared test fixtures: the worked 7-transaction example, the rectangle
// layout that realizes its adjacency graph, random layer/database
// generators, and a scratch-directory guard.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "citymine/feature.hpp"
#include "citymine/fim.hpp"
#include "citymine/geometry.hpp"
#include "citymine/rng.hpp"

namespace fixtures {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        auto tmpl = (std::filesystem::temp_directory_path() / (tag + ".XXXXXX")).string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline citymine::Polygon rect_polygon(double x0, double y0, double x1, double y1) {
    citymine::Polygon p;
    p.outer = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
    return p;
}

// The worked example: 7 land-use patches with codes B, C, G, W whose
// 100 m neighborhoods yield the transactions below.
inline citymine::LandUseLayer worked_example_layout() {
    citymine::LandUseLayer layer;
    layer.city_name = "EXAMPLE";
    layer.code_attribute = "code";
    auto add = [&](const std::string& id, const std::string& code, double x0, double y0, double x1,
                   double y1) {
        layer.features.push_back({id, code, rect_polygon(x0, y0, x1, y1)});
    };
    add("f1", "C", 0, 0, 300, 300);
    add("f2", "W", 60, -380, 290, -280);
    add("f3", "C", 0, 350, 300, 500);
    add("f4", "C", 0, -200, 230, -50);
    add("f5", "B", 350, 0, 500, 300);
    add("f6", "B", 310, -260, 340, 420);
    add("f7", "G", -150, -100, -50, 150);
    return layer;
}

// 0-based index pairs within 100 distance units of each other.
inline std::set<std::pair<int, int>> worked_example_edges() {
    return {{0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}, {1, 3},
            {1, 5}, {2, 4}, {2, 5}, {3, 5}, {3, 6}, {4, 5}};
}

inline std::vector<std::vector<std::string>> worked_example_transactions() {
    return {{"B", "C", "G"}, {"B", "C", "W"}, {"B", "C"},     {"B", "C", "G", "W"},
            {"B", "C"},      {"B", "C", "W"}, {"C", "G"}};
}

// Frequent itemsets of the worked example at absolute minsup 3,
// canonically ordered (size, then lexicographic).
inline std::vector<std::pair<std::vector<std::string>, std::uint64_t>> worked_example_fis() {
    return {{{"B"}, 6},           {{"C"}, 7},      {{"G"}, 3},
            {{"W"}, 3},           {{"B", "C"}, 6}, {{"B", "W"}, 3},
            {{"C", "G"}, 3},      {{"C", "W"}, 3}, {{"B", "C", "W"}, 3}};
}

// Checkerboard grid of square cells with a fixed gap between them.
inline citymine::LandUseLayer grid_layer(const std::string& name, int rows, int cols, double cell,
                                         double gap, const std::string& code_a,
                                         const std::string& code_b) {
    citymine::LandUseLayer layer;
    layer.city_name = name;
    layer.code_attribute = "code";
    double pitch = cell + gap;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double x = c * pitch, y = r * pitch;
            layer.features.push_back({"r" + std::to_string(r) + "c" + std::to_string(c),
                                      (r + c) % 2 == 0 ? code_a : code_b,
                                      rect_polygon(x, y, x + cell, y + cell)});
        }
    return layer;
}

// Random rectangles with random codes; sizes and positions chosen so
// neighbor sets vary with the buffer distance.
inline citymine::LandUseLayer random_rect_layer(citymine::Rng& rng, int n_features) {
    static const std::vector<std::string> codes = {"11100", "12100", "12210",
                                                   "21000", "31000", "50000"};
    citymine::LandUseLayer layer;
    layer.city_name = "RANDOM";
    layer.code_attribute = "code";
    for (int i = 0; i < n_features; ++i) {
        double x = rng.uniform(0.0, 1000.0);
        double y = rng.uniform(0.0, 1000.0);
        double w = rng.uniform(10.0, 120.0);
        double h = rng.uniform(10.0, 120.0);
        layer.features.push_back({"f" + std::to_string(i), codes[rng.bounded(codes.size())],
                                  rect_polygon(x, y, x + w, y + h)});
    }
    return layer;
}

// Random transaction database over at most `max_items` named items.
inline std::vector<std::vector<std::string>> random_database(citymine::Rng& rng, int max_items,
                                                             int max_transactions) {
    int m = 2 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_items - 1)));
    int n = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_transactions)));
    std::vector<std::vector<std::string>> raw;
    raw.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        std::vector<std::string> items;
        for (int i = 0; i < m; ++i)
            if (rng.uniform() < 0.35) items.push_back("it" + std::to_string(i));
        if (items.empty()) items.push_back("it" + std::to_string(rng.bounded(static_cast<std::uint64_t>(m))));
        raw.push_back(std::move(items));
    }
    return raw;
}

// 50,000 transactions over 100 items with skewed frequencies: a dense
// frequent head (every head subset clears 1% support) and a long tail that
// never reaches minsup, so the itemset count is driven by the head alone.
inline std::vector<std::vector<std::string>> benchmark_database(std::uint64_t seed) {
    citymine::Rng rng(seed);
    std::vector<double> prob(100);
    for (int i = 0; i < 100; ++i)
        prob[static_cast<std::size_t>(i)] =
            i < 17 ? 0.85 * std::exp(-i / 150.0) : 0.006 * std::exp(-(i - 17) / 40.0) + 0.001;
    std::vector<std::string> names(100);
    for (int i = 0; i < 100; ++i) {
        std::string s = std::to_string(i);
        names[static_cast<std::size_t>(i)] = "i" + std::string(2 - s.size(), '0') + s;
    }
    std::vector<std::vector<std::string>> raw;
    raw.reserve(50000);
    for (int t = 0; t < 50000; ++t) {
        std::vector<std::string> items;
        for (int i = 0; i < 100; ++i)
            if (rng.uniform() < prob[static_cast<std::size_t>(i)]) items.push_back(names[static_cast<std::size_t>(i)]);
        if (items.empty()) items.push_back(names[rng.bounded(100)]);
        raw.push_back(std::move(items));
    }
    return raw;
}

} // namespace fixtures
