// SVG reports: similarity heatmap, dendrogram with optional cut line,
// land-use thumbnails and the cluster scatter with embedded thumbnails.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citymine/clustering.hpp"
#include "citymine/embedding.hpp"
#include "citymine/errors.hpp"
#include "citymine/feature.hpp"
#include "citymine/svg.hpp"
#include "citymine/text.hpp"

namespace citymine {

struct ColorMap {
    // ordered (code prefix, fill); longest matching prefix wins
    std::vector<std::pair<std::string, std::string>> prefixes = {
        {"1", "#d7191c"}, {"2", "#ffd700"}, {"3", "#1a9641"}, {"5", "#2b83ba"}};
    std::string fallback = "#9e9e9e";
    // sequential ramp for heatmaps; high end = brightest = most similar
    std::string ramp_low = "#08306b";
    std::string ramp_high = "#f7fbff";

    std::string fill_for(const std::string& code) const {
        std::size_t best_len = 0;
        std::string fill = fallback;
        for (const auto& [prefix, color] : prefixes) {
            if (prefix.size() >= best_len + 1 && code.rfind(prefix, 0) == 0) {
                best_len = prefix.size();
                fill = color;
            }
        }
        return fill;
    }

    void validate() const {
        std::map<std::string, int> seen;
        for (const auto& [prefix, color] : prefixes) {
            if (++seen[prefix] > 1) throw ConfigError("duplicate color prefix '" + prefix + "'");
            parse_hex_color(color);
        }
        parse_hex_color(fallback);
        parse_hex_color(ramp_low);
        parse_hex_color(ramp_high);
    }
};

struct RenderConfig {
    double width = 800.0;
    double height = 600.0;
    double margin = 80.0;
    double font_size = 11.0;
    enum class LeafOrder { dendrogram, input } leaf_order = LeafOrder::dendrogram;
    ColorMap colors;
};

inline std::string render_heatmap(const DistanceMatrix& dist, const std::vector<std::string>& order,
                                  const RenderConfig& cfg) {
    std::vector<std::string> a = dist.labels, b = order;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw DataError("heatmap order is not a permutation of the distance labels");
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < dist.labels.size(); ++i) row_of[dist.labels[i]] = i;

    std::size_t n = order.size();
    double max_d = 0.0;
    for (const auto& row : dist.values)
        for (double v : row) max_d = std::max(max_d, v);

    SvgBuilder svg(cfg.width, cfg.height);
    svg.rect(0, 0, cfg.width, cfg.height, "#ffffff");
    double px = cfg.margin, py = cfg.margin / 2.0;
    double pw = cfg.width - cfg.margin - px, ph = cfg.height - cfg.margin - py;
    double cw = pw / static_cast<double>(n), chh = ph / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            double d = dist.values[row_of[order[r]]][row_of[order[c]]];
            double s = max_d > 0.0 ? 1.0 - d / max_d : 1.0;
            svg.rect(px + static_cast<double>(c) * cw, py + static_cast<double>(r) * chh, cw, chh,
                     lerp_color(cfg.colors.ramp_low, cfg.colors.ramp_high, s));
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        double cy = py + (static_cast<double>(r) + 0.5) * chh;
        svg.text(px - 6.0, cy + cfg.font_size * 0.35, order[r], cfg.font_size, "end");
    }
    for (std::size_t c = 0; c < n; ++c) {
        double cx = px + (static_cast<double>(c) + 0.5) * cw;
        double ty = py + ph + 10.0;
        svg.text(cx, ty, order[c], cfg.font_size, "end",
                 "transform=\"rotate(-60 " + svg_num(cx) + " " + svg_num(ty) + ")\"");
    }
    return svg.finish();
}

inline std::string render_dendrogram(const Dendrogram& dendro, std::optional<double> cut,
                                     const RenderConfig& cfg) {
    std::size_t n = dendro.leaves.size();
    std::vector<int> order;
    if (cfg.leaf_order == RenderConfig::LeafOrder::dendrogram) {
        order = dendrogram_leaf_order(dendro);
    } else {
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
    }
    std::vector<double> leaf_x(n);
    double px = cfg.margin, pw = cfg.width - 2.0 * cfg.margin;
    for (std::size_t pos = 0; pos < n; ++pos)
        leaf_x[static_cast<std::size_t>(order[pos])] =
            px + (static_cast<double>(pos) + 0.5) * pw / static_cast<double>(n);

    double root_h = dendro.merges.empty() ? 0.0 : dendro.merges.back().height;
    double base_y = cfg.height - cfg.margin;
    double top_y = cfg.margin / 2.0;
    double scale = root_h > 0.0 ? (base_y - top_y) / root_h : 1.0;
    auto y_of = [&](double h) { return base_y - h * scale; };

    // node -> (x, height); leaves at height 0
    std::vector<double> node_x(2 * n - 1, 0.0), node_h(2 * n - 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) node_x[i] = leaf_x[i];

    // cluster color per below-cut subtree
    std::vector<int> node_cluster(2 * n - 1, -1);
    if (cut) {
        ClusterAssignment cut_assign = cut_by_distance(dendro, *cut);
        for (std::size_t i = 0; i < n; ++i) node_cluster[i] = cut_assign.labels[i];
        for (std::size_t t = 0; t < dendro.merges.size(); ++t) {
            const DendrogramMerge& m = dendro.merges[t];
            if (m.height <= *cut)
                node_cluster[n + t] = node_cluster[static_cast<std::size_t>(m.left)];
        }
    }

    SvgBuilder svg(cfg.width, cfg.height);
    svg.rect(0, 0, cfg.width, cfg.height, "#ffffff");

    // height axis with 5 ticks
    svg.line(px - 10.0, base_y, px - 10.0, y_of(root_h), "#444444", 1.0);
    for (int tick = 0; tick <= 4; ++tick) {
        double h = root_h * tick / 4.0;
        svg.line(px - 14.0, y_of(h), px - 10.0, y_of(h), "#444444", 1.0);
        svg.text(px - 18.0, y_of(h) + cfg.font_size * 0.35, fmt_fixed(h, 3), cfg.font_size, "end");
    }

    for (std::size_t t = 0; t < dendro.merges.size(); ++t) {
        const DendrogramMerge& m = dendro.merges[t];
        auto l = static_cast<std::size_t>(m.left), r = static_cast<std::size_t>(m.right);
        double ym = y_of(m.height);
        std::string stroke = node_cluster[n + t] >= 0 ? palette_color(node_cluster[n + t]) : "#000000";
        svg.line(node_x[l], y_of(node_h[l]), node_x[l], ym, stroke, 1.5);
        svg.line(node_x[r], y_of(node_h[r]), node_x[r], ym, stroke, 1.5);
        svg.line(node_x[l], ym, node_x[r], ym, stroke, 1.5);
        node_x[n + t] = 0.5 * (node_x[l] + node_x[r]);
        node_h[n + t] = m.height;
    }

    if (cut) {
        double yc = y_of(*cut);
        svg.line(px - 10.0, yc, px + pw + 10.0, yc, "#777777", 1.0, "stroke-dasharray=\"5 4\"");
        svg.text(px + pw + 12.0, yc + cfg.font_size * 0.35, "cut " + fmt_fixed(*cut, 3),
                 cfg.font_size, "start");
    }

    for (std::size_t i = 0; i < n; ++i) {
        double ty = base_y + 12.0;
        svg.text(leaf_x[i], ty, dendro.leaves[i], cfg.font_size, "end",
                 "transform=\"rotate(-60 " + svg_num(leaf_x[i]) + " " + svg_num(ty) + ")\"");
    }
    return svg.finish();
}

inline std::string render_city_thumbnail(const LandUseLayer& layer, const ColorMap& colors,
                                         double size) {
    if (layer.features.empty()) throw DataError("cannot render an empty layer");
    Box extent;
    for (const LandUseFeature& f : layer.features) extent.expand(f.polygon.bbox());
    double pad = size * 0.04;
    double w = extent.max_x - extent.min_x, h = extent.max_y - extent.min_y;
    double span = std::max(w, h);
    double scale = span > 0.0 ? (size - 2.0 * pad) / span : 1.0;
    double ox = pad + (size - 2.0 * pad - w * scale) / 2.0;
    double oy = pad + (size - 2.0 * pad - h * scale) / 2.0;
    auto sx = [&](double x) { return ox + (x - extent.min_x) * scale; };
    auto sy = [&](double y) { return size - (oy + (y - extent.min_y) * scale); }; // north up

    SvgBuilder svg(size, size);
    svg.rect(0, 0, size, size, "#ffffff");
    for (const LandUseFeature& f : layer.features) {
        std::string d;
        auto add_ring = [&](const Ring& ring) {
            for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
                d += i == 0 ? "M" : "L";
                d += svg_num(sx(ring[i].x)) + " " + svg_num(sy(ring[i].y));
            }
            d += "Z";
        };
        add_ring(f.polygon.outer);
        for (const Ring& hole : f.polygon.holes) add_ring(hole);
        svg.path(d, colors.fill_for(f.code), "fill-rule=\"evenodd\"");
    }
    return svg.finish();
}

inline std::string render_scatter(const Embedding& e, const ClusterAssignment& assignment,
                                  const std::map<std::string, std::string>& thumbnails,
                                  const RenderConfig& cfg) {
    std::map<std::string, int> label_of;
    for (std::size_t i = 0; i < assignment.cities.size(); ++i)
        label_of[assignment.cities[i]] = assignment.labels[i];
    for (const std::string& city : e.city_names)
        if (!label_of.count(city)) throw DataError("missing cluster assignment for city '" + city + "'");

    Box extent;
    for (const auto& c : e.coords) extent.expand(Point{c[0], c[1]});
    double spanx = extent.max_x - extent.min_x, spany = extent.max_y - extent.min_y;
    double px = cfg.margin, pw = cfg.width - 2.0 * cfg.margin;
    double py = cfg.margin, ph = cfg.height - 2.0 * cfg.margin;
    auto map_x = [&](double x) {
        return spanx > 0.0 ? px + (x - extent.min_x) / spanx * pw : px + pw / 2.0;
    };
    auto map_y = [&](double y) {
        return spany > 0.0 ? py + ph - (y - extent.min_y) / spany * ph : py + ph / 2.0;
    };

    const double thumb_size = 48.0;
    SvgBuilder svg(cfg.width, cfg.height);
    svg.rect(0, 0, cfg.width, cfg.height, "#ffffff");
    for (std::size_t i = 0; i < e.city_names.size(); ++i) {
        const std::string& city = e.city_names[i];
        double x = map_x(e.coords[i][0]), y = map_y(e.coords[i][1]);
        auto thumb = thumbnails.find(city);
        if (thumb != thumbnails.end())
            svg.raw(nest_svg(thumb->second, x - thumb_size / 2.0, y - thumb_size - 6.0, thumb_size,
                             thumb_size));
        svg.circle(x, y, 4.0, palette_color(label_of[city]));
        svg.text(x, y + cfg.font_size + 6.0, city, cfg.font_size, "middle");
    }
    return svg.finish();
}

} // namespace citymine
