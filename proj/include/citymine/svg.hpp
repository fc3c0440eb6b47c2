// Minimal deterministic SVG 1.1 writer. All numbers are formatted with
// two fixed decimals through std::to_chars, so identical inputs yield
// byte-identical documents.
#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "citymine/errors.hpp"
#include "citymine/text.hpp"

namespace citymine {

struct Rgb {
    int r = 0, g = 0, b = 0;
};

inline Rgb parse_hex_color(std::string_view hex) {
    auto bad = [&] { throw ConfigError("invalid color '" + std::string(hex) + "', expected #rrggbb"); };
    if (hex.size() != 7 || hex[0] != '#') bad();
    auto nib = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        bad();
        return 0;
    };
    return {nib(hex[1]) * 16 + nib(hex[2]), nib(hex[3]) * 16 + nib(hex[4]),
            nib(hex[5]) * 16 + nib(hex[6])};
}

inline std::string to_hex_color(const Rgb& c) {
    static const char* hex = "0123456789abcdef";
    std::string out = "#";
    for (int v : {c.r, c.g, c.b}) {
        out += hex[(v >> 4) & 0xf];
        out += hex[v & 0xf];
    }
    return out;
}

// Linear interpolation between two colors, t in [0,1], rounded per channel.
inline std::string lerp_color(std::string_view low, std::string_view high, double t) {
    Rgb a = parse_hex_color(low), b = parse_hex_color(high);
    auto mix = [t](int x, int y) {
        return static_cast<int>(std::lround(static_cast<double>(x) + (static_cast<double>(y) - x) * t));
    };
    return to_hex_color({mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)});
}

// Fixed palette for cluster colors, cycled by index.
inline std::string palette_color(int index) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[static_cast<std::size_t>(index) % 10];
}

inline std::string svg_num(double v) { return fmt_fixed(v, 2); }

class SvgBuilder {
public:
    SvgBuilder(double width, double height) {
        buf_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width) +
               "\" height=\"" + svg_num(height) + "\" viewBox=\"0 0 " + svg_num(width) + " " +
               svg_num(height) + "\">\n";
    }

    void rect(double x, double y, double w, double h, std::string_view fill,
              std::string_view extra = "") {
        buf_ += "<rect x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" width=\"" + svg_num(w) +
                "\" height=\"" + svg_num(h) + "\" fill=\"" + std::string(fill) + "\"";
        append_extra(extra);
    }

    void line(double x1, double y1, double x2, double y2, std::string_view stroke,
              double stroke_width = 1.0, std::string_view extra = "") {
        buf_ += "<line x1=\"" + svg_num(x1) + "\" y1=\"" + svg_num(y1) + "\" x2=\"" + svg_num(x2) +
                "\" y2=\"" + svg_num(y2) + "\" stroke=\"" + std::string(stroke) +
                "\" stroke-width=\"" + svg_num(stroke_width) + "\"";
        append_extra(extra);
    }

    void circle(double cx, double cy, double r, std::string_view fill,
                std::string_view extra = "") {
        buf_ += "<circle cx=\"" + svg_num(cx) + "\" cy=\"" + svg_num(cy) + "\" r=\"" + svg_num(r) +
                "\" fill=\"" + std::string(fill) + "\"";
        append_extra(extra);
    }

    void path(std::string_view d, std::string_view fill, std::string_view extra = "") {
        buf_ += "<path d=\"" + std::string(d) + "\" fill=\"" + std::string(fill) + "\"";
        append_extra(extra);
    }

    void text(double x, double y, std::string_view content, double font_size,
              std::string_view anchor = "start", std::string_view extra = "") {
        buf_ += "<text x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" font-size=\"" +
                svg_num(font_size) + "\" font-family=\"sans-serif\" text-anchor=\"" +
                std::string(anchor) + "\"";
        if (!extra.empty()) {
            buf_ += ' ';
            buf_ += extra;
        }
        buf_ += ">" + xml_escape(content) + "</text>\n";
    }

    void raw(std::string_view s) { buf_ += s; }

    std::string finish() {
        return buf_ + "</svg>\n";
    }

private:
    void append_extra(std::string_view extra) {
        if (!extra.empty()) {
            buf_ += ' ';
            buf_ += extra;
        }
        buf_ += "/>\n";
    }

    std::string buf_;
};

// Re-host a standalone SVG document as a nested element at (x, y) with the
// given size. Our documents always start with the root tag emitted by
// SvgBuilder, so the rewrite is a plain prefix replacement.
inline std::string nest_svg(std::string_view doc, double x, double y, double w, double h) {
    std::size_t open = doc.find("<svg");
    if (open == std::string_view::npos) throw DataError("not an SVG document");
    std::size_t close = doc.find('>', open);
    std::string_view tag = doc.substr(open, close - open);
    std::string view_box;
    std::size_t vb = tag.find("viewBox=\"");
    if (vb != std::string_view::npos) {
        std::size_t end = tag.find('"', vb + 9);
        view_box = std::string(tag.substr(vb + 9, end - (vb + 9)));
    }
    std::string out = "<svg x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" width=\"" +
                      svg_num(w) + "\" height=\"" + svg_num(h) + "\"";
    if (!view_box.empty()) out += " viewBox=\"" + view_box + "\"";
    out += ">";
    out += doc.substr(close + 1);
    return out;
}

} // namespace citymine
