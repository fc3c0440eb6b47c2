// Packed R-tree over feature bounding boxes (sort-tile-recursive bulk
// load). Box queries return a superset of the features intersecting the
// padded query box; exact geometry tests are the caller's job.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "citymine/feature.hpp"
#include "citymine/geometry.hpp"

namespace citymine {

class SpatialIndex {
public:
    static constexpr std::size_t kNodeCapacity = 16;

    SpatialIndex() = default;

    explicit SpatialIndex(const LandUseLayer& layer) {
        std::vector<Box> boxes;
        boxes.reserve(layer.features.size());
        for (const LandUseFeature& f : layer.features) boxes.push_back(f.polygon.bbox());
        build(boxes);
    }

    explicit SpatialIndex(const std::vector<Box>& boxes) { build(boxes); }

    std::size_t size() const { return leaf_count_; }

    // Indices of all entries whose box intersects `query` expanded by `pad`.
    std::vector<std::uint32_t> query(const Box& query, double pad = 0.0) const {
        std::vector<std::uint32_t> out;
        if (nodes_.empty()) return out;
        std::vector<std::uint32_t> stack{root_};
        while (!stack.empty()) {
            const Node& node = nodes_[stack.back()];
            stack.pop_back();
            if (!node.box.intersects(query, pad)) continue;
            if (node.leaf) {
                for (std::uint32_t i = 0; i < node.count; ++i) {
                    const Entry& e = entries_[node.first + i];
                    if (e.box.intersects(query, pad)) out.push_back(e.id);
                }
            } else {
                for (std::uint32_t i = 0; i < node.count; ++i)
                    stack.push_back(node.first + i);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct Entry {
        Box box;
        std::uint32_t id;
    };
    struct Node {
        Box box;
        std::uint32_t first = 0; // entry offset (leaf) or child node offset
        std::uint32_t count = 0;
        bool leaf = true;
    };

    void build(const std::vector<Box>& boxes) {
        leaf_count_ = boxes.size();
        entries_.resize(boxes.size());
        for (std::size_t i = 0; i < boxes.size(); ++i)
            entries_[i] = {boxes[i], static_cast<std::uint32_t>(i)};
        if (entries_.empty()) return;

        // STR packing: sort by center x, slice, sort slices by center y.
        auto cx = [](const Entry& e) { return e.box.min_x + e.box.max_x; };
        auto cy = [](const Entry& e) { return e.box.min_y + e.box.max_y; };
        std::sort(entries_.begin(), entries_.end(), [&](const Entry& a, const Entry& b) {
            if (cx(a) != cx(b)) return cx(a) < cx(b);
            return a.id < b.id;
        });
        std::size_t n = entries_.size();
        std::size_t leaf_nodes = (n + kNodeCapacity - 1) / kNodeCapacity;
        std::size_t slices = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(leaf_nodes))));
        std::size_t per_slice = (n + slices - 1) / slices;
        for (std::size_t s = 0; s * per_slice < n; ++s) {
            auto lo = entries_.begin() + static_cast<std::ptrdiff_t>(s * per_slice);
            auto hi = entries_.begin() + static_cast<std::ptrdiff_t>(std::min(n, (s + 1) * per_slice));
            std::sort(lo, hi, [&](const Entry& a, const Entry& b) {
                if (cy(a) != cy(b)) return cy(a) < cy(b);
                return a.id < b.id;
            });
        }

        // Leaf level.
        std::vector<std::uint32_t> level;
        for (std::size_t off = 0; off < n; off += kNodeCapacity) {
            Node node;
            node.leaf = true;
            node.first = static_cast<std::uint32_t>(off);
            node.count = static_cast<std::uint32_t>(std::min(kNodeCapacity, n - off));
            for (std::uint32_t i = 0; i < node.count; ++i)
                node.box.expand(entries_[off + i].box);
            level.push_back(static_cast<std::uint32_t>(nodes_.size()));
            nodes_.push_back(node);
        }
        // Inner levels; children of one node are contiguous by construction.
        while (level.size() > 1) {
            std::vector<std::uint32_t> next;
            for (std::size_t off = 0; off < level.size(); off += kNodeCapacity) {
                Node node;
                node.leaf = false;
                node.first = level[off];
                node.count = static_cast<std::uint32_t>(std::min(kNodeCapacity, level.size() - off));
                for (std::uint32_t i = 0; i < node.count; ++i)
                    node.box.expand(nodes_[level[off] + i].box);
                next.push_back(static_cast<std::uint32_t>(nodes_.size()));
                nodes_.push_back(node);
            }
            level = std::move(next);
        }
        root_ = level.front();
    }

    std::vector<Entry> entries_;
    std::vector<Node> nodes_;
    std::uint32_t root_ = 0;
    std::size_t leaf_count_ = 0;
};

} // namespace citymine
