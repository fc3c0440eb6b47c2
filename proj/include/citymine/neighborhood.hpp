// Buffer-distance neighbor detection and transaction extraction: each
// polygon contributes one transaction holding its own land-use code plus
// the codes of every polygon within the buffer distance, deduplicated
// and sorted. Distance ≤ d counts as "within" (closed buffer).
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "citymine/errors.hpp"
#include "citymine/feature.hpp"
#include "citymine/geometry.hpp"
#include "citymine/spatial_index.hpp"
#include "citymine/text.hpp"

namespace citymine {

struct Transaction {
    std::string source_id;
    std::vector<std::string> items; // sorted, distinct, includes own code
};

struct TransactionSet {
    std::string city_name;
    double buffer_distance = 0.0;
    std::vector<Transaction> transactions; // one per layer feature, layer order
};

inline double polygon_distance(const LandUseFeature& a, const LandUseFeature& b) {
    return polygon_distance(a.polygon, b.polygon);
}

// All other features at distance ≤ d from `feature_index` (indices into the layer).
inline std::vector<std::uint32_t> neighbors_within(const LandUseLayer& layer,
                                                   const SpatialIndex& index,
                                                   std::size_t feature_index,
                                                   double d) {
    if (feature_index >= layer.features.size())
        throw DataError("unknown feature index");
    const LandUseFeature& self = layer.features[feature_index];
    std::vector<std::uint32_t> out;
    for (std::uint32_t cand : index.query(self.polygon.bbox(), d)) {
        if (cand == feature_index) continue;
        if (polygon_distance(self, layer.features[cand]) <= d) out.push_back(cand);
    }
    return out;
}

inline std::vector<std::uint32_t> neighbors_within(const LandUseLayer& layer,
                                                   const SpatialIndex& index,
                                                   const std::string& feature_id,
                                                   double d) {
    for (std::size_t i = 0; i < layer.features.size(); ++i)
        if (layer.features[i].id == feature_id) return neighbors_within(layer, index, i, d);
    throw DataError("unknown feature id: " + feature_id);
}

inline TransactionSet extract_transactions(const LandUseLayer& layer, double d) {
    if (d < 0) throw ConfigError("buffer distance must be non-negative");
    SpatialIndex index(layer);
    TransactionSet ts;
    ts.city_name = layer.city_name;
    ts.buffer_distance = d;
    ts.transactions.reserve(layer.features.size());
    for (std::size_t i = 0; i < layer.features.size(); ++i) {
        const LandUseFeature& f = layer.features[i];
        std::set<std::string> items;
        items.insert(f.code);
        for (std::uint32_t nb : neighbors_within(layer, index, i, d))
            items.insert(layer.features[nb].code);
        ts.transactions.push_back({f.id, {items.begin(), items.end()}});
    }
    return ts;
}

// Published text format: one transaction per line, items space-separated
// in sorted order, LF endings, no header, no source ids.
inline std::string transactions_to_text(const TransactionSet& ts) {
    std::string out;
    for (const Transaction& t : ts.transactions) {
        out += join(t.items, " ");
        out += '\n';
    }
    return out;
}

inline void export_transactions(const TransactionSet& ts, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << transactions_to_text(ts);
}

inline std::vector<std::vector<std::string>> read_transactions_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path.string());
    std::vector<std::vector<std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        auto items = split_tokens(trim(line));
        if (!items.empty()) out.push_back(std::move(items));
    }
    return out;
}

// Dichotomous export: header `source_id,<sorted item tokens>`, one row per
// transaction with 1/0 presence flags.
inline std::string transactions_to_dichotomous_csv(const TransactionSet& ts) {
    std::set<std::string> universe;
    for (const Transaction& t : ts.transactions)
        universe.insert(t.items.begin(), t.items.end());
    std::string out = "source_id";
    for (const std::string& item : universe) {
        out += ',';
        out += csv_field(item);
    }
    out += '\n';
    for (const Transaction& t : ts.transactions) {
        out += csv_field(t.source_id);
        for (const std::string& item : universe)
            out += std::binary_search(t.items.begin(), t.items.end(), item) ? ",1" : ",0";
        out += '\n';
    }
    return out;
}

inline void export_dichotomous(const TransactionSet& ts, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << transactions_to_dichotomous_csv(ts);
}

inline double median_transaction_length(const TransactionSet& ts) {
    if (ts.transactions.empty()) return 0.0;
    std::vector<std::size_t> lens;
    lens.reserve(ts.transactions.size());
    for (const Transaction& t : ts.transactions) lens.push_back(t.items.size());
    std::sort(lens.begin(), lens.end());
    std::size_t n = lens.size();
    if (n % 2 == 1) return static_cast<double>(lens[n / 2]);
    return 0.5 * (static_cast<double>(lens[n / 2 - 1]) + static_cast<double>(lens[n / 2]));
}

inline double mean_transaction_length(const TransactionSet& ts) {
    if (ts.transactions.empty()) return 0.0;
    double sum = 0.0;
    for (const Transaction& t : ts.transactions) sum += static_cast<double>(t.items.size());
    return sum / static_cast<double>(ts.transactions.size());
}

} // namespace citymine
