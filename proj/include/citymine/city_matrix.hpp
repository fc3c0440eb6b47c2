// Cities × frequent-itemsets matrix of relative supports. Columns are the
// union of all cities' FI keys; a zero cell means the FI was not frequent
// in that city.
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "citymine/errors.hpp"
#include "citymine/fim.hpp"
#include "citymine/text.hpp"

namespace citymine {

struct CityFIMatrix {
    std::vector<std::string> city_names;            // rows, sorted
    std::vector<std::string> fi_columns;            // canonical key order
    std::vector<std::vector<double>> values;        // row-major

    std::size_t rows() const { return city_names.size(); }
    std::size_t cols() const { return fi_columns.size(); }
};

namespace detail {

// key order: itemset length first, then token-list lexicographic
struct FiKeyLess {
    bool operator()(const std::string& a, const std::string& b) const {
        auto ta = split_tokens(a);
        auto tb = split_tokens(b);
        if (ta.size() != tb.size()) return ta.size() < tb.size();
        return ta < tb;
    }
};

} // namespace detail

inline CityFIMatrix merge_city_fis(const std::map<std::string, std::vector<FrequentItemset>>& results) {
    if (results.empty()) throw DataError("merge requires at least one city");
    CityFIMatrix m;
    std::set<std::string, detail::FiKeyLess> keys;
    for (const auto& [city, fis] : results) {
        std::set<std::string> own;
        for (const FrequentItemset& fi : fis) {
            std::string key = fi_key(fi.items);
            if (!own.insert(key).second)
                throw DataError("city '" + city + "': duplicate FI key '" + key + "'");
            keys.insert(key);
        }
    }
    m.fi_columns.assign(keys.begin(), keys.end());
    std::map<std::string, std::size_t> col_of;
    for (std::size_t c = 0; c < m.fi_columns.size(); ++c) col_of[m.fi_columns[c]] = c;
    for (const auto& [city, fis] : results) {
        m.city_names.push_back(city);
        std::vector<double> row(m.fi_columns.size(), 0.0);
        for (const FrequentItemset& fi : fis) row[col_of[fi_key(fi.items)]] = fi.relative_support;
        m.values.push_back(std::move(row));
    }
    return m;
}

// Keep columns where at least one city meets the threshold.
inline CityFIMatrix filter_columns(const CityFIMatrix& m, double min_relative_support) {
    if (min_relative_support < 0.0 || min_relative_support > 1.0)
        throw ConfigError("column filter threshold must be in [0, 1]");
    CityFIMatrix out;
    out.city_names = m.city_names;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        bool any = false;
        for (std::size_t r = 0; r < m.rows() && !any; ++r)
            if (m.values[r][c] >= min_relative_support) any = true;
        if (any) keep.push_back(c);
    }
    for (std::size_t c : keep) out.fi_columns.push_back(m.fi_columns[c]);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::vector<double> row;
        row.reserve(keep.size());
        for (std::size_t c : keep) row.push_back(m.values[r][c]);
        out.values.push_back(std::move(row));
    }
    return out;
}

inline std::string matrix_to_csv(const CityFIMatrix& m) {
    std::string out = "city";
    for (const std::string& key : m.fi_columns) {
        out += ',';
        out += csv_field(key);
    }
    out += '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out += csv_field(m.city_names[r]);
        for (double v : m.values[r]) {
            out += ',';
            out += fmt_fixed(v, 6);
        }
        out += '\n';
    }
    return out;
}

inline void write_matrix_csv(const CityFIMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << matrix_to_csv(m);
}

inline CityFIMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty matrix CSV: " + path.string());
    auto header = csv_split(trim(line));
    if (header.empty() || header[0] != "city")
        throw DataError("bad matrix CSV header in " + path.string());
    CityFIMatrix m;
    m.fi_columns.assign(header.begin() + 1, header.end());
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = csv_split(trim(line));
        if (fields.size() != header.size())
            throw DataError("bad matrix CSV row in " + path.string() + ": " + line);
        m.city_names.push_back(fields[0]);
        std::vector<double> row;
        row.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(parse_double(fields[i]));
        m.values.push_back(std::move(row));
    }
    if (m.city_names.empty()) throw DataError("matrix CSV has no rows: " + path.string());
    return m;
}

} // namespace citymine
