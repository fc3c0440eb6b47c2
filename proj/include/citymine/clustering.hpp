// Ward hierarchical clustering over 2D embeddings, dendrogram cuts, and
// internal validity indices. Merge heights are ESS increments: the
// Lance-Williams recurrence is seeded with half squared Euclidean
// distances, so each height equals the increase in total within-cluster
// sum of squares caused by that merge.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "citymine/errors.hpp"
#include "citymine/text.hpp"

namespace citymine {

using Point2 = std::array<double, 2>;

struct DendrogramMerge {
    int left = 0;
    int right = 0;
    double height = 0.0;
    int size = 0;
};

// Nodes: leaves 0..n-1, internal nodes n..2n-2 in merge order.
struct Dendrogram {
    std::vector<std::string> leaves;
    std::vector<DendrogramMerge> merges;
};

struct ClusterAssignment {
    std::vector<std::string> cities;
    std::vector<int> labels; // dense 0..k-1, first-appearance order
    int k = 0;
    std::optional<double> cut_distance;
    std::optional<int> target_k;
};

inline double euclid(const Point2& a, const Point2& b) {
    double dx = a[0] - b[0], dy = a[1] - b[1];
    return std::sqrt(dx * dx + dy * dy);
}

inline double sq_euclid(const Point2& a, const Point2& b) {
    double dx = a[0] - b[0], dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

inline Dendrogram ward_linkage(const std::vector<Point2>& points,
                               const std::vector<std::string>& labels) {
    std::size_t n = points.size();
    if (n < 2) throw DataError("ward linkage requires at least 2 points");
    if (labels.size() != n) throw DataError("ward linkage: labels/points size mismatch");
    for (const Point2& p : points)
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
            throw DataError("ward linkage: non-finite coordinate");

    Dendrogram out;
    out.leaves = labels;
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            d[i][j] = d[j][i] = 0.5 * sq_euclid(points[i], points[j]); // ESS of the pair merge

    std::vector<int> id(n), size(n, 1);
    std::vector<bool> alive(n, true);
    std::iota(id.begin(), id.end(), 0);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        int bleft = 0, bright = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!alive[j]) continue;
                int left = std::min(id[i], id[j]);
                int right = std::max(id[i], id[j]);
                if (d[i][j] < best ||
                    (d[i][j] == best && (left < bleft || (left == bleft && right < bright)))) {
                    best = d[i][j];
                    bi = i;
                    bj = j;
                    bleft = left;
                    bright = right;
                }
            }
        }
        int merged_size = size[bi] + size[bj];
        out.merges.push_back({bleft, bright, best, merged_size});
        double ni = size[bi], nj = size[bj];
        for (std::size_t km = 0; km < n; ++km) {
            if (!alive[km] || km == bi || km == bj) continue;
            double nk = size[km];
            d[bi][km] = d[km][bi] =
                ((ni + nk) * d[bi][km] + (nj + nk) * d[bj][km] - nk * d[bi][bj]) / (ni + nj + nk);
        }
        size[bi] = merged_size;
        id[bi] = static_cast<int>(n + step);
        alive[bj] = false;
    }
    return out;
}

namespace detail {

inline ClusterAssignment cut_dendrogram(const Dendrogram& dendro, std::size_t merges_applied) {
    std::size_t n = dendro.leaves.size();
    std::vector<int> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t t = 0; t < merges_applied; ++t) {
        parent[static_cast<std::size_t>(dendro.merges[t].left)] = static_cast<int>(n + t);
        parent[static_cast<std::size_t>(dendro.merges[t].right)] = static_cast<int>(n + t);
    }
    auto root = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    ClusterAssignment a;
    a.cities = dendro.leaves;
    a.labels.resize(n);
    std::map<int, int> label_of;
    for (std::size_t i = 0; i < n; ++i) {
        int r = root(static_cast<int>(i));
        auto it = label_of.find(r);
        if (it == label_of.end())
            it = label_of.emplace(r, static_cast<int>(label_of.size())).first;
        a.labels[i] = it->second;
    }
    a.k = static_cast<int>(label_of.size());
    return a;
}

} // namespace detail

inline ClusterAssignment cut_by_distance(const Dendrogram& dendro, double d) {
    if (d < 0) throw ConfigError("cut distance must be non-negative");
    std::size_t applied = 0;
    while (applied < dendro.merges.size() && dendro.merges[applied].height <= d) ++applied;
    ClusterAssignment a = detail::cut_dendrogram(dendro, applied);
    a.cut_distance = d;
    return a;
}

inline ClusterAssignment cut_by_k(const Dendrogram& dendro, int k) {
    auto n = static_cast<int>(dendro.leaves.size());
    if (k < 1 || k > n) throw ConfigError("cut_by_k: k out of range");
    ClusterAssignment a = detail::cut_dendrogram(dendro, static_cast<std::size_t>(n - k));
    a.target_k = k;
    return a;
}

namespace detail {

inline std::size_t cluster_count(const std::vector<int>& labels) {
    int mx = -1;
    for (int l : labels) mx = std::max(mx, l);
    return static_cast<std::size_t>(mx + 1);
}

inline std::vector<Point2> centroids(const std::vector<Point2>& pts, const std::vector<int>& labels,
                                     std::size_t k) {
    std::vector<Point2> c(k, {0.0, 0.0});
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto l = static_cast<std::size_t>(labels[i]);
        c[l][0] += pts[i][0];
        c[l][1] += pts[i][1];
        ++cnt[l];
    }
    for (std::size_t l = 0; l < k; ++l) {
        if (cnt[l] == 0) throw DataError("empty cluster");
        c[l][0] /= static_cast<double>(cnt[l]);
        c[l][1] /= static_cast<double>(cnt[l]);
    }
    return c;
}

} // namespace detail

// Mean silhouette: s = (b−a)/max(a,b), Euclidean distances; singleton
// clusters score 0.
inline double silhouette(const std::vector<Point2>& pts, const std::vector<int>& labels) {
    std::size_t n = pts.size();
    std::size_t k = detail::cluster_count(labels);
    if (k < 2) throw ConfigError("silhouette requires at least 2 clusters");
    std::vector<std::size_t> cnt(k, 0);
    for (int l : labels) ++cnt[static_cast<std::size_t>(l)];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto li = static_cast<std::size_t>(labels[i]);
        if (cnt[li] <= 1) continue; // singleton: s = 0
        std::vector<double> sum(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum[static_cast<std::size_t>(labels[j])] += euclid(pts[i], pts[j]);
        }
        double a = sum[li] / static_cast<double>(cnt[li] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < k; ++l) {
            if (l == li || cnt[l] == 0) continue;
            b = std::min(b, sum[l] / static_cast<double>(cnt[l]));
        }
        double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

inline double wcss(const std::vector<Point2>& pts, const std::vector<int>& labels) {
    std::size_t k = detail::cluster_count(labels);
    auto cent = detail::centroids(pts, labels, k);
    double w = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        w += sq_euclid(pts[i], cent[static_cast<std::size_t>(labels[i])]);
    return w;
}

inline double calinski_harabasz(const std::vector<Point2>& pts, const std::vector<int>& labels) {
    std::size_t n = pts.size();
    std::size_t k = detail::cluster_count(labels);
    if (k < 2 || k > n - 1) throw ConfigError("calinski_harabasz requires 2 ≤ k ≤ n−1");
    auto cent = detail::centroids(pts, labels, k);
    Point2 global{0.0, 0.0};
    for (const Point2& p : pts) {
        global[0] += p[0];
        global[1] += p[1];
    }
    global[0] /= static_cast<double>(n);
    global[1] /= static_cast<double>(n);
    std::vector<std::size_t> cnt(k, 0);
    for (int l : labels) ++cnt[static_cast<std::size_t>(l)];
    double b = 0.0;
    for (std::size_t l = 0; l < k; ++l) b += static_cast<double>(cnt[l]) * sq_euclid(cent[l], global);
    double w = wcss(pts, labels);
    if (w == 0.0) return std::numeric_limits<double>::infinity();
    return (b / static_cast<double>(k - 1)) / (w / static_cast<double>(n - k));
}

inline double davies_bouldin(const std::vector<Point2>& pts, const std::vector<int>& labels) {
    std::size_t k = detail::cluster_count(labels);
    if (k < 2) throw ConfigError("davies_bouldin requires at least 2 clusters");
    auto cent = detail::centroids(pts, labels, k);
    std::vector<double> s(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto l = static_cast<std::size_t>(labels[i]);
        s[l] += euclid(pts[i], cent[l]);
        ++cnt[l];
    }
    for (std::size_t l = 0; l < k; ++l) s[l] /= static_cast<double>(cnt[l]);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            double dij = euclid(cent[i], cent[j]);
            double r = dij == 0.0 ? std::numeric_limits<double>::infinity() : (s[i] + s[j]) / dij;
            worst = std::max(worst, r);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

struct KSelectionRow {
    int k = 0;
    double silhouette = 0.0;
    double calinski_harabasz = 0.0;
    double davies_bouldin = 0.0;
    double wcss = 0.0;
    bool chosen = false;
};

struct KSelectionReport {
    std::vector<KSelectionRow> rows;
    int chosen_k = 0;
    std::string note;
};

// Rank aggregation across the four indices; WCSS enters through its elbow
// curvature (discrete second difference). Ties go to the smaller k.
inline KSelectionReport select_k(const Dendrogram& dendro, const std::vector<Point2>& pts,
                                 int k_min, int k_max) {
    auto n = static_cast<int>(pts.size());
    if (k_min < 2 || k_max > n - 1 || k_min > k_max)
        throw ConfigError("select_k: k range must lie within [2, n-1]");

    std::map<int, double> wcss_at;
    for (int k = k_min - 1; k <= k_max + 1; ++k)
        wcss_at[k] = wcss(pts, cut_by_k(dendro, k).labels);

    KSelectionReport rep;
    std::vector<double> sil, ch, dbi, curv;
    for (int k = k_min; k <= k_max; ++k) {
        auto cut = cut_by_k(dendro, k);
        KSelectionRow row;
        row.k = k;
        row.silhouette = silhouette(pts, cut.labels);
        row.calinski_harabasz = calinski_harabasz(pts, cut.labels);
        row.davies_bouldin = davies_bouldin(pts, cut.labels);
        row.wcss = wcss_at[k];
        rep.rows.push_back(row);
        sil.push_back(row.silhouette);
        ch.push_back(row.calinski_harabasz);
        dbi.push_back(row.davies_bouldin);
        curv.push_back(wcss_at[k - 1] - 2.0 * wcss_at[k] + wcss_at[k + 1]);
    }

    std::size_t count = rep.rows.size();
    auto ranks = [count](const std::vector<double>& v, bool descending) {
        std::vector<std::size_t> order(count);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return descending ? v[a] > v[b] : v[a] < v[b];
        });
        std::vector<double> r(count);
        for (std::size_t pos = 0; pos < count; ++pos) r[order[pos]] = static_cast<double>(pos + 1);
        return r;
    };
    auto r1 = ranks(sil, true), r2 = ranks(ch, true), r3 = ranks(dbi, false), r4 = ranks(curv, true);
    double best_score = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < count; ++i) {
        double score = (r1[i] + r2[i] + r3[i] + r4[i]) / 4.0;
        if (score < best_score) {
            best_score = score;
            best_idx = i;
        }
    }
    rep.chosen_k = rep.rows[best_idx].k;
    rep.rows[best_idx].chosen = true;
    rep.note = "rank aggregate: mean of per-index ranks (silhouette desc, calinski_harabasz desc, "
               "davies_bouldin asc, wcss elbow curvature desc); chosen k=" +
               std::to_string(rep.chosen_k) + " with mean rank " + fmt_fixed(best_score, 2) +
               "; ties break to smaller k";
    return rep;
}

inline KSelectionReport select_k(const std::vector<Point2>& pts, int k_min, int k_max) {
    std::vector<std::string> labels(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) labels[i] = "p" + std::to_string(i);
    return select_k(ward_linkage(pts, labels), pts, k_min, k_max);
}

inline std::string kselection_to_csv(const KSelectionReport& rep) {
    std::string out = "k,silhouette,calinski_harabasz,davies_bouldin,wcss,chosen\n";
    for (const KSelectionRow& r : rep.rows) {
        out += std::to_string(r.k);
        out += ',';
        out += fmt_fixed(r.silhouette, 6);
        out += ',';
        out += fmt_fixed(r.calinski_harabasz, 6);
        out += ',';
        out += fmt_fixed(r.davies_bouldin, 6);
        out += ',';
        out += fmt_fixed(r.wcss, 6);
        out += ',';
        out += r.chosen ? '1' : '0';
        out += '\n';
    }
    return out;
}

inline void write_kselection_csv(const KSelectionReport& rep, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << kselection_to_csv(rep);
}

inline nlohmann::json dendrogram_to_json(const Dendrogram& d) {
    nlohmann::json merges = nlohmann::json::array();
    for (const DendrogramMerge& m : d.merges)
        merges.push_back({m.left, m.right, m.height, m.size});
    return {{"leaves", d.leaves}, {"merges", merges}};
}

inline void write_dendrogram_json(const Dendrogram& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << dendrogram_to_json(d).dump(2) << '\n';
}

inline Dendrogram dendrogram_from_json(const nlohmann::json& j) {
    Dendrogram d;
    if (!j.contains("leaves") || !j.contains("merges")) throw DataError("bad dendrogram JSON");
    d.leaves = j["leaves"].get<std::vector<std::string>>();
    for (const auto& m : j["merges"]) {
        if (!m.is_array() || m.size() != 4) throw DataError("bad dendrogram merge record");
        d.merges.push_back({m[0].get<int>(), m[1].get<int>(), m[2].get<double>(), m[3].get<int>()});
    }
    return d;
}

inline Dendrogram read_dendrogram_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed dendrogram JSON in " + path.string() + ": " + e.what());
    }
    return dendrogram_from_json(j);
}

inline nlohmann::json assignment_to_json(const ClusterAssignment& a) {
    nlohmann::json labels = nlohmann::json::object();
    for (std::size_t i = 0; i < a.cities.size(); ++i) labels[a.cities[i]] = a.labels[i];
    nlohmann::json criterion;
    if (a.cut_distance)
        criterion = {{"type", "cut_distance"}, {"distance", *a.cut_distance}};
    else
        criterion = {{"type", "target_k"}, {"k", a.target_k ? *a.target_k : a.k}};
    return {{"k", a.k}, {"criterion", criterion}, {"labels", labels}};
}

inline void write_assignment_json(const ClusterAssignment& a, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << assignment_to_json(a).dump(2) << '\n';
}

inline ClusterAssignment assignment_from_json(const nlohmann::json& j) {
    ClusterAssignment a;
    if (!j.contains("k") || !j.contains("labels")) throw DataError("bad assignment JSON");
    a.k = j["k"].get<int>();
    for (const auto& [city, label] : j["labels"].items()) {
        a.cities.push_back(city);
        a.labels.push_back(label.get<int>());
    }
    if (j.contains("criterion")) {
        const auto& c = j["criterion"];
        if (c.value("type", "") == "cut_distance") a.cut_distance = c["distance"].get<double>();
        else if (c.value("type", "") == "target_k") a.target_k = c["k"].get<int>();
    }
    return a;
}

inline ClusterAssignment read_assignment_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed assignment JSON in " + path.string() + ": " + e.what());
    }
    return assignment_from_json(j);
}

// Leaf order for displays: depth-first from the root, left child first.
inline std::vector<int> dendrogram_leaf_order(const Dendrogram& d) {
    auto n = static_cast<int>(d.leaves.size());
    std::vector<int> order;
    if (d.merges.empty()) {
        for (int i = 0; i < n; ++i) order.push_back(i);
        return order;
    }
    std::vector<int> stack{n + static_cast<int>(d.merges.size()) - 1};
    while (!stack.empty()) {
        int node = stack.back();
        stack.pop_back();
        if (node < n) {
            order.push_back(node);
        } else {
            const DendrogramMerge& m = d.merges[static_cast<std::size_t>(node - n)];
            stack.push_back(m.right); // visit left first
            stack.push_back(m.left);
        }
    }
    return order;
}

} // namespace citymine
