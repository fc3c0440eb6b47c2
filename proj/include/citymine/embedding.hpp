// 2D embeddings of the city-FI matrix and pairwise squared Euclidean
// distances. PCA is computed from the Gram matrix with a cyclic Jacobi
// eigensolver: fully deterministic, no external linear algebra.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "citymine/city_matrix.hpp"
#include "citymine/errors.hpp"
#include "citymine/text.hpp"

namespace citymine {

struct Embedding {
    std::vector<std::string> city_names;
    std::vector<std::array<double, 2>> coords;
    std::string method; // "pca" | "umap"
    std::optional<std::uint64_t> seed;
};

struct DistanceMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values; // squared Euclidean, symmetric, zero diagonal
};

namespace detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. A is destroyed;
// eigenvectors come back as columns of V.
inline void jacobi_eigen_sym(std::vector<std::vector<double>>& A,
                             std::vector<double>& values,
                             std::vector<std::vector<double>>& V) {
    std::size_t n = A.size();
    V.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) V[i][i] = 1.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(A[i][j]));
    if (scale == 0.0) scale = 1.0;
    const double tol = 1e-14 * scale;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(A[p][q]));
        if (off <= tol) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = A[p][q];
                if (std::abs(apq) <= tol * 1e-3) continue;
                double theta = (A[q][q] - A[p][p]) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);
                double app = A[p][p], aqq = A[q][q];
                A[p][p] = app - t * apq;
                A[q][q] = aqq + t * apq;
                A[p][q] = A[q][p] = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i != p && i != q) {
                        double aip = A[i][p], aiq = A[i][q];
                        A[i][p] = A[p][i] = aip - s * (aiq + tau * aip);
                        A[i][q] = A[q][i] = aiq + s * (aip - tau * aiq);
                    }
                    double vip = V[i][p], viq = V[i][q];
                    V[i][p] = vip - s * (viq + tau * vip);
                    V[i][q] = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = A[i][i];
}

} // namespace detail

// Principal-component scores of the centered rows (descending eigenvalue
// order). Columns beyond the data rank are zero. Sign convention: the
// largest-magnitude feature loading of each component is positive.
inline std::vector<std::vector<double>> pca_scores(const std::vector<std::vector<double>>& rows,
                                                   std::size_t dims) {
    std::size_t n = rows.size();
    if (n < 2) throw DataError("PCA requires at least 2 rows");
    std::size_t m = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != m) throw DataError("PCA input rows have unequal lengths");

    std::vector<std::vector<double>> xc(n, std::vector<double>(m));
    for (std::size_t j = 0; j < m; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += rows[i][j];
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) xc[i][j] = rows[i][j] - mean;
    }

    std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double acc = std::inner_product(xc[i].begin(), xc[i].end(), xc[j].begin(), 0.0);
            gram[i][j] = gram[j][i] = acc;
        }

    std::vector<double> eig;
    std::vector<std::vector<double>> vec;
    detail::jacobi_eigen_sym(gram, eig, vec);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return eig[a] > eig[b]; });

    double eig_max = eig.empty() ? 0.0 : std::max(0.0, eig[order[0]]);
    std::vector<std::vector<double>> scores(n, std::vector<double>(dims, 0.0));
    for (std::size_t c = 0; c < dims && c < n; ++c) {
        double lambda = eig[order[c]];
        if (lambda <= eig_max * 1e-12 || lambda <= 0.0) continue; // rank exhausted
        double sval = std::sqrt(lambda);
        std::vector<double> u(n);
        for (std::size_t i = 0; i < n; ++i) u[i] = vec[i][order[c]];
        // loading = X_cᵀ u / √λ; flip so its largest-magnitude entry is positive
        double best_abs = -1.0, best_val = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double load = 0.0;
            for (std::size_t i = 0; i < n; ++i) load += xc[i][j] * u[i];
            load /= sval;
            if (std::abs(load) > best_abs) {
                best_abs = std::abs(load);
                best_val = load;
            }
        }
        double sign = best_val < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) scores[i][c] = sign * u[i] * sval;
    }
    return scores;
}

inline Embedding pca_embed(const CityFIMatrix& matrix, std::size_t dims = 2) {
    auto scores = pca_scores(matrix.values, dims);
    Embedding e;
    e.city_names = matrix.city_names;
    e.method = "pca";
    e.coords.reserve(scores.size());
    for (const auto& row : scores)
        e.coords.push_back({row.size() > 0 ? row[0] : 0.0, row.size() > 1 ? row[1] : 0.0});
    return e;
}

inline DistanceMatrix pairwise_sqeuclidean(const Embedding& e) {
    std::size_t n = e.coords.size();
    DistanceMatrix d;
    d.labels = e.city_names;
    d.values.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = e.coords[i][0] - e.coords[j][0];
            double dy = e.coords[i][1] - e.coords[j][1];
            d.values[i][j] = d.values[j][i] = dx * dx + dy * dy;
        }
    return d;
}

inline std::string embedding_to_csv(const Embedding& e) {
    std::string out = "city,x,y\n";
    for (std::size_t i = 0; i < e.coords.size(); ++i) {
        out += csv_field(e.city_names[i]);
        out += ',';
        out += fmt_double(e.coords[i][0]);
        out += ',';
        out += fmt_double(e.coords[i][1]);
        out += '\n';
    }
    return out;
}

inline void write_embedding_csv(const Embedding& e, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << embedding_to_csv(e);
}

inline Embedding read_embedding_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || csv_split(trim(line)) != std::vector<std::string>{"city", "x", "y"})
        throw DataError("bad embedding CSV header in " + path.string());
    Embedding e;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = csv_split(trim(line));
        if (fields.size() != 3) throw DataError("bad embedding CSV row: " + line);
        e.city_names.push_back(fields[0]);
        e.coords.push_back({parse_double(fields[1]), parse_double(fields[2])});
    }
    if (e.coords.empty()) throw DataError("embedding CSV has no rows: " + path.string());
    return e;
}

inline std::string distance_matrix_to_csv(const DistanceMatrix& d) {
    std::string out = "city";
    for (const std::string& l : d.labels) {
        out += ',';
        out += csv_field(l);
    }
    out += '\n';
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        out += csv_field(d.labels[i]);
        for (double v : d.values[i]) {
            out += ',';
            out += fmt_double(v);
        }
        out += '\n';
    }
    return out;
}

inline void write_distance_csv(const DistanceMatrix& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << distance_matrix_to_csv(d);
}

inline DistanceMatrix read_distance_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty distance CSV: " + path.string());
    auto header = csv_split(trim(line));
    if (header.empty() || header[0] != "city")
        throw DataError("bad distance CSV header in " + path.string());
    DistanceMatrix d;
    d.labels.assign(header.begin() + 1, header.end());
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = csv_split(trim(line));
        if (fields.size() != header.size()) throw DataError("bad distance CSV row: " + line);
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(parse_double(fields[i]));
        d.values.push_back(std::move(row));
    }
    if (d.values.size() != d.labels.size()) throw DataError("distance CSV is not square: " + path.string());
    return d;
}

} // namespace citymine
