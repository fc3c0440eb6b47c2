// Seeded UMAP, implemented from first principles so that a fixed seed
// gives byte-identical output: exact kNN, smooth-knn bandwidth search,
// fuzzy union, and sampled SGD layout with the standard output kernel
// 1/(1 + a·d^(2b)). Initialization is a seeded Gaussian (not spectral).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "citymine/city_matrix.hpp"
#include "citymine/embedding.hpp"
#include "citymine/errors.hpp"
#include "citymine/rng.hpp"

namespace citymine {

struct UmapParams {
    int n_neighbors = 15;
    double min_dist = 0.1;
    int epochs = 500;
    double learning_rate = 1.0;
    std::uint64_t seed = 42;
};

namespace detail::umap {

struct Kernel {
    double a = 0.0;
    double b = 0.0;
};

// Least-squares fit of 1/(1 + a·x^(2b)) to the target curve that is 1 up
// to min_dist and exp(-(x - min_dist)/spread) beyond it, sampled on
// [0, 3·spread]. Gauss-Newton with Levenberg damping.
inline Kernel fit_kernel(double min_dist, double spread = 1.0) {
    const int samples = 300;
    std::vector<double> xs(samples), ys(samples);
    for (int i = 0; i < samples; ++i) {
        double x = 3.0 * spread * static_cast<double>(i) / static_cast<double>(samples - 1);
        xs[i] = x;
        ys[i] = x <= min_dist ? 1.0 : std::exp(-(x - min_dist) / spread);
    }
    double a = 1.0, b = 1.0;
    double lambda = 1e-3;
    auto sse = [&](double pa, double pb) {
        double s = 0.0;
        for (int i = 0; i < samples; ++i) {
            double f = 1.0 / (1.0 + pa * std::pow(xs[i], 2.0 * pb));
            double r = f - ys[i];
            s += r * r;
        }
        return s;
    };
    double err = sse(a, b);
    for (int iter = 0; iter < 200; ++iter) {
        double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
        for (int i = 0; i < samples; ++i) {
            double x = xs[i];
            double xp = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
            double denom = 1.0 + a * xp;
            double f = 1.0 / denom;
            double r = f - ys[i];
            double da = x > 0.0 ? -xp / (denom * denom) : 0.0;
            double db = x > 0.0 ? -2.0 * a * xp * std::log(x) / (denom * denom) : 0.0;
            jtj00 += da * da;
            jtj01 += da * db;
            jtj11 += db * db;
            jtr0 += da * r;
            jtr1 += db * r;
        }
        double m00 = jtj00 + lambda, m11 = jtj11 + lambda, m01 = jtj01;
        double det = m00 * m11 - m01 * m01;
        if (det == 0.0) break;
        double step_a = (-jtr0 * m11 + jtr1 * m01) / det;
        double step_b = (-jtr1 * m00 + jtr0 * m01) / det;
        double na = a + step_a, nb = b + step_b;
        double nerr = (na > 0.0 && nb > 0.0) ? sse(na, nb) : err + 1.0;
        if (nerr < err) {
            a = na;
            b = nb;
            err = nerr;
            lambda = std::max(lambda * 0.5, 1e-12);
            if (std::abs(step_a) + std::abs(step_b) < 1e-12) break;
        } else {
            lambda *= 2.0;
            if (lambda > 1e12) break;
        }
    }
    return {a, b};
}

inline double row_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct Edge {
    std::uint32_t head = 0;
    std::uint32_t tail = 0;
    double weight = 0.0;
};

} // namespace detail::umap

inline void validate(const UmapParams& p, std::size_t n_rows) {
    if (p.n_neighbors < 2) throw ConfigError("umap n_neighbors must be ≥ 2");
    if (static_cast<std::size_t>(p.n_neighbors) >= n_rows)
        throw ConfigError("umap n_neighbors must be smaller than the number of rows");
    if (!(p.min_dist > 0.0)) throw ConfigError("umap min_dist must be positive");
    if (p.epochs < 1) throw ConfigError("umap epochs must be ≥ 1");
    if (!(p.learning_rate > 0.0)) throw ConfigError("umap learning_rate must be positive");
}

inline std::vector<std::array<double, 2>> umap_coords(const std::vector<std::vector<double>>& rows,
                                                      const UmapParams& params) {
    std::size_t n = rows.size();
    validate(params, n);
    auto k = static_cast<std::size_t>(params.n_neighbors);

    // exact kNN, ties broken by index
    std::vector<std::vector<std::pair<double, std::uint32_t>>> knn(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::uint32_t>> cand;
        cand.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cand.emplace_back(detail::umap::row_distance(rows[i], rows[j]),
                              static_cast<std::uint32_t>(j));
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        cand.resize(k);
        knn[i] = std::move(cand);
    }

    // per-point bandwidth: weights sum to log2(k)
    const double target = std::log2(static_cast<double>(k));
    std::vector<double> rho(n, 0.0), sigma(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [d, j] : knn[i])
            if (d > 0.0) {
                rho[i] = d;
                break;
            }
        double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
        for (int it = 0; it < 64; ++it) {
            double sum = 0.0;
            for (const auto& [d, j] : knn[i]) {
                double adj = d - rho[i];
                sum += adj <= 0.0 ? 1.0 : std::exp(-adj / mid);
            }
            if (std::abs(sum - target) < 1e-5) break;
            if (sum > target) {
                hi = mid;
                mid = (lo + hi) / 2.0;
            } else {
                lo = mid;
                mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
            }
        }
        if (!(mid > 0.0) || std::isnan(mid))
            throw DataError("umap bandwidth search failed for point " + std::to_string(i));
        sigma[i] = mid;
    }

    // directed membership weights, then fuzzy union w_ij + w_ji − w_ij·w_ji
    std::vector<std::vector<std::pair<std::uint32_t, double>>> directed(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [d, j] : knn[i]) {
            double adj = d - rho[i];
            directed[i].emplace_back(j, adj <= 0.0 ? 1.0 : std::exp(-adj / sigma[i]));
        }
    auto directed_weight = [&](std::uint32_t from, std::uint32_t to) {
        for (const auto& [j, w] : directed[from])
            if (j == to) return w;
        return 0.0;
    };
    std::vector<detail::umap::Edge> edges; // both directions, sorted by (head, tail)
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, wij] : directed[i]) {
            if (j < i && directed_weight(j, static_cast<std::uint32_t>(i)) > 0.0)
                continue; // pair already handled from the smaller endpoint
            double wji = directed_weight(j, static_cast<std::uint32_t>(i));
            double w = wij + wji - wij * wji;
            if (w <= 0.0) continue;
            edges.push_back({static_cast<std::uint32_t>(i), j, w});
            edges.push_back({j, static_cast<std::uint32_t>(i), w});
        }
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        if (a.head != b.head) return a.head < b.head;
        return a.tail < b.tail;
    });

    double max_w = 0.0;
    for (const auto& e : edges) max_w = std::max(max_w, e.weight);
    if (max_w <= 0.0) throw DataError("umap graph has no edges");

    const double neg_rate = 5.0;
    std::size_t ecount = edges.size();
    std::vector<double> eps(ecount), next_sample(ecount), eps_neg(ecount), next_neg(ecount);
    for (std::size_t e = 0; e < ecount; ++e) {
        eps[e] = max_w / edges[e].weight;
        next_sample[e] = eps[e];
        eps_neg[e] = eps[e] / neg_rate;
        next_neg[e] = eps_neg[e];
    }

    auto kernel = detail::umap::fit_kernel(params.min_dist);
    const double a = kernel.a, b = kernel.b;

    Rng rng(params.seed);
    std::vector<std::array<double, 2>> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = {rng.normal(0.0, 10.0), rng.normal(0.0, 10.0)};

    auto clip4 = [](double v) { return std::clamp(v, -4.0, 4.0); };
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        double alpha = params.learning_rate *
                       (1.0 - static_cast<double>(epoch) / static_cast<double>(params.epochs));
        for (std::size_t e = 0; e < ecount; ++e) {
            if (next_sample[e] > static_cast<double>(epoch)) continue;
            auto h = edges[e].head, t = edges[e].tail;
            double dx = y[h][0] - y[t][0], dy = y[h][1] - y[t][1];
            double d2 = dx * dx + dy * dy;
            if (d2 > 0.0) {
                double gc = (-2.0 * a * b * std::pow(d2, b - 1.0)) / (1.0 + a * std::pow(d2, b));
                double gx = clip4(gc * dx), gy = clip4(gc * dy);
                y[h][0] += alpha * gx;
                y[h][1] += alpha * gy;
                y[t][0] -= alpha * gx;
                y[t][1] -= alpha * gy;
            }
            next_sample[e] += eps[e];
            int n_neg = static_cast<int>((static_cast<double>(epoch) - next_neg[e]) / eps_neg[e]);
            for (int p = 0; p < n_neg; ++p) {
                auto o = static_cast<std::uint32_t>(rng.bounded(n));
                if (o == h) continue;
                double ox = y[h][0] - y[o][0], oy = y[h][1] - y[o][1];
                double od2 = ox * ox + oy * oy;
                if (od2 > 0.0) {
                    double gc = 2.0 * b / ((0.001 + od2) * (1.0 + a * std::pow(od2, b)));
                    y[h][0] += alpha * clip4(gc * ox);
                    y[h][1] += alpha * clip4(gc * oy);
                } else {
                    y[h][0] += alpha * 4.0;
                    y[h][1] += alpha * 4.0;
                }
            }
            next_neg[e] += n_neg * eps_neg[e];
        }
    }
    return y;
}

inline Embedding umap_embed(const CityFIMatrix& matrix, const UmapParams& params) {
    Embedding e;
    e.city_names = matrix.city_names;
    e.coords = umap_coords(matrix.values, params);
    e.method = "umap";
    e.seed = params.seed;
    return e;
}

} // namespace citymine
