#include <array>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "citymine/embedding.hpp"
#include "citymine/rng.hpp"
#include "citymine/umap.hpp"

using namespace citymine;

namespace {

// 3 well-separated Gaussian blobs in `dims` dimensions.
std::vector<std::vector<double>> blobs(Rng& rng, int per_blob, int dims, double sigma,
                                       std::vector<int>* labels) {
    std::vector<std::vector<double>> rows;
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < per_blob; ++i) {
            std::vector<double> row(static_cast<std::size_t>(dims));
            for (int d = 0; d < dims; ++d)
                row[static_cast<std::size_t>(d)] = 10.0 * b + rng.normal(0.0, sigma);
            rows.push_back(std::move(row));
            if (labels) labels->push_back(b);
        }
    return rows;
}

double knn_purity(const std::vector<std::array<double, 2>>& pts, const std::vector<int>& labels,
                  int k) {
    double total = 0.0;
    std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> cand;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double dx = pts[i][0] - pts[j][0], dy = pts[i][1] - pts[j][1];
            cand.emplace_back(dx * dx + dy * dy, j);
        }
        std::sort(cand.begin(), cand.end());
        int same = 0;
        for (int q = 0; q < k; ++q)
            if (labels[cand[static_cast<std::size_t>(q)].second] == labels[i]) ++same;
        total += static_cast<double>(same) / static_cast<double>(k);
    }
    return total / static_cast<double>(n);
}

} // namespace

TEST_CASE("output kernel fit matches the reference curve at min_dist 0.1") {
    auto kernel = detail::umap::fit_kernel(0.1);
    // reference fit of 1/(1 + a·x^(2b)) to the same target curve
    const double ref_a = 1.5769434602697652;
    const double ref_b = 0.8950608778515733;
    CHECK(kernel.a == Catch::Approx(ref_a).margin(2e-3));
    CHECK(kernel.b == Catch::Approx(ref_b).margin(2e-3));
    double sse = 0.0;
    const int samples = 300;
    for (int i = 0; i < samples; ++i) {
        double x = 3.0 * static_cast<double>(i) / (samples - 1);
        double mine = 1.0 / (1.0 + kernel.a * std::pow(x, 2.0 * kernel.b));
        double ref = 1.0 / (1.0 + ref_a * std::pow(x, 2.0 * ref_b));
        sse += (mine - ref) * (mine - ref);
    }
    CHECK(std::sqrt(sse / samples) < 1e-3);
}

TEST_CASE("kernel fit responds to min_dist") {
    auto near = detail::umap::fit_kernel(0.01);
    auto far = detail::umap::fit_kernel(0.5);
    // larger min_dist flattens the head of the curve: smaller a
    CHECK(far.a < near.a);
    CHECK(near.a > 0.0);
    CHECK(near.b > 0.0);
}

TEST_CASE("umap is deterministic under a fixed seed") {
    Rng rng(404);
    std::vector<int> labels;
    auto rows = blobs(rng, 8, 4, 0.5, &labels);
    UmapParams p;
    p.n_neighbors = 6;
    p.epochs = 80;
    p.seed = 1234;
    auto c1 = umap_coords(rows, p);
    auto c2 = umap_coords(rows, p);
    REQUIRE(c1.size() == c2.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
        CHECK(c1[i][0] == c2[i][0]);
        CHECK(c1[i][1] == c2[i][1]);
    }
    p.seed = 99;
    auto c3 = umap_coords(rows, p);
    bool any_diff = false;
    for (std::size_t i = 0; i < c1.size(); ++i)
        if (c1[i][0] != c3[i][0] || c1[i][1] != c3[i][1]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("blobs stay pure in the 2-D layout") {
    Rng rng(777);
    std::vector<int> labels;
    auto rows = blobs(rng, 15, 6, 0.5, &labels);
    UmapParams p;
    p.n_neighbors = 10;
    p.epochs = 200;
    p.seed = 42;
    auto coords = umap_coords(rows, p);
    CHECK(knn_purity(coords, labels, 5) >= 0.9);
}

TEST_CASE("umap_embed fills metadata") {
    Rng rng(5);
    std::vector<int> labels;
    CityFIMatrix m;
    m.values = blobs(rng, 4, 3, 0.3, &labels);
    for (std::size_t i = 0; i < m.values.size(); ++i) m.city_names.push_back("c" + std::to_string(i));
    for (std::size_t j = 0; j < m.values[0].size(); ++j) m.fi_columns.push_back("f" + std::to_string(j));
    UmapParams p;
    p.n_neighbors = 4;
    p.epochs = 30;
    p.seed = 7;
    Embedding e = umap_embed(m, p);
    CHECK(e.method == "umap");
    REQUIRE(e.seed.has_value());
    CHECK(*e.seed == 7);
    CHECK(e.city_names == m.city_names);
    CHECK(e.coords.size() == m.values.size());
}

TEST_CASE("umap parameter validation") {
    std::vector<std::vector<double>> rows(10, std::vector<double>{0.0, 1.0});
    UmapParams p;
    p.n_neighbors = 10; // == rows
    CHECK_THROWS_AS(validate(p, rows.size()), ConfigError);
    p.n_neighbors = 1;
    CHECK_THROWS_AS(validate(p, rows.size()), ConfigError);
    p.n_neighbors = 5;
    p.epochs = 0;
    CHECK_THROWS_AS(validate(p, rows.size()), ConfigError);
    p.epochs = 10;
    p.min_dist = 0.0;
    CHECK_THROWS_AS(validate(p, rows.size()), ConfigError);
    p.min_dist = 0.1;
    p.learning_rate = 0.0;
    CHECK_THROWS_AS(validate(p, rows.size()), ConfigError);
    p.learning_rate = 1.0;
    CHECK_NOTHROW(validate(p, rows.size()));
}
