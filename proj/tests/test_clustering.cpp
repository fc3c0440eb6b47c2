#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "citymine/clustering.hpp"
#include "citymine/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace citymine;

namespace {

std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
    return labels;
}

const std::vector<Point2> kPairPoints = {{0, 0}, {1, 0}, {10, 0}, {11, 0}};
const std::vector<int> kPairLabels = {0, 0, 1, 1};

} // namespace

TEST_CASE("ward on the two-pair line") {
    Dendrogram d = ward_linkage(kPairPoints, default_labels(4));
    REQUIRE(d.merges.size() == 3);
    CHECK(d.merges[0].left == 0);
    CHECK(d.merges[0].right == 1);
    CHECK(d.merges[0].height == Catch::Approx(0.5).margin(1e-12));
    CHECK(d.merges[0].size == 2);
    CHECK(d.merges[1].left == 2);
    CHECK(d.merges[1].right == 3);
    CHECK(d.merges[1].height == Catch::Approx(0.5).margin(1e-12));
    CHECK(d.merges[2].left == 4);
    CHECK(d.merges[2].right == 5);
    // total ESS of all four points is 101; the last merge adds 101 - 0.5 - 0.5
    CHECK(d.merges[2].height == Catch::Approx(100.0).margin(1e-9));
    CHECK(d.merges[2].size == 4);
}

TEST_CASE("merge heights are monotone non-decreasing") {
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        std::vector<Point2> pts;
        for (int i = 0; i < 12; ++i) pts.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
        Dendrogram d = ward_linkage(pts, default_labels(pts.size()));
        for (std::size_t i = 1; i < d.merges.size(); ++i)
            CHECK(d.merges[i].height >= d.merges[i - 1].height - 1e-12);
    }
}

TEST_CASE("linkage matches the greedy ESS oracle") {
    Rng rng(41);
    for (int t = 0; t < 30; ++t) {
        std::size_t n = 2 + rng.bounded(7);
        std::vector<Point2> pts;
        for (std::size_t i = 0; i < n; ++i)
            pts.push_back({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)});
        Dendrogram got = ward_linkage(pts, default_labels(n));
        Dendrogram want = oracles::greedy_ward(pts, default_labels(pts.size()));
        REQUIRE(got.merges.size() == want.merges.size());
        for (std::size_t i = 0; i < got.merges.size(); ++i) {
            CHECK(got.merges[i].left == want.merges[i].left);
            CHECK(got.merges[i].right == want.merges[i].right);
            CHECK(got.merges[i].height == Catch::Approx(want.merges[i].height).margin(1e-9));
            CHECK(got.merges[i].size == want.merges[i].size);
        }
    }
}

TEST_CASE("cuts") {
    Dendrogram d = ward_linkage(kPairPoints, default_labels(4));
    SECTION("by distance") {
        ClusterAssignment a = cut_by_distance(d, 1.0);
        CHECK(a.k == 2);
        CHECK(a.labels == kPairLabels);
        REQUIRE(a.cut_distance.has_value());
        CHECK(*a.cut_distance == 1.0);
        CHECK(cut_by_distance(d, 200.0).k == 1);
        CHECK(cut_by_distance(d, 0.4).k == 4);
        CHECK(cut_by_distance(d, 0.5).k == 2); // cut is inclusive: merges at h ≤ d apply
        CHECK_THROWS_AS(cut_by_distance(d, -0.1), ConfigError);
    }
    SECTION("by k") {
        ClusterAssignment a = cut_by_k(d, 2);
        CHECK(a.labels == kPairLabels);
        REQUIRE(a.target_k.has_value());
        CHECK(*a.target_k == 2);
        CHECK(cut_by_k(d, 1).labels == std::vector<int>{0, 0, 0, 0});
        CHECK(cut_by_k(d, 4).labels == std::vector<int>{0, 1, 2, 3});
        CHECK_THROWS_AS(cut_by_k(d, 0), ConfigError);
        CHECK_THROWS_AS(cut_by_k(d, 5), ConfigError);
    }
    SECTION("labels are dense in first-appearance order") {
        // force a cut where the later-built cluster contains the first city
        std::vector<Point2> pts = {{10, 0}, {0, 0}, {0.4, 0}, {10.5, 0}};
        Dendrogram d2 = ward_linkage(pts, default_labels(4));
        ClusterAssignment a = cut_by_k(d2, 2);
        CHECK(a.labels == std::vector<int>{0, 1, 1, 0});
    }
}

TEST_CASE("validity indices on the two-pair fixture") {
    // oracle values for clusters {0,1} | {10,11} on a line:
    //   silhouette = 359/399 (inner points have b = 9.5, outer 10.5)
    //   CH = (100/1)/(1/2) = 200, DBI = (0.5+0.5)/10 = 0.1, WCSS = 0.5+0.5
    CHECK(silhouette(kPairPoints, kPairLabels) ==
          Catch::Approx(359.0 / 399.0).margin(1e-12));
    CHECK(calinski_harabasz(kPairPoints, kPairLabels) == Catch::Approx(200.0).margin(1e-9));
    CHECK(davies_bouldin(kPairPoints, kPairLabels) == Catch::Approx(0.1).margin(1e-12));
    CHECK(wcss(kPairPoints, kPairLabels) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("index edge cases") {
    std::vector<Point2> pts = {{0, 0}, {1, 0}, {10, 0}};
    SECTION("singleton cluster scores zero in the silhouette") {
        std::vector<int> labels = {0, 0, 1};
        // s(p0): a=1, b=10 -> 9/10; s(p1): a=1, b=9 -> 8/9; singleton -> 0
        CHECK(silhouette(pts, labels) ==
              Catch::Approx((9.0 / 10.0 + 8.0 / 9.0) / 3.0).margin(1e-12));
    }
    SECTION("zero within-cluster variance") {
        std::vector<Point2> dup = {{0, 0}, {0, 0}, {5, 5}, {5, 5}};
        std::vector<int> labels = {0, 0, 1, 1};
        CHECK(std::isinf(calinski_harabasz(dup, labels)));
        CHECK(wcss(dup, labels) == 0.0);
        CHECK(davies_bouldin(dup, labels) == 0.0);
        CHECK(silhouette(dup, labels) == 1.0);
    }
    SECTION("coincident centroids blow up DBI") {
        std::vector<Point2> x = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        std::vector<int> labels = {0, 0, 1, 1};
        CHECK(std::isinf(davies_bouldin(x, labels)));
    }
    SECTION("degenerate label vectors are rejected") {
        CHECK_THROWS_AS(silhouette(pts, std::vector<int>{0, 0, 0}), ConfigError);
        CHECK_THROWS_AS(davies_bouldin(pts, std::vector<int>{0, 0, 0}), ConfigError);
    }
}

TEST_CASE("k selection picks the obvious blob count") {
    std::vector<Point2> pts;
    for (auto [cx, cy] : {std::pair{0.0, 0.0}, {10.0, 10.0}, {20.0, 0.0}}) {
        pts.push_back({cx, cy});
        pts.push_back({cx + 0.1, cy});
        pts.push_back({cx, cy + 0.1});
    }
    KSelectionReport rep = select_k(pts, 2, 5);
    CHECK(rep.chosen_k == 3);
    REQUIRE(rep.rows.size() == 4);
    int chosen_count = 0;
    for (const auto& r : rep.rows) {
        if (r.chosen) {
            ++chosen_count;
            CHECK(r.k == 3);
        }
    }
    CHECK(chosen_count == 1);
    CHECK_FALSE(rep.note.empty());
    CHECK_THROWS_AS(select_k(pts, 2, 9), ConfigError);
    CHECK_THROWS_AS(select_k(pts, 1, 3), ConfigError);
}

TEST_CASE("kselection CSV") {
    std::vector<Point2> pts = {{0, 0}, {0.1, 0}, {10, 0}, {10.1, 0}, {20, 5}, {20.1, 5}};
    KSelectionReport rep = select_k(pts, 2, 4);
    std::string csv = kselection_to_csv(rep);
    CHECK(csv.rfind("k,silhouette,calinski_harabasz,davies_bouldin,wcss,chosen\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == rep.rows.size() + 1);
    CHECK(csv.find(",1\n") != std::string::npos);
}

TEST_CASE("dendrogram JSON round trip") {
    Dendrogram d = ward_linkage(kPairPoints, {"A", "B", "C", "D"});
    fixtures::TempDir tmp("citymine-dendro");
    write_dendrogram_json(d, tmp.path / "d.json");
    Dendrogram back = read_dendrogram_json(tmp.path / "d.json");
    CHECK(back.leaves == d.leaves);
    REQUIRE(back.merges.size() == d.merges.size());
    for (std::size_t i = 0; i < d.merges.size(); ++i) {
        CHECK(back.merges[i].left == d.merges[i].left);
        CHECK(back.merges[i].right == d.merges[i].right);
        CHECK(back.merges[i].height == d.merges[i].height);
        CHECK(back.merges[i].size == d.merges[i].size);
    }
    CHECK_THROWS_AS(read_dendrogram_json(tmp.path / "nope.json"), DataError);
}

TEST_CASE("assignment JSON round trip for both criteria") {
    Dendrogram d = ward_linkage(kPairPoints, {"A", "B", "C", "D"});
    fixtures::TempDir tmp("citymine-assign");
    SECTION("cut distance") {
        ClusterAssignment a = cut_by_distance(d, 1.5);
        write_assignment_json(a, tmp.path / "a.json");
        ClusterAssignment back = read_assignment_json(tmp.path / "a.json");
        CHECK(back.k == 2);
        REQUIRE(back.cut_distance.has_value());
        CHECK(*back.cut_distance == 1.5);
        CHECK_FALSE(back.target_k.has_value());
        CHECK(back.cities == std::vector<std::string>{"A", "B", "C", "D"});
        CHECK(back.labels == a.labels);
    }
    SECTION("target k") {
        ClusterAssignment a = cut_by_k(d, 4);
        write_assignment_json(a, tmp.path / "a.json");
        ClusterAssignment back = read_assignment_json(tmp.path / "a.json");
        CHECK(back.k == 4);
        REQUIRE(back.target_k.has_value());
        CHECK(*back.target_k == 4);
        CHECK_FALSE(back.cut_distance.has_value());
    }
}

TEST_CASE("leaf order walks the tree left-first") {
    Dendrogram d = ward_linkage(kPairPoints, {"A", "B", "C", "D"});
    // merges: (0,1)->4, (2,3)->5, (4,5)->6; DFS from 6: 0 1 2 3
    CHECK(dendrogram_leaf_order(d) == std::vector<int>{0, 1, 2, 3});
    std::vector<Point2> pts = {{10, 0}, {0, 0}, {0.4, 0}, {10.5, 0}};
    Dendrogram d2 = ward_linkage(pts, {"A", "B", "C", "D"});
    // merges: (1,2)->4, (0,3)->5, (4,5)->6; DFS: 1 2 0 3
    CHECK(dendrogram_leaf_order(d2) == std::vector<int>{1, 2, 0, 3});
}
