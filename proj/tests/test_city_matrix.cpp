#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "citymine/city_matrix.hpp"
#include "support/fixtures.hpp"

using namespace citymine;

namespace {

FrequentItemset fi(std::vector<std::string> items, std::uint64_t sup, double rel) {
    return {std::move(items), sup, rel};
}

} // namespace

TEST_CASE("merge builds the union of FI columns") {
    std::map<std::string, std::vector<FrequentItemset>> results;
    results["BERN"] = {fi({"a"}, 4, 0.4), fi({"a", "b"}, 2, 0.2)};
    results["AARAU"] = {fi({"b"}, 3, 0.5), fi({"a"}, 3, 0.5)};
    results["CHUR"] = {fi({"c"}, 1, 0.25)};

    CityFIMatrix m = merge_city_fis(results);
    CHECK(m.city_names == std::vector<std::string>{"AARAU", "BERN", "CHUR"});
    CHECK(m.fi_columns == std::vector<std::string>{"a", "b", "c", "a b"});
    REQUIRE(m.rows() == 3);
    REQUIRE(m.cols() == 4);
    CHECK(m.values[0] == std::vector<double>{0.5, 0.5, 0.0, 0.0});
    CHECK(m.values[1] == std::vector<double>{0.4, 0.0, 0.0, 0.2});
    CHECK(m.values[2] == std::vector<double>{0.0, 0.0, 0.25, 0.0});
}

TEST_CASE("merge rejects duplicate keys within a city") {
    std::map<std::string, std::vector<FrequentItemset>> results;
    results["X"] = {fi({"a"}, 1, 0.1), fi({"a"}, 2, 0.2)};
    CHECK_THROWS_WITH(merge_city_fis(results),
                      Catch::Matchers::ContainsSubstring("duplicate FI key"));
    CHECK_THROWS_AS(merge_city_fis({}), DataError);
}

TEST_CASE("column order is by itemset size then lexicographic") {
    std::map<std::string, std::vector<FrequentItemset>> results;
    results["X"] = {fi({"b", "c"}, 1, 0.1), fi({"z"}, 1, 0.1), fi({"a", "b", "c"}, 1, 0.1),
                    fi({"a", "c"}, 1, 0.1), fi({"a"}, 1, 0.1)};
    CityFIMatrix m = merge_city_fis(results);
    CHECK(m.fi_columns == std::vector<std::string>{"a", "z", "a c", "b c", "a b c"});
}

TEST_CASE("column filter keeps columns any city clears") {
    std::map<std::string, std::vector<FrequentItemset>> results;
    results["A"] = {fi({"p"}, 1, 0.10), fi({"q"}, 1, 0.30)};
    results["B"] = {fi({"p"}, 1, 0.05), fi({"r"}, 1, 0.12)};
    CityFIMatrix m = merge_city_fis(results);
    CityFIMatrix f = filter_columns(m, 0.12);
    CHECK(f.fi_columns == std::vector<std::string>{"q", "r"});
    CHECK(f.values[0] == std::vector<double>{0.30, 0.0});
    CHECK(f.values[1] == std::vector<double>{0.0, 0.12});
    CHECK_THROWS_AS(filter_columns(m, -0.1), ConfigError);
}

TEST_CASE("matrix CSV format and round trip") {
    std::map<std::string, std::vector<FrequentItemset>> results;
    results["B TOWN"] = {fi({"a", "b"}, 2, 1.0 / 3.0)};
    results["A"] = {fi({"a"}, 1, 0.5)};
    CityFIMatrix m = merge_city_fis(results);
    std::string csv = matrix_to_csv(m);
    CHECK(csv ==
          "city,a,a b\n"
          "A,0.500000,0.000000\n"
          "B TOWN,0.000000,0.333333\n");

    fixtures::TempDir tmp("citymine-matrix");
    write_matrix_csv(m, tmp.path / "m.csv");
    CityFIMatrix back = read_matrix_csv(tmp.path / "m.csv");
    CHECK(back.city_names == m.city_names);
    CHECK(back.fi_columns == m.fi_columns);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            CHECK(back.values[r][c] == Catch::Approx(m.values[r][c]).margin(1e-6));
    // a second write of the parsed matrix is byte-identical
    CHECK(matrix_to_csv(back) == csv);

    std::ofstream bad(tmp.path / "bad.csv");
    bad << "nope,a\nX,1\n";
    bad.close();
    CHECK_THROWS_AS(read_matrix_csv(tmp.path / "bad.csv"), DataError);
}

TEST_CASE("quoted fields survive the CSV round trip") {
    std::map<std::string, std::vector<FrequentItemset>> results;
    results["City, with comma"] = {fi({"a"}, 1, 0.5)};
    CityFIMatrix m = merge_city_fis(results);
    fixtures::TempDir tmp("citymine-matrix-q");
    write_matrix_csv(m, tmp.path / "m.csv");
    CityFIMatrix back = read_matrix_csv(tmp.path / "m.csv");
    CHECK(back.city_names == std::vector<std::string>{"City, with comma"});
}
