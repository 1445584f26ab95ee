#include <doctest.h>

#include <stdexcept>

#include "cellrom/table.hpp"

using namespace cellrom;

TEST_CASE("1-D lookup reproduces nodes and hand-computed midpoints") {
    Table1D t({0.0, 1.0, 3.0}, {10.0, 20.0, 40.0});
    CHECK(t(0.0) == 10.0);
    CHECK(t(1.0) == 20.0);
    CHECK(t(3.0) == 40.0);
    // 0.5 between (0,10) and (1,20); 2.0 between (1,20) and (3,40)
    CHECK(t(0.5) == doctest::Approx(15.0).epsilon(1e-14));
    CHECK(t(2.0) == doctest::Approx(30.0).epsilon(1e-14));
}

TEST_CASE("1-D lookup clamps at the end nodes") {
    Table1D t({0.0, 1.0}, {5.0, 7.0});
    CHECK(t(-10.0) == 5.0);
    CHECK(t(10.0) == 7.0);
    Table1D single({2.0}, {42.0});
    CHECK(single(-1.0) == 42.0);
    CHECK(single(99.0) == 42.0);
}

TEST_CASE("1-D table rejects malformed inputs") {
    CHECK_THROWS_AS(Table1D({1.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Table1D({1.0, 0.5}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Table1D({0.0, 1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Table1D({}, {}), std::invalid_argument);
}

TEST_CASE("nondecreasing flag") {
    CHECK(Table1D({0.0, 1.0, 2.0}, {1.0, 1.0, 3.0}).nondecreasing());
    CHECK_FALSE(Table1D({0.0, 1.0, 2.0}, {1.0, 0.5, 3.0}).nondecreasing());
}

TEST_CASE("bilinear lookup matches the closed form") {
    // f(x, y) = 2x + y is reproduced exactly by bilinear interpolation
    Table2D t({0.0, 1.0}, {0.0, 2.0}, {0.0, 2.0, 2.0, 4.0});
    CHECK(t(0.0, 0.0) == 0.0);
    CHECK(t(1.0, 2.0) == 4.0);
    CHECK(t(0.5, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(t(0.25, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    // clamped corners
    CHECK(t(-1.0, -1.0) == 0.0);
    CHECK(t(5.0, 5.0) == 4.0);
}

TEST_CASE("triple construction requires a complete rectangular cover") {
    std::vector<std::array<double, 3>> ok{
        {0.0, 0.0, 1.0}, {0.0, 1.0, 2.0}, {1.0, 0.0, 3.0}, {1.0, 1.0, 4.0}};
    Table2D t = Table2D::from_triples(ok);
    CHECK(t(1.0, 1.0) == 4.0);
    CHECK(t(0.0, 0.5) == doctest::Approx(1.5).epsilon(1e-14));

    std::vector<std::array<double, 3>> missing{
        {0.0, 0.0, 1.0}, {0.0, 1.0, 2.0}, {1.0, 0.0, 3.0}};
    CHECK_THROWS_AS(Table2D::from_triples(missing), std::invalid_argument);

    std::vector<std::array<double, 3>> duplicated = ok;
    duplicated.push_back({0.0, 0.0, 9.0});
    CHECK_THROWS_AS(Table2D::from_triples(duplicated), std::invalid_argument);
}

TEST_CASE("bracket index selects the enclosing interval") {
    std::vector<double> nodes{0.0, 1.0, 2.0, 5.0};
    CHECK(bracket_index(nodes, -1.0) == 0);
    CHECK(bracket_index(nodes, 0.0) == 0);
    CHECK(bracket_index(nodes, 0.9) == 0);
    CHECK(bracket_index(nodes, 1.0) == 1);
    CHECK(bracket_index(nodes, 4.9) == 2);
    CHECK(bracket_index(nodes, 5.0) == 2);
    CHECK(bracket_index(nodes, 99.0) == 2);
}
