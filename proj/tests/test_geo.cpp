#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "tradewinds/geo.hpp"

using namespace tradewinds;
using twtest::law_of_cosines_km;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("haversine: identical points give zero") {
  CHECK(geo::haversine_km({0.0, 0.0}, {0.0, 0.0}) == 0.0);
  CHECK(geo::haversine_km({34.05, -118.25}, {34.05, -118.25}) == 0.0);
}

TEST_CASE("haversine: quarter equator and one-degree arc") {
  // analytic: pi R / 2 and pi R / 180 with R = 6371.0088
  const double quarter = kPi * geo::kEarthRadiusKm / 2.0;
  const double one_degree = kPi * geo::kEarthRadiusKm / 180.0;
  CHECK(std::abs(geo::haversine_km({0, 0}, {0, 90}) - quarter) < 1e-6);
  CHECK(std::abs(geo::haversine_km({0, 0}, {0, 1}) - one_degree) < 1e-9);
  // law-of-cosines oracle agrees
  CHECK(std::abs(law_of_cosines_km({0, 0}, {0, 90}) - quarter) < 1e-6);
}

TEST_CASE("haversine: symmetry on random pairs") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 180.0);
  for (int k = 0; k < 200; ++k) {
    const GeoPoint a {lat(rng), lon(rng)};
    const GeoPoint b {lat(rng), lon(rng)};
    CHECK(geo::haversine_km(a, b) == geo::haversine_km(b, a));
    CHECK(geo::haversine_km(a, b) >= 0.0);
  }
}

TEST_CASE("haversine: matches law-of-cosines oracle away from degeneracies") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-179.0, 179.0);
  for (int k = 0; k < 200; ++k) {
    const GeoPoint a {lat(rng), lon(rng)};
    const GeoPoint b {lat(rng), lon(rng)};
    const double d = geo::haversine_km(a, b);
    if (d < 1.0) continue;  // law of cosines loses precision near zero
    CHECK(std::abs(d - law_of_cosines_km(a, b)) < 1e-6);
  }
}

TEST_CASE("haversine: triangle inequality on random triples") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lat(-85.0, 85.0), lon(-180.0, 180.0);
  for (int k = 0; k < 200; ++k) {
    const GeoPoint a {lat(rng), lon(rng)};
    const GeoPoint b {lat(rng), lon(rng)};
    const GeoPoint c {lat(rng), lon(rng)};
    CHECK(geo::haversine_km(a, c) <=
          geo::haversine_km(a, b) + geo::haversine_km(b, c) + 1e-6);
  }
}

TEST_CASE("haversine: additive along the equator") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lon(0.0, 60.0);
  for (int k = 0; k < 100; ++k) {
    double l1 = lon(rng), l2 = lon(rng), l3 = lon(rng);
    if (l1 > l2) std::swap(l1, l2);
    if (l2 > l3) std::swap(l2, l3);
    if (l1 > l2) std::swap(l1, l2);
    const double d13 = geo::haversine_km({0, l1}, {0, l3});
    const double d12 = geo::haversine_km({0, l1}, {0, l2});
    const double d23 = geo::haversine_km({0, l2}, {0, l3});
    CHECK(std::abs(d13 - (d12 + d23)) < 1e-6);
  }
}

TEST_CASE("distance matrix: floor clamps coincident points") {
  Scenario s;
  s.stores.push_back(twtest::make_store("s0", 34.0, -118.0, 1.0));
  s.neighborhoods.push_back(twtest::make_hood("n0", 34.0, -118.0));
  const auto d = geo::build_distance_matrix(s);
  CHECK(d.rows == 1);
  CHECK(d.cols == 1);
  CHECK(d.at(0, 0) == 0.1);
}

TEST_CASE("distance matrix: equatorial arcs and determinism across threads") {
  Scenario s;
  s.stores.push_back(twtest::make_store("s0", 0.0, 0.0, 1.0));
  s.stores.push_back(twtest::make_store("s1", 0.0, 2.0, 1.0));
  s.neighborhoods.push_back(twtest::make_hood("n0", 0.0, 1.0));
  s.neighborhoods.push_back(twtest::make_hood("n1", 0.0, 3.5));
  const double one_degree = kPi * geo::kEarthRadiusKm / 180.0;

  const auto d = geo::build_distance_matrix(s);
  CHECK(std::abs(d.at(0, 0) - one_degree) < 1e-9);
  CHECK(std::abs(d.at(0, 1) - one_degree) < 1e-9);
  CHECK(std::abs(d.at(1, 0) - 3.5 * one_degree) < 1e-8);
  CHECK(std::abs(d.at(1, 1) - 1.5 * one_degree) < 1e-8);

  const auto d4 = geo::build_distance_matrix(s, 4);
  CHECK(d4.values == d.values);
}

TEST_CASE("distance matrix: produced even with empty visits") {
  Scenario s;
  s.stores.push_back(twtest::make_store("s0", 34.0, -118.0, 1.0));
  s.neighborhoods.push_back(twtest::make_hood("n0", 34.1, -118.1));
  const auto d = geo::build_distance_matrix(s);
  CHECK(d.values.size() == 1);
  CHECK(d.at(0, 0) > 0.1);
}
