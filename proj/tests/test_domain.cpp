#include <doctest.h>

#include <algorithm>

#include "test_util.hpp"
#include "tradewinds/domain.hpp"

using namespace tradewinds;

namespace {

bool contains(const std::vector<std::string>& violations, const std::string& needle) {
  return std::any_of(violations.begin(), violations.end(), [&](const std::string& v) {
    return v.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("validate_scenario: empty scenario reports missing stores") {
  Scenario s;
  s.neighborhoods.push_back(twtest::make_hood("n0", 34.0, -118.0));
  const auto v = validate_scenario(s);
  CHECK(v == std::vector<std::string> {"no stores"});
}

TEST_CASE("validate_scenario: hourly length contract") {
  Scenario s;
  auto st = twtest::make_store("X", 34.0, -118.0, 1.0);
  st.hourly_visits.resize(167);
  s.stores.push_back(st);
  s.neighborhoods.push_back(twtest::make_hood("n0", 34.0, -118.0));
  const auto v = validate_scenario(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "store X: hourly_visits length 167 ≠ 168");
}

TEST_CASE("validate_scenario: well-formed scenario is clean") {
  Scenario s;
  s.stores.push_back(twtest::make_store("s0", 34.0, -118.0, 10.0));
  s.stores.push_back(twtest::make_store("s1", 34.1, -118.1, 20.0));
  s.neighborhoods.push_back(twtest::make_hood("n0", 34.0, -118.05));
  s.neighborhoods.push_back(twtest::make_hood("n1", 34.05, -118.0));
  s.neighborhoods.push_back(twtest::make_hood("n2", 34.1, -118.2));
  s.visits.entries[{"n0", "s0"}] = 5.0;
  s.visits.entries[{"n2", "s1"}] = 2.0;
  CHECK(validate_scenario(s).empty());
  // idempotent and side-effect free
  CHECK(validate_scenario(s).empty());
}

TEST_CASE("validate_scenario: flags bad values with the offending id") {
  Scenario s;
  s.stores.push_back(twtest::make_store("s0", 95.0, -118.0, -1.0));
  s.stores.push_back(twtest::make_store("s0", 34.0, -118.0, 1.0));
  auto hood = twtest::make_hood("n0", 34.0, -118.0, -5.0);
  hood.race_counts = {{"a", 0.0}, {"b", 0.0}};
  s.neighborhoods.push_back(hood);
  s.visits.entries[{"n0", "ghost"}] = 1.0;
  s.visits.entries[{"n9", "s0"}] = -2.0;

  const auto v = validate_scenario(s);
  CHECK(contains(v, "store s0: lat"));
  CHECK(contains(v, "attractiveness"));
  CHECK(contains(v, "duplicate store id s0"));
  CHECK(contains(v, "population"));
  CHECK(contains(v, "race_counts present but all zero"));
  CHECK(contains(v, "unknown store id ghost"));
  CHECK(contains(v, "unknown neighborhood id n9"));
  CHECK(contains(v, "count must be finite and >= 0"));
}

TEST_CASE("dense_visits: scenario order with zeros for absent pairs") {
  Scenario s = twtest::two_store_scenario();
  s.neighborhoods.push_back(twtest::make_hood("n1", 34.2, -118.2));
  const auto dense = dense_visits(s);
  REQUIRE(dense.size() == 4);
  CHECK(dense[0] == 3.0);
  CHECK(dense[1] == 1.0);
  CHECK(dense[2] == 0.0);
  CHECK(dense[3] == 0.0);
}
