#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "tradewinds/calibrate.hpp"
#include "tradewinds/errors.hpp"
#include "tradewinds/ingest.hpp"
#include "tradewinds/synth.hpp"

using namespace tradewinds;
using models::ModelKind;

TEST_CASE("synth: generated scenarios validate and are seed-deterministic") {
  synth::SynthSpec spec;
  spec.n_stores = 3;
  spec.n_neighborhoods = 25;
  spec.seed = 404;
  const auto a = synth::generate(spec);
  CHECK(validate_scenario(a.scenario).empty());

  const auto b = synth::generate(spec);
  CHECK(a.scenario.stores.size() == b.scenario.stores.size());
  for (std::size_t j = 0; j < a.scenario.stores.size(); ++j) {
    CHECK(a.scenario.stores[j].attractiveness == b.scenario.stores[j].attractiveness);
    CHECK(a.scenario.stores[j].hourly_visits == b.scenario.stores[j].hourly_visits);
  }
  CHECK(a.scenario.visits.entries == b.scenario.visits.entries);

  spec.seed = 405;
  const auto c = synth::generate(spec);
  CHECK(a.scenario.stores[0].attractiveness != c.scenario.stores[0].attractiveness);
}

TEST_CASE("synth: noise-free data is exactly consistent at the true parameters") {
  synth::SynthSpec spec;
  spec.n_stores = 5;
  spec.n_neighborhoods = 40;
  spec.true_params = {0.6, 1.4};
  spec.seed = 1;
  const auto result = synth::generate(spec);
  const auto d = geo::build_distance_matrix(result.scenario);
  CHECK(calibrate::objective(result.scenario, d, ModelKind::kHuff, spec.true_params) >=
        0.999);
  CHECK(calibrate::objective(result.scenario, d, ModelKind::kTHuff, spec.true_params) >=
        0.999);
}

TEST_CASE("synth: point-mass profiles give one active hour per store") {
  synth::SynthSpec spec;
  spec.n_stores = 4;
  spec.n_neighborhoods = 10;
  spec.profile_shape = synth::ProfileShape::kPointMass;
  spec.seed = 2;
  const auto result = synth::generate(spec);
  const auto d = geo::build_distance_matrix(result.scenario);
  const auto thuff = models::predict_thuff(result.scenario, d, spec.true_params);
  for (std::size_t i = 0; i < thuff.n_neighborhoods; ++i) {
    std::size_t nonzero = 0;
    for (std::size_t j = 0; j < thuff.n_stores; ++j)
      for (std::size_t t = 0; t < thuff.n_hours; ++t)
        if (thuff.at(i, j, t) > 0.0) ++nonzero;
    CHECK(nonzero == static_cast<std::size_t>(spec.n_stores));
  }
}

TEST_CASE("synth: noise-free grid maximum sits at the grid point nearest truth") {
  synth::SynthSpec spec;
  spec.n_stores = 4;
  spec.n_neighborhoods = 80;
  spec.true_params = {0.8, 1.2};  // nearest default-grid cell is (1, 1)
  spec.seed = 7;
  const auto result = synth::generate(spec);
  const auto d = geo::build_distance_matrix(result.scenario);
  const auto grid = calibrate::default_grid();
  const auto g =
      calibrate::grid_evaluate(result.scenario, d, ModelKind::kTHuff, grid, grid);
  const auto [ai, bi] = g.argmax();
  CHECK(grid[ai] == 1.0);
  CHECK(grid[bi] == 1.0);
}

TEST_CASE("synth: written dataset round-trips through ingest unchanged") {
  synth::SynthSpec spec;
  spec.n_stores = 3;
  spec.n_neighborhoods = 15;
  spec.noise = synth::NoiseKind::kPoisson;
  spec.visits_per_neighborhood = 500.0;
  spec.seed = 33;
  const auto result = synth::generate(spec);

  twtest::TempDir dir;
  synth::write_dataset(result, dir.path().string());
  const auto report = ingest::load_scenario(
      dir.file("stores.csv"), dir.file("hourly.csv"), dir.file("visits.csv"),
      dir.file("neighborhoods.csv"));
  const Scenario& loaded = report.scenario;
  const Scenario& original = result.scenario;  // already sorted by construction

  REQUIRE(loaded.stores.size() == original.stores.size());
  for (std::size_t j = 0; j < loaded.stores.size(); ++j) {
    CHECK(loaded.stores[j].id == original.stores[j].id);
    CHECK(loaded.stores[j].brand == original.stores[j].brand);
    CHECK(loaded.stores[j].location.lat == original.stores[j].location.lat);
    CHECK(loaded.stores[j].location.lon == original.stores[j].location.lon);
    CHECK(loaded.stores[j].attractiveness == original.stores[j].attractiveness);
    CHECK(loaded.stores[j].hourly_visits == original.stores[j].hourly_visits);
  }
  REQUIRE(loaded.neighborhoods.size() == original.neighborhoods.size());
  for (std::size_t i = 0; i < loaded.neighborhoods.size(); ++i) {
    CHECK(loaded.neighborhoods[i].id == original.neighborhoods[i].id);
    CHECK(loaded.neighborhoods[i].centroid.lat == original.neighborhoods[i].centroid.lat);
    CHECK(loaded.neighborhoods[i].centroid.lon == original.neighborhoods[i].centroid.lon);
    CHECK(loaded.neighborhoods[i].population == original.neighborhoods[i].population);
    CHECK_FALSE(loaded.neighborhoods[i].median_age.has_value());
  }
  CHECK(loaded.visits.entries == original.visits.entries);
  CHECK(loaded.distance_floor_km == original.distance_floor_km);
}

TEST_CASE("synth: invalid specs are rejected") {
  synth::SynthSpec spec;
  spec.n_stores = 0;
  CHECK_THROWS_AS(synth::generate(spec), ConfigError);
  spec = {};
  spec.attractiveness_range = {0.0, 10.0};
  CHECK_THROWS_AS(synth::generate(spec), ConfigError);
  spec = {};
  spec.bbox.lat_min = 50.0;
  spec.bbox.lat_max = 40.0;
  CHECK_THROWS_AS(synth::generate(spec), ConfigError);
}
