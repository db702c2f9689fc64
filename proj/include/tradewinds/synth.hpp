#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "tradewinds/domain.hpp"

namespace tradewinds::synth {

enum class ProfileShape {
  kUniform,
  kBimodalWeekday,  // weekday commute peaks, quiet weekends
  kPointMass,       // one distinct hour per store
  kDirichlet,       // heterogeneous spiky profiles, concentration kappa
};

enum class NoiseKind { kNone, kPoisson };

const char* to_string(ProfileShape shape);
const char* to_string(NoiseKind noise);
std::optional<ProfileShape> parse_profile_shape(std::string_view name);
std::optional<NoiseKind> parse_noise_kind(std::string_view name);

struct BoundingBox {
  double lat_min = 33.90;
  double lat_max = 34.30;
  double lon_min = -118.50;
  double lon_max = -118.00;
};

struct SynthSpec {
  int n_stores = 5;
  int n_neighborhoods = 200;
  ModelParams true_params {0.8, 1.2};
  BoundingBox bbox;
  std::pair<double, double> attractiveness_range {100.0, 10000.0};
  ProfileShape profile_shape = ProfileShape::kDirichlet;
  double dirichlet_kappa = 0.5;
  double visits_per_neighborhood = 1000.0;
  NoiseKind noise = NoiseKind::kNone;
  std::uint64_t seed = 0;
  std::string brand = "synthetic";
};

struct SynthResult {
  Scenario scenario;
  SynthSpec spec;  // the ground truth record, echoed to truth.json
};

/// Draws store and neighborhood positions uniformly in the bounding box,
/// attractiveness uniformly in its range, and hourly profiles per shape,
/// then sets the pairwise visits to visits_per_neighborhood times the exact
/// Huff probability at true_params (Poisson-sampled around that mean when
/// noise is kPoisson). Store hourly totals are the profile times the store's
/// visit column sum, so every derived quantity is consistent with the
/// generating parameters. Deterministic for a given seed.
SynthResult generate(const SynthSpec& spec);

/// Writes stores.csv, hourly.csv, visits.csv, neighborhoods.csv, and
/// truth.json into out_dir (created when missing).
void write_dataset(const SynthResult& result, const std::string& out_dir);

}  // namespace tradewinds::synth
