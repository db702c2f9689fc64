#include "tradewinds/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "tradewinds/csv.hpp"
#include "tradewinds/errors.hpp"
#include "tradewinds/geo.hpp"
#include "tradewinds/models.hpp"

namespace tradewinds::synth {

const char* to_string(ProfileShape shape) {
  switch (shape) {
    case ProfileShape::kUniform: return "uniform";
    case ProfileShape::kBimodalWeekday: return "bimodal-weekday";
    case ProfileShape::kPointMass: return "point-mass";
    case ProfileShape::kDirichlet: return "dirichlet";
  }
  return "unknown";
}

const char* to_string(NoiseKind noise) {
  return noise == NoiseKind::kPoisson ? "poisson" : "none";
}

std::optional<ProfileShape> parse_profile_shape(std::string_view name) {
  if (name == "uniform") return ProfileShape::kUniform;
  if (name == "bimodal-weekday" || name == "bimodal") return ProfileShape::kBimodalWeekday;
  if (name == "point-mass" || name == "pointmass") return ProfileShape::kPointMass;
  if (name == "dirichlet") return ProfileShape::kDirichlet;
  return std::nullopt;
}

std::optional<NoiseKind> parse_noise_kind(std::string_view name) {
  if (name == "none") return NoiseKind::kNone;
  if (name == "poisson") return NoiseKind::kPoisson;
  return std::nullopt;
}

namespace {

void validate_spec(const SynthSpec& spec) {
  if (spec.n_stores < 1 || spec.n_neighborhoods < 1)
    throw ConfigError("synth: store and neighborhood counts must be >= 1");
  if (!(spec.bbox.lat_min < spec.bbox.lat_max) ||
      !(spec.bbox.lon_min < spec.bbox.lon_max))
    throw ConfigError("synth: bounding box must have positive extent");
  if (spec.bbox.lat_min < -90.0 || spec.bbox.lat_max > 90.0 ||
      spec.bbox.lon_min < -180.0 || spec.bbox.lon_max > 180.0)
    throw ConfigError("synth: bounding box outside valid coordinates");
  if (!(spec.attractiveness_range.first > 0.0) ||
      !(spec.attractiveness_range.second >= spec.attractiveness_range.first))
    throw ConfigError("synth: attractiveness range must be positive and ordered");
  if (!(spec.visits_per_neighborhood > 0.0))
    throw ConfigError("synth: visits_per_neighborhood must be positive");
  if (spec.true_params.alpha < 0.0 || spec.true_params.beta < 0.0)
    throw ConfigError("synth: true parameters must be >= 0");
  if (spec.profile_shape == ProfileShape::kDirichlet && !(spec.dirichlet_kappa > 0.0))
    throw ConfigError("synth: dirichlet kappa must be positive");
}

std::string padded_id(const char* prefix, int index, int count) {
  std::size_t width = 1;
  for (int v = count - 1; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::vector<double> make_profile(ProfileShape shape, double kappa, int store_index,
                                 std::mt19937_64& rng) {
  std::vector<double> p(kHoursPerWeek, 0.0);
  switch (shape) {
    case ProfileShape::kUniform:
      std::fill(p.begin(), p.end(), 1.0 / kHoursPerWeek);
      return p;
    case ProfileShape::kPointMass: {
      // 37-hour stride keeps the hours distinct for small store counts
      const int hour = (store_index * 37 + static_cast<int>(rng() % 7)) % kHoursPerWeek;
      p[static_cast<std::size_t>(hour)] = 1.0;
      return p;
    }
    case ProfileShape::kBimodalWeekday: {
      // commute peaks Monday-Friday at 08:30 and 18:00, quiet weekend base
      for (int day = 0; day < 5; ++day) {
        for (int h = 0; h < 24; ++h) {
          const double x = h + 0.5;
          const double morning = std::exp(-0.5 * std::pow((x - 8.5) / 1.5, 2));
          const double evening = std::exp(-0.5 * std::pow((x - 18.0) / 1.5, 2));
          p[static_cast<std::size_t>(day * 24 + h)] = morning + evening;
        }
      }
      for (int h = 5 * 24; h < kHoursPerWeek; ++h)
        p[static_cast<std::size_t>(h)] = 0.05;
      break;
    }
    case ProfileShape::kDirichlet: {
      std::gamma_distribution<double> gamma(kappa, 1.0);
      for (auto& v : p) v = gamma(rng);
      break;
    }
  }
  double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total <= 0.0) return std::vector<double>(kHoursPerWeek, 1.0 / kHoursPerWeek);
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace

SynthResult generate(const SynthSpec& spec) {
  validate_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> lat(spec.bbox.lat_min, spec.bbox.lat_max);
  std::uniform_real_distribution<double> lon(spec.bbox.lon_min, spec.bbox.lon_max);
  std::uniform_real_distribution<double> attract(spec.attractiveness_range.first,
                                                 spec.attractiveness_range.second);
  std::uniform_real_distribution<double> pop(1000.0, 10000.0);

  SynthResult result;
  result.spec = spec;
  Scenario& s = result.scenario;

  s.stores.resize(static_cast<std::size_t>(spec.n_stores));
  for (int j = 0; j < spec.n_stores; ++j) {
    Store& st = s.stores[static_cast<std::size_t>(j)];
    st.id = padded_id("s", j, spec.n_stores);
    st.brand = spec.brand;
    st.location = {lat(rng), lon(rng)};
    st.attractiveness = attract(rng);
    st.hourly_visits.assign(kHoursPerWeek, 0.0);
  }
  s.neighborhoods.resize(static_cast<std::size_t>(spec.n_neighborhoods));
  for (int i = 0; i < spec.n_neighborhoods; ++i) {
    Neighborhood& nb = s.neighborhoods[static_cast<std::size_t>(i)];
    nb.id = padded_id("n", i, spec.n_neighborhoods);
    nb.centroid = {lat(rng), lon(rng)};
    nb.population = std::round(pop(rng));
  }

  std::vector<std::vector<double>> profiles;
  profiles.reserve(s.stores.size());
  for (int j = 0; j < spec.n_stores; ++j)
    profiles.push_back(make_profile(spec.profile_shape, spec.dirichlet_kappa, j, rng));

  const auto distances = geo::build_distance_matrix(s);
  const auto huff = models::predict_huff(s, distances, spec.true_params);

  std::vector<double> store_totals(s.stores.size(), 0.0);
  for (std::size_t i = 0; i < s.neighborhoods.size(); ++i) {
    for (std::size_t j = 0; j < s.stores.size(); ++j) {
      double expected = spec.visits_per_neighborhood * huff.at(i, j);
      double v = expected;
      if (spec.noise == NoiseKind::kPoisson) {
        std::poisson_distribution<long long> poisson(expected);
        v = expected > 0.0 ? static_cast<double>(poisson(rng)) : 0.0;
      }
      if (v > 0.0)
        s.visits.entries[{s.neighborhoods[i].id, s.stores[j].id}] = v;
      store_totals[j] += v;
    }
  }
  // hourly totals consistent with the profiles and the visit column sums
  for (std::size_t j = 0; j < s.stores.size(); ++j)
    for (int t = 0; t < kHoursPerWeek; ++t)
      s.stores[j].hourly_visits[static_cast<std::size_t>(t)] =
          store_totals[j] * profiles[j][static_cast<std::size_t>(t)];

  return result;
}

void write_dataset(const SynthResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const Scenario& s = result.scenario;

  {
    std::ofstream out(fs::path(out_dir) / "stores.csv");
    out << "store_id,brand,lat,lon,attractiveness\n";
    for (const auto& st : s.stores)
      out << csv::escape(st.id) << ',' << csv::escape(st.brand) << ','
          << csv::format_double(st.location.lat) << ','
          << csv::format_double(st.location.lon) << ','
          << csv::format_double(st.attractiveness) << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "hourly.csv");
    out << "store_id,hour,visits\n";
    for (const auto& st : s.stores)
      for (int t = 0; t < kHoursPerWeek; ++t)
        out << csv::escape(st.id) << ',' << t << ','
            << csv::format_double(st.hourly_visits[static_cast<std::size_t>(t)])
            << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "visits.csv");
    out << "cbg_id,store_id,visits\n";
    for (const auto& [key, count] : s.visits.entries)
      out << csv::escape(key.first) << ',' << csv::escape(key.second) << ','
          << csv::format_double(count) << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "neighborhoods.csv");
    out << "cbg_id,lat,lon,population\n";
    for (const auto& nb : s.neighborhoods)
      out << csv::escape(nb.id) << ',' << csv::format_double(nb.centroid.lat) << ','
          << csv::format_double(nb.centroid.lon) << ','
          << csv::format_double(nb.population) << '\n';
  }
  {
    nlohmann::ordered_json truth;
    truth["alpha"] = result.spec.true_params.alpha;
    truth["beta"] = result.spec.true_params.beta;
    truth["seed"] = result.spec.seed;
    truth["n_stores"] = result.spec.n_stores;
    truth["n_neighborhoods"] = result.spec.n_neighborhoods;
    truth["profile_shape"] = to_string(result.spec.profile_shape);
    truth["dirichlet_kappa"] = result.spec.dirichlet_kappa;
    truth["noise"] = to_string(result.spec.noise);
    truth["visits_per_neighborhood"] = result.spec.visits_per_neighborhood;
    truth["attractiveness_range"] = {result.spec.attractiveness_range.first,
                                     result.spec.attractiveness_range.second};
    truth["bbox"] = {{"lat_min", result.spec.bbox.lat_min},
                     {"lat_max", result.spec.bbox.lat_max},
                     {"lon_min", result.spec.bbox.lon_min},
                     {"lon_max", result.spec.bbox.lon_max}};
    truth["brand"] = result.spec.brand;
    std::ofstream out(fs::path(out_dir) / "truth.json");
    out << truth.dump(2) << '\n';
  }
}

}  // namespace tradewinds::synth
