#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tradewinds {

/// Hours in one week; hour index 0 is Monday 00:00, 167 is Sunday 23:00.
inline constexpr int kHoursPerWeek = 168;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
};

/// A point of interest competing for visits.
struct Store {
  std::string id;
  std::string brand;
  GeoPoint location;
  double attractiveness = 0.0;        // S_j; total visit count unless overridden
  std::vector<double> hourly_visits;  // V_jt; exactly 168 non-negative entries
};

/// A customer-origin zone (census-block-group-like) with optional
/// demographic attributes used by the regression pipeline.
struct Neighborhood {
  std::string id;
  GeoPoint centroid;
  double population = 0.0;
  std::optional<double> median_age;
  std::optional<double> median_income;
  std::map<std::string, double> race_counts;  // category label -> count
};

/// Observed pairwise visit counts V_ij, keyed by (neighborhood id, store id).
/// Absent keys mean zero visits.
struct VisitMatrix {
  std::map<std::pair<std::string, std::string>, double> entries;

  double get(const std::string& neighborhood_id, const std::string& store_id) const {
    auto it = entries.find({neighborhood_id, store_id});
    return it == entries.end() ? 0.0 : it->second;
  }
};

/// Exponent pair of a Huff-family model. Calibration restricts both to
/// [0, 2]; grid exploration may use larger values.
struct ModelParams {
  double alpha = 1.0;  // attractiveness exponent
  double beta = 1.0;   // distance-decay exponent
};

/// One brand-city dataset: the competing stores, the origin zones, and the
/// observed visit flows between them. Treated as immutable after
/// construction; all library operations take it by const reference and are
/// safe to run concurrently on a shared instance.
struct Scenario {
  std::vector<Store> stores;
  std::vector<Neighborhood> neighborhoods;
  VisitMatrix visits;
  double distance_floor_km = 0.1;  // clamp for coincident points
};

/// Checks every structural invariant and returns one human-readable
/// description per violation (empty means valid). Never throws; violations
/// are data, not errors.
std::vector<std::string> validate_scenario(const Scenario& s);

/// Dense copy of the visit matrix in scenario order (rows = neighborhoods,
/// cols = stores). Entries not present in the sparse map are zero.
/// Throws Error if a key references an unknown id.
std::vector<double> dense_visits(const Scenario& s);

}  // namespace tradewinds
