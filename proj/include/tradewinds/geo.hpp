#pragma once

#include <cstddef>
#include <vector>

#include "tradewinds/domain.hpp"

namespace tradewinds::geo {

/// IUGG mean Earth radius. Fixed, not configurable, so golden outputs stay
/// reproducible.
inline constexpr double kEarthRadiusKm = 6371.0088;

/// Great-circle distance between two points in km. Symmetric, non-negative,
/// zero only for identical coordinates.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

/// Pairwise neighborhood-to-store distances in km, clamped below by
/// floor_km. Rows follow Scenario neighborhood order, columns store order.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double floor_km = 0.1;
  std::vector<double> values;  // row-major

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

/// Builds the full distance matrix for a scenario. Deterministic for a given
/// input order regardless of thread count (rows are independent).
DistanceMatrix build_distance_matrix(const Scenario& s, int threads = 1);

}  // namespace tradewinds::geo
