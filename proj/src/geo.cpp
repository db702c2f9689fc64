#include "tradewinds/geo.hpp"

#include <algorithm>
#include <cmath>

#include "tradewinds/parallel.hpp"

namespace tradewinds::geo {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;

  const double sin_lat = std::sin(dlat / 2.0);
  const double sin_lon = std::sin(dlon / 2.0);
  const double h = sin_lat * sin_lat + std::cos(lat1) * std::cos(lat2) * sin_lon * sin_lon;
  // clamp guards rounding just above 1 for antipodal points
  const double root = std::sqrt(std::min(1.0, h));
  return 2.0 * kEarthRadiusKm * std::asin(root);
}

DistanceMatrix build_distance_matrix(const Scenario& s, int threads) {
  DistanceMatrix m;
  m.rows = s.neighborhoods.size();
  m.cols = s.stores.size();
  m.floor_km = s.distance_floor_km;
  m.values.assign(m.rows * m.cols, 0.0);

  detail::parallel_for(m.rows, threads, [&](std::size_t i) {
    const auto& hood = s.neighborhoods[i];
    for (std::size_t j = 0; j < m.cols; ++j) {
      double d = haversine_km(hood.centroid, s.stores[j].location);
      m.values[i * m.cols + j] = std::max(d, m.floor_km);
    }
  });
  return m;
}

}  // namespace tradewinds::geo
