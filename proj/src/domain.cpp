#include "tradewinds/domain.hpp"

#include <cmath>
#include <set>
#include <unordered_map>

#include "tradewinds/errors.hpp"

namespace tradewinds {

namespace {

bool finite(double v) { return std::isfinite(v); }

void check_point(const GeoPoint& p, const std::string& what,
                 std::vector<std::string>& out) {
  if (!finite(p.lat) || p.lat < -90.0 || p.lat > 90.0)
    out.push_back(what + ": lat " + std::to_string(p.lat) + " out of [-90, 90]");
  if (!finite(p.lon) || p.lon < -180.0 || p.lon > 180.0)
    out.push_back(what + ": lon " + std::to_string(p.lon) + " out of [-180, 180]");
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> v;

  if (s.stores.empty()) v.push_back("no stores");
  if (s.neighborhoods.empty()) v.push_back("no neighborhoods");
  if (!finite(s.distance_floor_km) || s.distance_floor_km <= 0.0)
    v.push_back("distance_floor_km must be positive and finite");

  std::set<std::string> store_ids;
  for (const auto& st : s.stores) {
    if (!store_ids.insert(st.id).second)
      v.push_back("duplicate store id " + st.id);
    check_point(st.location, "store " + st.id, v);
    if (!finite(st.attractiveness) || st.attractiveness < 0.0)
      v.push_back("store " + st.id + ": attractiveness must be finite and >= 0");
    if (st.hourly_visits.size() != static_cast<std::size_t>(kHoursPerWeek)) {
      v.push_back("store " + st.id + ": hourly_visits length " +
                  std::to_string(st.hourly_visits.size()) + " ≠ 168");
    } else {
      for (int t = 0; t < kHoursPerWeek; ++t) {
        double h = st.hourly_visits[static_cast<std::size_t>(t)];
        if (!finite(h) || h < 0.0) {
          v.push_back("store " + st.id + ": hourly_visits[" + std::to_string(t) +
                      "] must be finite and >= 0");
          break;
        }
      }
    }
  }

  std::set<std::string> hood_ids;
  for (const auto& nb : s.neighborhoods) {
    if (!hood_ids.insert(nb.id).second)
      v.push_back("duplicate neighborhood id " + nb.id);
    check_point(nb.centroid, "neighborhood " + nb.id, v);
    if (!finite(nb.population) || nb.population < 0.0)
      v.push_back("neighborhood " + nb.id + ": population must be finite and >= 0");
    if (nb.median_age && (!finite(*nb.median_age) || *nb.median_age < 0.0))
      v.push_back("neighborhood " + nb.id + ": median_age must be finite and >= 0");
    if (nb.median_income && (!finite(*nb.median_income) || *nb.median_income < 0.0))
      v.push_back("neighborhood " + nb.id + ": median_income must be finite and >= 0");
    if (!nb.race_counts.empty()) {
      bool any_positive = false;
      for (const auto& [label, count] : nb.race_counts) {
        if (!finite(count) || count < 0.0) {
          v.push_back("neighborhood " + nb.id + ": race count '" + label +
                      "' must be finite and >= 0");
        } else if (count > 0.0) {
          any_positive = true;
        }
      }
      if (!any_positive)
        v.push_back("neighborhood " + nb.id + ": race_counts present but all zero");
    }
  }

  for (const auto& [key, count] : s.visits.entries) {
    const auto& [hood_id, store_id] = key;
    if (!finite(count) || count < 0.0)
      v.push_back("visits (" + hood_id + ", " + store_id +
                  "): count must be finite and >= 0");
    if (!hood_ids.count(hood_id))
      v.push_back("visits (" + hood_id + ", " + store_id +
                  "): unknown neighborhood id " + hood_id);
    if (!store_ids.count(store_id))
      v.push_back("visits (" + hood_id + ", " + store_id + "): unknown store id " +
                  store_id);
  }

  return v;
}

std::vector<double> dense_visits(const Scenario& s) {
  std::unordered_map<std::string, std::size_t> hood_index, store_index;
  hood_index.reserve(s.neighborhoods.size());
  store_index.reserve(s.stores.size());
  for (std::size_t i = 0; i < s.neighborhoods.size(); ++i)
    hood_index.emplace(s.neighborhoods[i].id, i);
  for (std::size_t j = 0; j < s.stores.size(); ++j)
    store_index.emplace(s.stores[j].id, j);

  std::vector<double> dense(s.neighborhoods.size() * s.stores.size(), 0.0);
  for (const auto& [key, count] : s.visits.entries) {
    auto hi = hood_index.find(key.first);
    auto si = store_index.find(key.second);
    if (hi == hood_index.end())
      throw Error("visit entry references unknown neighborhood id " + key.first);
    if (si == store_index.end())
      throw Error("visit entry references unknown store id " + key.second);
    dense[hi->second * s.stores.size() + si->second] = count;
  }
  return dense;
}

}  // namespace tradewinds
