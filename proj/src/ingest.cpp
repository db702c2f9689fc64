#include "tradewinds/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <unordered_map>

#include "tradewinds/csv.hpp"
#include "tradewinds/errors.hpp"

namespace tradewinds::ingest {

namespace {

constexpr const char* kPrivacyReason = "privacy_threshold";
constexpr const char* kUnresolvedReason = "unresolved_id";

std::optional<std::size_t> env_max_rows() {
  const char* raw = std::getenv("TRADEWINDS_MAX_ROWS");
  if (!raw) return std::nullopt;
  auto parsed = csv::parse_int(raw);
  if (!parsed || *parsed < 0)
    throw ConfigError("TRADEWINDS_MAX_ROWS must be a non-negative integer, got '" +
                      std::string(raw) + "'");
  return static_cast<std::size_t>(*parsed);
}

void require_columns(const csv::Table& t, const std::vector<std::string>& required,
                     const std::vector<std::string>& optional_exact,
                     const std::vector<std::string>& optional_prefixes) {
  for (const auto& name : required)
    if (!t.column(name))
      throw SchemaError(t.path + ": missing required column '" + name + "'");
  std::set<std::string> seen;
  for (const auto& name : t.header) {
    if (!seen.insert(name).second)
      throw SchemaError(t.path + ": duplicate column '" + name + "'");
    bool known = std::find(required.begin(), required.end(), name) != required.end() ||
                 std::find(optional_exact.begin(), optional_exact.end(), name) !=
                     optional_exact.end();
    for (const auto& prefix : optional_prefixes)
      known = known || name.rfind(prefix, 0) == 0;
    if (!known)
      throw SchemaError(t.path + ": unexpected column '" + name + "'");
  }
}

double parse_numeric(const csv::Table& t, std::size_t row, std::size_t col,
                     const char* what, bool require_non_negative = true) {
  const auto v = csv::parse_double(t.rows[row][col]);
  if (!v || !std::isfinite(*v))
    throw ParseError(t.path + " line " + std::to_string(t.row_lines[row]) +
                     ": cannot parse " + what + " '" + t.rows[row][col] + "'");
  if (require_non_negative && *v < 0.0)
    throw ParseError(t.path + " line " + std::to_string(t.row_lines[row]) + ": " +
                     what + " must be >= 0, got " + t.rows[row][col]);
  return *v;
}

}  // namespace

IngestReport load_scenario(const std::string& stores_csv,
                           const std::string& hourly_csv,
                           const std::string& visits_csv,
                           const std::string& neighborhoods_csv,
                           const IngestOptions& options) {
  IngestReport report;
  const auto max_rows = options.max_rows ? options.max_rows : env_max_rows();

  // stores
  csv::Table stores_t = csv::read_file(stores_csv, max_rows);
  require_columns(stores_t, {"store_id", "brand", "lat", "lon"}, {"attractiveness"}, {});
  const auto sc_id = *stores_t.column("store_id");
  const auto sc_brand = *stores_t.column("brand");
  const auto sc_lat = *stores_t.column("lat");
  const auto sc_lon = *stores_t.column("lon");
  const auto sc_attract = stores_t.column("attractiveness");

  std::vector<Store> stores;
  std::vector<bool> attract_given;
  std::unordered_map<std::string, std::size_t> store_index;
  for (std::size_t r = 0; r < stores_t.rows.size(); ++r) {
    Store st;
    st.id = stores_t.rows[r][sc_id];
    st.brand = stores_t.rows[r][sc_brand];
    if (st.id.empty())
      throw ParseError(stores_csv + " line " + std::to_string(stores_t.row_lines[r]) +
                       ": empty store_id");
    if (store_index.count(st.id))
      throw SchemaError(stores_csv + ": duplicate store id " + st.id);
    st.location.lat = parse_numeric(stores_t, r, sc_lat, "lat", false);
    st.location.lon = parse_numeric(stores_t, r, sc_lon, "lon", false);
    st.hourly_visits.assign(kHoursPerWeek, 0.0);
    bool given = false;
    if (sc_attract && !stores_t.rows[r][*sc_attract].empty()) {
      st.attractiveness = parse_numeric(stores_t, r, *sc_attract, "attractiveness");
      given = true;
    }
    store_index.emplace(st.id, stores.size());
    stores.push_back(std::move(st));
    attract_given.push_back(given);
  }
  report.files["stores"].rows_read = stores_t.rows.size();
  if (stores.empty()) throw SchemaError(stores_csv + ": no stores");

  // hourly profiles
  csv::Table hourly_t = csv::read_file(hourly_csv, max_rows);
  require_columns(hourly_t, {"store_id", "hour", "visits"}, {}, {});
  const auto hc_id = *hourly_t.column("store_id");
  const auto hc_hour = *hourly_t.column("hour");
  const auto hc_visits = *hourly_t.column("visits");
  auto& hourly_report = report.files["hourly"];
  hourly_report.rows_read = hourly_t.rows.size();
  std::set<std::pair<std::string, long long>> hourly_seen;
  for (std::size_t r = 0; r < hourly_t.rows.size(); ++r) {
    const std::string& id = hourly_t.rows[r][hc_id];
    auto it = store_index.find(id);
    if (it == store_index.end()) {
      if (options.drop_unresolved) {
        ++hourly_report.rows_dropped[kUnresolvedReason];
        continue;
      }
      throw JoinError(hourly_csv + " line " + std::to_string(hourly_t.row_lines[r]) +
                      ": unknown store id " + id);
    }
    const auto hour = csv::parse_int(hourly_t.rows[r][hc_hour]);
    if (!hour || *hour < 0 || *hour >= kHoursPerWeek)
      throw ParseError(hourly_csv + " line " + std::to_string(hourly_t.row_lines[r]) +
                       ": hour must be in 0..167, got '" + hourly_t.rows[r][hc_hour] +
                       "'");
    if (!hourly_seen.insert({id, *hour}).second)
      throw SchemaError(hourly_csv + ": duplicate hour " + std::to_string(*hour) +
                        " for store id " + id);
    stores[it->second].hourly_visits[static_cast<std::size_t>(*hour)] =
        parse_numeric(hourly_t, r, hc_visits, "visits");
  }
  for (std::size_t j = 0; j < stores.size(); ++j) {
    if (attract_given[j]) continue;
    double total = 0.0;
    for (double v : stores[j].hourly_visits) total += v;
    stores[j].attractiveness = total;  // S_j defaults to the visit total
  }

  // neighborhoods
  csv::Table hoods_t = csv::read_file(neighborhoods_csv, max_rows);
  require_columns(hoods_t, {"cbg_id", "lat", "lon", "population"},
                  {"median_age", "median_income"}, {"race_"});
  const auto nc_id = *hoods_t.column("cbg_id");
  const auto nc_lat = *hoods_t.column("lat");
  const auto nc_lon = *hoods_t.column("lon");
  const auto nc_pop = *hoods_t.column("population");
  const auto nc_age = hoods_t.column("median_age");
  const auto nc_income = hoods_t.column("median_income");
  std::vector<std::pair<std::string, std::size_t>> race_columns;
  for (std::size_t c = 0; c < hoods_t.header.size(); ++c)
    if (hoods_t.header[c].rfind("race_", 0) == 0)
      race_columns.emplace_back(hoods_t.header[c].substr(5), c);

  std::vector<Neighborhood> hoods;
  std::unordered_map<std::string, std::size_t> hood_index;
  for (std::size_t r = 0; r < hoods_t.rows.size(); ++r) {
    Neighborhood nb;
    nb.id = hoods_t.rows[r][nc_id];
    if (nb.id.empty())
      throw ParseError(neighborhoods_csv + " line " +
                       std::to_string(hoods_t.row_lines[r]) + ": empty cbg_id");
    if (hood_index.count(nb.id))
      throw SchemaError(neighborhoods_csv + ": duplicate cbg id " + nb.id);
    nb.centroid.lat = parse_numeric(hoods_t, r, nc_lat, "lat", false);
    nb.centroid.lon = parse_numeric(hoods_t, r, nc_lon, "lon", false);
    nb.population = parse_numeric(hoods_t, r, nc_pop, "population");
    if (nc_age && !hoods_t.rows[r][*nc_age].empty())
      nb.median_age = parse_numeric(hoods_t, r, *nc_age, "median_age");
    if (nc_income && !hoods_t.rows[r][*nc_income].empty())
      nb.median_income = parse_numeric(hoods_t, r, *nc_income, "median_income");
    for (const auto& [label, col] : race_columns)
      if (!hoods_t.rows[r][col].empty())
        nb.race_counts[label] = parse_numeric(hoods_t, r, col, "race count");
    hood_index.emplace(nb.id, hoods.size());
    hoods.push_back(std::move(nb));
  }
  report.files["neighborhoods"].rows_read = hoods_t.rows.size();
  if (hoods.empty()) throw SchemaError(neighborhoods_csv + ": no neighborhoods");

  // visit matrix
  csv::Table visits_t = csv::read_file(visits_csv, max_rows);
  require_columns(visits_t, {"cbg_id", "store_id", "visits"}, {}, {});
  const auto vc_hood = *visits_t.column("cbg_id");
  const auto vc_store = *visits_t.column("store_id");
  const auto vc_visits = *visits_t.column("visits");
  auto& visits_report = report.files["visits"];
  visits_report.rows_read = visits_t.rows.size();

  VisitMatrix visits;
  for (std::size_t r = 0; r < visits_t.rows.size(); ++r) {
    const std::string& hood_id = visits_t.rows[r][vc_hood];
    const std::string& store_id = visits_t.rows[r][vc_store];
    const bool hood_known = hood_index.count(hood_id) > 0;
    const bool store_known = store_index.count(store_id) > 0;
    if (!hood_known || !store_known) {
      if (options.drop_unresolved) {
        ++visits_report.rows_dropped[kUnresolvedReason];
        continue;
      }
      throw JoinError(visits_csv + " line " + std::to_string(visits_t.row_lines[r]) +
                      ": unknown " + (hood_known ? "store" : "cbg") + " id " +
                      (hood_known ? store_id : hood_id));
    }
    const double count = parse_numeric(visits_t, r, vc_visits, "visits");
    if (options.min_visit_threshold && count < *options.min_visit_threshold) {
      ++visits_report.rows_dropped[kPrivacyReason];
      continue;
    }
    auto key = std::make_pair(hood_id, store_id);
    if (visits.entries.count(key))
      throw SchemaError(visits_csv + ": duplicate visit pair (" + hood_id + ", " +
                        store_id + ")");
    visits.entries.emplace(std::move(key), count);
  }
  if (visits.entries.empty())
    report.warnings.push_back(visits_csv + ": no visit observations after filtering");

  std::sort(stores.begin(), stores.end(),
            [](const Store& a, const Store& b) { return a.id < b.id; });
  std::sort(hoods.begin(), hoods.end(),
            [](const Neighborhood& a, const Neighborhood& b) { return a.id < b.id; });

  report.scenario.stores = std::move(stores);
  report.scenario.neighborhoods = std::move(hoods);
  report.scenario.visits = std::move(visits);
  report.scenario.distance_floor_km = options.distance_floor_km;

  const auto violations = validate_scenario(report.scenario);
  if (!violations.empty()) {
    std::string msg = "loaded scenario fails validation:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw SchemaError(msg);
  }
  return report;
}

}  // namespace tradewinds::ingest
