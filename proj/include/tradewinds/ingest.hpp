#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tradewinds/domain.hpp"

namespace tradewinds::ingest {

struct IngestOptions {
  /// Drop visit rows with a count below this value (privacy-style
  /// censoring as in the source mobility data, which suppresses pairs seen
  /// by fewer than five devices). Disabled when unset; the conventional
  /// value is 5.
  std::optional<double> min_visit_threshold;
  /// When true, rows referencing unknown ids are dropped and counted
  /// instead of raising JoinError.
  bool drop_unresolved = false;
  /// Row cap per file for smoke tests; the TRADEWINDS_MAX_ROWS environment
  /// variable supplies a default when unset.
  std::optional<std::size_t> max_rows;
  double distance_floor_km = 0.1;
};

struct FileReport {
  std::size_t rows_read = 0;
  std::map<std::string, std::size_t> rows_dropped;  // reason -> count
};

struct IngestReport {
  std::map<std::string, FileReport> files;  // stores/hourly/visits/neighborhoods
  std::vector<std::string> warnings;
  Scenario scenario;
};

/// Loads and joins the four CSV inputs into a validated Scenario, sorted by
/// id so the result is independent of row order.
///
/// Schemas (header row required, '.' decimal separator):
///   stores.csv         store_id,brand,lat,lon[,attractiveness]
///   hourly.csv         store_id,hour,visits          (hour in 0..167)
///   visits.csv         cbg_id,store_id,visits
///   neighborhoods.csv  cbg_id,lat,lon,population[,median_age,median_income,race_*...]
///
/// A store with no hourly rows gets a zero profile; a missing attractiveness
/// value defaults to the store's summed hourly visits. Throws SchemaError
/// (bad columns, duplicate ids, empty store list), ParseError (bad values,
/// with line numbers), or JoinError (unknown ids, unless drop_unresolved).
IngestReport load_scenario(const std::string& stores_csv,
                           const std::string& hourly_csv,
                           const std::string& visits_csv,
                           const std::string& neighborhoods_csv,
                           const IngestOptions& options = {});

}  // namespace tradewinds::ingest
