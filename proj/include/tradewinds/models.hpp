#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tradewinds/domain.hpp"
#include "tradewinds/geo.hpp"

namespace tradewinds::models {

enum class ModelKind {
  kHuff,   // static, one probability per (neighborhood, store)
  kMHuff,  // static probability spread evenly over the 168 weekly hours
  kTHuff,  // static probability scaled by each store's hourly profile
  kAHuff,  // attractiveness x hourly weight renormalized within each hour
};

const char* to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);
inline bool is_dynamic(ModelKind kind) { return kind != ModelKind::kHuff; }

/// Per-store distribution of visits over the 168 weekly hours. Sums to one;
/// a store with no recorded visits gets the uniform profile so tensor shapes
/// stay stable.
struct TemporalProfile {
  std::vector<double> probs;  // 168 entries in [0, 1]
};

std::vector<TemporalProfile> temporal_profiles(const Scenario& s);

/// Predicted visit probabilities. Static kind: n_hours == 1 and values holds
/// the |N| x |S| matrix P_ij. Dynamic kinds: n_hours == 168 and values holds
/// P_ijt laid out as ((i * n_stores) + j) * n_hours + t.
struct PredictionTensor {
  ModelKind kind = ModelKind::kHuff;
  std::size_t n_neighborhoods = 0;
  std::size_t n_stores = 0;
  std::size_t n_hours = 1;
  ModelParams params;
  std::vector<double> values;
  /// A-Huff only: hour_active[t] is false when no store carries weight at
  /// hour t; that hour's slices are all zero.
  std::vector<std::uint8_t> hour_active;

  double at(std::size_t i, std::size_t j, std::size_t t = 0) const {
    return values[(i * n_stores + j) * n_hours + t];
  }
};

/// Observed counterpart of a PredictionTensor, derived from the visit matrix
/// (and, for dynamic kinds, the temporal profiles). row_mask[i] is true for
/// neighborhoods with at least one observed visit; rows outside the mask are
/// zero-filled and excluded from comparisons.
struct ObservedTensor {
  ModelKind kind = ModelKind::kHuff;
  std::size_t n_neighborhoods = 0;
  std::size_t n_stores = 0;
  std::size_t n_hours = 1;
  std::vector<double> values;
  std::vector<std::uint8_t> row_mask;

  double at(std::size_t i, std::size_t j, std::size_t t = 0) const {
    return values[(i * n_stores + j) * n_hours + t];
  }
};

/// Original Huff probabilities P_ij = (S_j^a / D_ij^b) / sum_j. Weights are
/// evaluated as exp(a ln S_j - b ln D_ij) after a per-row max shift so the
/// ratio stays finite for exponents up to the grid-exploration range. The
/// 0^0 = 1 convention keeps the boundary a = 0 or b = 0 total.
/// Throws AllZeroWeights when every weight in some row underflows to zero.
PredictionTensor predict_huff(const Scenario& s, const geo::DistanceMatrix& d,
                              const ModelParams& p, int threads = 1);

/// T-Huff: P_ijt = P_ij * P_jt.
PredictionTensor predict_thuff(const Scenario& s, const geo::DistanceMatrix& d,
                               const ModelParams& p, int threads = 1);

/// A-Huff: P_ijt = (S_j^a / D_ij^b) P_jt / sum_j (S_j^a / D_ij^b) P_jt.
PredictionTensor predict_ahuff(const Scenario& s, const geo::DistanceMatrix& d,
                               const ModelParams& p, int threads = 1);

/// M-Huff baseline: P_ijt = P_ij / 168 for every hour.
PredictionTensor predict_mhuff(const Scenario& s, const geo::DistanceMatrix& d,
                               const ModelParams& p, int threads = 1);

PredictionTensor predict(ModelKind kind, const Scenario& s,
                         const geo::DistanceMatrix& d, const ModelParams& p,
                         int threads = 1);

/// Observed probabilities of the given kind:
///   Huff            P'_ij  = V_ij / sum_j V_ij
///   T-Huff, M-Huff  P'_ijt = (V_ij / sum_j V_ij) * P_jt
///   A-Huff          P'_ijt = V_ij P_jt / sum_j V_ij P_jt   (per hour)
/// Throws NoObservations when no neighborhood has any visits.
ObservedTensor observe(const Scenario& s, ModelKind kind);

/// Aggregated market-share view of a prediction tensor.
struct MarketShareSummary {
  ModelKind kind = ModelKind::kHuff;
  std::size_t n_stores = 0;
  std::size_t n_hours = 1;
  /// Weight-averaged probability per (store, hour), laid out j * n_hours + t.
  std::vector<double> store_hour_shares;
  /// Winning store index per neighborhood (argmax of the hour-summed
  /// probability; ties go to the lexicographically smallest store id).
  std::vector<std::size_t> winner_store;
  /// Hour-summed probability of the winning store per neighborhood.
  std::vector<double> winner_probability;
};

/// weights has one entry per neighborhood (population or visit totals).
MarketShareSummary market_share(const Scenario& s, const PredictionTensor& pred,
                                std::span<const double> weights);

inline constexpr int kAllHours = -1;

/// Signed prediction-minus-observation differences over the observed support
/// mask. hour == kAllHours compares hour-summed probabilities for dynamic
/// kinds; a concrete hour compares that slice.
struct ShareDifference {
  ModelKind kind = ModelKind::kHuff;
  int hour = kAllHours;
  std::size_t n_stores = 0;
  std::vector<std::size_t> rows;  // neighborhood indices in the support mask
  std::vector<double> diffs;      // rows.size() x n_stores, row-major
  double min_diff = 0.0;
  double max_diff = 0.0;
  double mean_abs_diff = 0.0;
};

/// Throws KindMismatch when kinds differ, ShapeMismatch on inconsistent
/// dimensions or an hour index outside the tensor.
ShareDifference share_difference(const PredictionTensor& pred,
                                 const ObservedTensor& obs, int hour = kAllHours);

namespace detail {

// Log-space Huff row machinery, shared with the calibration objective.
std::vector<double> log_attractiveness(const Scenario& s);
std::vector<double> log_distances(const geo::DistanceMatrix& d);

/// Fills weights with exp(a ln S_j - b ln D_ij - rowmax), unnormalized.
/// Throws AllZeroWeights when the whole row underflows.
void huff_row_weights(std::span<const double> ln_s, std::span<const double> ln_d,
                      const ModelParams& p, std::size_t row,
                      std::vector<double>& weights);

/// Normalized Huff probabilities for one neighborhood row.
void huff_row(std::span<const double> ln_s, std::span<const double> ln_d,
              const ModelParams& p, std::size_t row, std::vector<double>& out);

}  // namespace detail

}  // namespace tradewinds::models
