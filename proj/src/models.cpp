#include "tradewinds/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tradewinds/errors.hpp"
#include "tradewinds/parallel.hpp"

namespace tradewinds::models {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kHuff: return "huff";
    case ModelKind::kMHuff: return "mhuff";
    case ModelKind::kTHuff: return "thuff";
    case ModelKind::kAHuff: return "ahuff";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  if (name == "huff") return ModelKind::kHuff;
  if (name == "mhuff") return ModelKind::kMHuff;
  if (name == "thuff") return ModelKind::kTHuff;
  if (name == "ahuff") return ModelKind::kAHuff;
  return std::nullopt;
}

std::vector<TemporalProfile> temporal_profiles(const Scenario& s) {
  std::vector<TemporalProfile> profiles(s.stores.size());
  for (std::size_t j = 0; j < s.stores.size(); ++j) {
    const auto& hours = s.stores[j].hourly_visits;
    auto& probs = profiles[j].probs;
    probs.assign(kHoursPerWeek, 0.0);
    double total = 0.0;
    for (double v : hours) total += v;
    if (total > 0.0) {
      for (int t = 0; t < kHoursPerWeek; ++t)
        probs[static_cast<std::size_t>(t)] = hours[static_cast<std::size_t>(t)] / total;
    } else {
      // no recorded visits: uniform profile keeps shapes stable
      std::fill(probs.begin(), probs.end(), 1.0 / kHoursPerWeek);
    }
  }
  return profiles;
}

namespace detail {

std::vector<double> log_attractiveness(const Scenario& s) {
  std::vector<double> ln_s(s.stores.size());
  for (std::size_t j = 0; j < s.stores.size(); ++j) {
    double a = s.stores[j].attractiveness;
    ln_s[j] = a > 0.0 ? std::log(a) : kNegInf;
  }
  return ln_s;
}

// Unnormalized row weights exp(a ln S_j - b ln D_ij - max), store order.
// The per-row max shift keeps exponent grids up to 5 from overflowing.
void huff_row_weights(std::span<const double> ln_s, std::span<const double> ln_d,
                      const ModelParams& p, std::size_t row,
                      std::vector<double>& weights) {
  const std::size_t n = ln_s.size();
  double max_lw = kNegInf;
  for (std::size_t j = 0; j < n; ++j) {
    // 0^0 = 1: an exponent of exactly zero removes its factor entirely
    double lw = 0.0;
    if (p.alpha != 0.0) lw += p.alpha * ln_s[j];
    if (p.beta != 0.0) lw -= p.beta * ln_d[row * n + j];
    weights[j] = lw;
    max_lw = std::max(max_lw, lw);
  }
  if (max_lw == kNegInf)
    throw AllZeroWeights("all store weights are zero for neighborhood row " +
                         std::to_string(row));
  for (std::size_t j = 0; j < n; ++j) weights[j] = std::exp(weights[j] - max_lw);
}

void huff_row(std::span<const double> ln_s, std::span<const double> ln_d,
              const ModelParams& p, std::size_t row, std::vector<double>& out) {
  huff_row_weights(ln_s, ln_d, p, row, out);
  double norm = 0.0;
  for (double w : out) norm += w;
  for (double& w : out) w /= norm;
}

std::vector<double> log_distances(const geo::DistanceMatrix& d) {
  std::vector<double> ln_d(d.values.size());
  for (std::size_t k = 0; k < d.values.size(); ++k) ln_d[k] = std::log(d.values[k]);
  return ln_d;
}

}  // namespace detail

PredictionTensor predict_huff(const Scenario& s, const geo::DistanceMatrix& d,
                              const ModelParams& p, int threads) {
  PredictionTensor out;
  out.kind = ModelKind::kHuff;
  out.n_neighborhoods = s.neighborhoods.size();
  out.n_stores = s.stores.size();
  out.n_hours = 1;
  out.params = p;
  out.values.assign(out.n_neighborhoods * out.n_stores, 0.0);

  const auto ln_s = detail::log_attractiveness(s);
  const auto ln_d = detail::log_distances(d);
  tradewinds::detail::parallel_for(out.n_neighborhoods, threads, [&](std::size_t i) {
    std::vector<double> row(out.n_stores);
    detail::huff_row(ln_s, ln_d, p, i, row);
    std::copy(row.begin(), row.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * out.n_stores));
  });
  return out;
}

PredictionTensor predict_thuff(const Scenario& s, const geo::DistanceMatrix& d,
                               const ModelParams& p, int threads) {
  PredictionTensor base = predict_huff(s, d, p, threads);
  const auto profiles = temporal_profiles(s);

  PredictionTensor out;
  out.kind = ModelKind::kTHuff;
  out.n_neighborhoods = base.n_neighborhoods;
  out.n_stores = base.n_stores;
  out.n_hours = kHoursPerWeek;
  out.params = p;
  out.values.assign(out.n_neighborhoods * out.n_stores * out.n_hours, 0.0);

  tradewinds::detail::parallel_for(out.n_neighborhoods, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < out.n_stores; ++j) {
      const double pij = base.at(i, j);
      const auto& probs = profiles[j].probs;
      double* slice = &out.values[(i * out.n_stores + j) * out.n_hours];
      for (int t = 0; t < kHoursPerWeek; ++t)
        slice[t] = pij * probs[static_cast<std::size_t>(t)];
    }
  });
  return out;
}

PredictionTensor predict_mhuff(const Scenario& s, const geo::DistanceMatrix& d,
                               const ModelParams& p, int threads) {
  PredictionTensor base = predict_huff(s, d, p, threads);

  PredictionTensor out;
  out.kind = ModelKind::kMHuff;
  out.n_neighborhoods = base.n_neighborhoods;
  out.n_stores = base.n_stores;
  out.n_hours = kHoursPerWeek;
  out.params = p;
  out.values.assign(out.n_neighborhoods * out.n_stores * out.n_hours, 0.0);

  tradewinds::detail::parallel_for(out.n_neighborhoods, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < out.n_stores; ++j) {
      const double even = base.at(i, j) / kHoursPerWeek;
      double* slice = &out.values[(i * out.n_stores + j) * out.n_hours];
      std::fill(slice, slice + kHoursPerWeek, even);
    }
  });
  return out;
}

PredictionTensor predict_ahuff(const Scenario& s, const geo::DistanceMatrix& d,
                               const ModelParams& p, int threads) {
  PredictionTensor out;
  out.kind = ModelKind::kAHuff;
  out.n_neighborhoods = s.neighborhoods.size();
  out.n_stores = s.stores.size();
  out.n_hours = kHoursPerWeek;
  out.params = p;
  out.values.assign(out.n_neighborhoods * out.n_stores * out.n_hours, 0.0);

  const auto ln_s = detail::log_attractiveness(s);
  const auto ln_d = detail::log_distances(d);
  const auto profiles = temporal_profiles(s);

  // Whether store j carries weight is independent of the neighborhood, so
  // hour activity is a per-hour property of the whole tensor.
  out.hour_active.assign(kHoursPerWeek, 0);
  for (int t = 0; t < kHoursPerWeek; ++t) {
    for (std::size_t j = 0; j < out.n_stores; ++j) {
      const bool weightless = p.alpha != 0.0 && !(s.stores[j].attractiveness > 0.0);
      if (!weightless && profiles[j].probs[static_cast<std::size_t>(t)] > 0.0) {
        out.hour_active[static_cast<std::size_t>(t)] = 1;
        break;
      }
    }
  }

  tradewinds::detail::parallel_for(out.n_neighborhoods, threads, [&](std::size_t i) {
    std::vector<double> w(out.n_stores);
    detail::huff_row_weights(ln_s, ln_d, p, i, w);
    for (int t = 0; t < kHoursPerWeek; ++t) {
      double denom = 0.0;
      for (std::size_t j = 0; j < out.n_stores; ++j)
        denom += w[j] * profiles[j].probs[static_cast<std::size_t>(t)];
      if (denom <= 0.0) continue;  // inactive hour: slice stays zero
      for (std::size_t j = 0; j < out.n_stores; ++j) {
        out.values[(i * out.n_stores + j) * out.n_hours + static_cast<std::size_t>(t)] =
            w[j] * profiles[j].probs[static_cast<std::size_t>(t)] / denom;
      }
    }
  });
  return out;
}

PredictionTensor predict(ModelKind kind, const Scenario& s,
                         const geo::DistanceMatrix& d, const ModelParams& p,
                         int threads) {
  switch (kind) {
    case ModelKind::kHuff: return predict_huff(s, d, p, threads);
    case ModelKind::kMHuff: return predict_mhuff(s, d, p, threads);
    case ModelKind::kTHuff: return predict_thuff(s, d, p, threads);
    case ModelKind::kAHuff: return predict_ahuff(s, d, p, threads);
  }
  throw Error("unknown model kind");
}

ObservedTensor observe(const Scenario& s, ModelKind kind) {
  ObservedTensor out;
  out.kind = kind;
  out.n_neighborhoods = s.neighborhoods.size();
  out.n_stores = s.stores.size();
  out.n_hours = is_dynamic(kind) ? kHoursPerWeek : 1;
  out.values.assign(out.n_neighborhoods * out.n_stores * out.n_hours, 0.0);
  out.row_mask.assign(out.n_neighborhoods, 0);

  const auto visits = dense_visits(s);
  bool any = false;
  std::vector<double> row_total(out.n_neighborhoods, 0.0);
  for (std::size_t i = 0; i < out.n_neighborhoods; ++i) {
    for (std::size_t j = 0; j < out.n_stores; ++j)
      row_total[i] += visits[i * out.n_stores + j];
    if (row_total[i] > 0.0) {
      out.row_mask[i] = 1;
      any = true;
    }
  }
  if (!any) throw NoObservations("visit matrix has no positive entries");

  const auto profiles =
      is_dynamic(kind) ? temporal_profiles(s) : std::vector<TemporalProfile>{};

  for (std::size_t i = 0; i < out.n_neighborhoods; ++i) {
    if (!out.row_mask[i]) continue;
    switch (kind) {
      case ModelKind::kHuff:
        for (std::size_t j = 0; j < out.n_stores; ++j)
          out.values[i * out.n_stores + j] = visits[i * out.n_stores + j] / row_total[i];
        break;
      case ModelKind::kTHuff:
      case ModelKind::kMHuff:
        for (std::size_t j = 0; j < out.n_stores; ++j) {
          const double share = visits[i * out.n_stores + j] / row_total[i];
          double* slice = &out.values[(i * out.n_stores + j) * out.n_hours];
          for (int t = 0; t < kHoursPerWeek; ++t)
            slice[t] = share * profiles[j].probs[static_cast<std::size_t>(t)];
        }
        break;
      case ModelKind::kAHuff:
        for (int t = 0; t < kHoursPerWeek; ++t) {
          double denom = 0.0;
          for (std::size_t j = 0; j < out.n_stores; ++j)
            denom += visits[i * out.n_stores + j] *
                     profiles[j].probs[static_cast<std::size_t>(t)];
          if (denom <= 0.0) continue;
          for (std::size_t j = 0; j < out.n_stores; ++j) {
            out.values[(i * out.n_stores + j) * out.n_hours + static_cast<std::size_t>(t)] =
                visits[i * out.n_stores + j] *
                profiles[j].probs[static_cast<std::size_t>(t)] / denom;
          }
        }
        break;
    }
  }
  return out;
}

MarketShareSummary market_share(const Scenario& s, const PredictionTensor& pred,
                                std::span<const double> weights) {
  if (weights.size() != pred.n_neighborhoods)
    throw ShapeMismatch("weights length " + std::to_string(weights.size()) +
                        " does not match " + std::to_string(pred.n_neighborhoods) +
                        " neighborhoods");
  if (s.stores.size() != pred.n_stores)
    throw ShapeMismatch("scenario stores do not match prediction tensor");

  MarketShareSummary out;
  out.kind = pred.kind;
  out.n_stores = pred.n_stores;
  out.n_hours = pred.n_hours;
  out.store_hour_shares.assign(pred.n_stores * pred.n_hours, 0.0);
  out.winner_store.assign(pred.n_neighborhoods, 0);
  out.winner_probability.assign(pred.n_neighborhoods, 0.0);

  double weight_total = 0.0;
  for (double w : weights) weight_total += w;

  for (std::size_t i = 0; i < pred.n_neighborhoods; ++i) {
    std::size_t best = 0;
    double best_marginal = -1.0;
    for (std::size_t j = 0; j < pred.n_stores; ++j) {
      double marginal = 0.0;
      for (std::size_t t = 0; t < pred.n_hours; ++t) {
        const double v = pred.at(i, j, t);
        marginal += v;
        if (weight_total > 0.0)
          out.store_hour_shares[j * pred.n_hours + t] += weights[i] * v / weight_total;
      }
      const bool wins = marginal > best_marginal ||
                        (marginal == best_marginal && s.stores[j].id < s.stores[best].id);
      if (j == 0 || wins) {
        best = j;
        best_marginal = marginal;
      }
    }
    out.winner_store[i] = best;
    out.winner_probability[i] = best_marginal;
  }
  return out;
}

ShareDifference share_difference(const PredictionTensor& pred,
                                 const ObservedTensor& obs, int hour) {
  if (pred.kind != obs.kind)
    throw KindMismatch(std::string("prediction kind ") + to_string(pred.kind) +
                       " vs observed kind " + to_string(obs.kind));
  if (pred.n_neighborhoods != obs.n_neighborhoods || pred.n_stores != obs.n_stores ||
      pred.n_hours != obs.n_hours)
    throw ShapeMismatch("prediction and observed tensors have different shapes");
  if (hour != kAllHours) {
    if (!is_dynamic(pred.kind))
      throw ShapeMismatch("hour slice requested for a static tensor");
    if (hour < 0 || hour >= kHoursPerWeek)
      throw ShapeMismatch("hour " + std::to_string(hour) + " outside [0, 167]");
  }

  ShareDifference out;
  out.kind = pred.kind;
  out.hour = hour;
  out.n_stores = pred.n_stores;

  double sum_abs = 0.0;
  out.min_diff = std::numeric_limits<double>::infinity();
  out.max_diff = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pred.n_neighborhoods; ++i) {
    if (!obs.row_mask[i]) continue;
    out.rows.push_back(i);
    for (std::size_t j = 0; j < pred.n_stores; ++j) {
      double p = 0.0, o = 0.0;
      if (hour == kAllHours) {
        for (std::size_t t = 0; t < pred.n_hours; ++t) {
          p += pred.at(i, j, t);
          o += obs.at(i, j, t);
        }
      } else {
        p = pred.at(i, j, static_cast<std::size_t>(hour));
        o = obs.at(i, j, static_cast<std::size_t>(hour));
      }
      const double diff = p - o;
      out.diffs.push_back(diff);
      sum_abs += std::abs(diff);
      out.min_diff = std::min(out.min_diff, diff);
      out.max_diff = std::max(out.max_diff, diff);
    }
  }
  if (out.diffs.empty()) {
    out.min_diff = out.max_diff = 0.0;
  } else {
    out.mean_abs_diff = sum_abs / static_cast<double>(out.diffs.size());
  }
  return out;
}

}  // namespace tradewinds::models
