#include "tradewinds/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tradewinds/errors.hpp"

namespace tradewinds::stats {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("pearson: length mismatch " + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()));
  if (x.size() < 2) throw Error("pearson: need at least 2 samples");

  const double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0) throw ZeroVariance("pearson: first vector is constant");
  if (syy <= 0.0) throw ZeroVariance("pearson: second vector is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double shannon_entropy(const std::map<std::string, double>& counts) {
  double total = 0.0;
  for (const auto& [label, c] : counts) {
    if (c < 0.0 || !std::isfinite(c))
      throw Error("shannon_entropy: count for '" + label + "' must be finite and >= 0");
    total += c;
  }
  if (total <= 0.0) throw EmptyDistribution("shannon_entropy: no positive counts");
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log(p);
  }
  return h;
}

std::vector<double> geometric_intervals(std::span<const double> values, int k) {
  if (k < 2) throw Error("geometric_intervals: need k >= 2");
  if (values.empty()) throw Error("geometric_intervals: empty input");

  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double vmin = *min_it, vmax = *max_it;
  if (!(vmax > vmin))
    throw DegenerateRange("geometric_intervals: all values equal " +
                          std::to_string(vmin));

  double shift = 0.0;
  if (vmin <= 0.0) {
    const double eps = (vmax - vmin) * 1e-6;
    shift = eps - vmin;
  }
  const double lo = vmin + shift;
  const double hi = vmax + shift;
  const double ratio = hi / lo;

  std::vector<double> breaks(static_cast<std::size_t>(k) + 1);
  breaks.front() = vmin;
  breaks.back() = vmax;
  for (int i = 1; i < k; ++i)
    breaks[static_cast<std::size_t>(i)] =
        lo * std::pow(ratio, static_cast<double>(i) / k) - shift;
  return breaks;
}

std::size_t interval_class(double v, std::span<const double> breaks) {
  if (breaks.size() < 2) throw Error("interval_class: need at least 2 breakpoints");
  const std::size_t n_classes = breaks.size() - 1;
  for (std::size_t c = 0; c + 1 < n_classes; ++c)
    if (v < breaks[c + 1]) return c;
  return n_classes - 1;
}

namespace {

struct WeightedSample {
  double value;
  double weight;
};

// Lower weighted median: smallest value with cumulative weight >= half.
double weighted_median(std::vector<WeightedSample>& samples) {
  std::sort(samples.begin(), samples.end(),
            [](const WeightedSample& a, const WeightedSample& b) {
              return a.value < b.value;
            });
  double total = 0.0;
  for (const auto& s : samples) total += s.weight;
  double cum = 0.0;
  for (const auto& s : samples) {
    cum += s.weight;
    if (cum >= total / 2.0) return s.value;
  }
  return samples.back().value;
}

}  // namespace

DecaySummary decay_analysis(const Scenario& s, const geo::DistanceMatrix& d,
                            int bins, double fit_min_km) {
  if (bins < 1) throw Error("decay_analysis: need at least 1 bin");
  const std::size_t n_stores = s.stores.size();
  const auto visits = dense_visits(s);

  std::vector<WeightedSample> all;
  std::vector<std::vector<WeightedSample>> per_store(n_stores);
  double total = 0.0;
  double d_max = 0.0;
  for (std::size_t i = 0; i < s.neighborhoods.size(); ++i) {
    for (std::size_t j = 0; j < n_stores; ++j) {
      const double v = visits[i * n_stores + j];
      if (v <= 0.0) continue;
      const double dist = d.at(i, j);
      all.push_back({dist, v});
      per_store[j].push_back({dist, v});
      total += v;
      d_max = std::max(d_max, dist);
    }
  }
  if (total <= 0.0) throw NoObservations("decay_analysis: no positive visit counts");

  DecaySummary out;
  out.total_visits = total;
  out.median_km = weighted_median(all);

  double median_sum = 0.0;
  std::size_t stores_with_visits = 0;
  for (std::size_t j = 0; j < n_stores; ++j) {
    if (per_store[j].empty()) continue;
    median_sum += weighted_median(per_store[j]);
    ++stores_with_visits;
  }
  out.mean_of_medians_km = median_sum / static_cast<double>(stores_with_visits);

  // weighted histogram over [0, d_max]; density integrates to one
  const double width = d_max / bins;
  std::vector<double> bin_weight(static_cast<std::size_t>(bins), 0.0);
  for (const auto& sample : all) {
    auto b = static_cast<std::size_t>(sample.value / width);
    if (b >= bin_weight.size()) b = bin_weight.size() - 1;
    bin_weight[b] += sample.weight;
  }
  out.pdf_bins.reserve(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    const double center = (b + 0.5) * width;
    const double density = bin_weight[static_cast<std::size_t>(b)] / (total * width);
    out.pdf_bins.emplace_back(center, density);
  }

  // ECDF over the sorted samples (all is sorted by the median pass above)
  double cum = 0.0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    cum += all[k].weight;
    const bool last_at_value = k + 1 == all.size() || all[k + 1].value > all[k].value;
    if (last_at_value) out.ecdf.emplace_back(all[k].value, cum / total);
  }
  if (!out.ecdf.empty()) out.ecdf.back().second = 1.0;

  // log-log tail fit over usable bins
  double sum_x = 0.0, sum_y = 0.0, sum_xx = 0.0, sum_xy = 0.0;
  std::size_t n_fit = 0;
  double fit_lo = std::numeric_limits<double>::infinity(), fit_hi = 0.0;
  for (const auto& [center, density] : out.pdf_bins) {
    if (center < fit_min_km || density <= 0.0) continue;
    const double lx = std::log(center);
    const double ly = std::log(density);
    sum_x += lx;
    sum_y += ly;
    sum_xx += lx * lx;
    sum_xy += lx * ly;
    ++n_fit;
    fit_lo = std::min(fit_lo, center);
    fit_hi = std::max(fit_hi, center);
  }
  if (n_fit >= 2) {
    const double nf = static_cast<double>(n_fit);
    const double ss_xx = sum_xx - sum_x * sum_x / nf;
    if (ss_xx > 0.0) {
      out.fit_ok = true;
      out.loglog_slope = (sum_xy - sum_x * sum_y / nf) / ss_xx;
      out.loglog_intercept = sum_y / nf - out.loglog_slope * sum_x / nf;
      out.fit_range_km = {fit_lo, fit_hi};
    }
  }
  return out;
}

namespace {

// Gauss-Jordan inverse with partial pivoting; k stays small (<= ~10).
std::vector<double> invert_spd(std::vector<double> a, std::size_t k) {
  std::vector<double> inv(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) inv[i * k + i] = 1.0;

  double scale = 0.0;
  for (std::size_t i = 0; i < k; ++i) scale = std::max(scale, std::abs(a[i * k + i]));
  if (scale <= 0.0) throw RankDeficient("mlr_fit: zero normal matrix");

  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[pivot * k + col])) pivot = r;
    if (std::abs(a[pivot * k + col]) < 1e-12 * scale)
      throw RankDeficient("mlr_fit: design matrix is rank deficient at column " +
                          std::to_string(col));
    if (pivot != col) {
      for (std::size_t c = 0; c < k; ++c) {
        std::swap(a[pivot * k + c], a[col * k + c]);
        std::swap(inv[pivot * k + c], inv[col * k + c]);
      }
    }
    const double p = a[col * k + col];
    for (std::size_t c = 0; c < k; ++c) {
      a[col * k + c] /= p;
      inv[col * k + c] /= p;
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = a[r * k + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < k; ++c) {
        a[r * k + c] -= f * a[col * k + c];
        inv[r * k + c] -= f * inv[col * k + c];
      }
    }
  }
  return inv;
}

}  // namespace

RegressionReport mlr_fit(const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& rows,
                         std::span<const double> response) {
  const std::size_t n = rows.size();
  const std::size_t k_vars = names.size();
  if (response.size() != n) throw Error("mlr_fit: response length mismatch");
  if (n <= k_vars + 1)
    throw InsufficientData("mlr_fit: " + std::to_string(n) +
                           " observations for " + std::to_string(k_vars) +
                           " variables (need n > variables + 1)");
  for (const auto& r : rows)
    if (r.size() != k_vars) throw Error("mlr_fit: ragged design row");

  const std::size_t k = k_vars + 1;  // intercept first
  auto x_at = [&](std::size_t i, std::size_t c) -> double {
    return c == 0 ? 1.0 : rows[i][c - 1];
  };

  std::vector<double> xtx(k * k, 0.0), xty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      const double xa = x_at(i, a);
      xty[a] += xa * response[i];
      for (std::size_t b = a; b < k; ++b) xtx[a * k + b] += xa * x_at(i, b);
    }
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < a; ++b) xtx[a * k + b] = xtx[b * k + a];

  const auto inv = invert_spd(xtx, k);
  std::vector<double> beta(k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) beta[a] += inv[a * k + b] * xty[b];

  double rss = 0.0, sst = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_y += response[i];
  mean_y /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (std::size_t a = 0; a < k; ++a) fit += beta[a] * x_at(i, a);
    const double r = response[i] - fit;
    rss += r * r;
    const double dy = response[i] - mean_y;
    sst += dy * dy;
  }
  if (sst <= 0.0) throw ZeroVariance("mlr_fit: response is constant");

  const double dof = static_cast<double>(n - k);  // n - k_vars - 1
  const double sigma2 = rss / dof;

  RegressionReport rep;
  rep.n_obs = n;
  rep.r_squared = std::clamp(1.0 - rss / sst, 0.0, 1.0);
  rep.variables.reserve(k);
  rep.variables.push_back("intercept");
  for (const auto& nm : names) rep.variables.push_back(nm);

  for (std::size_t a = 0; a < k; ++a) {
    const std::string& var = rep.variables[a];
    const double se = std::sqrt(std::max(0.0, sigma2 * inv[a * k + a]));
    rep.coefficients[var] = beta[a];
    rep.std_errors[var] = se;
    double t, p;
    if (se > 0.0) {
      t = beta[a] / se;
      // two-sided p via the incomplete-beta identity, stable for large |t|
      p = incomplete_beta_reg(dof / 2.0, 0.5, dof / (dof + t * t));
    } else {
      t = beta[a] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity() *
                                     (beta[a] > 0 ? 1.0 : -1.0);
      p = beta[a] == 0.0 ? 1.0 : 0.0;
    }
    rep.t_stats[var] = t;
    rep.p_values[var] = std::clamp(p, 0.0, 1.0);
  }
  return rep;
}

VisitDesign build_visit_design(const Scenario& s, const geo::DistanceMatrix& d) {
  VisitDesign design;
  design.names = {"total_visit_counts", "distance", "total_population",
                  "median_income", "median_age", "entropy"};

  const auto visits = dense_visits(s);
  const std::size_t n_stores = s.stores.size();
  for (std::size_t i = 0; i < s.neighborhoods.size(); ++i) {
    const auto& hood = s.neighborhoods[i];
    for (std::size_t j = 0; j < n_stores; ++j) {
      const double v = visits[i * n_stores + j];
      if (v <= 0.0) continue;
      ++design.n_pairs_positive;
      double race_total = 0.0;
      for (const auto& [label, c] : hood.race_counts) race_total += c;
      if (!hood.median_income || !hood.median_age || race_total <= 0.0) {
        ++design.n_dropped_missing;  // complete-case analysis
        continue;
      }
      design.rows.push_back({s.stores[j].attractiveness, d.at(i, j),
                             hood.population, *hood.median_income,
                             *hood.median_age, shannon_entropy(hood.race_counts)});
      design.response.push_back(v);
      design.pair_index.emplace_back(i, j);
    }
  }
  return design;
}

double incomplete_beta_reg(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw Error("incomplete_beta_reg: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  // continued fraction (Lentz), NR-style
  auto betacf = [](double aa, double bb, double xx) {
    constexpr double kFpMin = 1e-300;
    constexpr double kEps = 1e-15;
    constexpr int kMaxIter = 500;
    const double qab = aa + bb;
    const double qap = aa + 1.0;
    const double qam = aa - 1.0;
    double c = 1.0;
    double den = 1.0 - qab * xx / qap;
    if (std::abs(den) < kFpMin) den = kFpMin;
    den = 1.0 / den;
    double h = den;
    for (int m = 1; m <= kMaxIter; ++m) {
      const int m2 = 2 * m;
      double num = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
      den = 1.0 + num * den;
      if (std::abs(den) < kFpMin) den = kFpMin;
      c = 1.0 + num / c;
      if (std::abs(c) < kFpMin) c = kFpMin;
      den = 1.0 / den;
      h *= den * c;
      num = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
      den = 1.0 + num * den;
      if (std::abs(den) < kFpMin) den = kFpMin;
      c = 1.0 + num / c;
      if (std::abs(c) < kFpMin) c = kFpMin;
      den = 1.0 / den;
      const double del = den * c;
      h *= del;
      if (std::abs(del - 1.0) < kEps) return h;
    }
    throw Error("incomplete_beta_reg: continued fraction did not converge");
  };

  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (dof <= 0.0) throw Error("student_t_cdf: dof must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail_two_sided = incomplete_beta_reg(dof / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail_two_sided / 2.0 : tail_two_sided / 2.0;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

}  // namespace tradewinds::stats
