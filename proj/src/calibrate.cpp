#include "tradewinds/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "tradewinds/errors.hpp"

namespace tradewinds::calibrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Moments {
  double n = 0.0;
  double sx = 0.0, sxx = 0.0;
  double sy = 0.0, syy = 0.0;
  double sxy = 0.0;
  double xmin = kInf, xmax = -kInf;
  double ymin = kInf, ymax = -kInf;
};

// Correlation from raw moments; -1 sentinel when either side is constant.
double finalize(const Moments& m, ObjectiveDiagnostics* diag) {
  ObjectiveDiagnostics local;
  ObjectiveDiagnostics& d = diag ? *diag : local;
  d = ObjectiveDiagnostics{};
  if (m.xmin == m.xmax) {
    d.zero_variance_pred = true;
    d.sentinel = true;
    return -1.0;
  }
  if (m.ymin == m.ymax) {
    d.zero_variance_obs = true;
    d.sentinel = true;
    return -1.0;
  }
  const double vx = m.sxx - m.sx * m.sx / m.n;
  const double vy = m.syy - m.sy * m.sy / m.n;
  const double cov = m.sxy - m.sx * m.sy / m.n;
  if (!(vx > 0.0)) {
    d.zero_variance_pred = true;
    d.sentinel = true;
    return -1.0;
  }
  if (!(vy > 0.0)) {
    d.zero_variance_obs = true;
    d.sentinel = true;
    return -1.0;
  }
  const double r = cov / std::sqrt(vx) / std::sqrt(vy);
  if (!std::isfinite(r)) {
    d.sentinel = true;
    return -1.0;
  }
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace

ObjectiveEvaluator::ObjectiveEvaluator(const Scenario& s,
                                       const geo::DistanceMatrix& d,
                                       models::ModelKind kind)
    : kind_(kind), n_stores_(s.stores.size()) {
  const auto visits = dense_visits(s);
  const std::size_t n_all = s.neighborhoods.size();

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n_all; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n_stores_; ++j) total += visits[i * n_stores_ + j];
    if (total > 0.0) rows.push_back(i);
  }
  if (rows.empty())
    throw NoObservations("objective: no neighborhood has any observed visits");
  n_rows_ = rows.size();

  ln_attract_ = models::detail::log_attractiveness(s);
  ln_dist_.resize(n_rows_ * n_stores_);
  obs_.resize(n_rows_ * n_stores_);
  visits_.resize(n_rows_ * n_stores_);
  for (std::size_t mi = 0; mi < n_rows_; ++mi) {
    const std::size_t i = rows[mi];
    double total = 0.0;
    for (std::size_t j = 0; j < n_stores_; ++j) total += visits[i * n_stores_ + j];
    for (std::size_t j = 0; j < n_stores_; ++j) {
      const double v = visits[i * n_stores_ + j];
      ln_dist_[mi * n_stores_ + j] = std::log(d.at(i, j));
      visits_[mi * n_stores_ + j] = v;
      obs_[mi * n_stores_ + j] = v / total;
    }
  }

  if (kind_ == models::ModelKind::kHuff) {
    obs_min_ = kInf;
    obs_max_ = -kInf;
    for (double b : obs_) {
      obs_sum_ += b;
      obs_sumsq_ += b * b;
      obs_min_ = std::min(obs_min_, b);
      obs_max_ = std::max(obs_max_, b);
    }
    return;
  }

  const auto profiles = models::temporal_profiles(s);
  prof_.resize(n_stores_ * kHoursPerWeek);
  prof_sum_.assign(n_stores_, 0.0);
  prof_sumsq_.assign(n_stores_, 0.0);
  prof_min_.assign(n_stores_, kInf);
  prof_max_.assign(n_stores_, -kInf);
  for (std::size_t j = 0; j < n_stores_; ++j) {
    for (int t = 0; t < kHoursPerWeek; ++t) {
      const double p = profiles[j].probs[static_cast<std::size_t>(t)];
      prof_[j * kHoursPerWeek + static_cast<std::size_t>(t)] = p;
      prof_sum_[j] += p;
      prof_sumsq_[j] += p * p;
      prof_min_[j] = std::min(prof_min_[j], p);
      prof_max_[j] = std::max(prof_max_[j], p);
    }
  }

  if (kind_ == models::ModelKind::kTHuff || kind_ == models::ModelKind::kMHuff) {
    // observed side is b_ij * p_jt for both kinds
    obs_min_ = kInf;
    obs_max_ = -kInf;
    for (std::size_t mi = 0; mi < n_rows_; ++mi) {
      for (std::size_t j = 0; j < n_stores_; ++j) {
        const double b = obs_[mi * n_stores_ + j];
        obs_sum_ += b * prof_sum_[j];
        obs_sumsq_ += b * b * prof_sumsq_[j];
        obs_min_ = std::min(obs_min_, b * prof_min_[j]);
        obs_max_ = std::max(obs_max_, b * prof_max_[j]);
      }
    }
    return;
  }

  // A-Huff: the observed tensor is parameter independent; materialize it.
  ahuff_obs_.assign(n_rows_ * n_stores_ * kHoursPerWeek, 0.0);
  for (std::size_t mi = 0; mi < n_rows_; ++mi) {
    for (int t = 0; t < kHoursPerWeek; ++t) {
      double denom = 0.0;
      for (std::size_t j = 0; j < n_stores_; ++j)
        denom += visits_[mi * n_stores_ + j] *
                 prof_[j * kHoursPerWeek + static_cast<std::size_t>(t)];
      if (denom <= 0.0) continue;
      for (std::size_t j = 0; j < n_stores_; ++j)
        ahuff_obs_[(mi * n_stores_ + j) * kHoursPerWeek + static_cast<std::size_t>(t)] =
            visits_[mi * n_stores_ + j] *
            prof_[j * kHoursPerWeek + static_cast<std::size_t>(t)] / denom;
    }
  }
  obs_min_ = kInf;
  obs_max_ = -kInf;
  for (double y : ahuff_obs_) {
    obs_sum_ += y;
    obs_sumsq_ += y * y;
    obs_min_ = std::min(obs_min_, y);
    obs_max_ = std::max(obs_max_, y);
  }
}

double ObjectiveEvaluator::eval_huff(const ModelParams& p,
                                     ObjectiveDiagnostics* diag) const {
  Moments m;
  m.n = static_cast<double>(n_rows_ * n_stores_);
  m.sy = obs_sum_;
  m.syy = obs_sumsq_;
  m.ymin = obs_min_;
  m.ymax = obs_max_;

  std::vector<double> row(n_stores_);
  for (std::size_t mi = 0; mi < n_rows_; ++mi) {
    models::detail::huff_row(ln_attract_, ln_dist_, p, mi, row);
    for (std::size_t j = 0; j < n_stores_; ++j) {
      const double x = row[j];
      const double y = obs_[mi * n_stores_ + j];
      m.sx += x;
      m.sxx += x * x;
      m.sxy += x * y;
      m.xmin = std::min(m.xmin, x);
      m.xmax = std::max(m.xmax, x);
    }
  }
  return finalize(m, diag);
}

// T-Huff flattens to pairs (P_ij p_jt, b_ij p_jt); every Pearson moment
// reduces to per-store profile sums, so the 168-hour axis never needs an
// explicit loop.
double ObjectiveEvaluator::eval_thuff(const ModelParams& p,
                                      ObjectiveDiagnostics* diag) const {
  Moments m;
  m.n = static_cast<double>(n_rows_ * n_stores_ * kHoursPerWeek);
  m.sy = obs_sum_;
  m.syy = obs_sumsq_;
  m.ymin = obs_min_;
  m.ymax = obs_max_;

  std::vector<double> row(n_stores_);
  std::vector<double> amin(n_stores_, kInf), amax(n_stores_, -kInf);
  for (std::size_t mi = 0; mi < n_rows_; ++mi) {
    models::detail::huff_row(ln_attract_, ln_dist_, p, mi, row);
    for (std::size_t j = 0; j < n_stores_; ++j) {
      const double a = row[j];
      const double b = obs_[mi * n_stores_ + j];
      m.sx += a * prof_sum_[j];
      m.sxx += a * a * prof_sumsq_[j];
      m.sxy += a * b * prof_sumsq_[j];
      amin[j] = std::min(amin[j], a);
      amax[j] = std::max(amax[j], a);
    }
  }
  for (std::size_t j = 0; j < n_stores_; ++j) {
    m.xmin = std::min(m.xmin, amin[j] * prof_min_[j]);
    m.xmax = std::max(m.xmax, amax[j] * prof_max_[j]);
  }
  return finalize(m, diag);
}

double ObjectiveEvaluator::eval_mhuff(const ModelParams& p,
                                      ObjectiveDiagnostics* diag) const {
  Moments m;
  m.n = static_cast<double>(n_rows_ * n_stores_ * kHoursPerWeek);
  m.sy = obs_sum_;
  m.syy = obs_sumsq_;
  m.ymin = obs_min_;
  m.ymax = obs_max_;

  const double even = 1.0 / kHoursPerWeek;
  std::vector<double> row(n_stores_);
  for (std::size_t mi = 0; mi < n_rows_; ++mi) {
    models::detail::huff_row(ln_attract_, ln_dist_, p, mi, row);
    for (std::size_t j = 0; j < n_stores_; ++j) {
      const double a = row[j];
      const double b = obs_[mi * n_stores_ + j];
      m.sx += a;                            // 168 copies of a/168
      m.sxx += a * a * even;                // 168 copies of (a/168)^2
      m.sxy += a * even * b * prof_sum_[j]; // sum_t (a/168)(b p_jt)
      m.xmin = std::min(m.xmin, a * even);
      m.xmax = std::max(m.xmax, a * even);
    }
  }
  return finalize(m, diag);
}

double ObjectiveEvaluator::eval_ahuff(const ModelParams& p,
                                      ObjectiveDiagnostics* diag) const {
  Moments m;
  m.n = static_cast<double>(n_rows_ * n_stores_ * kHoursPerWeek);
  m.sy = obs_sum_;
  m.syy = obs_sumsq_;
  m.ymin = obs_min_;
  m.ymax = obs_max_;

  std::vector<double> w(n_stores_);
  for (std::size_t mi = 0; mi < n_rows_; ++mi) {
    models::detail::huff_row_weights(ln_attract_, ln_dist_, p, mi, w);
    for (int t = 0; t < kHoursPerWeek; ++t) {
      double denom = 0.0;
      for (std::size_t j = 0; j < n_stores_; ++j)
        denom += w[j] * prof_[j * kHoursPerWeek + static_cast<std::size_t>(t)];
      for (std::size_t j = 0; j < n_stores_; ++j) {
        const double x =
            denom > 0.0
                ? w[j] * prof_[j * kHoursPerWeek + static_cast<std::size_t>(t)] / denom
                : 0.0;
        const double y =
            ahuff_obs_[(mi * n_stores_ + j) * kHoursPerWeek + static_cast<std::size_t>(t)];
        m.sx += x;
        m.sxx += x * x;
        m.sxy += x * y;
        m.xmin = std::min(m.xmin, x);
        m.xmax = std::max(m.xmax, x);
      }
    }
  }
  return finalize(m, diag);
}

double ObjectiveEvaluator::operator()(const ModelParams& p,
                                      ObjectiveDiagnostics* diag) const {
  switch (kind_) {
    case models::ModelKind::kHuff: return eval_huff(p, diag);
    case models::ModelKind::kTHuff: return eval_thuff(p, diag);
    case models::ModelKind::kMHuff: return eval_mhuff(p, diag);
    case models::ModelKind::kAHuff: return eval_ahuff(p, diag);
  }
  throw Error("unknown model kind");
}

double objective(const Scenario& s, const geo::DistanceMatrix& d,
                 models::ModelKind kind, const ModelParams& p,
                 ObjectiveDiagnostics* diag) {
  return ObjectiveEvaluator(s, d, kind)(p, diag);
}

std::vector<double> default_grid() { return {0.1, 0.5, 1.0, 2.0, 5.0}; }

double GridResult::max_value() const {
  double best = -kInf;
  for (double v : values) best = std::max(best, v);
  return best;
}

std::pair<std::size_t, std::size_t> GridResult::argmax() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;
  return {best / betas.size(), best % betas.size()};
}

GridResult grid_evaluate(const Scenario& s, const geo::DistanceMatrix& d,
                         models::ModelKind kind, std::span<const double> alphas,
                         std::span<const double> betas) {
  if (alphas.empty() || betas.empty())
    throw Error("grid_evaluate: empty parameter grid");
  GridResult grid;
  grid.alphas.assign(alphas.begin(), alphas.end());
  grid.betas.assign(betas.begin(), betas.end());
  grid.values.reserve(alphas.size() * betas.size());
  grid.sentinel.reserve(alphas.size() * betas.size());

  const ObjectiveEvaluator eval(s, d, kind);
  for (double a : alphas) {
    for (double b : betas) {
      ObjectiveDiagnostics diag;
      grid.values.push_back(eval({a, b}, &diag));
      grid.sentinel.push_back(diag.sentinel ? 1 : 0);
    }
  }
  return grid;
}

void validate_config(const PsoConfig& cfg) {
  if (cfg.particles < 1) throw ConfigError("particles must be >= 1");
  if (cfg.restarts < 1) throw ConfigError("restarts must be >= 1");
  if (cfg.iterations < 1) throw ConfigError("iterations must be >= 1");
  for (int dim = 0; dim < 2; ++dim) {
    const auto d = static_cast<std::size_t>(dim);
    if (!std::isfinite(cfg.bounds_low[d]) || !std::isfinite(cfg.bounds_high[d]) ||
        !(cfg.bounds_low[d] < cfg.bounds_high[d]))
      throw ConfigError("bounds_low must be strictly below bounds_high per dimension");
  }
  if (!std::isfinite(cfg.inertia) || !std::isfinite(cfg.cognitive) ||
      !std::isfinite(cfg.social))
    throw ConfigError("inertia/cognitive/social must be finite");
  if (cfg.stall_iterations < 1) throw ConfigError("stall_iterations must be >= 1");
  if (!(cfg.stall_tolerance >= 0.0)) throw ConfigError("stall_tolerance must be >= 0");
}

PsoConfig load_pso_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);

  PsoConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "particles") cfg.particles = std::stoi(value);
      else if (key == "restarts") cfg.restarts = std::stoi(value);
      else if (key == "iterations") cfg.iterations = std::stoi(value);
      else if (key == "alpha_low") cfg.bounds_low[0] = std::stod(value);
      else if (key == "alpha_high") cfg.bounds_high[0] = std::stod(value);
      else if (key == "beta_low") cfg.bounds_low[1] = std::stod(value);
      else if (key == "beta_high") cfg.bounds_high[1] = std::stod(value);
      else if (key == "inertia") cfg.inertia = std::stod(value);
      else if (key == "cognitive") cfg.cognitive = std::stod(value);
      else if (key == "social") cfg.social = std::stod(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "stall_iterations") cfg.stall_iterations = std::stoi(value);
      else if (key == "stall_tolerance") cfg.stall_tolerance = std::stod(value);
      else
        throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" +
                          key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": bad value '" +
                        value + "' for key '" + key + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

CalibrationResult pso_optimize(const ObjectiveFn& fn, const PsoConfig& cfg) {
  validate_config(cfg);

  CalibrationResult result;
  result.best_objective = -kInf;
  bool all_restarts_degenerate = true;

  const std::size_t n = static_cast<std::size_t>(cfg.particles);
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(restart));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::array<double, 2>> pos(n), vel(n, {0.0, 0.0}), pbest(n);
    std::vector<double> fit(n), pbest_fit(n);

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t dim = 0; dim < 2; ++dim)
        pos[i][dim] = cfg.bounds_low[dim] +
                      unit(rng) * (cfg.bounds_high[dim] - cfg.bounds_low[dim]);

    bool restart_degenerate = true;
    for (std::size_t i = 0; i < n; ++i) {
      ObjectiveDiagnostics diag;
      fit[i] = fn({pos[i][0], pos[i][1]}, &diag);
      ++result.evaluations;
      if (!diag.sentinel) restart_degenerate = false;
    }
    pbest = pos;
    pbest_fit = fit;

    std::size_t gbest = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (pbest_fit[i] > pbest_fit[gbest]) gbest = i;
    std::array<double, 2> gbest_pos = pbest[gbest];
    double gbest_fit = pbest_fit[gbest];

    std::vector<double> series {gbest_fit};
    int stall = 0;
    for (int iter = 1; iter < cfg.iterations; ++iter) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t dim = 0; dim < 2; ++dim) {
          const double r1 = unit(rng);
          const double r2 = unit(rng);
          vel[i][dim] = cfg.inertia * vel[i][dim] +
                        cfg.cognitive * r1 * (pbest[i][dim] - pos[i][dim]) +
                        cfg.social * r2 * (gbest_pos[dim] - pos[i][dim]);
          double next = pos[i][dim] + vel[i][dim];
          if (next < cfg.bounds_low[dim]) {
            next = cfg.bounds_low[dim];
            vel[i][dim] = 0.0;
          } else if (next > cfg.bounds_high[dim]) {
            next = cfg.bounds_high[dim];
            vel[i][dim] = 0.0;
          }
          pos[i][dim] = next;
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        fit[i] = fn({pos[i][0], pos[i][1]}, nullptr);
        ++result.evaluations;
        if (fit[i] > pbest_fit[i]) {
          pbest_fit[i] = fit[i];
          pbest[i] = pos[i];
        }
      }
      const double prev = gbest_fit;
      for (std::size_t i = 0; i < n; ++i) {
        if (pbest_fit[i] > gbest_fit) {
          gbest_fit = pbest_fit[i];
          gbest_pos = pbest[i];
        }
      }
      series.push_back(gbest_fit);
      if (gbest_fit - prev < cfg.stall_tolerance) {
        if (++stall >= cfg.stall_iterations) break;
      } else {
        stall = 0;
      }
    }

    result.trace.push_back(std::move(series));
    if (restart == 0 || gbest_fit > result.best_objective) {
      result.best_objective = gbest_fit;
      result.best_params = {gbest_pos[0], gbest_pos[1]};
    }
    if (!restart_degenerate) all_restarts_degenerate = false;
  }

  result.degenerate = all_restarts_degenerate;
  return result;
}

CalibrationResult pso_calibrate(const Scenario& s, const geo::DistanceMatrix& d,
                                models::ModelKind kind, const PsoConfig& cfg) {
  const ObjectiveEvaluator eval(s, d, kind);
  return pso_optimize(
      [&eval](const ModelParams& p, ObjectiveDiagnostics* diag) {
        return eval(p, diag);
      },
      cfg);
}

}  // namespace tradewinds::calibrate
