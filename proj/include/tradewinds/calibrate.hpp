#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tradewinds/domain.hpp"
#include "tradewinds/geo.hpp"
#include "tradewinds/models.hpp"

namespace tradewinds::calibrate {

/// Swarm configuration. Particle count, restart count, and the [0, 2]
/// bounds follow the calibration protocol; the remaining knobs use
/// constriction-equivalent defaults and are all overridable.
struct PsoConfig {
  int particles = 10;
  int restarts = 10;
  int iterations = 100;
  std::array<double, 2> bounds_low {0.0, 0.0};    // alpha, beta
  std::array<double, 2> bounds_high {2.0, 2.0};
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  std::uint64_t seed = 0;
  /// Stop a restart after this many consecutive iterations whose global-best
  /// improvement stays below stall_tolerance.
  int stall_iterations = 20;
  double stall_tolerance = 1e-7;
};

/// Throws ConfigError on invalid values.
void validate_config(const PsoConfig& cfg);

/// Reads a flat "key = value" file ('#' comments allowed). Recognized keys:
/// particles, restarts, iterations, alpha_low, alpha_high, beta_low,
/// beta_high, inertia, cognitive, social, seed, stall_iterations,
/// stall_tolerance. Unknown keys raise ConfigError.
PsoConfig load_pso_config(const std::string& path);

struct ObjectiveDiagnostics {
  bool zero_variance_pred = false;
  bool zero_variance_obs = false;
  /// True when the objective returned the -1 sentinel instead of a
  /// correlation.
  bool sentinel = false;
};

/// Pearson correlation between the predicted tensor of the given kind and
/// its observed counterpart, flattened over the observed support mask
/// (neighborhoods with at least one visit; all 168 hours of those rows for
/// dynamic kinds). Precomputes everything parameter-independent once so a
/// swarm can call it cheaply.
class ObjectiveEvaluator {
 public:
  /// Throws NoObservations when the support mask is empty.
  ObjectiveEvaluator(const Scenario& s, const geo::DistanceMatrix& d,
                     models::ModelKind kind);

  /// Returns the correlation, or -1 when either flattened vector has zero
  /// variance (diagnostics flag which side).
  double operator()(const ModelParams& p, ObjectiveDiagnostics* diag = nullptr) const;

  models::ModelKind kind() const { return kind_; }
  std::size_t support_rows() const { return n_rows_; }

 private:
  double eval_huff(const ModelParams& p, ObjectiveDiagnostics* diag) const;
  double eval_thuff(const ModelParams& p, ObjectiveDiagnostics* diag) const;
  double eval_mhuff(const ModelParams& p, ObjectiveDiagnostics* diag) const;
  double eval_ahuff(const ModelParams& p, ObjectiveDiagnostics* diag) const;

  models::ModelKind kind_;
  std::size_t n_rows_ = 0;    // masked neighborhoods
  std::size_t n_stores_ = 0;
  std::vector<double> ln_attract_;
  std::vector<double> ln_dist_;  // n_rows x n_stores
  std::vector<double> obs_;      // n_rows x n_stores, V_ij / row total
  std::vector<double> visits_;   // n_rows x n_stores, raw V_ij (A-Huff)
  // temporal machinery (dynamic kinds)
  std::vector<double> prof_;     // n_stores x 168
  std::vector<double> prof_sum_, prof_sumsq_, prof_min_, prof_max_;
  // parameter-independent observed-side moments
  double obs_sum_ = 0.0, obs_sumsq_ = 0.0, obs_min_ = 0.0, obs_max_ = 0.0;
  std::vector<double> ahuff_obs_;  // n_rows x n_stores x 168
};

double objective(const Scenario& s, const geo::DistanceMatrix& d,
                 models::ModelKind kind, const ModelParams& p,
                 ObjectiveDiagnostics* diag = nullptr);

/// The exploration grid used before optimization: {0.1, 0.5, 1, 2, 5}.
std::vector<double> default_grid();

struct GridResult {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<double> values;          // alphas.size() x betas.size(), row-major
  std::vector<std::uint8_t> sentinel;  // cells where the objective degenerated

  double at(std::size_t a, std::size_t b) const { return values[a * betas.size() + b]; }
  double max_value() const;
  std::pair<std::size_t, std::size_t> argmax() const;
};

/// Objective at every (alpha, beta) grid cell. Throws Error on empty grids.
GridResult grid_evaluate(const Scenario& s, const geo::DistanceMatrix& d,
                         models::ModelKind kind, std::span<const double> alphas,
                         std::span<const double> betas);

struct CalibrationResult {
  ModelParams best_params;
  double best_objective = -1.0;
  /// Global-best objective per iteration, one series per restart;
  /// non-decreasing within a restart.
  std::vector<std::vector<double>> trace;
  std::size_t evaluations = 0;
  /// True when every particle of every restart hit the zero-variance
  /// sentinel at iteration 0: the landscape carries no signal and
  /// best_params is arbitrary. The CLI maps this to its degenerate-data
  /// exit code.
  bool degenerate = false;
};

using ObjectiveFn = std::function<double(const ModelParams&, ObjectiveDiagnostics*)>;

/// Core bounded 2-D particle swarm (maximizing). Velocity update
/// v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x) with r1, r2 drawn per
/// dimension; positions are clamped to the bounds and the velocity of a
/// violated dimension is zeroed. Restart r uses seed + r, so the whole run
/// is reproducible from the config alone.
CalibrationResult pso_optimize(const ObjectiveFn& fn, const PsoConfig& cfg);

/// PSO calibration of (alpha, beta) against the observed visit tensor.
CalibrationResult pso_calibrate(const Scenario& s, const geo::DistanceMatrix& d,
                                models::ModelKind kind, const PsoConfig& cfg);

}  // namespace tradewinds::calibrate
