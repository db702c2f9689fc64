#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tradewinds/calibrate.hpp"
#include "tradewinds/models.hpp"
#include "tradewinds/synth.hpp"

namespace tradewinds::cli {

// exit-code taxonomy, fixed for scripting
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     // unexpected error
inline constexpr int kExitIngest = 2;      // input files / schema / config
inline constexpr int kExitDegenerate = 3;  // no observations / non-calibratable
inline constexpr int kExitShape = 4;       // shape or kind mismatch
inline constexpr int kExitRegression = 5;  // rank deficient / insufficient data

struct CommonOptions {
  std::string stores, hourly, visits, neighborhoods;  // input CSV paths
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  double min_visit_threshold = 0.0;  // 0 disables the censoring filter
};

struct CalibrateOptions {
  models::ModelKind model = models::ModelKind::kTHuff;
  calibrate::PsoConfig pso;
  bool grid = false;       // also evaluate the exploration grid
  bool grid_only = false;  // skip the swarm entirely
  std::vector<double> grid_alphas;  // empty -> default grid
  std::vector<double> grid_betas;
};

struct PredictOptions {
  models::ModelKind model = models::ModelKind::kHuff;
  std::optional<double> alpha, beta;
  std::optional<std::string> result_file;  // result.json from cmd_calibrate
  int hour = models::kAllHours;
  int classes = 7;
  std::string weight_by = "population";  // or "visits"
  bool diff = false;
};

struct DecayOptions {
  int bins = 30;
  double fit_min_km = 1.0;
};

struct RegressOptions {
  std::optional<std::string> group_by;  // only "brand" is supported
};

struct SynthOptions {
  synth::SynthSpec spec;
};

int cmd_calibrate(const CommonOptions& common, const CalibrateOptions& opts);
int cmd_predict(const CommonOptions& common, const PredictOptions& opts);
int cmd_decay(const CommonOptions& common, const DecayOptions& opts);
int cmd_regress(const CommonOptions& common, const RegressOptions& opts);
int cmd_synth(const CommonOptions& common, const SynthOptions& opts);

}  // namespace tradewinds::cli
