#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "tradewinds/errors.hpp"
#include "tradewinds/version.hpp"

namespace tw = tradewinds;
namespace cli = tradewinds::cli;

namespace {

void add_scenario_inputs(CLI::App* cmd, cli::CommonOptions& common) {
  // existence is checked by ingest so a missing file maps to exit code 2
  cmd->add_option("--stores", common.stores, "stores.csv path")->required();
  cmd->add_option("--hourly", common.hourly, "hourly.csv path")->required();
  cmd->add_option("--visits", common.visits, "visits.csv path")->required();
  cmd->add_option("--neighborhoods", common.neighborhoods, "neighborhoods.csv path")
      ->required();
  cmd->add_option("--min-visit-threshold", common.min_visit_threshold,
                  "drop visit rows below this count, mirroring the source "
                  "data's censoring (bare flag means 5; 0 disables)")
      ->expected(0, 1)
      ->default_str("5")
      ->check(CLI::NonNegativeNumber);
}

void add_common(CLI::App* cmd, cli::CommonOptions& common) {
  cmd->add_option("--out-dir", common.out_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--seed", common.seed, "64-bit RNG seed")->capture_default_str();
  cmd->add_option("--threads", common.threads, "worker threads for row-parallel steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

tw::models::ModelKind parse_model_flag(const std::string& name) {
  return *tw::models::parse_model_kind(name);  // choices validated by CLI11
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app {"tradewinds: Huff-family trade-area and market-share toolkit"};
  app.set_version_flag("--version", tw::kVersion);
  app.require_subcommand(1);

  const std::vector<std::string> model_names {"huff", "mhuff", "thuff", "ahuff"};

  // calibrate
  cli::CommonOptions cal_common;
  cli::CalibrateOptions cal_opts;
  std::string cal_model = "thuff";
  std::string cal_config_file;
  auto* cal = app.add_subcommand("calibrate",
                                 "fit (alpha, beta) by particle swarm; optional "
                                 "exploration grid");
  add_scenario_inputs(cal, cal_common);
  add_common(cal, cal_common);
  cal->add_option("--model", cal_model, "model kind")
      ->check(CLI::IsMember(model_names))
      ->capture_default_str();
  auto* opt_config = cal->add_option("--config", cal_config_file,
                                     "flat key = value PSO config file");
  auto* opt_particles = cal->add_option("--particles", cal_opts.pso.particles);
  auto* opt_restarts = cal->add_option("--restarts", cal_opts.pso.restarts);
  auto* opt_iterations = cal->add_option("--iterations", cal_opts.pso.iterations);
  auto* opt_alpha_low = cal->add_option("--alpha-low", cal_opts.pso.bounds_low[0]);
  auto* opt_alpha_high = cal->add_option("--alpha-high", cal_opts.pso.bounds_high[0]);
  auto* opt_beta_low = cal->add_option("--beta-low", cal_opts.pso.bounds_low[1]);
  auto* opt_beta_high = cal->add_option("--beta-high", cal_opts.pso.bounds_high[1]);
  auto* opt_inertia = cal->add_option("--inertia", cal_opts.pso.inertia);
  auto* opt_cognitive = cal->add_option("--cognitive", cal_opts.pso.cognitive);
  auto* opt_social = cal->add_option("--social", cal_opts.pso.social);
  auto* opt_stall_iters = cal->add_option("--stall-iterations", cal_opts.pso.stall_iterations);
  auto* opt_stall_tol = cal->add_option("--stall-tolerance", cal_opts.pso.stall_tolerance);
  cal->add_flag("--grid", cal_opts.grid, "also write the exploration grid.csv");
  cal->add_flag("--grid-only", cal_opts.grid_only, "write grid.csv and skip the swarm");
  cal->add_option("--grid-alphas", cal_opts.grid_alphas, "grid alpha values");
  cal->add_option("--grid-betas", cal_opts.grid_betas, "grid beta values");

  // predict
  cli::CommonOptions pred_common;
  cli::PredictOptions pred_opts;
  std::string pred_model = "huff";
  double pred_alpha = 0.0, pred_beta = 0.0;
  std::string pred_result;
  auto* pred = app.add_subcommand("predict",
                                  "export share tensors, winners, and GeoJSON for "
                                  "calibrated parameters");
  add_scenario_inputs(pred, pred_common);
  add_common(pred, pred_common);
  pred->add_option("--model", pred_model, "model kind")
      ->check(CLI::IsMember(model_names))
      ->capture_default_str();
  auto* opt_pa = pred->add_option("--alpha", pred_alpha, "attractiveness exponent");
  auto* opt_pb = pred->add_option("--beta", pred_beta, "distance-decay exponent");
  auto* opt_pr = pred->add_option("--result", pred_result,
                                  "result.json from a calibrate run");
  opt_pa->needs(opt_pb);
  opt_pb->needs(opt_pa);
  pred->add_option("--hour", pred_opts.hour, "hour slice 0..167 (default: whole week)")
      ->check(CLI::Range(0, 167));
  pred->add_option("--classes", pred_opts.classes, "geometric-interval class count")
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
  pred->add_option("--weight-by", pred_opts.weight_by,
                   "market-share weighting: population or visits")
      ->check(CLI::IsMember({"population", "visits"}))
      ->capture_default_str();
  pred->add_flag("--diff", pred_opts.diff,
                 "also write predicted-minus-observed differences");

  // decay
  cli::CommonOptions decay_common;
  cli::DecayOptions decay_opts;
  auto* decay = app.add_subcommand("decay", "visit-distance distribution analysis");
  add_scenario_inputs(decay, decay_common);
  add_common(decay, decay_common);
  decay->add_option("--bins", decay_opts.bins, "histogram bin count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  decay->add_option("--fit-min-km", decay_opts.fit_min_km,
                    "smallest bin center used in the log-log fit")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  // regress
  cli::CommonOptions reg_common;
  cli::RegressOptions reg_opts;
  std::string reg_group;
  auto* reg = app.add_subcommand("regress",
                                 "OLS drivers of pairwise visit counts with "
                                 "significance stars");
  add_scenario_inputs(reg, reg_common);
  add_common(reg, reg_common);
  auto* opt_group = reg->add_option("--group-by", reg_group,
                                    "fit per group instead of pooled")
      ->check(CLI::IsMember({"brand"}));

  // synth
  cli::CommonOptions synth_common;
  cli::SynthOptions synth_opts;
  std::string synth_profile = "dirichlet";
  std::string synth_noise = "none";
  auto* syn = app.add_subcommand("synth",
                                 "generate a ground-truth dataset (4 CSVs + "
                                 "truth.json)");
  add_common(syn, synth_common);
  syn->add_option("--stores", synth_opts.spec.n_stores, "store count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  syn->add_option("--neighborhoods", synth_opts.spec.n_neighborhoods,
                  "neighborhood count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  syn->add_option("--alpha", synth_opts.spec.true_params.alpha, "true alpha")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  syn->add_option("--beta", synth_opts.spec.true_params.beta, "true beta")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  syn->add_option("--profile", synth_profile,
                  "hourly profile shape: uniform, bimodal-weekday, point-mass, "
                  "dirichlet")
      ->check(CLI::IsMember({"uniform", "bimodal-weekday", "point-mass", "dirichlet"}))
      ->capture_default_str();
  syn->add_option("--kappa", synth_opts.spec.dirichlet_kappa,
                  "dirichlet concentration")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  syn->add_option("--noise", synth_noise, "noise model: none or poisson")
      ->check(CLI::IsMember({"none", "poisson"}))
      ->capture_default_str();
  syn->add_option("--visits-per-neighborhood", synth_opts.spec.visits_per_neighborhood,
                  "expected visits per neighborhood")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  syn->add_option("--attract-low", synth_opts.spec.attractiveness_range.first,
                  "attractiveness range low")
      ->capture_default_str();
  syn->add_option("--attract-high", synth_opts.spec.attractiveness_range.second,
                  "attractiveness range high")
      ->capture_default_str();
  syn->add_option("--brand", synth_opts.spec.brand, "brand label")
      ->capture_default_str();
  syn->add_option("--lat-min", synth_opts.spec.bbox.lat_min)->capture_default_str();
  syn->add_option("--lat-max", synth_opts.spec.bbox.lat_max)->capture_default_str();
  syn->add_option("--lon-min", synth_opts.spec.bbox.lon_min)->capture_default_str();
  syn->add_option("--lon-max", synth_opts.spec.bbox.lon_max)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cal->parsed()) {
      cal_opts.model = parse_model_flag(cal_model);
      // precedence: defaults < config file < explicit flags
      if (opt_config->count() > 0) {
        const auto base = cal_opts.pso;
        try {
          cal_opts.pso = tw::calibrate::load_pso_config(cal_config_file);
        } catch (const tw::ConfigError& e) {
          std::cerr << "error: " << e.what() << '\n';
          return cli::kExitIngest;
        }
        if (opt_particles->count()) cal_opts.pso.particles = base.particles;
        if (opt_restarts->count()) cal_opts.pso.restarts = base.restarts;
        if (opt_iterations->count()) cal_opts.pso.iterations = base.iterations;
        if (opt_alpha_low->count()) cal_opts.pso.bounds_low[0] = base.bounds_low[0];
        if (opt_alpha_high->count()) cal_opts.pso.bounds_high[0] = base.bounds_high[0];
        if (opt_beta_low->count()) cal_opts.pso.bounds_low[1] = base.bounds_low[1];
        if (opt_beta_high->count()) cal_opts.pso.bounds_high[1] = base.bounds_high[1];
        if (opt_inertia->count()) cal_opts.pso.inertia = base.inertia;
        if (opt_cognitive->count()) cal_opts.pso.cognitive = base.cognitive;
        if (opt_social->count()) cal_opts.pso.social = base.social;
        if (opt_stall_iters->count()) cal_opts.pso.stall_iterations = base.stall_iterations;
        if (opt_stall_tol->count()) cal_opts.pso.stall_tolerance = base.stall_tolerance;
        if (cal->count("--seed") == 0) cal_common.seed = cal_opts.pso.seed;
      }
      cal_opts.pso.seed = cal_common.seed;
      try {
        tw::calibrate::validate_config(cal_opts.pso);
      } catch (const tw::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kExitIngest;
      }
      return cli::cmd_calibrate(cal_common, cal_opts);
    }
    if (pred->parsed()) {
      pred_opts.model = parse_model_flag(pred_model);
      if (opt_pa->count()) pred_opts.alpha = pred_alpha;
      if (opt_pb->count()) pred_opts.beta = pred_beta;
      if (opt_pr->count()) pred_opts.result_file = pred_result;
      if (!pred_opts.alpha && !pred_opts.result_file) {
        std::cerr << "error: supply --alpha/--beta or --result result.json\n";
        return cli::kExitIngest;
      }
      return cli::cmd_predict(pred_common, pred_opts);
    }
    if (decay->parsed()) return cli::cmd_decay(decay_common, decay_opts);
    if (reg->parsed()) {
      if (opt_group->count()) reg_opts.group_by = reg_group;
      return cli::cmd_regress(reg_common, reg_opts);
    }
    if (syn->parsed()) {
      synth_opts.spec.profile_shape = *tw::synth::parse_profile_shape(synth_profile);
      synth_opts.spec.noise = *tw::synth::parse_noise_kind(synth_noise);
      synth_opts.spec.seed = synth_common.seed;
      return cli::cmd_synth(synth_common, synth_opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitFailure;
  }
  return cli::kExitFailure;
}
