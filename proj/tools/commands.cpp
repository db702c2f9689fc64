#include "commands.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "tradewinds/csv.hpp"
#include "tradewinds/errors.hpp"
#include "tradewinds/geo.hpp"
#include "tradewinds/ingest.hpp"
#include "tradewinds/stats.hpp"
#include "tradewinds/version.hpp"

namespace tradewinds::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, const CommonOptions& common)
      : start_(std::chrono::steady_clock::now()), common_(common) {
    doc_["command"] = std::move(command);
    doc_["version"] = kVersion;
    doc_["seed"] = common.seed;
  }

  void add_input(const std::string& name, const std::string& path) {
    doc_["inputs"][name] = {{"path", path}, {"fnv1a64", fnv1a64_file(path)}};
  }

  void add_scenario_inputs() {
    add_input("stores", common_.stores);
    add_input("hourly", common_.hourly);
    add_input("visits", common_.visits);
    add_input("neighborhoods", common_.neighborhoods);
  }

  void set_config(ordered_json config) { doc_["config"] = std::move(config); }

  void write() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    doc_["wall_time_ms"] =
        std::chrono::duration<double, std::milli>(elapsed).count();
    fs::create_directories(common_.out_dir);
    std::ofstream out(fs::path(common_.out_dir) / "manifest.json");
    out << doc_.dump(2) << '\n';
  }

 private:
  std::chrono::steady_clock::time_point start_;
  const CommonOptions& common_;
  ordered_json doc_;
};

ingest::IngestReport load_inputs(const CommonOptions& common) {
  ingest::IngestOptions opts;
  if (common.min_visit_threshold > 0.0)
    opts.min_visit_threshold = common.min_visit_threshold;
  auto report = ingest::load_scenario(common.stores, common.hourly, common.visits,
                                      common.neighborhoods, opts);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  return report;
}

std::ofstream open_output(const CommonOptions& common, const std::string& name) {
  fs::create_directories(common.out_dir);
  std::ofstream out(fs::path(common.out_dir) / name);
  if (!out) throw Error("cannot write " + (fs::path(common.out_dir) / name).string());
  return out;
}

std::vector<double> neighborhood_weights(const Scenario& s,
                                         const std::string& weight_by) {
  std::vector<double> w(s.neighborhoods.size(), 0.0);
  if (weight_by == "population") {
    for (std::size_t i = 0; i < s.neighborhoods.size(); ++i)
      w[i] = s.neighborhoods[i].population;
  } else {  // visit totals
    const auto visits = dense_visits(s);
    for (std::size_t i = 0; i < s.neighborhoods.size(); ++i)
      for (std::size_t j = 0; j < s.stores.size(); ++j)
        w[i] += visits[i * s.stores.size() + j];
  }
  return w;
}

std::string sanitize_for_filename(const std::string& name) {
  std::string out = name;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return out.empty() ? "_" : out;
}

int map_ingest_errors(const std::exception& e) {
  std::cerr << "error: " << e.what() << '\n';
  return kExitIngest;
}

}  // namespace

int cmd_calibrate(const CommonOptions& common, const CalibrateOptions& opts) {
  ManifestWriter manifest("calibrate", common);
  ingest::IngestReport report;
  try {
    report = load_inputs(common);
    manifest.add_scenario_inputs();
  } catch (const Error& e) {
    return map_ingest_errors(e);
  }

  const auto& cfg = opts.pso;
  ordered_json config {
      {"model", models::to_string(opts.model)},
      {"particles", cfg.particles},
      {"restarts", cfg.restarts},
      {"iterations", cfg.iterations},
      {"bounds", {{"alpha", {cfg.bounds_low[0], cfg.bounds_high[0]}},
                  {"beta", {cfg.bounds_low[1], cfg.bounds_high[1]}}}},
      {"inertia", cfg.inertia},
      {"cognitive", cfg.cognitive},
      {"social", cfg.social},
      {"stall_iterations", cfg.stall_iterations},
      {"stall_tolerance", cfg.stall_tolerance},
      {"grid", opts.grid || opts.grid_only},
      {"grid_only", opts.grid_only},
      {"min_visit_threshold", common.min_visit_threshold},
      {"threads", common.threads},
  };
  manifest.set_config(std::move(config));

  const Scenario& s = report.scenario;
  for (const auto& st : s.stores) {
    if (st.brand != s.stores.front().brand) {
      std::cerr << "warning: stores span multiple brands; calibration assumes "
                   "one brand per run\n";
      break;
    }
  }
  const auto distances = geo::build_distance_matrix(s, common.threads);

  try {
    if (opts.grid || opts.grid_only) {
      const auto alphas =
          opts.grid_alphas.empty() ? calibrate::default_grid() : opts.grid_alphas;
      const auto betas =
          opts.grid_betas.empty() ? calibrate::default_grid() : opts.grid_betas;
      const auto grid = calibrate::grid_evaluate(s, distances, opts.model, alphas, betas);

      auto out = open_output(common, "grid.csv");
      out << "alpha";
      for (double b : betas) out << ",beta=" << csv::format_double(b);
      out << '\n';
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        out << csv::format_double(alphas[a]);
        for (std::size_t b = 0; b < betas.size(); ++b)
          out << ',' << csv::format_double(grid.at(a, b));
        out << '\n';
      }
    }

    if (!opts.grid_only) {
      const auto result = calibrate::pso_calibrate(s, distances, opts.model, cfg);

      {
        ordered_json doc {
            {"model", models::to_string(opts.model)},
            {"alpha", result.best_params.alpha},
            {"beta", result.best_params.beta},
            {"objective", result.best_objective},
            {"evaluations", result.evaluations},
            {"degenerate", result.degenerate},
            {"seed", cfg.seed},
        };
        auto out = open_output(common, "result.json");
        out << doc.dump(2) << '\n';
      }
      {
        auto out = open_output(common, "trace.csv");
        out << "restart,iteration,best_objective\n";
        for (std::size_t r = 0; r < result.trace.size(); ++r)
          for (std::size_t it = 0; it < result.trace[r].size(); ++it)
            out << r << ',' << it << ',' << csv::format_double(result.trace[r][it])
                << '\n';
      }

      manifest.write();
      if (result.degenerate) {
        std::cerr << "error: objective has no signal on this scenario "
                     "(zero-variance predictions for every sampled particle)\n";
        return kExitDegenerate;
      }
      std::cout << "best alpha=" << result.best_params.alpha
                << " beta=" << result.best_params.beta
                << " objective=" << result.best_objective << '\n';
      return kExitOk;
    }
  } catch (const NoObservations& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const AllZeroWeights& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  }

  manifest.write();
  return kExitOk;
}

namespace {

struct WinnerTable {
  std::vector<std::size_t> store;
  std::vector<double> probability;
};

WinnerTable winners_for_hour(const Scenario& s, const models::PredictionTensor& pred,
                             int hour) {
  WinnerTable w;
  w.store.resize(pred.n_neighborhoods);
  w.probability.resize(pred.n_neighborhoods);
  for (std::size_t i = 0; i < pred.n_neighborhoods; ++i) {
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t j = 0; j < pred.n_stores; ++j) {
      const double p = pred.at(i, j, static_cast<std::size_t>(hour));
      if (j == 0 || p > best_p || (p == best_p && s.stores[j].id < s.stores[best].id)) {
        best = j;
        best_p = p;
      }
    }
    w.store[i] = best;
    w.probability[i] = best_p;
  }
  return w;
}

}  // namespace

int cmd_predict(const CommonOptions& common, const PredictOptions& opts) {
  ManifestWriter manifest("predict", common);
  ingest::IngestReport report;
  try {
    report = load_inputs(common);
    manifest.add_scenario_inputs();
  } catch (const Error& e) {
    return map_ingest_errors(e);
  }
  const Scenario& s = report.scenario;

  ModelParams params;
  try {
    if (opts.alpha && opts.beta) {
      params = {*opts.alpha, *opts.beta};
    } else if (opts.result_file) {
      std::ifstream in(*opts.result_file);
      if (!in) throw ParseError("cannot open " + *opts.result_file);
      const auto doc = nlohmann::json::parse(in);
      params = {doc.at("alpha").get<double>(), doc.at("beta").get<double>()};
    } else {
      throw ConfigError("supply --alpha/--beta or --result result.json");
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << (opts.result_file ? *opts.result_file : "result") << ": "
              << e.what() << '\n';
    return kExitIngest;
  } catch (const Error& e) {
    return map_ingest_errors(e);
  }

  manifest.set_config({
      {"model", models::to_string(opts.model)},
      {"alpha", params.alpha},
      {"beta", params.beta},
      {"hour", opts.hour},
      {"classes", opts.classes},
      {"weight_by", opts.weight_by},
      {"diff", opts.diff},
      {"min_visit_threshold", common.min_visit_threshold},
      {"threads", common.threads},
  });

  try {
    const auto distances = geo::build_distance_matrix(s, common.threads);
    const auto pred = models::predict(opts.model, s, distances, params, common.threads);
    if (opts.hour != models::kAllHours && !models::is_dynamic(opts.model))
      throw ShapeMismatch("--hour requires a dynamic model (mhuff/thuff/ahuff)");

    {
      auto out = open_output(common, "shares.csv");
      if (pred.n_hours == 1) {
        out << "cbg_id,store_id,probability\n";
        for (std::size_t i = 0; i < pred.n_neighborhoods; ++i)
          for (std::size_t j = 0; j < pred.n_stores; ++j)
            out << csv::escape(s.neighborhoods[i].id) << ','
                << csv::escape(s.stores[j].id) << ','
                << csv::format_double(pred.at(i, j)) << '\n';
      } else {
        out << "cbg_id,store_id,probability,hour\n";
        const int t_lo = opts.hour == models::kAllHours ? 0 : opts.hour;
        const int t_hi = opts.hour == models::kAllHours ? kHoursPerWeek : opts.hour + 1;
        for (std::size_t i = 0; i < pred.n_neighborhoods; ++i)
          for (std::size_t j = 0; j < pred.n_stores; ++j)
            for (int t = t_lo; t < t_hi; ++t)
              out << csv::escape(s.neighborhoods[i].id) << ','
                  << csv::escape(s.stores[j].id) << ','
                  << csv::format_double(pred.at(i, j, static_cast<std::size_t>(t)))
                  << ',' << t << '\n';
      }
    }

    const auto weights = neighborhood_weights(s, opts.weight_by);
    const auto shares = models::market_share(s, pred, weights);

    {
      auto out = open_output(common, "store_shares.csv");
      if (shares.n_hours == 1) {
        out << "store_id,share\n";
        for (std::size_t j = 0; j < shares.n_stores; ++j)
          out << csv::escape(s.stores[j].id) << ','
              << csv::format_double(shares.store_hour_shares[j]) << '\n';
      } else {
        out << "store_id,hour,share\n";
        const int t_lo = opts.hour == models::kAllHours ? 0 : opts.hour;
        const int t_hi = opts.hour == models::kAllHours ? kHoursPerWeek : opts.hour + 1;
        for (std::size_t j = 0; j < shares.n_stores; ++j)
          for (int t = t_lo; t < t_hi; ++t)
            out << csv::escape(s.stores[j].id) << ',' << t << ','
                << csv::format_double(
                       shares.store_hour_shares[j * shares.n_hours +
                                                static_cast<std::size_t>(t)])
                << '\n';
      }
    }

    // winning store per neighborhood: hour-summed for the whole week, or the
    // requested slice
    WinnerTable winners;
    if (opts.hour == models::kAllHours) {
      winners.store = shares.winner_store;
      winners.probability = shares.winner_probability;
    } else {
      winners = winners_for_hour(s, pred, opts.hour);
    }

    {
      auto out = open_output(common, "winners.csv");
      out << "cbg_id,store_id,probability\n";
      for (std::size_t i = 0; i < s.neighborhoods.size(); ++i)
        out << csv::escape(s.neighborhoods[i].id) << ','
            << csv::escape(s.stores[winners.store[i]].id) << ','
            << csv::format_double(winners.probability[i]) << '\n';
    }

    {
      // choropleth-ready points, classified by geometric intervals
      std::vector<double> breaks;
      try {
        breaks = stats::geometric_intervals(winners.probability, opts.classes);
      } catch (const DegenerateRange&) {
        breaks.clear();  // all probabilities equal: single class
      }
      ordered_json features = ordered_json::array();
      for (std::size_t i = 0; i < s.neighborhoods.size(); ++i) {
        const auto& nb = s.neighborhoods[i];
        const std::size_t cls =
            breaks.empty() ? 0 : stats::interval_class(winners.probability[i], breaks);
        features.push_back({
            {"type", "Feature"},
            {"geometry",
             {{"type", "Point"}, {"coordinates", {nb.centroid.lon, nb.centroid.lat}}}},
            {"properties",
             {{"cbg_id", nb.id},
              {"winner_store_id", s.stores[winners.store[i]].id},
              {"probability", winners.probability[i]},
              {"class_index", cls}}},
        });
      }
      ordered_json doc {{"type", "FeatureCollection"}, {"features", std::move(features)}};
      auto out = open_output(common, "neighborhoods.geojson");
      out << doc.dump(2) << '\n';
    }

    if (opts.diff) {
      const auto obs = models::observe(s, opts.model);
      const auto sd = models::share_difference(pred, obs, opts.hour);
      {
        auto out = open_output(common, "diff.csv");
        out << "cbg_id,store_id,difference\n";
        for (std::size_t r = 0; r < sd.rows.size(); ++r)
          for (std::size_t j = 0; j < sd.n_stores; ++j)
            out << csv::escape(s.neighborhoods[sd.rows[r]].id) << ','
                << csv::escape(s.stores[j].id) << ','
                << csv::format_double(sd.diffs[r * sd.n_stores + j]) << '\n';
      }
      {
        ordered_json doc {
            {"hour", opts.hour == models::kAllHours ? ordered_json("all")
                                                    : ordered_json(opts.hour)},
            {"min", sd.min_diff},
            {"max", sd.max_diff},
            {"mean_abs", sd.mean_abs_diff},
        };
        auto out = open_output(common, "diff_summary.json");
        out << doc.dump(2) << '\n';
      }
    }
  } catch (const KindMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitShape;
  } catch (const ShapeMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitShape;
  } catch (const NoObservations& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const AllZeroWeights& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  }

  manifest.write();
  return kExitOk;
}

int cmd_decay(const CommonOptions& common, const DecayOptions& opts) {
  ManifestWriter manifest("decay", common);
  ingest::IngestReport report;
  try {
    report = load_inputs(common);
    manifest.add_scenario_inputs();
  } catch (const Error& e) {
    return map_ingest_errors(e);
  }
  manifest.set_config({
      {"bins", opts.bins},
      {"fit_min_km", opts.fit_min_km},
      {"min_visit_threshold", common.min_visit_threshold},
      {"threads", common.threads},
  });

  try {
    const Scenario& s = report.scenario;
    const auto distances = geo::build_distance_matrix(s, common.threads);
    const auto decay = stats::decay_analysis(s, distances, opts.bins, opts.fit_min_km);

    {
      ordered_json doc {
          {"median_km", decay.median_km},
          {"mean_of_medians_km", decay.mean_of_medians_km},
          {"total_visits", decay.total_visits},
          {"bins", opts.bins},
          {"fit_min_km", opts.fit_min_km},
          {"loglog_slope", decay.fit_ok ? ordered_json(decay.loglog_slope)
                                        : ordered_json(nullptr)},
          {"loglog_intercept", decay.fit_ok ? ordered_json(decay.loglog_intercept)
                                            : ordered_json(nullptr)},
          {"fit_range_km", {decay.fit_range_km.first, decay.fit_range_km.second}},
      };
      auto out = open_output(common, "decay.json");
      out << doc.dump(2) << '\n';
    }
    {
      auto out = open_output(common, "pdf.csv");
      out << "bin_center_km,density\n";
      for (const auto& [center, density] : decay.pdf_bins)
        out << csv::format_double(center) << ',' << csv::format_double(density) << '\n';
    }
    {
      auto out = open_output(common, "ecdf.csv");
      out << "km,cumulative_prob\n";
      for (const auto& [km, cum] : decay.ecdf)
        out << csv::format_double(km) << ',' << csv::format_double(cum) << '\n';
    }
    {
      auto out = open_output(common, "loglog.csv");
      out << "bin_center_km,ln_km,ln_density,in_fit\n";
      for (const auto& [center, density] : decay.pdf_bins) {
        if (density <= 0.0) continue;
        const bool in_fit = decay.fit_ok && center >= opts.fit_min_km;
        out << csv::format_double(center) << ',' << csv::format_double(std::log(center))
            << ',' << csv::format_double(std::log(density)) << ',' << (in_fit ? 1 : 0)
            << '\n';
      }
    }
  } catch (const NoObservations& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  }

  manifest.write();
  return kExitOk;
}

namespace {

void write_regression_csv(std::ofstream out, const stats::RegressionReport& rep) {
  out << "variable,coefficient,std_error,t,p_value,significance\n";
  for (const auto& var : rep.variables)
    out << csv::escape(var) << ',' << csv::format_double(rep.coefficients.at(var))
        << ',' << csv::format_double(rep.std_errors.at(var)) << ','
        << csv::format_double(rep.t_stats.at(var)) << ','
        << csv::format_double(rep.p_values.at(var)) << ','
        << stats::significance_stars(rep.p_values.at(var)) << '\n';
}

}  // namespace

int cmd_regress(const CommonOptions& common, const RegressOptions& opts) {
  ManifestWriter manifest("regress", common);
  ingest::IngestReport report;
  try {
    report = load_inputs(common);
    manifest.add_scenario_inputs();
  } catch (const Error& e) {
    return map_ingest_errors(e);
  }
  manifest.set_config({
      {"group_by", opts.group_by ? ordered_json(*opts.group_by) : ordered_json(nullptr)},
      {"min_visit_threshold", common.min_visit_threshold},
      {"threads", common.threads},
  });

  try {
    const Scenario& s = report.scenario;
    const auto distances = geo::build_distance_matrix(s, common.threads);
    const auto design = stats::build_visit_design(s, distances);
    if (design.n_dropped_missing > 0)
      std::cerr << "warning: dropped " << design.n_dropped_missing
                << " pairs with missing covariates (complete-case)\n";

    if (!opts.group_by) {
      const auto rep = stats::mlr_fit(design.names, design.rows, design.response);
      write_regression_csv(open_output(common, "regression.csv"), rep);
      std::cout << "r_squared=" << rep.r_squared << " n_obs=" << rep.n_obs << '\n';
    } else {
      // per-brand fits plus an R-squared summary table
      std::map<std::string, std::vector<std::size_t>> groups;
      for (std::size_t r = 0; r < design.rows.size(); ++r)
        groups[s.stores[design.pair_index[r].second].brand].push_back(r);

      auto summary = open_output(common, "r_squared_by_group.csv");
      summary << "group,r_squared,n_obs\n";
      for (const auto& [brand, rows_idx] : groups) {
        std::vector<std::vector<double>> rows;
        std::vector<double> response;
        rows.reserve(rows_idx.size());
        for (std::size_t r : rows_idx) {
          rows.push_back(design.rows[r]);
          response.push_back(design.response[r]);
        }
        const auto rep = stats::mlr_fit(design.names, rows, response);
        write_regression_csv(
            open_output(common, "regression_" + sanitize_for_filename(brand) + ".csv"),
            rep);
        summary << csv::escape(brand) << ',' << csv::format_double(rep.r_squared) << ','
                << rep.n_obs << '\n';
      }
    }
  } catch (const RankDeficient& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRegression;
  } catch (const InsufficientData& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRegression;
  } catch (const ZeroVariance& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRegression;
  } catch (const EmptyDistribution& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRegression;
  }

  manifest.write();
  return kExitOk;
}

int cmd_synth(const CommonOptions& common, const SynthOptions& opts) {
  ManifestWriter manifest("synth", common);
  const auto& spec = opts.spec;
  manifest.set_config({
      {"n_stores", spec.n_stores},
      {"n_neighborhoods", spec.n_neighborhoods},
      {"alpha", spec.true_params.alpha},
      {"beta", spec.true_params.beta},
      {"profile_shape", synth::to_string(spec.profile_shape)},
      {"dirichlet_kappa", spec.dirichlet_kappa},
      {"noise", synth::to_string(spec.noise)},
      {"visits_per_neighborhood", spec.visits_per_neighborhood},
      {"attractiveness_range",
       {spec.attractiveness_range.first, spec.attractiveness_range.second}},
      {"brand", spec.brand},
  });

  try {
    const auto result = synth::generate(spec);
    synth::write_dataset(result, common.out_dir);
  } catch (const ConfigError& e) {
    return map_ingest_errors(e);
  }

  manifest.write();
  return kExitOk;
}

}  // namespace tradewinds::cli
