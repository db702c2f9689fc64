#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "test_util.hpp"
#include <json.hpp>

#include "tradewinds/calibrate.hpp"
#include "tradewinds/csv.hpp"
#include "tradewinds/ingest.hpp"
#include "tradewinds/stats.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& stderr_file = "/dev/null") {
  const std::string cmd =
      std::string(TRADEWINDS_CLI_PATH) + " " + args + " >/dev/null 2>" + stderr_file;
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string scenario_flags(const std::string& dir) {
  return " --stores " + dir + "/stores.csv --hourly " + dir + "/hourly.csv --visits " +
         dir + "/visits.csv --neighborhoods " + dir + "/neighborhoods.csv ";
}

// six neighborhoods so the hood-level covariates span enough dimensions for
// the regression design
void write_regression_dataset(const twtest::TempDir& dir) {
  twtest::write_file(dir.file("stores.csv"),
                     "store_id,brand,lat,lon,attractiveness\n"
                     "s0,acme,34.00,-118.30,500\n"
                     "s1,acme,34.10,-118.10,900\n"
                     "s2,acme,34.20,-118.25,200\n");
  std::string hourly = "store_id,hour,visits\n";
  for (const char* id : {"s0", "s1", "s2"})
    for (int t = 0; t < 6; ++t)
      hourly += std::string(id) + "," + std::to_string(t * 20) + "," +
                std::to_string(10 + t) + "\n";
  twtest::write_file(dir.file("hourly.csv"), hourly);
  twtest::write_file(dir.file("neighborhoods.csv"),
                     "cbg_id,lat,lon,population,median_age,median_income,race_a,race_b\n"
                     "n0,34.02,-118.28,1200,33,48000,100,30\n"
                     "n1,34.05,-118.22,2400,41,72000,60,80\n"
                     "n2,34.09,-118.15,900,37,51000,120,10\n"
                     "n3,34.13,-118.12,3100,45,90000,50,50\n"
                     "n4,34.17,-118.20,1800,29,39000,90,25\n"
                     "n5,34.21,-118.27,2600,52,66000,20,70\n");
  std::string visits = "cbg_id,store_id,visits\n";
  int v = 5;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j)
      visits += "n" + std::to_string(i) + ",s" + std::to_string(j) + "," +
                std::to_string(5 + ((v += 7) % 40)) + "\n";
  twtest::write_file(dir.file("visits.csv"), visits);
}

}  // namespace

TEST_CASE("cli: synth writes the dataset files") {
  twtest::TempDir dir;
  const int code = run_cli("synth --stores 3 --neighborhoods 20 --seed 5 --out-dir " +
                           dir.path().string());
  CHECK(code == 0);
  for (const char* name : {"stores.csv", "hourly.csv", "visits.csv",
                           "neighborhoods.csv", "truth.json", "manifest.json"})
    CHECK(fs::exists(dir.path() / name));
}

TEST_CASE("cli: calibrate on synthetic data recovers truth and writes outputs") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  const std::string out = (dir.path() / "out").string();
  REQUIRE(run_cli("synth --stores 4 --neighborhoods 50 --alpha 0.8 --beta 1.2 "
                  "--seed 7 --out-dir " + data) == 0);
  const int code = run_cli("calibrate --model thuff --seed 7 --grid --out-dir " + out +
                           scenario_flags(data));
  CHECK(code == 0);
  CHECK(fs::exists(fs::path(out) / "result.json"));
  CHECK(fs::exists(fs::path(out) / "trace.csv"));
  CHECK(fs::exists(fs::path(out) / "grid.csv"));
  CHECK(fs::exists(fs::path(out) / "manifest.json"));

  const auto result = twtest::read_file((fs::path(out) / "result.json").string());
  CHECK(result.find("\"model\": \"thuff\"") != std::string::npos);

  // grid.csv lays out alpha rows x beta columns: header + 5 rows
  const auto grid = twtest::read_file((fs::path(out) / "grid.csv").string());
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 6);
  CHECK(grid.rfind("alpha,beta=0.1,beta=0.5,beta=1,beta=2,beta=5", 0) == 0);
}

TEST_CASE("cli: calibrated result.json feeds predict and matches truth.json") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  const std::string cal = (dir.path() / "cal").string();
  const std::string out = (dir.path() / "out").string();
  REQUIRE(run_cli("synth --stores 4 --neighborhoods 60 --alpha 0.7 --beta 1.1 "
                  "--seed 21 --out-dir " + data) == 0);
  REQUIRE(run_cli("calibrate --model thuff --seed 21 --out-dir " + cal +
                  scenario_flags(data)) == 0);

  const auto truth = nlohmann::json::parse(twtest::read_file(data + "/truth.json"));
  const auto result = nlohmann::json::parse(twtest::read_file(cal + "/result.json"));
  CHECK(std::abs(result["alpha"].get<double>() - truth["alpha"].get<double>()) < 0.05);
  CHECK(std::abs(result["beta"].get<double>() - truth["beta"].get<double>()) < 0.05);

  CHECK(run_cli("predict --model thuff --result " + cal + "/result.json "
                "--weight-by visits --out-dir " + out + scenario_flags(data)) == 0);
  CHECK(fs::exists(fs::path(out) / "winners.csv"));
}

TEST_CASE("cli: grid-only skips the swarm and matches the library values") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  const std::string out = (dir.path() / "out").string();
  REQUIRE(run_cli("synth --stores 3 --neighborhoods 20 --seed 3 --out-dir " + data) == 0);
  CHECK(run_cli("calibrate --grid-only --model huff --out-dir " + out +
                scenario_flags(data)) == 0);
  CHECK(fs::exists(fs::path(out) / "grid.csv"));
  CHECK_FALSE(fs::exists(fs::path(out) / "result.json"));

  // first cell of the table equals objective(alpha=0.1, beta=0.1)
  const auto report = tradewinds::ingest::load_scenario(
      data + "/stores.csv", data + "/hourly.csv", data + "/visits.csv",
      data + "/neighborhoods.csv");
  const auto d = tradewinds::geo::build_distance_matrix(report.scenario);
  const double expected = tradewinds::calibrate::objective(
      report.scenario, d, tradewinds::models::ModelKind::kHuff, {0.1, 0.1});
  std::ifstream grid((fs::path(out) / "grid.csv").string());
  std::string header, first_row;
  std::getline(grid, header);
  std::getline(grid, first_row);
  const auto c1 = first_row.find(',');
  const auto c2 = first_row.find(',', c1 + 1);
  CHECK(first_row.substr(0, c1) == "0.1");
  CHECK(std::stod(first_row.substr(c1 + 1, c2 - c1 - 1)) == expected);
}

TEST_CASE("cli: missing input file exits 2 and names the file") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  REQUIRE(run_cli("synth --stores 3 --neighborhoods 10 --seed 1 --out-dir " + data) == 0);
  fs::remove(fs::path(data) / "visits.csv");
  const std::string err = dir.file("stderr.txt");
  const int code = run_cli("calibrate --out-dir " + (dir.path() / "o").string() +
                               scenario_flags(data), err);
  CHECK(code == 2);
  CHECK(twtest::read_file(err).find("visits.csv") != std::string::npos);
}

TEST_CASE("cli: single-store scenario is non-calibratable (exit 3)") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  REQUIRE(run_cli("synth --stores 1 --neighborhoods 12 --seed 2 --out-dir " + data) == 0);
  const int code = run_cli("calibrate --model huff --out-dir " +
                           (dir.path() / "out").string() + scenario_flags(data));
  CHECK(code == 3);
  // result.json still records the degenerate flag
  const auto result =
      twtest::read_file((dir.path() / "out" / "result.json").string());
  CHECK(result.find("\"degenerate\": true") != std::string::npos);
}

TEST_CASE("cli: predict writes shares, winners, store shares, and geojson") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  const std::string out = (dir.path() / "out").string();
  REQUIRE(run_cli("synth --stores 1 --neighborhoods 8 --seed 4 --out-dir " + data) == 0);
  CHECK(run_cli("predict --model huff --alpha 1 --beta 1 --out-dir " + out +
                scenario_flags(data)) == 0);
  // single store: every neighborhood is assigned to it with probability 1
  const auto winners = twtest::read_file((fs::path(out) / "winners.csv").string());
  CHECK(std::count(winners.begin(), winners.end(), '\n') == 9);
  CHECK(winners.find("s0,1") != std::string::npos);
  CHECK(winners.find("s1") == std::string::npos);
  const auto geojson =
      twtest::read_file((fs::path(out) / "neighborhoods.geojson").string());
  CHECK(geojson.find("FeatureCollection") != std::string::npos);
  CHECK(fs::exists(fs::path(out) / "store_shares.csv"));
  CHECK(fs::exists(fs::path(out) / "shares.csv"));
}

TEST_CASE("cli: predict hour slice matches the library and diff is zero on exact data") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  const std::string out = (dir.path() / "out").string();
  REQUIRE(run_cli("synth --stores 3 --neighborhoods 10 --alpha 0.9 --beta 0.7 "
                  "--seed 6 --out-dir " + data) == 0);
  CHECK(run_cli("predict --model ahuff --alpha 0.9 --beta 0.7 --hour 17 --diff "
                "--out-dir " + out + scenario_flags(data)) == 0);

  const auto report = tradewinds::ingest::load_scenario(
      data + "/stores.csv", data + "/hourly.csv", data + "/visits.csv",
      data + "/neighborhoods.csv");
  const auto d = tradewinds::geo::build_distance_matrix(report.scenario);
  const auto pred = tradewinds::models::predict_ahuff(report.scenario, d, {0.9, 0.7});

  // spot-check one row of shares.csv against the tensor slice
  std::ifstream shares((fs::path(out) / "shares.csv").string());
  std::string header, first;
  std::getline(shares, header);
  std::getline(shares, first);
  CHECK(header == "cbg_id,store_id,probability,hour");
  const auto last_comma = first.rfind(',');
  CHECK(first.substr(last_comma + 1) == "17");
  const auto second_comma = first.find(',', first.find(',') + 1);
  const double value =
      std::stod(first.substr(second_comma + 1, last_comma - second_comma - 1));
  CHECK(std::abs(value - pred.at(0, 0, 17)) < 1e-12);

  // synthetic visits are exact Huff draws, so prediction equals observation
  const auto diff_summary =
      twtest::read_file((fs::path(out) / "diff_summary.json").string());
  CHECK(fs::exists(fs::path(out) / "diff.csv"));
  const auto mean_abs_pos = diff_summary.find("\"mean_abs\": ");
  REQUIRE(mean_abs_pos != std::string::npos);
  const double mean_abs = std::stod(diff_summary.substr(mean_abs_pos + 12));
  CHECK(mean_abs < 1e-9);
}

TEST_CASE("cli: predict rejects an hour slice for the static model (exit 4)") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  REQUIRE(run_cli("synth --stores 2 --neighborhoods 6 --seed 8 --out-dir " + data) == 0);
  CHECK(run_cli("predict --model huff --alpha 1 --beta 1 --hour 17 --out-dir " +
                (dir.path() / "out").string() + scenario_flags(data)) == 4);
}

TEST_CASE("cli: decay writes summaries and fails cleanly without observations") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  const std::string out = (dir.path() / "out").string();
  REQUIRE(run_cli("synth --stores 3 --neighborhoods 30 --seed 9 --out-dir " + data) == 0);
  CHECK(run_cli("decay --bins 20 --out-dir " + out + scenario_flags(data)) == 0);
  for (const char* name : {"decay.json", "pdf.csv", "ecdf.csv", "loglog.csv"})
    CHECK(fs::exists(fs::path(out) / name));

  twtest::write_file(data + "/visits.csv", "cbg_id,store_id,visits\n");
  CHECK(run_cli("decay --out-dir " + out + scenario_flags(data)) == 3);
}

TEST_CASE("cli: regress writes stars and grouped output matches pooled") {
  twtest::TempDir dir;
  write_regression_dataset(dir);
  const std::string out = (dir.path() / "out").string();
  CHECK(run_cli("regress --out-dir " + out + scenario_flags(dir.path().string())) == 0);
  const auto pooled = twtest::read_file((fs::path(out) / "regression.csv").string());
  CHECK(pooled.rfind("variable,coefficient,std_error,t,p_value,significance", 0) == 0);
  CHECK(pooled.find("intercept,") != std::string::npos);
  CHECK(pooled.find("entropy,") != std::string::npos);

  // single group: per-group report equals the pooled one
  CHECK(run_cli("regress --group-by brand --out-dir " + out +
                scenario_flags(dir.path().string())) == 0);
  const auto grouped =
      twtest::read_file((fs::path(out) / "regression_acme.csv").string());
  CHECK(grouped == pooled);
  const auto summary =
      twtest::read_file((fs::path(out) / "r_squared_by_group.csv").string());
  CHECK(summary.rfind("group,r_squared,n_obs", 0) == 0);
  CHECK(summary.find("acme,") != std::string::npos);
}

TEST_CASE("cli: regress on an exactly linear response reports R^2 of one") {
  twtest::TempDir dir;
  write_regression_dataset(dir);
  // rebuild visits so the response is an exact linear function of the design
  twtest::write_file(dir.file("visits.csv"), "cbg_id,store_id,visits\n");
  const auto probe = tradewinds::ingest::load_scenario(
      dir.file("stores.csv"), dir.file("hourly.csv"), dir.file("visits.csv"),
      dir.file("neighborhoods.csv"));
  const auto d = tradewinds::geo::build_distance_matrix(probe.scenario);
  std::string visits = "cbg_id,store_id,visits\n";
  for (std::size_t i = 0; i < probe.scenario.neighborhoods.size(); ++i) {
    const auto& nb = probe.scenario.neighborhoods[i];
    for (std::size_t j = 0; j < probe.scenario.stores.size(); ++j) {
      const double v = 40.0 + 0.01 * probe.scenario.stores[j].attractiveness +
                       2.0 * d.at(i, j) + 0.001 * nb.population +
                       3.0 * tradewinds::stats::shannon_entropy(nb.race_counts);
      visits += nb.id + "," + probe.scenario.stores[j].id + "," +
                tradewinds::csv::format_double(v) + "\n";
    }
  }
  twtest::write_file(dir.file("visits.csv"), visits);

  const std::string out = (dir.path() / "out").string();
  CHECK(run_cli("regress --group-by brand --out-dir " + out +
                scenario_flags(dir.path().string())) == 0);
  const auto summary =
      twtest::read_file((fs::path(out) / "r_squared_by_group.csv").string());
  CHECK(summary.find("acme,1,") != std::string::npos);
}

TEST_CASE("cli: regress without covariates exits 5") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  REQUIRE(run_cli("synth --stores 3 --neighborhoods 30 --seed 10 --out-dir " + data) ==
          0);  // synthetic neighborhoods carry no demographics
  CHECK(run_cli("regress --out-dir " + (dir.path() / "out").string() +
                scenario_flags(data)) == 5);
}

TEST_CASE("cli: thread count does not change seeded outputs") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  REQUIRE(run_cli("synth --stores 3 --neighborhoods 30 --seed 13 --out-dir " + data) == 0);
  const std::string out1 = (dir.path() / "t1").string();
  const std::string out4 = (dir.path() / "t4").string();
  REQUIRE(run_cli("predict --model thuff --alpha 0.8 --beta 1.2 --seed 13 "
                  "--threads 1 --out-dir " + out1 + scenario_flags(data)) == 0);
  REQUIRE(run_cli("predict --model thuff --alpha 0.8 --beta 1.2 --seed 13 "
                  "--threads 4 --out-dir " + out4 + scenario_flags(data)) == 0);
  for (const char* name : {"shares.csv", "winners.csv", "store_shares.csv",
                           "neighborhoods.geojson"})
    CHECK(twtest::read_file((fs::path(out1) / name).string()) ==
          twtest::read_file((fs::path(out4) / name).string()));
}

TEST_CASE("cli: calibrate honors a config file with flag overrides") {
  twtest::TempDir dir;
  const std::string data = (dir.path() / "data").string();
  const std::string out = (dir.path() / "out").string();
  REQUIRE(run_cli("synth --stores 3 --neighborhoods 20 --seed 11 --out-dir " + data) == 0);
  twtest::write_file(dir.file("pso.conf"),
                     "particles = 4\nrestarts = 2\niterations = 30\nseed = 123\n");
  CHECK(run_cli("calibrate --config " + dir.file("pso.conf") +
                " --restarts 1 --out-dir " + out + scenario_flags(data)) == 0);
  const auto manifest = twtest::read_file((fs::path(out) / "manifest.json").string());
  CHECK(manifest.find("\"particles\": 4") != std::string::npos);   // from file
  CHECK(manifest.find("\"restarts\": 1") != std::string::npos);    // flag wins
  const auto result = twtest::read_file((fs::path(out) / "result.json").string());
  CHECK(result.find("\"seed\": 123") != std::string::npos);        // file seed used
}
