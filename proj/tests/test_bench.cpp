#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "evoqrnn/bench.hpp"
#include "evoqrnn/errors.hpp"

using namespace evoqrnn;
using namespace evoqrnn::bench;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("evoqrnn_bench_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

RunOutcome outcome(Method m, std::uint64_t seed, std::vector<double> errs, bool failed = false) {
  RunOutcome o;
  o.method = m;
  o.seed = seed;
  for (std::size_t i = 0; i < errs.size(); ++i) {
    RunRecord r;
    r.method = m;
    r.seed = seed;
    r.epoch = i + 1;
    r.circuit_evals = 10 * (i + 1);
    r.effort_x = static_cast<double>(i + 1);
    r.test_rel_rmse = errs[i];
    o.records.push_back(r);
  }
  if (failed) o.failure = "poisoned";
  return o;
}

/// Tiny but real configuration: short budgets on generated data.
ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.horizon = 2;
  cfg.gradient_epochs = 3;
  cfg.cmaes_generations = 2;
  cfg.hybrid_gradient_epochs = 2;
  cfg.hybrid_generations = 2;
  cfg.runs = 2;
  cfg.seed = 5;
  cfg.loss = objective::LossMode::OneStep;
  return cfg;
}

}  // namespace

TEST_CASE("aggregate") {
  SUBCASE("single run has zero spread") {
    ExperimentResult r;
    r.runs.push_back(outcome(Method::Cmaes, 0, {0.5, 0.4}));
    const auto agg = aggregate(r);
    REQUIRE(agg.size() == 1);
    for (const auto& p : agg[0].points) CHECK(p.std_rel_rmse == 0.0);
  }
  SUBCASE("mean and sample standard deviation") {
    ExperimentResult r;
    r.runs.push_back(outcome(Method::Cmaes, 0, {1.0}));
    r.runs.push_back(outcome(Method::Cmaes, 1, {3.0}));
    const auto agg = aggregate(r);
    CHECK(agg[0].points[0].mean_rel_rmse == 2.0);
    CHECK(agg[0].points[0].std_rel_rmse == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("failed runs are skipped and counted") {
    ExperimentResult r;
    r.runs.push_back(outcome(Method::Gradient, 0, {1.0, 0.5}));
    r.runs.push_back(outcome(Method::Gradient, 1, {100.0}, true));
    const auto agg = aggregate(r);
    CHECK(agg[0].successful_runs == 1);
    CHECK(agg[0].failed_runs == 1);
    CHECK(agg[0].points.size() == 2);
    CHECK(agg[0].points[0].mean_rel_rmse == 1.0);
  }
  SUBCASE("nothing to aggregate") {
    ExperimentResult r;
    r.runs.push_back(outcome(Method::Gradient, 0, {1.0}, true));
    CHECK_THROWS_AS(aggregate(r), RuntimeFailure);
  }
}

TEST_CASE("config keys") {
  ExperimentConfig cfg;
  cfg.set("horizon", "7");
  cfg.set("methods", "cmaes, hybrid");
  cfg.set("loss", "one-step");
  cfg.set("seed", "12");
  CHECK(cfg.horizon == 7);
  CHECK(cfg.methods == std::vector<Method>{Method::Cmaes, Method::Hybrid});
  CHECK_THROWS_AS(cfg.set("colour", "red"), ConfigError);
  CHECK_THROWS_AS(cfg.set("horizon", "seven"), ConfigError);
  CHECK_THROWS_AS(cfg.set("methods", "cmaes,cmaes"), ConfigError);
  CHECK_THROWS_AS(cfg.set("dataset", "gold"), ConfigError);

  // The echo is itself a valid config file.
  const auto path = std::filesystem::temp_directory_path() / "evoqrnn_echo.cfg";
  {
    std::ofstream out(path);
    out << "# comment\n\n";
    for (const auto& [k, v] : cfg.to_key_values()) out << k << " = " << v << '\n';
  }
  const auto back = load_config_file(path);
  CHECK(back.to_key_values() == cfg.to_key_values());

  ExperimentConfig bad;
  bad.horizon = 21;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.dataset = DatasetSource::Csv;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("forecast problem on generated data") {
  const ExperimentConfig cfg;
  const ForecastProblem p(load_dataset(cfg), 4, objective::LossMode::MultiStep);
  CHECK(p.dim() == 24);
  CHECK(p.forecast_loss().ansatz_occurrences() == 76 + 76 * 3);
  CHECK(p.gradient_cost() == 60 * 304 + 6 * 228);

  // Zero forecast gives relative error exactly 1 on raw values only when the
  // scaler maps 0 to 0, so check against the definition directly.
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(24, 0.3);
  const auto pred = qrnn::RecurrentCell(theta, {}).forecast(p.dataset().train_norm(), 4);
  const auto raw = data::denormalize(pred, p.dataset().scaler);
  CHECK(p.test_metric(theta) == objective::rel_rmse(raw, p.dataset().test_raw().first(4)));
}

TEST_CASE("experiment outputs") {
  const auto cfg = small_config();
  const auto result = run_experiment(cfg);
  REQUIRE(result.runs.size() == 6);
  CHECK(result.failed_runs() == 0);
  std::size_t total = 0;
  for (const auto& r : result.runs) total += r.records.size();
  CHECK(total == 2 * (3 + 2 + 4));

  const auto agg = aggregate(result);
  const auto dir = scratch_dir("small");
  emit_results(agg, result, cfg, dir);
  for (const char* f : {"curves.csv", "summary.csv", "records.csv", "config.echo"}) {
    CHECK(std::filesystem::exists(dir / f));
  }

  const auto summary = summarize(agg);
  CHECK(summary.size() == cfg.methods.size());

  // summary minimum equals the minimum over the curve rows of each method
  const auto curve_err = data::load_csv(dir / "curves.csv", "mean_rel_rmse");
  const auto curve_epoch = data::load_csv(dir / "curves.csv", "epoch");
  const auto curve_effort = data::load_csv(dir / "curves.csv", "effort_x");
  std::size_t row = 0;
  for (const auto& a : agg) {
    double lo = INFINITY;
    for (std::size_t i = 0; i < a.points.size(); ++i, ++row) {
      CHECK(curve_err[row] == a.points[i].mean_rel_rmse);
      CHECK(curve_epoch[row] == static_cast<double>(a.points[i].epoch));
      lo = std::min(lo, curve_err[row]);
    }
    const auto s = std::find_if(summary.begin(), summary.end(), [&](const SummaryRow& r) { return r.method == a.method; });
    CHECK(s->lowest_mean_rel_rmse == lo);
  }
  CHECK(row == curve_err.size());

  // the hybrid curve re-reports its last gradient point where the evolutionary segment starts
  const auto& hybrid = agg[2];
  REQUIRE(hybrid.method == Method::Hybrid);
  REQUIRE(hybrid.points.size() == 5);
  CHECK(hybrid.points[2].anchor);
  CHECK(hybrid.points[2].mean_rel_rmse == hybrid.points[1].mean_rel_rmse);
  CHECK(hybrid.points[2].effort_x == 22.0);
  CHECK(hybrid.points[3].effort_x == 23.0);
  CHECK(agg[1].points[0].effort_x == 21.0);
  (void)curve_effort;

  // identical config -> byte-identical files
  const auto dir2 = scratch_dir("small2");
  const auto again = run_experiment(cfg);
  emit_results(aggregate(again), again, cfg, dir2);
  for (const char* f : {"curves.csv", "summary.csv", "records.csv"}) CHECK(slurp(dir / f) == slurp(dir2 / f));

  // threads do not change the result
  auto threaded = cfg;
  threaded.threads = 3;
  const auto par = run_experiment(threaded);
  const auto dir3 = scratch_dir("small3");
  emit_results(aggregate(par), par, cfg, dir3);
  for (const char* f : {"curves.csv", "summary.csv", "records.csv"}) CHECK(slurp(dir / f) == slurp(dir3 / f));
}

TEST_CASE("dataset errors") {
  ExperimentConfig cfg;
  cfg.dataset = DatasetSource::Csv;
  const auto path = std::filesystem::temp_directory_path() / "evoqrnn_bench_data.csv";
  {
    std::ofstream out(path);
    out << "t,price\n";
    for (int i = 0; i < 120; ++i) out << i << ',' << 100 + std::sin(i * 0.3) << '\n';
  }
  cfg.csv_path = path.string();
  cfg.column = "price";
  CHECK(load_dataset(cfg).raw.size() == 100);
  cfg.column = "close";
  try {
    load_dataset(cfg);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("close") != std::string::npos);
  }
}
