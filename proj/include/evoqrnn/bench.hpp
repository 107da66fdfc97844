#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evoqrnn/data.hpp"
#include "evoqrnn/objective.hpp"
#include "evoqrnn/strategy.hpp"

namespace evoqrnn::bench {

using optim::Method;
using optim::Phase;
using optim::RunRecord;

enum class DatasetSource { MackeyGlass, Csv };

/// Everything one experiment needs. Keys of the flat config file match the
/// field names (`dataset`, `csv`, `column`, `horizon`, `methods`, `runs`,
/// `seed`, `out`, `loss`, ...).
struct ExperimentConfig {
  DatasetSource dataset = DatasetSource::MackeyGlass;
  std::string csv_path;
  std::string column = "x";
  std::size_t horizon = 4;
  std::vector<Method> methods{Method::Gradient, Method::Cmaes, Method::Hybrid};
  std::size_t gradient_epochs = 100;
  std::size_t cmaes_generations = 11;
  std::size_t hybrid_gradient_epochs = 20;
  std::size_t hybrid_generations = 9;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
  objective::LossMode loss = objective::LossMode::MultiStep;
  std::string out_dir = "results";
  double learning_rate = 0.03;
  double sigma0 = 0.5;
  std::size_t population = 10;
  std::size_t threads = 1;
  data::MackeyGlassParams mackey_glass;

  void validate() const;
  /// Sets one key; throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Resolved configuration in file order; feeding it back through `set`
  /// reproduces the config.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;

  optim::StrategySchedule schedule(Method method, std::size_t run_index) const;
};

/// Applies `key = value` lines (blank lines and `#` comments ignored) on top
/// of `base`.
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});

data::TimeSeriesDataset load_dataset(const ExperimentConfig& cfg);

/// The QRNN forecasting task as seen by the optimizers: training loss on the
/// normalized train split, test metric = relative RMSE of the horizon-step
/// forecast launched from the end of the train split, on raw values.
class ForecastProblem : public optim::TrainingProblem {
 public:
  ForecastProblem(data::TimeSeriesDataset dataset, std::size_t horizon, objective::LossMode mode,
                  qrnn::QrnnConfig cfg = {});

  std::size_t dim() const override { return loss_.config().n_params; }
  double loss(const Eigen::VectorXd& theta) const override { return loss_.value(theta); }
  ValueAndGradient value_and_gradient(const Eigen::VectorXd& theta) const override;
  std::uint64_t gradient_cost() const override { return loss_.shift_evaluations(); }
  double test_metric(const Eigen::VectorXd& theta) const override;

  const objective::ForecastLoss& forecast_loss() const noexcept { return loss_; }
  const data::TimeSeriesDataset& dataset() const noexcept { return dataset_; }

 private:
  data::TimeSeriesDataset dataset_;
  std::size_t horizon_;
  objective::ForecastLoss loss_;
};

struct RunOutcome {
  Method method = Method::Gradient;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::vector<RunRecord> records;
  std::optional<std::string> failure;
};

struct ExperimentResult {
  std::string dataset_name;
  std::uint64_t gradient_cost = 0;
  /// Ordered by (method in config order, run index).
  std::vector<RunOutcome> runs;

  std::size_t failed_runs() const;
};

/// Runs every enabled method for `runs` seeds (seed + run index).
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const optim::TrainingProblem& problem,
                                const std::string& dataset_name);

struct CurvePoint {
  std::size_t epoch = 0;
  Phase phase = Phase::Gradient;
  double effort_x = 0.0;
  double mean_rel_rmse = 0.0;
  double std_rel_rmse = 0.0;
  double mean_circuit_evals = 0.0;
  double mean_train_loss = 0.0;
  /// Re-reports the last gradient epoch of a hybrid run at the start of its
  /// evolutionary segment.
  bool anchor = false;
};

struct MethodAggregate {
  Method method = Method::Gradient;
  std::vector<CurvePoint> points;
  std::size_t successful_runs = 0;
  std::size_t failed_runs = 0;
};

/// Per-epoch mean and sample standard deviation (n - 1; zero for one run)
/// over the successful runs of each method. Methods without a successful run
/// are dropped; throws RuntimeFailure if none is left.
std::vector<MethodAggregate> aggregate(const ExperimentResult& result);

struct SummaryRow {
  Method method = Method::Gradient;
  double lowest_mean_rel_rmse = 0.0;
  std::size_t epoch = 0;
  double std_at_lowest = 0.0;
  std::size_t successful_runs = 0;
  std::size_t failed_runs = 0;
};

std::vector<SummaryRow> summarize(const std::vector<MethodAggregate>& aggregates);

/// Writes curves.csv, summary.csv, records.csv and config.echo into `dir`.
void emit_results(const std::vector<MethodAggregate>& aggregates, const ExperimentResult& result,
                  const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace evoqrnn::bench
