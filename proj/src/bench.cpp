#include "evoqrnn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "evoqrnn/errors.hpp"

namespace evoqrnn::bench {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const std::string v = trim(value);
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("invalid value '" + value + "' for '" + key + "'");
  }
  return out;
}

std::vector<Method> parse_methods(const std::string& value) {
  std::vector<Method> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const Method m = optim::parse_method(item);
    if (std::find(out.begin(), out.end(), m) != out.end()) throw ConfigError("method listed twice: " + item);
    out.push_back(m);
  }
  if (out.empty()) throw ConfigError("no methods selected");
  return out;
}

std::string join_methods(const std::vector<Method>& methods) {
  std::string out;
  for (auto m : methods) {
    if (!out.empty()) out += ',';
    out += optim::to_string(m);
  }
  return out;
}

std::string_view to_string(objective::LossMode mode) {
  return mode == objective::LossMode::OneStep ? "one-step" : "multi-step";
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  if (horizon > data::kProtocolPoints - data::kProtocolTrain) {
    throw ConfigError("horizon cannot exceed the 20-point test split");
  }
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (methods.empty()) throw ConfigError("no methods selected");
  if (dataset == DatasetSource::Csv && csv_path.empty()) throw ConfigError("--dataset csv needs --csv <path>");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  for (auto m : methods) schedule(m, 0).validate();
  mackey_glass.validate();
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "dataset") {
    if (value == "mackey-glass") dataset = DatasetSource::MackeyGlass;
    else if (value == "csv") dataset = DatasetSource::Csv;
    else throw ConfigError("dataset must be 'mackey-glass' or 'csv', got '" + value + "'");
  } else if (key == "csv") {
    csv_path = value;
  } else if (key == "column") {
    column = value;
  } else if (key == "horizon") {
    horizon = parse_number<std::size_t>(key, value);
  } else if (key == "methods") {
    methods = parse_methods(value);
  } else if (key == "gradient_epochs") {
    gradient_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "cmaes_generations") {
    cmaes_generations = parse_number<std::size_t>(key, value);
  } else if (key == "hybrid_gradient_epochs") {
    hybrid_gradient_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "hybrid_generations") {
    hybrid_generations = parse_number<std::size_t>(key, value);
  } else if (key == "runs") {
    runs = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "out") {
    out_dir = value;
  } else if (key == "loss") {
    if (value == "multi-step") loss = objective::LossMode::MultiStep;
    else if (value == "one-step") loss = objective::LossMode::OneStep;
    else throw ConfigError("loss must be 'one-step' or 'multi-step', got '" + value + "'");
  } else if (key == "learning_rate") {
    learning_rate = parse_number<double>(key, value);
  } else if (key == "sigma0") {
    sigma0 = parse_number<double>(key, value);
  } else if (key == "population") {
    population = parse_number<std::size_t>(key, value);
  } else if (key == "threads") {
    threads = parse_number<std::size_t>(key, value);
  } else if (key == "mg_dt") {
    mackey_glass.dt = parse_number<double>(key, value);
  } else if (key == "mg_stride") {
    mackey_glass.stride = parse_number<double>(key, value);
  } else if (key == "mg_x0") {
    mackey_glass.x0 = parse_number<double>(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::to_key_values() const {
  return {
      {"dataset", dataset == DatasetSource::Csv ? "csv" : "mackey-glass"},
      {"csv", csv_path},
      {"column", column},
      {"horizon", std::to_string(horizon)},
      {"methods", join_methods(methods)},
      {"gradient_epochs", std::to_string(gradient_epochs)},
      {"cmaes_generations", std::to_string(cmaes_generations)},
      {"hybrid_gradient_epochs", std::to_string(hybrid_gradient_epochs)},
      {"hybrid_generations", std::to_string(hybrid_generations)},
      {"runs", std::to_string(runs)},
      {"seed", std::to_string(seed)},
      {"out", out_dir},
      {"loss", std::string(to_string(loss))},
      {"learning_rate", format_double(learning_rate)},
      {"sigma0", format_double(sigma0)},
      {"population", std::to_string(population)},
      {"threads", std::to_string(threads)},
      {"mg_dt", format_double(mackey_glass.dt)},
      {"mg_stride", format_double(mackey_glass.stride)},
      {"mg_x0", format_double(mackey_glass.x0)},
  };
}

optim::StrategySchedule ExperimentConfig::schedule(Method method, std::size_t run_index) const {
  optim::StrategySchedule s = optim::StrategySchedule::for_method(method, seed + run_index);
  switch (method) {
    case Method::Gradient: s.gradient_epochs = gradient_epochs; break;
    case Method::Cmaes: s.evo_generations = cmaes_generations; break;
    case Method::Hybrid:
      s.gradient_epochs = hybrid_gradient_epochs;
      s.evo_generations = hybrid_generations;
      break;
  }
  s.learning_rate = learning_rate;
  s.sigma0 = sigma0;
  s.population = population;
  return s;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

data::TimeSeriesDataset load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset == DatasetSource::MackeyGlass) {
    return data::split_80_20(data::mackey_glass(cfg.mackey_glass, data::kProtocolPoints), "mackey-glass");
  }
  const auto series = data::load_csv(cfg.csv_path, cfg.column);
  return data::split_80_20(series, std::filesystem::path(cfg.csv_path).stem().string() + ":" + cfg.column);
}

ForecastProblem::ForecastProblem(data::TimeSeriesDataset dataset, std::size_t horizon, objective::LossMode mode,
                                 qrnn::QrnnConfig cfg)
    : dataset_(std::move(dataset)),
      horizon_(horizon),
      loss_(std::vector<double>(dataset_.train_norm().begin(), dataset_.train_norm().end()),
            objective::LossSpec{mode, horizon}, cfg) {
  if (horizon_ > dataset_.test_size) throw ConfigError("horizon exceeds the test split");
}

optim::TrainingProblem::ValueAndGradient ForecastProblem::value_and_gradient(const Eigen::VectorXd& theta) const {
  auto vg = loss_.value_and_gradient(theta);
  return {vg.value, std::move(vg.gradient)};
}

double ForecastProblem::test_metric(const Eigen::VectorXd& theta) const {
  const qrnn::RecurrentCell cell(theta, loss_.config());
  const auto pred = cell.forecast(dataset_.train_norm(), horizon_);
  const auto pred_raw = data::denormalize(pred, dataset_.scaler);
  return objective::rel_rmse(pred_raw, dataset_.test_raw().first(horizon_));
}

std::size_t ExperimentResult::failed_runs() const {
  return static_cast<std::size_t>(
      std::count_if(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.failure.has_value(); }));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const optim::TrainingProblem& problem,
                                const std::string& dataset_name) {
  cfg.validate();
  ExperimentResult result;
  result.dataset_name = dataset_name;
  result.gradient_cost = problem.gradient_cost();
  for (auto m : cfg.methods) {
    for (std::size_t r = 0; r < cfg.runs; ++r) {
      RunOutcome o;
      o.method = m;
      o.run_index = r;
      o.seed = cfg.seed + r;
      result.runs.push_back(std::move(o));
    }
  }

  auto job = [&](RunOutcome& o) {
    try {
      auto res = optim::run_strategy(cfg.schedule(o.method, o.run_index), problem);
      o.records = std::move(res.records);
      o.failure = std::move(res.failure);
    } catch (const std::exception& e) {
      o.failure = e.what();
    }
  };

  const std::size_t n_threads = std::min(cfg.threads, result.runs.size());
  if (n_threads <= 1) {
    for (auto& o : result.runs) job(o);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < result.runs.size(); i = next++) job(result.runs[i]);
      });
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ForecastProblem problem(load_dataset(cfg), cfg.horizon, cfg.loss);
  return run_experiment(cfg, problem, problem.dataset().name);
}

std::vector<MethodAggregate> aggregate(const ExperimentResult& result) {
  std::vector<MethodAggregate> out;
  for (const auto& run : result.runs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const MethodAggregate& a) { return a.method == run.method; });
    if (it == out.end()) {
      out.push_back(MethodAggregate{run.method, {}, 0, 0});
      it = std::prev(out.end());
    }
    if (run.failure) ++it->failed_runs;
    else ++it->successful_runs;
  }

  for (auto& agg : out) {
    // epoch -> per-run records
    std::map<std::size_t, std::vector<const RunRecord*>> by_epoch;
    for (const auto& run : result.runs) {
      if (run.method != agg.method || run.failure) continue;
      for (const auto& rec : run.records) by_epoch[rec.epoch].push_back(&rec);
    }
    for (const auto& [epoch, recs] : by_epoch) {
      std::vector<double> err, evals, train;
      for (const auto* r : recs) {
        err.push_back(r->test_rel_rmse);
        evals.push_back(static_cast<double>(r->circuit_evals));
        train.push_back(r->train_loss);
      }
      CurvePoint p;
      p.epoch = epoch;
      p.phase = recs.front()->phase;
      p.effort_x = recs.front()->effort_x;
      p.mean_rel_rmse = mean_of(err);
      p.std_rel_rmse = sample_std(err, p.mean_rel_rmse);
      p.mean_circuit_evals = mean_of(evals);
      p.mean_train_loss = mean_of(train);
      if (!agg.points.empty() && agg.points.back().phase == Phase::Gradient && p.phase == Phase::Evolution) {
        CurvePoint anchor = agg.points.back();
        anchor.phase = Phase::Evolution;
        anchor.effort_x = static_cast<double>(anchor.epoch) + optim::kEvolutionEffortOffset;
        anchor.anchor = true;
        agg.points.push_back(anchor);
      }
      agg.points.push_back(p);
    }
  }

  std::erase_if(out, [](const MethodAggregate& a) { return a.successful_runs == 0; });
  if (out.empty()) throw RuntimeFailure("no successful runs to aggregate");
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<MethodAggregate>& aggregates) {
  std::vector<SummaryRow> rows;
  for (const auto& agg : aggregates) {
    if (agg.points.empty()) continue;
    const auto best = std::min_element(agg.points.begin(), agg.points.end(), [](const CurvePoint& a, const CurvePoint& b) {
      return a.mean_rel_rmse < b.mean_rel_rmse;
    });
    rows.push_back({agg.method, best->mean_rel_rmse, best->epoch, best->std_rel_rmse, agg.successful_runs,
                    agg.failed_runs});
  }
  return rows;
}

void emit_results(const std::vector<MethodAggregate>& aggregates, const ExperimentResult& result,
                  const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create output directory '" + dir.string() + "': " + ec.message());

  {
    auto out = open_out(dir / "curves.csv");
    out << "method,epoch,effort_x,mean_rel_rmse,std_rel_rmse,mean_circuit_evals,mean_train_loss,phase,anchor\n";
    for (const auto& agg : aggregates) {
      for (const auto& p : agg.points) {
        out << optim::to_string(agg.method) << ',' << p.epoch << ',' << format_double(p.effort_x) << ','
            << format_double(p.mean_rel_rmse) << ',' << format_double(p.std_rel_rmse) << ','
            << format_double(p.mean_circuit_evals) << ',' << format_double(p.mean_train_loss) << ','
            << optim::to_string(p.phase) << ',' << (p.anchor ? 1 : 0) << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "summary.csv");
    out << "method,lowest_mean_rel_rmse,epoch,std_at_lowest,successful_runs,failed_runs\n";
    for (const auto& row : summarize(aggregates)) {
      out << optim::to_string(row.method) << ',' << format_double(row.lowest_mean_rel_rmse) << ',' << row.epoch << ','
          << format_double(row.std_at_lowest) << ',' << row.successful_runs << ',' << row.failed_runs << '\n';
    }
  }
  {
    auto out = open_out(dir / "records.csv");
    out << "method,seed,epoch,phase,circuit_evals,effort_x,train_loss,test_rel_rmse,status\n";
    for (const auto& run : result.runs) {
      for (const auto& r : run.records) {
        out << optim::to_string(r.method) << ',' << r.seed << ',' << r.epoch << ',' << optim::to_string(r.phase) << ','
            << r.circuit_evals << ',' << format_double(r.effort_x) << ',' << format_double(r.train_loss) << ','
            << format_double(r.test_rel_rmse) << ',' << (run.failure ? "failed" : "ok") << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "config.echo");
    out << "# dataset: " << result.dataset_name << '\n';
    for (const auto& [k, v] : cfg.to_key_values()) out << k << " = " << v << '\n';
    for (const auto& run : result.runs) {
      if (run.failure) {
        out << "# failed: " << optim::to_string(run.method) << " seed " << run.seed << ": " << *run.failure << '\n';
      }
    }
  }
}

}  // namespace evoqrnn::bench
