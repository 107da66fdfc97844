#include "evoqrnn/strategy.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "evoqrnn/adam.hpp"
#include "evoqrnn/cmaes.hpp"
#include "evoqrnn/errors.hpp"

namespace evoqrnn::optim {

using Eigen::VectorXd;

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Gradient: return "gradient";
    case Method::Cmaes: return "cmaes";
    case Method::Hybrid: return "hybrid";
  }
  return "?";
}

std::string_view to_string(Phase p) noexcept { return p == Phase::Gradient ? "gradient" : "evolution"; }

Method parse_method(std::string_view name) {
  if (name == "gradient") return Method::Gradient;
  if (name == "cmaes") return Method::Cmaes;
  if (name == "hybrid") return Method::Hybrid;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected gradient, cmaes or hybrid)");
}

StrategySchedule StrategySchedule::for_method(Method method, std::uint64_t seed) {
  StrategySchedule s;
  s.method = method;
  s.seed = seed;
  switch (method) {
    case Method::Gradient: s.gradient_epochs = 100; s.evo_generations = 0; break;
    case Method::Cmaes: s.gradient_epochs = 0; s.evo_generations = 11; break;
    case Method::Hybrid: s.gradient_epochs = 20; s.evo_generations = 9; break;
  }
  return s;
}

void StrategySchedule::validate() const {
  switch (method) {
    case Method::Gradient:
      if (gradient_epochs == 0 || evo_generations != 0) throw ConfigError("gradient schedule needs only gradient epochs");
      break;
    case Method::Cmaes:
      if (evo_generations == 0 || gradient_epochs != 0) throw ConfigError("cmaes schedule needs only generations");
      break;
    case Method::Hybrid:
      if (gradient_epochs == 0 || evo_generations == 0) throw ConfigError("hybrid schedule needs both budgets");
      break;
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
  if (population < 2) throw ConfigError("population must be at least 2");
}

std::uint64_t expected_circuit_evals(const StrategySchedule& schedule, std::uint64_t gradient_cost,
                                     std::size_t epoch) {
  const std::size_t grad = std::min(epoch, schedule.gradient_epochs);
  const std::size_t evo = epoch - grad;
  std::uint64_t total = 0;
  if (schedule.gradient_epochs > 0) total += 1 + grad * (gradient_cost + 1);
  total += evo * schedule.population;
  return total;
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

VectorXd uniform_start(std::uint64_t seed, std::size_t dim) {
  std::mt19937_64 rng(stream_seed(seed, 0));
  std::uniform_real_distribution<double> uniform(-std::numbers::pi, std::numbers::pi);
  VectorXd theta(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = uniform(rng);
  return theta;
}

class Runner {
 public:
  Runner(const StrategySchedule& schedule, const TrainingProblem& problem, StrategyResult& result)
      : schedule_(schedule), problem_(problem), result_(result) {}

  VectorXd gradient_phase(VectorXd theta) {
    AdamState adam = AdamState::init(problem_.dim(), schedule_.learning_rate);
    evals_ += 1;  // starting point
    for (std::size_t e = 0; e < schedule_.gradient_epochs; ++e) {
      const auto vg = problem_.value_and_gradient(theta);
      if (!std::isfinite(vg.value)) throw RuntimeFailure("non-finite training loss");
      evals_ += problem_.gradient_cost();
      theta = adam_step(adam, theta, vg.gradient);
      const double loss = problem_.loss(theta);
      evals_ += 1;
      push(Phase::Gradient, loss, problem_.test_metric(theta));
    }
    result_.final_theta = theta;
    return theta;
  }

  void evolution_phase(CmaState cma) {
    for (std::size_t g = 0; g < schedule_.evo_generations; ++g) {
      const auto candidates = cma_ask(cma);
      std::vector<double> fitness(candidates.size());
      for (std::size_t i = 0; i < candidates.size(); ++i) fitness[i] = problem_.loss(candidates[i]);
      evals_ += candidates.size();
      cma_tell(cma, candidates, fitness);

      const std::size_t best = rank_candidates(fitness).front();
      if (std::isnan(fitness[best])) throw RuntimeFailure("every candidate produced a NaN loss");
      result_.final_theta = candidates[best];
      push(Phase::Evolution, fitness[best], problem_.test_metric(candidates[best]));
    }
  }

 private:
  void push(Phase phase, double train, double test) {
    RunRecord r;
    r.method = schedule_.method;
    r.seed = schedule_.seed;
    r.epoch = result_.records.size() + 1;
    r.phase = phase;
    r.circuit_evals = evals_;
    r.effort_x = static_cast<double>(r.epoch) + (phase == Phase::Evolution ? kEvolutionEffortOffset : 0.0);
    r.train_loss = train;
    r.test_rel_rmse = test;
    result_.records.push_back(r);
  }

  const StrategySchedule& schedule_;
  const TrainingProblem& problem_;
  StrategyResult& result_;
  std::uint64_t evals_ = 0;
};

}  // namespace

StrategyResult run_strategy(const StrategySchedule& schedule, const TrainingProblem& problem,
                            const std::optional<VectorXd>& initial) {
  schedule.validate();
  const std::size_t dim = problem.dim();
  if (initial && static_cast<std::size_t>(initial->size()) != dim) {
    throw UsageError("initial point has the wrong dimension");
  }
  const VectorXd start = initial ? *initial : uniform_start(schedule.seed, dim);
  const std::uint64_t cma_seed = stream_seed(schedule.seed, 1);

  StrategyResult result;
  result.final_theta = start;
  Runner runner(schedule, problem, result);
  try {
    switch (schedule.method) {
      case Method::Gradient:
        runner.gradient_phase(start);
        break;
      case Method::Cmaes:
        runner.evolution_phase(cma_init_with_mean(start, cma_seed, schedule.sigma0, schedule.population));
        break;
      case Method::Hybrid: {
        const VectorXd warm = runner.gradient_phase(start);
        runner.evolution_phase(cma_init_with_mean(warm, cma_seed, schedule.sigma0, schedule.population));
        break;
      }
    }
  } catch (const std::exception& e) {
    result.failure = e.what();
  }
  return result;
}

}  // namespace evoqrnn::optim
