#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace evoqrnn::optim {

enum class Method { Gradient, Cmaes, Hybrid };
enum class Phase { Gradient, Evolution };

std::string_view to_string(Method m) noexcept;
std::string_view to_string(Phase p) noexcept;
/// Accepts "gradient", "cmaes", "hybrid"; throws ConfigError otherwise.
Method parse_method(std::string_view name);

/// Plot offset applied to evolutionary epochs on the effort axis.
inline constexpr double kEvolutionEffortOffset = 20.0;

struct StrategySchedule {
  Method method = Method::Gradient;
  std::size_t gradient_epochs = 100;
  std::size_t evo_generations = 0;
  std::uint64_t seed = 0;
  double learning_rate = 0.03;
  double sigma0 = 0.5;
  std::size_t population = 10;

  /// 100 Adam epochs, 11 CMA-ES generations, or 20 + 9 for the hybrid.
  static StrategySchedule for_method(Method method, std::uint64_t seed);
  void validate() const;
  std::size_t total_epochs() const noexcept { return gradient_epochs + evo_generations; }
};

struct RunRecord {
  Method method = Method::Gradient;
  std::uint64_t seed = 0;
  /// 1-based, contiguous across both phases of a hybrid run.
  std::size_t epoch = 0;
  Phase phase = Phase::Gradient;
  std::uint64_t circuit_evals = 0;
  double effort_x = 0.0;
  double train_loss = 0.0;
  double test_rel_rmse = 0.0;
};

/// What a strategy needs from the thing being trained.
class TrainingProblem {
 public:
  virtual ~TrainingProblem() = default;

  virtual std::size_t dim() const = 0;
  /// Training loss; one circuit evaluation.
  virtual double loss(const Eigen::VectorXd& theta) const = 0;

  struct ValueAndGradient {
    double value = 0.0;
    Eigen::VectorXd gradient;
  };
  virtual ValueAndGradient value_and_gradient(const Eigen::VectorXd& theta) const = 0;
  /// Shifted circuit evaluations charged per gradient.
  virtual std::uint64_t gradient_cost() const = 0;
  /// Held-out metric, recorded only.
  virtual double test_metric(const Eigen::VectorXd& theta) const = 0;
};

struct StrategyResult {
  std::vector<RunRecord> records;
  Eigen::VectorXd final_theta;
  /// Set when the run aborted; `records` then holds the partial trace.
  std::optional<std::string> failure;
};

/// Runs one schedule. Circuit accounting: a gradient run charges 1 evaluation
/// for the starting point and gradient_cost() + 1 per epoch (shifted
/// evaluations, then the loss at the updated point); each CMA-ES generation
/// charges `population` evaluations.
///
/// If `initial` is empty the starting point (Adam start or CMA-ES mean) is
/// drawn uniformly from [-pi, pi)^dim using `schedule.seed`.
StrategyResult run_strategy(const StrategySchedule& schedule, const TrainingProblem& problem,
                            const std::optional<Eigen::VectorXd>& initial = std::nullopt);

/// Analytic value of the circuit counter after `epoch` epochs of a schedule.
std::uint64_t expected_circuit_evals(const StrategySchedule& schedule, std::uint64_t gradient_cost,
                                     std::size_t epoch);

}  // namespace evoqrnn::optim
