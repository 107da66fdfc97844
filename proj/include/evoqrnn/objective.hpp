#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "evoqrnn/qrnn.hpp"

namespace evoqrnn::objective {

using qrnn::ParamVector;
using qrnn::QrnnConfig;

enum class LossMode { OneStep, MultiStep };

/// Training cost: mean squared error of iterative forecasts (multi-step) or
/// of teacher-forced next-step predictions (one-step), in normalized space.
struct LossSpec {
  LossMode mode = LossMode::MultiStep;
  std::size_t horizon = 1;

  /// Horizon actually used for each rolling origin.
  std::size_t effective_horizon() const noexcept { return mode == LossMode::OneStep ? 1 : horizon; }
};

struct EvalReport {
  double train_loss = 0.0;
  double test_rel_rmse = 0.0;
  std::uint64_t circuit_evals = 0;
};

/// sqrt(mean((pred - truth)^2)) / sqrt(mean(truth^2)).
double rel_rmse(std::span<const double> pred, std::span<const double> truth);

/// One term of a parameter-shift rule: coeff * f(theta + shift).
struct ShiftTerm {
  double shift;
  double coeff;
};

/// Two-term rule (+-pi/2, +-1/2) for U3 angles; four-term rule for CRX angles,
/// whose generator has eigenvalues {0, +-1/2}.
std::span<const ShiftTerm> shift_rule(std::size_t param_index, const QrnnConfig& cfg);

/// Forecasting loss over a normalized training series with every rolling
/// origin t0 such that t0 + horizon stays inside the series.
class ForecastLoss {
 public:
  ForecastLoss(std::vector<double> train, LossSpec spec, QrnnConfig cfg = {});

  double value(const ParamVector& theta) const;
  double operator()(const ParamVector& theta) const { return value(theta); }

  struct ValueAndGradient {
    double value = 0.0;
    Eigen::VectorXd gradient;
  };

  /// Exact gradient from parameter-shift evaluations of every occurrence of
  /// every parameter (and of the encoding gates where predictions are fed
  /// back), combined by the chain rule through the recurrence.
  ValueAndGradient value_and_gradient(const ParamVector& theta) const;

  const LossSpec& spec() const noexcept { return spec_; }
  const QrnnConfig& config() const noexcept { return cfg_; }
  std::span<const double> train() const noexcept { return train_; }

  std::size_t n_origins() const noexcept;
  /// Timesteps where the ansatz is applied during one loss evaluation.
  std::size_t ansatz_occurrences() const noexcept;
  /// Timesteps whose input is a fed-back prediction.
  std::size_t feedback_steps() const noexcept;
  /// Shifted circuit evaluations consumed by one gradient.
  std::uint64_t shift_evaluations() const noexcept;

 private:
  std::vector<double> train_;
  LossSpec spec_;
  QrnnConfig cfg_;
};

double train_loss(const ParamVector& theta, std::span<const double> train, const LossSpec& spec,
                  const QrnnConfig& cfg = {});

Eigen::VectorXd grad_parameter_shift(const ForecastLoss& loss, const ParamVector& theta);

/// Central differences (L(x + h e_i) - L(x - h e_i)) / 2h.
Eigen::VectorXd grad_finite_diff(const std::function<double(const Eigen::VectorXd&)>& loss,
                                 const Eigen::VectorXd& x, double h);

}  // namespace evoqrnn::objective
