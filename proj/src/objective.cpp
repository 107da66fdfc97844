#include "evoqrnn/objective.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "evoqrnn/errors.hpp"

namespace evoqrnn::objective {

using Eigen::Index;
using qrnn::ChannelOutput;
using qrnn::CMatrix;
using qrnn::RecurrentCell;

namespace {

constexpr double kPi = std::numbers::pi;
const double kCrxPlus = (std::numbers::sqrt2 + 1.0) / (4.0 * std::numbers::sqrt2);
const double kCrxMinus = (std::numbers::sqrt2 - 1.0) / (4.0 * std::numbers::sqrt2);

const std::array<ShiftTerm, 2> kTwoTerm{{{kPi / 2, 0.5}, {-kPi / 2, -0.5}}};
const std::array<ShiftTerm, 4> kFourTerm{{{kPi / 2, kCrxPlus},
                                          {-kPi / 2, -kCrxPlus},
                                          {3 * kPi / 2, -kCrxMinus},
                                          {-3 * kPi / 2, kCrxMinus}}};

// Feedback inputs are probabilities; excursions this small are roundoff.
constexpr double kClampSlack = 1e-9;

struct Feed {
  double x;
  bool pass_derivative;
};

Feed feed_value(double x) {
  if (x >= -kClampSlack && x <= 1.0 + kClampSlack) return {std::clamp(x, 0.0, 1.0), true};
  return {std::clamp(x, 0.0, 1.0), false};
}

// Shifted ansatz unitaries for every parameter and shift term.
struct ShiftedUnitaries {
  std::vector<std::vector<CMatrix>> per_param;
};

ShiftedUnitaries shifted_unitaries(const ParamVector& theta, const QrnnConfig& cfg) {
  ShiftedUnitaries out;
  out.per_param.resize(cfg.n_params);
  for (std::size_t k = 0; k < cfg.n_params; ++k) {
    for (const auto& term : shift_rule(k, cfg)) {
      ParamVector shifted = theta;
      shifted(static_cast<Index>(k)) += term.shift;
      out.per_param[k].push_back(sim::circuit_unitary(qrnn::build_ansatz(shifted, cfg), cfg.n_qubits()));
    }
  }
  return out;
}

CMatrix kraus_of(const CMatrix& unitary, const Eigen::VectorXd& amp, const QrnnConfig& cfg) {
  const auto dm = static_cast<Index>(cfg.mem_dim());
  CMatrix k = CMatrix::Zero(unitary.rows(), dm);
  for (Index j = 0; j < amp.size(); ++j) {
    if (amp(j) != 0.0) k.noalias() += amp(j) * unitary.middleCols(j * dm, dm);
  }
  return k;
}

// Memory state plus its derivative with respect to every parameter.
struct TangentState {
  CMatrix sigma;
  std::vector<CMatrix> dsigma;
};

struct TangentStep {
  TangentState state;
  double y = 0.0;
  Eigen::VectorXd dy;
};

class TangentPropagator {
 public:
  TangentPropagator(const ParamVector& theta, const QrnnConfig& cfg)
      : cfg_(cfg), base_(sim::circuit_unitary(qrnn::build_ansatz(theta, cfg), cfg.n_qubits())),
        shifted_(shifted_unitaries(theta, cfg)) {}

  TangentState initial() const {
    const auto dm = static_cast<Index>(cfg_.mem_dim());
    TangentState s{CMatrix::Zero(dm, dm), std::vector<CMatrix>(cfg_.n_params, CMatrix::Zero(dm, dm))};
    s.sigma(0, 0) = 1.0;
    return s;
  }

  // `dx` is the derivative of the input with respect to theta, or null when
  // the input is data.
  TangentStep step(const TangentState& in, double x, const Eigen::VectorXd* dx) const {
    const std::size_t n_params = cfg_.n_params;
    const std::vector<double> angles(cfg_.n_io, cfg_.encoding_scale * x);
    const Eigen::VectorXd amp = qrnn::encoding_amplitudes(angles);
    const CMatrix k0 = kraus_of(base_, amp, cfg_);

    TangentStep out;
    ChannelOutput main = qrnn::apply_channel(k0, in.sigma, cfg_);
    out.state.sigma = std::move(main.memory);
    out.y = main.y;
    out.state.dsigma.resize(n_params);
    out.dy.resize(static_cast<Index>(n_params));

    ChannelOutput dinput;
    const bool input_varies = dx != nullptr && dx->cwiseAbs().maxCoeff() != 0.0;
    if (input_varies) dinput = input_derivative(in.sigma, angles);

    for (std::size_t k = 0; k < n_params; ++k) {
      ChannelOutput acc = qrnn::apply_channel(k0, in.dsigma[k], cfg_);
      const auto& rule = shift_rule(k, cfg_);
      for (std::size_t s = 0; s < rule.size(); ++s) {
        const CMatrix ks = kraus_of(shifted_.per_param[k][s], amp, cfg_);
        ChannelOutput term = qrnn::apply_channel(ks, in.sigma, cfg_);
        acc.memory += rule[s].coeff * term.memory;
        acc.y += rule[s].coeff * term.y;
      }
      if (input_varies) {
        const double d = (*dx)(static_cast<Index>(k));
        acc.memory += d * dinput.memory;
        acc.y += d * dinput.y;
      }
      out.state.dsigma[k] = std::move(acc.memory);
      out.dy(static_cast<Index>(k)) = acc.y;
    }
    return out;
  }

 private:
  // d/dx of the channel: the input enters every I/O encoding rotation, each
  // differentiated with its own two-term shift.
  ChannelOutput input_derivative(const CMatrix& sigma, const std::vector<double>& angles) const {
    const auto dm = static_cast<Index>(cfg_.mem_dim());
    ChannelOutput d{CMatrix::Zero(dm, dm), 0.0};
    for (std::size_t q = 0; q < cfg_.n_io; ++q) {
      for (const auto& term : kTwoTerm) {
        std::vector<double> shifted = angles;
        shifted[q] += term.shift;
        const CMatrix k = kraus_of(base_, qrnn::encoding_amplitudes(shifted), cfg_);
        ChannelOutput r = qrnn::apply_channel(k, sigma, cfg_);
        d.memory += (cfg_.encoding_scale * term.coeff) * r.memory;
        d.y += cfg_.encoding_scale * term.coeff * r.y;
      }
    }
    return d;
  }

  QrnnConfig cfg_;
  CMatrix base_;
  ShiftedUnitaries shifted_;
};

}  // namespace

double rel_rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw UsageError("rel_rmse length mismatch: " + std::to_string(pred.size()) + " vs " +
                     std::to_string(truth.size()));
  }
  if (truth.empty()) throw UsageError("rel_rmse needs nonempty series");
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    err += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    ref += truth[i] * truth[i];
  }
  if (ref == 0.0) throw UsageError("rel_rmse undefined: truth is identically zero");
  return std::sqrt(err / ref);
}

std::span<const ShiftTerm> shift_rule(std::size_t param_index, const QrnnConfig& cfg) {
  if (param_index >= cfg.n_params) throw UsageError("parameter index out of range");
  if (param_index < 3 * cfg.n_qubits()) return kTwoTerm;
  return kFourTerm;
}

ForecastLoss::ForecastLoss(std::vector<double> train, LossSpec spec, QrnnConfig cfg)
    : train_(std::move(train)), spec_(spec), cfg_(cfg) {
  cfg_.validate();
  if (spec_.horizon < 1) throw ConfigError("loss horizon must be at least 1");
  if (train_.size() <= spec_.effective_horizon() + 1) {
    throw ConfigError("training split of length " + std::to_string(train_.size()) +
                      " is too short for horizon " + std::to_string(spec_.effective_horizon()));
  }
}

std::size_t ForecastLoss::n_origins() const noexcept { return train_.size() - spec_.effective_horizon(); }

std::size_t ForecastLoss::ansatz_occurrences() const noexcept {
  return n_origins() + feedback_steps();
}

std::size_t ForecastLoss::feedback_steps() const noexcept {
  return n_origins() * (spec_.effective_horizon() - 1);
}

std::uint64_t ForecastLoss::shift_evaluations() const noexcept {
  std::uint64_t per_occurrence = 0;
  for (std::size_t k = 0; k < cfg_.n_params; ++k) per_occurrence += shift_rule(k, cfg_).size();
  return per_occurrence * ansatz_occurrences() + 2 * cfg_.n_io * feedback_steps();
}

double ForecastLoss::value(const ParamVector& theta) const {
  const RecurrentCell cell(theta, cfg_);
  const std::size_t horizon = spec_.effective_horizon();
  const std::size_t origins = n_origins();
  CMatrix sigma = cell.initial_memory();
  double sum = 0.0;
  for (std::size_t t0 = 0; t0 < origins; ++t0) {
    auto trunk = cell.step(sigma, train_[t0]);
    sigma = trunk.memory;
    double y = trunk.y;
    sum += (y - train_[t0 + 1]) * (y - train_[t0 + 1]);
    CMatrix branch = trunk.memory;
    for (std::size_t j = 1; j < horizon; ++j) {
      auto r = cell.step(branch, feed_value(y).x);
      branch = std::move(r.memory);
      y = r.y;
      sum += (y - train_[t0 + 1 + j]) * (y - train_[t0 + 1 + j]);
    }
  }
  return sum / static_cast<double>(origins * horizon);
}

ForecastLoss::ValueAndGradient ForecastLoss::value_and_gradient(const ParamVector& theta) const {
  qrnn::check_params(theta, cfg_);
  const TangentPropagator prop(theta, cfg_);
  const std::size_t horizon = spec_.effective_horizon();
  const std::size_t origins = n_origins();
  const auto n_params = static_cast<Index>(cfg_.n_params);

  double sum = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_params);
  TangentState trunk = prop.initial();
  for (std::size_t t0 = 0; t0 < origins; ++t0) {
    TangentStep s = prop.step(trunk, train_[t0], nullptr);
    double resid = s.y - train_[t0 + 1];
    sum += resid * resid;
    grad += 2.0 * resid * s.dy;

    TangentState branch = s.state;
    double y = s.y;
    Eigen::VectorXd dy = s.dy;
    for (std::size_t j = 1; j < horizon; ++j) {
      const Feed feed = feed_value(y);
      if (!feed.pass_derivative) dy.setZero();
      TangentStep b = prop.step(branch, feed.x, &dy);
      branch = std::move(b.state);
      y = b.y;
      dy = std::move(b.dy);
      resid = y - train_[t0 + 1 + j];
      sum += resid * resid;
      grad += 2.0 * resid * dy;
    }
    trunk = std::move(s.state);
  }
  const double n_terms = static_cast<double>(origins * horizon);
  return {sum / n_terms, grad / n_terms};
}

double train_loss(const ParamVector& theta, std::span<const double> train, const LossSpec& spec,
                  const QrnnConfig& cfg) {
  return ForecastLoss(std::vector<double>(train.begin(), train.end()), spec, cfg).value(theta);
}

Eigen::VectorXd grad_parameter_shift(const ForecastLoss& loss, const ParamVector& theta) {
  return loss.value_and_gradient(theta).gradient;
}

Eigen::VectorXd grad_finite_diff(const std::function<double(const Eigen::VectorXd&)>& loss,
                                 const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw UsageError("finite-difference step must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double up = loss(probe);
    probe(i) = x(i) - h;
    const double down = loss(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace evoqrnn::objective
