#include "evoqrnn/qrnn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evoqrnn/errors.hpp"

namespace evoqrnn::qrnn {

using Eigen::Index;

std::vector<std::size_t> QrnnConfig::io_qubits() const {
  std::vector<std::size_t> qs(n_io);
  for (std::size_t q = 0; q < n_io; ++q) qs[q] = q;
  return qs;
}

void QrnnConfig::validate() const {
  if (n_io < 1 || n_mem < 1) throw ConfigError("need at least one I/O and one memory qubit");
  if (n_qubits() > sim::kMaxQubits) throw ConfigError("register exceeds the simulator size limit");
  if (n_params != 4 * n_qubits()) {
    throw ConfigError("n_params must be 4 * (n_io + n_mem) = " + std::to_string(4 * n_qubits()));
  }
  if (output_qubit >= n_io) throw ConfigError("output_qubit must index the I/O register");
  if (!std::isfinite(encoding_scale) || encoding_scale <= 0.0) {
    throw ConfigError("encoding_scale must be positive");
  }
}

double clamp_input(double x, Diagnostics* diag) {
  if (std::isnan(x)) throw RuntimeFailure("NaN input to encoder");
  if (x < 0.0 || x > 1.0) {
    if (diag) ++diag->clamp_events;
    return std::clamp(x, 0.0, 1.0);
  }
  return x;
}

DensityMatrix encode(const DensityMatrix& rho, double x_norm, const QrnnConfig& cfg, Diagnostics* diag) {
  const double angle = cfg.encoding_scale * clamp_input(x_norm, diag);
  DensityMatrix out = rho;
  for (auto q : cfg.io_qubits()) sim::apply_gate_inplace(out, sim::Gate::ry(q, angle));
  return out;
}

void check_params(const ParamVector& theta, const QrnnConfig& cfg) {
  if (static_cast<std::size_t>(theta.size()) != cfg.n_params) {
    throw UsageError("expected " + std::to_string(cfg.n_params) + " parameters, got " +
                     std::to_string(theta.size()));
  }
  if (!theta.allFinite()) throw UsageError("parameter vector has non-finite entries");
}

std::vector<sim::Gate> build_ansatz(const ParamVector& theta, const QrnnConfig& cfg) {
  check_params(theta, cfg);
  const std::size_t n = cfg.n_qubits();
  std::vector<sim::Gate> gates;
  gates.reserve(2 * n);
  for (std::size_t q = 0; q < n; ++q) {
    const auto i = static_cast<Index>(3 * q);
    gates.push_back(sim::Gate::u3(q, theta(i), theta(i + 1), theta(i + 2)));
  }
  for (std::size_t q = 0; q < n; ++q) {
    gates.push_back(sim::Gate::crx(q, (q + 1) % n, theta(static_cast<Index>(3 * n + q))));
  }
  return gates;
}

StepResult step(const DensityMatrix& rho, double x_norm, const ParamVector& theta, const QrnnConfig& cfg,
                Diagnostics* diag) {
  cfg.validate();
  DensityMatrix state = encode(rho, x_norm, cfg, diag);
  for (const auto& g : build_ansatz(theta, cfg)) sim::apply_gate_inplace(state, g);
  const double y = sim::prob_one(state, cfg.output_qubit);
  const auto io = cfg.io_qubits();
  return {sim::reset_qubits(state, io), y};
}

std::vector<double> run_sequence(std::span<const double> xs, const ParamVector& theta, const QrnnConfig& cfg,
                                 Diagnostics* diag) {
  if (xs.empty()) throw UsageError("run_sequence needs a nonempty input");
  DensityMatrix rho = DensityMatrix::zero_state(cfg.n_qubits());
  std::vector<double> ys;
  ys.reserve(xs.size());
  for (double x : xs) {
    auto [next, y] = step(rho, x, theta, cfg, diag);
    rho = std::move(next);
    ys.push_back(y);
  }
  return ys;
}

std::vector<double> forecast(std::span<const double> history, const ParamVector& theta, const QrnnConfig& cfg,
                             std::size_t horizon, Diagnostics* diag) {
  if (history.empty()) throw UsageError("forecast needs a nonempty history");
  if (horizon < 1) throw UsageError("forecast horizon must be at least 1");
  DensityMatrix rho = DensityMatrix::zero_state(cfg.n_qubits());
  double y = 0.0;
  for (double x : history) {
    auto r = step(rho, x, theta, cfg, diag);
    rho = std::move(r.state);
    y = r.y;
  }
  std::vector<double> out{y};
  while (out.size() < horizon) {
    auto r = step(rho, out.back(), theta, cfg, diag);
    rho = std::move(r.state);
    out.push_back(r.y);
  }
  return out;
}

Eigen::VectorXd encoding_amplitudes(std::span<const double> angles) {
  Eigen::VectorXd amp = Eigen::VectorXd::Ones(1);
  for (double a : angles) {
    // |psi> (x) (cos(a/2)|0> + sin(a/2)|1>), new qubit as the low bit.
    Eigen::VectorXd next(2 * amp.size());
    const double c = std::cos(a / 2.0);
    const double s = std::sin(a / 2.0);
    for (Index i = 0; i < amp.size(); ++i) {
      next(2 * i) = amp(i) * c;
      next(2 * i + 1) = amp(i) * s;
    }
    amp = std::move(next);
  }
  return amp;
}

RecurrentCell::RecurrentCell(const ParamVector& theta, const QrnnConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const auto gates = build_ansatz(theta, cfg_);
  unitary_ = sim::circuit_unitary(gates, cfg_.n_qubits());
}

RecurrentCell::RecurrentCell(CMatrix unitary, const QrnnConfig& cfg) : cfg_(cfg), unitary_(std::move(unitary)) {
  cfg_.validate();
  const auto dim = static_cast<Index>(std::size_t{1} << cfg_.n_qubits());
  if (unitary_.rows() != dim || unitary_.cols() != dim) throw UsageError("unitary has the wrong shape");
}

CMatrix RecurrentCell::kraus(const Eigen::VectorXd& io_amplitudes) const {
  const auto dm = static_cast<Index>(cfg_.mem_dim());
  const auto di = static_cast<Index>(cfg_.io_dim());
  if (io_amplitudes.size() != di) throw UsageError("I/O amplitude vector has the wrong size");
  CMatrix k = CMatrix::Zero(unitary_.rows(), dm);
  for (Index j = 0; j < di; ++j) {
    if (io_amplitudes(j) != 0.0) k.noalias() += io_amplitudes(j) * unitary_.middleCols(j * dm, dm);
  }
  return k;
}

CMatrix RecurrentCell::kraus_for_input(double x_norm) const {
  std::vector<double> angles(cfg_.n_io, cfg_.encoding_scale * x_norm);
  return kraus(encoding_amplitudes(angles));
}

ChannelOutput apply_channel(const CMatrix& kraus, const CMatrix& memory, const QrnnConfig& cfg) {
  const auto dm = static_cast<Index>(cfg.mem_dim());
  const auto di = static_cast<Index>(cfg.io_dim());
  const CMatrix m = kraus * memory;
  ChannelOutput out{CMatrix::Zero(dm, dm), 0.0};
  const std::size_t out_bit = cfg.n_io - 1 - cfg.output_qubit;
  for (Index io = 0; io < di; ++io) {
    const auto mb = m.middleRows(io * dm, dm);
    const auto kb = kraus.middleRows(io * dm, dm);
    out.memory.noalias() += mb * kb.adjoint();
    if ((static_cast<std::size_t>(io) >> out_bit) & 1U) {
      out.y += (mb.array() * kb.array().conjugate()).real().sum();
    }
  }
  return out;
}

ChannelOutput RecurrentCell::step(const CMatrix& memory, double x_norm, Diagnostics* diag) const {
  return apply_channel(kraus_for_input(clamp_input(x_norm, diag)), memory, cfg_);
}

CMatrix RecurrentCell::initial_memory() const {
  const auto dm = static_cast<Index>(cfg_.mem_dim());
  CMatrix sigma = CMatrix::Zero(dm, dm);
  sigma(0, 0) = 1.0;
  return sigma;
}

std::vector<double> RecurrentCell::run_sequence(std::span<const double> xs, Diagnostics* diag) const {
  if (xs.empty()) throw UsageError("run_sequence needs a nonempty input");
  CMatrix sigma = initial_memory();
  std::vector<double> ys;
  ys.reserve(xs.size());
  for (double x : xs) {
    auto r = step(sigma, x, diag);
    sigma = std::move(r.memory);
    ys.push_back(r.y);
  }
  return ys;
}

std::vector<double> RecurrentCell::forecast(std::span<const double> history, std::size_t horizon,
                                            Diagnostics* diag) const {
  if (history.empty()) throw UsageError("forecast needs a nonempty history");
  if (horizon < 1) throw UsageError("forecast horizon must be at least 1");
  CMatrix sigma = initial_memory();
  double y = 0.0;
  for (double x : history) {
    auto r = step(sigma, x, diag);
    sigma = std::move(r.memory);
    y = r.y;
  }
  std::vector<double> out{y};
  while (out.size() < horizon) {
    auto r = step(sigma, out.back(), diag);
    sigma = std::move(r.memory);
    out.push_back(r.y);
  }
  return out;
}

}  // namespace evoqrnn::qrnn
