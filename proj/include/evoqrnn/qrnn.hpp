#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "evoqrnn/density_matrix.hpp"
#include "evoqrnn/gates.hpp"

namespace evoqrnn::qrnn {

using sim::CMatrix;
using sim::DensityMatrix;
using ParamVector = Eigen::VectorXd;

/// Register layout of the recurrent cell. I/O qubits come first (indices
/// 0..n_io-1), memory qubits follow. The default is the 3 + 3 qubit,
/// 24-parameter cell.
struct QrnnConfig {
  std::size_t n_io = 3;
  std::size_t n_mem = 3;
  std::size_t n_params = 24;
  /// Index into the I/O register.
  std::size_t output_qubit = 0;
  /// Rotation angle per unit of normalized input.
  double encoding_scale = std::numbers::pi;

  std::size_t n_qubits() const noexcept { return n_io + n_mem; }
  std::size_t io_dim() const noexcept { return std::size_t{1} << n_io; }
  std::size_t mem_dim() const noexcept { return std::size_t{1} << n_mem; }
  std::vector<std::size_t> io_qubits() const;

  /// Throws ConfigError on an inconsistent layout.
  void validate() const;
};

/// Counts inputs that had to be clamped into [0, 1] before encoding.
struct Diagnostics {
  std::size_t clamp_events = 0;
};

double clamp_input(double x, Diagnostics* diag);

/// RY(encoding_scale * x) on every I/O qubit.
DensityMatrix encode(const DensityMatrix& rho, double x_norm, const QrnnConfig& cfg,
                     Diagnostics* diag = nullptr);

/// U3(theta[3i], theta[3i+1], theta[3i+2]) on each qubit i, then a ring of
/// CRX(theta[3n + i]) with control i and target (i + 1) mod n.
std::vector<sim::Gate> build_ansatz(const ParamVector& theta, const QrnnConfig& cfg);

/// Throws UsageError unless `theta` has cfg.n_params finite entries.
void check_params(const ParamVector& theta, const QrnnConfig& cfg);

struct StepResult {
  DensityMatrix state;
  double y;
};

/// One timestep on the full register: encode, ansatz, read the output qubit,
/// reset all I/O qubits.
StepResult step(const DensityMatrix& rho, double x_norm, const ParamVector& theta,
                const QrnnConfig& cfg, Diagnostics* diag = nullptr);

/// Teacher-forced run from the zero state; ys[t] predicts xs[t + 1].
std::vector<double> run_sequence(std::span<const double> xs, const ParamVector& theta,
                                 const QrnnConfig& cfg, Diagnostics* diag = nullptr);

/// Teacher-forced over `history`, then feeds predictions back. Returns
/// `horizon` predictions for the points following the history.
std::vector<double> forecast(std::span<const double> history, const ParamVector& theta,
                             const QrnnConfig& cfg, std::size_t horizon,
                             Diagnostics* diag = nullptr);

/// Product-state amplitudes of the I/O register after RY(angles[q]) on each
/// I/O qubit q starting from |0...0>.
Eigen::VectorXd encoding_amplitudes(std::span<const double> angles);

/// Output of the cell channel restricted to the memory register.
struct ChannelOutput {
  CMatrix memory;
  double y = 0.0;
};

/// Compiled form of one timestep.
///
/// Because the I/O register is always reset before encoding, the full state
/// entering the ansatz is |psi(x)><psi(x)| (x) sigma, where sigma is the
/// memory-register state. With U the ansatz unitary, the step is the channel
///   sigma -> Tr_IO(K sigma K^dagger),  K = U (|psi(x)> (x) I_mem),
/// and the readout is the weight of K sigma K^dagger on rows where the output
/// qubit is 1. This is the same map as `step` on a 2^mem x 2^mem state.
class RecurrentCell {
 public:
  RecurrentCell(const ParamVector& theta, const QrnnConfig& cfg);
  /// Uses a precomputed ansatz unitary (e.g. with one angle shifted).
  RecurrentCell(CMatrix unitary, const QrnnConfig& cfg);

  const QrnnConfig& config() const noexcept { return cfg_; }
  const CMatrix& unitary() const noexcept { return unitary_; }

  /// K for the given I/O amplitudes: dim x mem_dim.
  CMatrix kraus(const Eigen::VectorXd& io_amplitudes) const;
  CMatrix kraus_for_input(double x_norm) const;

  ChannelOutput step(const CMatrix& memory, double x_norm, Diagnostics* diag = nullptr) const;

  std::vector<double> run_sequence(std::span<const double> xs, Diagnostics* diag = nullptr) const;
  std::vector<double> forecast(std::span<const double> history, std::size_t horizon,
                               Diagnostics* diag = nullptr) const;

  CMatrix initial_memory() const;

 private:
  QrnnConfig cfg_;
  CMatrix unitary_;
};

/// Applies the memory channel of a Kraus operator (as built by
/// RecurrentCell::kraus) to `memory`. Linear in `memory`.
ChannelOutput apply_channel(const CMatrix& kraus, const CMatrix& memory, const QrnnConfig& cfg);

}  // namespace evoqrnn::qrnn
