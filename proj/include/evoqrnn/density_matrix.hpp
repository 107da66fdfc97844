#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace evoqrnn::sim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr std::size_t kMaxQubits = 10;

/// Mixed state of an n-qubit register.
///
/// Basis convention: qubit 0 is the most significant bit of the basis index,
/// so on a 2-qubit register |q0 q1> maps to index 2*q0 + q1. Matrices are
/// stored as dense 2^n x 2^n complex Eigen matrices.
class DensityMatrix {
 public:
  /// |0...0><0...0| on `n_qubits` qubits. Throws ConfigError outside [1, 10].
  static DensityMatrix zero_state(std::size_t n_qubits);

  /// Wraps an explicit matrix. Shape must be 2^n x 2^n; no positivity check.
  DensityMatrix(std::size_t n_qubits, CMatrix elements);

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return std::size_t{1} << n_qubits_; }

  const CMatrix& matrix() const noexcept { return rho_; }
  CMatrix& matrix() noexcept { return rho_; }

  Complex trace() const { return rho_.trace(); }
  /// Largest elementwise |rho - rho^dagger|.
  double hermiticity_error() const;
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;

 private:
  std::size_t n_qubits_;
  CMatrix rho_;
};

/// Bit position of `qubit` inside a basis index of an n-qubit register.
constexpr std::size_t bit_of(std::size_t qubit, std::size_t n_qubits) noexcept {
  return n_qubits - 1 - qubit;
}

/// Reduced state on the qubits not listed in `traced`, keeping their order.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> traced);

/// Tr(rho * |1><1|_qubit), computed exactly.
double prob_one(const DensityMatrix& rho, std::size_t qubit);

/// Measure-and-reset channel: trace out `qubits` and put fresh |0><0| factors
/// back in their positions.
DensityMatrix reset_qubits(const DensityMatrix& rho, std::span<const std::size_t> qubits);

}  // namespace evoqrnn::sim
