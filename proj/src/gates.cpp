#include "evoqrnn/gates.hpp"

#include <cmath>
#include <string>

#include "evoqrnn/errors.hpp"

namespace evoqrnn::sim {

namespace {

using Eigen::Index;

constexpr Complex kI{0.0, 1.0};

// Basis indices touched by a k-qubit operator, for a base index whose target
// bits are all zero. Local index a maps its most significant bit to targets[0].
template <std::size_t K>
std::array<Index, (1U << K)> local_indices(std::size_t base, const std::array<std::size_t, K>& bits) {
  std::array<Index, (1U << K)> idx{};
  for (std::size_t a = 0; a < (1U << K); ++a) {
    std::size_t full = base;
    for (std::size_t i = 0; i < K; ++i) {
      if ((a >> (K - 1 - i)) & 1U) full |= std::size_t{1} << bits[i];
    }
    idx[a] = static_cast<Index>(full);
  }
  return idx;
}

template <std::size_t K>
std::array<std::size_t, K> target_bits(const Gate& gate, std::size_t n) {
  std::array<std::size_t, K> bits{};
  for (std::size_t i = 0; i < K; ++i) bits[i] = bit_of(gate.qubits[i], n);
  return bits;
}

template <std::size_t K>
std::size_t target_mask(const std::array<std::size_t, K>& bits) {
  std::size_t mask = 0;
  for (auto b : bits) mask |= std::size_t{1} << b;
  return mask;
}

// rows(idx) <- u * rows(idx), for every column.
template <std::size_t K>
void left_kernel(CMatrix& m, const CMatrix& u, const std::array<std::size_t, K>& bits) {
  constexpr std::size_t D = 1U << K;
  const std::size_t mask = target_mask(bits);
  const auto dim = static_cast<std::size_t>(m.rows());
  std::array<Complex, D> v{};
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & mask) continue;
    const auto idx = local_indices<K>(base, bits);
    for (Index c = 0; c < m.cols(); ++c) {
      for (std::size_t a = 0; a < D; ++a) v[a] = m(idx[a], c);
      for (std::size_t a = 0; a < D; ++a) {
        Complex acc = 0.0;
        for (std::size_t b = 0; b < D; ++b) acc += u(static_cast<Index>(a), static_cast<Index>(b)) * v[b];
        m(idx[a], c) = acc;
      }
    }
  }
}

// cols(idx) <- cols(idx) * u^dagger, for every row.
template <std::size_t K>
void right_adjoint_kernel(CMatrix& m, const CMatrix& u, const std::array<std::size_t, K>& bits) {
  constexpr std::size_t D = 1U << K;
  const std::size_t mask = target_mask(bits);
  const auto dim = static_cast<std::size_t>(m.cols());
  std::array<Complex, D> v{};
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & mask) continue;
    const auto idx = local_indices<K>(base, bits);
    for (Index r = 0; r < m.rows(); ++r) {
      for (std::size_t a = 0; a < D; ++a) v[a] = m(r, idx[a]);
      for (std::size_t a = 0; a < D; ++a) {
        Complex acc = 0.0;
        for (std::size_t b = 0; b < D; ++b) acc += std::conj(u(static_cast<Index>(a), static_cast<Index>(b))) * v[b];
        m(r, idx[a]) = acc;
      }
    }
  }
}

}  // namespace

std::string_view to_string(GateKind kind) noexcept {
  switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::U3: return "U3";
    case GateKind::CRX: return "CRX";
  }
  return "?";
}

CMatrix gate_matrix(const Gate& gate) {
  const double half = gate.params[0] / 2.0;
  const double c = std::cos(half);
  const double s = std::sin(half);
  CMatrix u(2, 2);
  switch (gate.kind) {
    case GateKind::RX:
      u << c, -kI * s, -kI * s, c;
      return u;
    case GateKind::RY:
      u << c, -s, s, c;
      return u;
    case GateKind::RZ:
      u << std::exp(-kI * half), 0.0, 0.0, std::exp(kI * half);
      return u;
    case GateKind::U3: {
      const double phi = gate.params[1];
      const double lambda = gate.params[2];
      u << c, -std::exp(kI * lambda) * s, std::exp(kI * phi) * s, std::exp(kI * (phi + lambda)) * c;
      return u;
    }
    case GateKind::CRX: {
      CMatrix cu = CMatrix::Identity(4, 4);
      cu.bottomRightCorner(2, 2) << c, -kI * s, -kI * s, c;
      return cu;
    }
  }
  throw UsageError("unknown gate kind");
}

void validate_gate(const Gate& gate, std::size_t n_qubits) {
  for (auto q : gate.targets()) {
    if (q >= n_qubits) {
      throw UsageError(std::string(to_string(gate.kind)) + " target " + std::to_string(q) +
                       " out of range for " + std::to_string(n_qubits) + "-qubit register");
    }
  }
  if (gate.arity() == 2 && gate.qubits[0] == gate.qubits[1]) {
    throw UsageError("CRX control and target must differ");
  }
}

void apply_gate_left(CMatrix& m, std::size_t n_qubits, const Gate& gate) {
  validate_gate(gate, n_qubits);
  const CMatrix u = gate_matrix(gate);
  if (gate.arity() == 1) {
    left_kernel<1>(m, u, target_bits<1>(gate, n_qubits));
  } else {
    left_kernel<2>(m, u, target_bits<2>(gate, n_qubits));
  }
}

void apply_gate_inplace(DensityMatrix& rho, const Gate& gate) {
  const std::size_t n = rho.n_qubits();
  validate_gate(gate, n);
  const CMatrix u = gate_matrix(gate);
  if (gate.arity() == 1) {
    const auto bits = target_bits<1>(gate, n);
    left_kernel<1>(rho.matrix(), u, bits);
    right_adjoint_kernel<1>(rho.matrix(), u, bits);
  } else {
    const auto bits = target_bits<2>(gate, n);
    left_kernel<2>(rho.matrix(), u, bits);
    right_adjoint_kernel<2>(rho.matrix(), u, bits);
  }
}

DensityMatrix apply_gate(const DensityMatrix& rho, const Gate& gate) {
  DensityMatrix out = rho;
  apply_gate_inplace(out, gate);
  return out;
}

CMatrix circuit_unitary(std::span<const Gate> gates, std::size_t n_qubits) {
  const auto dim = static_cast<Index>(std::size_t{1} << n_qubits);
  CMatrix u = CMatrix::Identity(dim, dim);
  for (const auto& g : gates) apply_gate_left(u, n_qubits, g);
  return u;
}

}  // namespace evoqrnn::sim
