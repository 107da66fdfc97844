#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "evoqrnn/density_matrix.hpp"

namespace evoqrnn::sim {

enum class GateKind { RX, RY, RZ, U3, CRX };

std::string_view to_string(GateKind kind) noexcept;

/// A parameterized gate. CRX lists its control first.
struct Gate {
  GateKind kind = GateKind::RY;
  std::array<double, 3> params{};
  std::array<std::size_t, 2> qubits{};

  static Gate rx(std::size_t q, double theta) { return {GateKind::RX, {theta, 0, 0}, {q, 0}}; }
  static Gate ry(std::size_t q, double theta) { return {GateKind::RY, {theta, 0, 0}, {q, 0}}; }
  static Gate rz(std::size_t q, double theta) { return {GateKind::RZ, {theta, 0, 0}, {q, 0}}; }
  static Gate u3(std::size_t q, double theta, double phi, double lambda) {
    return {GateKind::U3, {theta, phi, lambda}, {q, 0}};
  }
  static Gate crx(std::size_t control, std::size_t target, double theta) {
    return {GateKind::CRX, {theta, 0, 0}, {control, target}};
  }

  std::size_t arity() const noexcept { return kind == GateKind::CRX ? 2 : 1; }
  std::size_t n_params() const noexcept { return kind == GateKind::U3 ? 3 : 1; }
  std::span<const std::size_t> targets() const noexcept { return {qubits.data(), arity()}; }
};

/// Unitary of the gate on its own targets (2x2, or 4x4 with the control as
/// the high bit for CRX).
///
/// Conventions: RY(t) = [[c, -s], [s, c]] with c = cos(t/2), s = sin(t/2);
/// RX(t) = [[c, -i s], [-i s, c]]; RZ(t) = diag(e^{-it/2}, e^{it/2});
/// U3(t, p, l) = [[c, -e^{il} s], [e^{ip} s, e^{i(p+l)} c]].
CMatrix gate_matrix(const Gate& gate);

/// Checks target distinctness and range; throws UsageError.
void validate_gate(const Gate& gate, std::size_t n_qubits);

/// rho -> U rho U^dagger with U embedded on `gate.targets()`.
DensityMatrix apply_gate(const DensityMatrix& rho, const Gate& gate);
void apply_gate_inplace(DensityMatrix& rho, const Gate& gate);

/// Left-multiplies `m` (rows indexed by the n-qubit basis) by the embedded
/// unitary of `gate`. Used to build full circuit unitaries.
void apply_gate_left(CMatrix& m, std::size_t n_qubits, const Gate& gate);

/// Full 2^n x 2^n unitary of a gate sequence (first gate acts first).
CMatrix circuit_unitary(std::span<const Gate> gates, std::size_t n_qubits);

}  // namespace evoqrnn::sim
