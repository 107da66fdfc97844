#include "evoqrnn/density_matrix.hpp"

#include <algorithm>
#include <string>

#include "evoqrnn/errors.hpp"

namespace evoqrnn::sim {

namespace {

std::size_t check_qubit(std::size_t qubit, std::size_t n_qubits) {
  if (qubit >= n_qubits) {
    throw UsageError("qubit index " + std::to_string(qubit) + " out of range for " +
                     std::to_string(n_qubits) + "-qubit register");
  }
  return qubit;
}

void check_distinct(std::span<const std::size_t> qubits, std::size_t n_qubits) {
  std::vector<std::size_t> sorted(qubits.begin(), qubits.end());
  for (auto q : sorted) check_qubit(q, n_qubits);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw UsageError("qubit indices must be distinct");
  }
}

}  // namespace

DensityMatrix DensityMatrix::zero_state(std::size_t n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ConfigError("n_qubits must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                      std::to_string(n_qubits));
  }
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
  CMatrix rho = CMatrix::Zero(dim, dim);
  rho(0, 0) = 1.0;
  return DensityMatrix(n_qubits, std::move(rho));
}

DensityMatrix::DensityMatrix(std::size_t n_qubits, CMatrix elements)
    : n_qubits_(n_qubits), rho_(std::move(elements)) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ConfigError("n_qubits must be in [1, " + std::to_string(kMaxQubits) + "]");
  }
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
  if (rho_.rows() != dim || rho_.cols() != dim) {
    throw UsageError("density matrix shape does not match qubit count");
  }
}

double DensityMatrix::hermiticity_error() const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const CMatrix herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> traced) {
  const std::size_t n = rho.n_qubits();
  check_distinct(traced, n);
  if (traced.size() >= n) throw UsageError("cannot trace out every qubit");

  std::vector<std::size_t> kept;
  for (std::size_t q = 0; q < n; ++q) {
    if (std::find(traced.begin(), traced.end(), q) == traced.end()) kept.push_back(q);
  }
  const std::size_t n_kept = kept.size();
  const std::size_t n_traced = traced.size();

  // Scatter a compact index over a qubit subset into a full basis index.
  auto scatter = [n](std::size_t compact, const auto& subset) {
    std::size_t full = 0;
    const std::size_t k = subset.size();
    for (std::size_t i = 0; i < k; ++i) {
      if ((compact >> (k - 1 - i)) & 1U) full |= std::size_t{1} << bit_of(subset[i], n);
    }
    return full;
  };

  const std::size_t dim_kept = std::size_t{1} << n_kept;
  const std::size_t dim_traced = std::size_t{1} << n_traced;
  std::vector<std::size_t> kept_index(dim_kept), traced_index(dim_traced);
  for (std::size_t i = 0; i < dim_kept; ++i) kept_index[i] = scatter(i, kept);
  for (std::size_t i = 0; i < dim_traced; ++i) traced_index[i] = scatter(i, traced);

  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim_kept), static_cast<Eigen::Index>(dim_kept));
  const CMatrix& m = rho.matrix();
  for (std::size_t r = 0; r < dim_kept; ++r) {
    for (std::size_t c = 0; c < dim_kept; ++c) {
      Complex acc = 0.0;
      for (std::size_t t = 0; t < dim_traced; ++t) {
        acc += m(static_cast<Eigen::Index>(kept_index[r] | traced_index[t]),
                 static_cast<Eigen::Index>(kept_index[c] | traced_index[t]));
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
    }
  }
  return DensityMatrix(n_kept, std::move(out));
}

double prob_one(const DensityMatrix& rho, std::size_t qubit) {
  const std::size_t n = rho.n_qubits();
  const std::size_t mask = std::size_t{1} << bit_of(check_qubit(qubit, n), n);
  double p = 0.0;
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    if (i & mask) p += rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
  }
  return p;
}

DensityMatrix reset_qubits(const DensityMatrix& rho, std::span<const std::size_t> qubits) {
  const std::size_t n = rho.n_qubits();
  check_distinct(qubits, n);

  std::size_t mask = 0;
  for (auto q : qubits) mask |= std::size_t{1} << bit_of(q, n);

  // Every pattern of the reset bits, enumerated as submasks of `mask`.
  std::vector<std::size_t> patterns;
  for (std::size_t s = mask;; s = (s - 1) & mask) {
    patterns.push_back(s);
    if (s == 0) break;
  }

  const auto dim = static_cast<Eigen::Index>(rho.dim());
  CMatrix out = CMatrix::Zero(dim, dim);
  const CMatrix& m = rho.matrix();
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    if (i & mask) continue;
    for (std::size_t j = 0; j < rho.dim(); ++j) {
      if (j & mask) continue;
      Complex acc = 0.0;
      for (auto p : patterns) acc += m(static_cast<Eigen::Index>(i | p), static_cast<Eigen::Index>(j | p));
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  }
  return DensityMatrix(n, std::move(out));
}

}  // namespace evoqrnn::sim
