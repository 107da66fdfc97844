#include "evoqrnn/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "evoqrnn/errors.hpp"

namespace evoqrnn::optim {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

CmaParameters CmaParameters::defaults(std::size_t dim, std::size_t lambda) {
  if (dim < 1) throw ConfigError("CMA-ES dimension must be positive");
  if (lambda < 2) throw ConfigError("CMA-ES population must be at least 2");
  CmaParameters p;
  p.dim = dim;
  p.lambda = lambda;
  p.mu = lambda / 2;
  const double n = static_cast<double>(dim);

  p.weights.resize(static_cast<Index>(p.mu));
  for (std::size_t i = 0; i < p.mu; ++i) {
    p.weights(static_cast<Index>(i)) = std::log(static_cast<double>(p.mu) + 0.5) - std::log(static_cast<double>(i + 1));
  }
  p.weights /= p.weights.sum();
  p.mueff = 1.0 / p.weights.squaredNorm();

  p.c_sigma = (p.mueff + 2.0) / (n + p.mueff + 5.0);
  p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((p.mueff - 1.0) / (n + 1.0)) - 1.0) + p.c_sigma;
  p.c_c = (4.0 + p.mueff / n) / (n + 4.0 + 2.0 * p.mueff / n);
  p.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + p.mueff);
  p.c_mu = std::min(1.0 - p.c_1, 2.0 * (p.mueff - 2.0 + 1.0 / p.mueff) / ((n + 2.0) * (n + 2.0) + p.mueff));
  p.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  return p;
}

namespace {

CmaState blank_state(std::size_t dim, std::size_t lambda, double sigma0, std::uint64_t seed) {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw ConfigError("sigma0 must be positive");
  CmaState s;
  s.params = CmaParameters::defaults(dim, lambda);
  const auto n = static_cast<Index>(dim);
  s.sigma = sigma0;
  s.cov = MatrixXd::Identity(n, n);
  s.basis = MatrixXd::Identity(n, n);
  s.scales = VectorXd::Ones(n);
  s.path_sigma = VectorXd::Zero(n);
  s.path_c = VectorXd::Zero(n);
  s.rng.seed(seed);
  return s;
}

void decompose(CmaState& s) {
  const auto n = static_cast<Index>(s.params.dim);
  // Keep C exactly symmetric.
  s.cov = 0.5 * (s.cov + s.cov.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(s.cov);
  VectorXd eig = solver.info() == Eigen::Success ? solver.eigenvalues() : VectorXd::Constant(n, -1.0);
  MatrixXd basis = solver.info() == Eigen::Success ? solver.eigenvectors() : MatrixXd::Identity(n, n);
  if (solver.info() != Eigen::Success) {
    // Fall back to the diagonal.
    eig = s.cov.diagonal();
  }
  if (eig.minCoeff() < kEigenFloor) {
    ++s.eigen_floor_events;
    eig = eig.cwiseMax(kEigenFloor);
    s.cov = basis * eig.asDiagonal() * basis.transpose();
    s.cov = 0.5 * (s.cov + s.cov.transpose()).eval();
  }
  s.basis = std::move(basis);
  s.scales = eig.cwiseSqrt();
}

}  // namespace

CmaState cma_init(std::uint64_t seed, double sigma0, std::size_t lambda, std::size_t dim, double low, double high) {
  if (!(high > low)) throw ConfigError("mean sampling range is empty");
  CmaState s = blank_state(dim, lambda, sigma0, seed);
  std::uniform_real_distribution<double> uniform(low, high);
  s.mean.resize(static_cast<Index>(dim));
  for (Index i = 0; i < s.mean.size(); ++i) s.mean(i) = uniform(s.rng);
  return s;
}

CmaState cma_init_with_mean(const VectorXd& mean, std::uint64_t seed, double sigma0, std::size_t lambda) {
  if (!mean.allFinite()) throw ConfigError("initial mean must be finite");
  CmaState s = blank_state(static_cast<std::size_t>(mean.size()), lambda, sigma0, seed);
  s.mean = mean;
  return s;
}

std::vector<VectorXd> cma_ask(CmaState& s) {
  const auto n = static_cast<Index>(s.params.dim);
  std::vector<VectorXd> out;
  out.reserve(s.params.lambda);
  const MatrixXd bd = s.basis * s.scales.asDiagonal();
  for (std::size_t k = 0; k < s.params.lambda; ++k) {
    VectorXd z(n);
    for (Index i = 0; i < n; ++i) z(i) = s.normal(s.rng);
    out.push_back(s.mean + s.sigma * (bd * z));
  }
  return out;
}

std::vector<std::size_t> rank_candidates(std::span<const double> fitness) {
  std::vector<std::size_t> order(fitness.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const bool na = std::isnan(fitness[a]);
    const bool nb = std::isnan(fitness[b]);
    if (na || nb) return !na && nb;
    return fitness[a] < fitness[b];
  });
  return order;
}

void cma_tell(CmaState& s, std::span<const VectorXd> candidates, std::span<const double> fitness) {
  const CmaParameters& p = s.params;
  if (candidates.size() != p.lambda || fitness.size() != p.lambda) {
    throw UsageError("cma_tell expects " + std::to_string(p.lambda) + " candidates and fitness values");
  }
  const auto n = static_cast<Index>(p.dim);
  for (const auto& c : candidates) {
    if (c.size() != n) throw UsageError("candidate dimension mismatch");
  }
  s.nan_fitness_events += static_cast<std::size_t>(std::count_if(fitness.begin(), fitness.end(),
                                                                 [](double f) { return std::isnan(f); }));

  const auto order = rank_candidates(fitness);
  const VectorXd old_mean = s.mean;

  // Selected steps in sigma-normalized coordinates.
  MatrixXd steps(n, static_cast<Index>(p.mu));
  for (std::size_t i = 0; i < p.mu; ++i) {
    steps.col(static_cast<Index>(i)) = (candidates[order[i]] - old_mean) / s.sigma;
  }
  const VectorXd step_w = steps * p.weights;
  s.mean = old_mean + s.sigma * step_w;

  // C^{-1/2} * step_w
  const VectorXd inv_sqrt_step = s.basis * (s.basis.transpose() * step_w).cwiseQuotient(s.scales);
  s.path_sigma = (1.0 - p.c_sigma) * s.path_sigma +
                 std::sqrt(p.c_sigma * (2.0 - p.c_sigma) * p.mueff) * inv_sqrt_step;

  const double gen = static_cast<double>(s.generation + 1);
  const double ps_norm = s.path_sigma.norm();
  const double ps_ref = std::sqrt(1.0 - std::pow(1.0 - p.c_sigma, 2.0 * gen));
  const bool h_sigma = ps_norm / ps_ref < (1.4 + 2.0 / (static_cast<double>(p.dim) + 1.0)) * p.chi_n;

  s.path_c = (1.0 - p.c_c) * s.path_c;
  if (h_sigma) s.path_c += std::sqrt(p.c_c * (2.0 - p.c_c) * p.mueff) * step_w;

  const double stall = h_sigma ? 0.0 : p.c_1 * p.c_c * (2.0 - p.c_c);
  MatrixXd rank_mu = steps * p.weights.asDiagonal() * steps.transpose();
  s.cov = (1.0 - p.c_1 - p.c_mu + stall) * s.cov + p.c_1 * (s.path_c * s.path_c.transpose()) + p.c_mu * rank_mu;

  s.sigma *= std::exp((p.c_sigma / p.d_sigma) * (ps_norm / p.chi_n - 1.0));
  if (!std::isfinite(s.sigma) || s.sigma <= 0.0) throw RuntimeFailure("CMA-ES step size degenerated");

  decompose(s);
  ++s.generation;
}

}  // namespace evoqrnn::optim
