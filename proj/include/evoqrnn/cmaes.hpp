#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace evoqrnn::optim {

/// Strategy constants of a (mu/mu_w, lambda)-CMA-ES with positive weights
/// w_i ~ ln(mu + 1/2) - ln(i), mu = lambda / 2.
struct CmaParameters {
  std::size_t dim = 0;
  std::size_t lambda = 0;
  std::size_t mu = 0;
  Eigen::VectorXd weights;
  double mueff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  /// E||N(0, I)||, series approximation.
  double chi_n = 0.0;

  static CmaParameters defaults(std::size_t dim, std::size_t lambda);
};

struct CmaState {
  CmaParameters params;
  Eigen::VectorXd mean;
  double sigma = 0.5;
  Eigen::MatrixXd cov;
  // cov = basis * diag(scales^2) * basis^T
  Eigen::MatrixXd basis;
  Eigen::VectorXd scales;
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_c;
  std::uint64_t generation = 0;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal;

  std::size_t nan_fitness_events = 0;
  std::size_t eigen_floor_events = 0;
};

inline constexpr double kEigenFloor = 1e-14;

/// Mean drawn uniformly from [low, high)^dim with a generator seeded by `seed`;
/// sampling then continues on the same stream.
CmaState cma_init(std::uint64_t seed, double sigma0 = 0.5, std::size_t lambda = 10, std::size_t dim = 24,
                  double low = -3.141592653589793, double high = 3.141592653589793);

/// Explicit starting mean (warm start).
CmaState cma_init_with_mean(const Eigen::VectorXd& mean, std::uint64_t seed, double sigma0 = 0.5,
                            std::size_t lambda = 10);

/// lambda candidates mean + sigma * B * D * z, z ~ N(0, I).
std::vector<Eigen::VectorXd> cma_ask(CmaState& state);

/// Rank-based update: weighted recombination, cumulative step-size
/// adaptation, rank-one plus rank-mu covariance update. Lower fitness is
/// better; NaN ranks last; ties keep candidate order.
void cma_tell(CmaState& state, std::span<const Eigen::VectorXd> candidates, std::span<const double> fitness);

/// Candidate indices ordered best first.
std::vector<std::size_t> rank_candidates(std::span<const double> fitness);

}  // namespace evoqrnn::optim
