#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace evoqrnn::optim {

/// Adam with bias correction; defaults match torch.optim.Adam apart from the
/// learning rate.
struct AdamState {
  double lr = 0.03;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::uint64_t t = 0;

  static AdamState init(std::size_t dim, double lr = 0.03);
};

/// Advances `state` and returns the updated parameters. Throws RuntimeFailure
/// on a non-finite gradient, leaving `state` untouched.
Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& theta, const Eigen::VectorXd& grad);

}  // namespace evoqrnn::optim
