#include "evoqrnn/adam.hpp"

#include <cmath>

#include "evoqrnn/errors.hpp"

namespace evoqrnn::optim {

AdamState AdamState::init(std::size_t dim, double lr) {
  AdamState s;
  s.lr = lr;
  s.m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  s.v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  return s;
}

Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
  if (grad.size() != theta.size() || state.m.size() != theta.size()) {
    throw UsageError("adam_step dimension mismatch");
  }
  if (!grad.allFinite()) throw RuntimeFailure("non-finite gradient passed to Adam");

  state.t += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  const Eigen::VectorXd m_hat = state.m / bc1;
  const Eigen::VectorXd v_hat = state.v / bc2;
  return theta - state.lr * (m_hat.array() / (v_hat.array().sqrt() + state.eps)).matrix();
}

}  // namespace evoqrnn::optim
