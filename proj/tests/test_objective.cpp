#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "evoqrnn/data.hpp"
#include "evoqrnn/errors.hpp"
#include "evoqrnn/objective.hpp"
#include "support/reference.hpp"

using namespace evoqrnn;
using objective::ForecastLoss;
using objective::LossMode;
using objective::LossSpec;

namespace {

constexpr double kPi = std::numbers::pi;

double s(double u) { return std::pow(std::sin(kPi * u / 2), 2); }

std::vector<double> mg_prefix(std::size_t n) {
  const auto raw = data::mackey_glass({}, 100);
  const auto norm = data::normalize(raw, 0, 80);
  return {norm.values.begin(), norm.values.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

TEST_CASE("rel_rmse") {
  const std::vector<double> truth{1, 2, 3};
  CHECK(objective::rel_rmse(truth, truth) == 0.0);
  CHECK(objective::rel_rmse(std::vector<double>{0, 0, 0}, truth) == 1.0);
  const std::vector<double> shifted{1.1, 2.1, 3.1};
  CHECK(objective::rel_rmse(shifted, truth) == doctest::Approx(0.046291004988627572).epsilon(1e-12));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> p(8), t(8), ps(8), ts(8);
    const double c = n(rng) * 10;
    for (int i = 0; i < 8; ++i) {
      p[i] = n(rng);
      t[i] = n(rng);
      ps[i] = c * p[i];
      ts[i] = c * t[i];
    }
    CHECK(std::abs(objective::rel_rmse(ps, ts) - objective::rel_rmse(p, t)) < 1e-12);
  }

  CHECK_THROWS_AS(objective::rel_rmse(std::vector<double>{1}, truth), UsageError);
  CHECK_THROWS_AS(objective::rel_rmse(truth, std::vector<double>{0, 0, 0}), UsageError);
}

TEST_CASE("train_loss") {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(24);

  SUBCASE("fixed point of the identity ansatz") {
    const std::vector<double> flat(12, 0.5);
    CHECK(objective::train_loss(zero, flat, {LossMode::OneStep, 1}) == doctest::Approx(0.0).epsilon(1e-28));
  }
  SUBCASE("a series the identity model predicts exactly") {
    std::vector<double> orbit{0.8};
    while (orbit.size() < 15) orbit.push_back(s(orbit.back()));
    CHECK(objective::train_loss(zero, orbit, {LossMode::MultiStep, 3}) < 1e-28);
  }
  SUBCASE("matches the naive per-origin reference and is deterministic") {
    std::mt19937_64 rng(5);
    const auto train = mg_prefix(14);
    for (int trial = 0; trial < 3; ++trial) {
      const auto theta = testing::uniform_theta(rng);
      for (const LossSpec spec : {LossSpec{LossMode::OneStep, 3}, LossSpec{LossMode::MultiStep, 3}}) {
        const double fast = objective::train_loss(theta, train, spec);
        CHECK(std::abs(fast - testing::naive_forecast_loss(theta, train, spec)) < 1e-12);
        CHECK(fast == objective::train_loss(theta, train, spec));
        CHECK(fast >= 0.0);
      }
    }
  }
  SUBCASE("split too short") {
    CHECK_THROWS_AS(ForecastLoss(std::vector<double>(4, 0.5), {LossMode::MultiStep, 3}), ConfigError);
    CHECK_NOTHROW(ForecastLoss(std::vector<double>(5, 0.5), {LossMode::MultiStep, 3}));
  }
}

TEST_CASE("occurrence bookkeeping") {
  const ForecastLoss multi(std::vector<double>(10, 0.5), {LossMode::MultiStep, 2});
  CHECK(multi.n_origins() == 8);
  CHECK(multi.feedback_steps() == 8);
  CHECK(multi.ansatz_occurrences() == 16);
  CHECK(multi.shift_evaluations() == (2 * 18 + 4 * 6) * 16 + 2 * 3 * 8);

  const ForecastLoss one(std::vector<double>(80, 0.5), {LossMode::OneStep, 4});
  CHECK(one.ansatz_occurrences() == 79);
  CHECK(one.feedback_steps() == 0);
  CHECK(one.shift_evaluations() == 60 * 79);
}

TEST_CASE("shift rules are exact on a single gate") {
  // Two-term rule on RY: d/dt sin^2(t/2) = sin(t)/2.
  auto p_ry = [](double t) {
    return sim::prob_one(sim::apply_gate(sim::DensityMatrix::zero_state(1), sim::Gate::ry(0, t)), 0);
  };
  const auto two = objective::shift_rule(0, {});
  REQUIRE(two.size() == 2);
  for (double t : {kPi / 2, 0.3, -2.0}) {
    double g = 0.0;
    for (const auto& term : two) g += term.coeff * p_ry(t + term.shift);
    CHECK(std::abs(g - std::sin(t) / 2) < 1e-14);
  }

  // Four-term rule on CRX with the control in superposition.
  auto p_crx = [](double t) {
    auto rho = sim::apply_gate(sim::DensityMatrix::zero_state(2), sim::Gate::ry(0, 1.1));
    rho = sim::apply_gate(rho, sim::Gate::ry(1, 0.4));
    rho = sim::apply_gate(rho, sim::Gate::crx(0, 1, t));
    return sim::prob_one(rho, 1);
  };
  const auto four = objective::shift_rule(18, {});
  REQUIRE(four.size() == 4);
  for (double t : {0.0, 0.9, -2.4}) {
    double g = 0.0;
    for (const auto& term : four) g += term.coeff * p_crx(t + term.shift);
    const double fd = (p_crx(t + 1e-5) - p_crx(t - 1e-5)) / 2e-5;
    CHECK(std::abs(g - fd) < 1e-9);
  }
}

TEST_CASE("parameter-shift gradient matches finite differences of the reference model") {
  std::mt19937_64 rng(17);
  const auto train = mg_prefix(10);
  for (const LossSpec spec : {LossSpec{LossMode::MultiStep, 2}, LossSpec{LossMode::OneStep, 1}}) {
    const ForecastLoss loss(train, spec);
    for (int trial = 0; trial < 2; ++trial) {
      const auto theta = testing::uniform_theta(rng);
      const auto ps = loss.value_and_gradient(theta);
      CHECK(std::abs(ps.value - loss.value(theta)) < 1e-13);
      const auto fd = objective::grad_finite_diff(
          [&](const Eigen::VectorXd& t) { return testing::naive_forecast_loss(t, train, spec); }, theta, 1e-5);
      for (Eigen::Index k = 0; k < 24; ++k) {
        CHECK(std::abs(ps.gradient(k) - fd(k)) <= std::max(1e-6, 1e-4 * std::abs(fd(k))));
      }
    }
  }
}

TEST_CASE("memory rotations do not move the loss at the identity point") {
  const std::vector<double> flat(10, 0.5);
  const ForecastLoss loss(flat, {LossMode::OneStep, 1});
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(24);
  const auto g = objective::grad_parameter_shift(loss, zero);
  const auto fd = objective::grad_finite_diff([&](const Eigen::VectorXd& t) { return loss.value(t); }, zero, 1e-5);
  for (Eigen::Index k = 9; k < 18; ++k) {
    CHECK(std::abs(g(k)) < 1e-12);
    CHECK(std::abs(fd(k)) < 1e-9);
  }
}

TEST_CASE("finite differences") {
  Eigen::VectorXd x(4);
  x << 0.3, -1.2, 2.0, 0.0;
  auto quad = [](const Eigen::VectorXd& v) { return v.squaredNorm(); };
  CHECK((objective::grad_finite_diff(quad, x, 1e-5) - 2 * x).cwiseAbs().maxCoeff() < 1e-8);

  // Truncation error of the central difference on sin is h^2 cos(x) / 6.
  auto sines = [](const Eigen::VectorXd& v) { return v.array().sin().sum(); };
  const Eigen::VectorXd exact = x.array().cos();
  const Eigen::VectorXd coarse = objective::grad_finite_diff(sines, x, 1e-2);
  const Eigen::VectorXd fine = objective::grad_finite_diff(sines, x, 1e-5);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double predicted = -1e-4 * std::cos(x(i)) / 6;
    CHECK((coarse(i) - exact(i)) == doctest::Approx(predicted).epsilon(1e-3));
    CHECK(std::abs(fine(i) - exact(i)) < 1e-9);
  }
  CHECK_THROWS_AS(objective::grad_finite_diff(quad, x, 0.0), UsageError);
}
