#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "evoqrnn/density_matrix.hpp"
#include "evoqrnn/errors.hpp"
#include "evoqrnn/gates.hpp"
#include "support/reference.hpp"

using namespace evoqrnn;
using sim::DensityMatrix;
using sim::Gate;
using testing::CMatrix;

namespace {

constexpr double kPi = std::numbers::pi;

Gate random_gate(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<std::size_t> qubit(0, n - 1);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  const std::size_t q = qubit(rng);
  switch (kind(rng)) {
    case 0: return Gate::rx(q, angle(rng));
    case 1: return Gate::ry(q, angle(rng));
    case 2: return Gate::rz(q, angle(rng));
    case 3: return Gate::u3(q, angle(rng), angle(rng), angle(rng));
    default: {
      std::size_t t = qubit(rng);
      while (t == q) t = qubit(rng);
      return Gate::crx(q, t, angle(rng));
    }
  }
}

}  // namespace

TEST_CASE("zero_state") {
  const auto two = DensityMatrix::zero_state(2);
  CHECK(two.matrix()(0, 0) == std::complex<double>(1.0));
  CHECK(two.matrix().cwiseAbs().sum() == doctest::Approx(1.0));

  const auto one = DensityMatrix::zero_state(1);
  CMatrix expected = CMatrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  CHECK(one.matrix() == expected);

  CHECK(DensityMatrix::zero_state(6).trace().real() == 1.0);
  CHECK_THROWS_AS(DensityMatrix::zero_state(0), ConfigError);
  CHECK_THROWS_AS(DensityMatrix::zero_state(11), ConfigError);
}

TEST_CASE("gate matrices are unitary and follow the rotation conventions") {
  CHECK(sim::gate_matrix(Gate::ry(0, 0.0)).isApprox(CMatrix::Identity(2, 2)));

  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Gate g = random_gate(rng, 3);
    const CMatrix u = sim::gate_matrix(g);
    const auto dim = u.rows();
    CHECK((u.adjoint() * u - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);
  }

  // U3(t, -pi/2, pi/2) is RX(t) and U3(t, 0, 0) is RY(t).
  const double t = 0.7;
  CHECK(sim::gate_matrix(Gate::u3(0, t, 0, 0)).isApprox(sim::gate_matrix(Gate::ry(0, t)), 1e-14));
  CHECK(sim::gate_matrix(Gate::u3(0, t, -kPi / 2, kPi / 2)).isApprox(sim::gate_matrix(Gate::rx(0, t)), 1e-14));
}

TEST_CASE("half-turns") {
  auto rho = sim::apply_gate(DensityMatrix::zero_state(1), Gate::ry(0, kPi));
  CHECK(sim::prob_one(rho, 0) == doctest::Approx(1.0).epsilon(1e-14));

  // control |1>, target |0>
  auto two = sim::apply_gate(DensityMatrix::zero_state(2), Gate::ry(0, kPi));
  two = sim::apply_gate(two, Gate::crx(0, 1, kPi));
  CHECK(sim::prob_one(two, 1) == doctest::Approx(1.0).epsilon(1e-14));

  // control |0>: nothing happens
  auto idle = sim::apply_gate(DensityMatrix::zero_state(2), Gate::crx(0, 1, kPi));
  CHECK(sim::prob_one(idle, 1) == doctest::Approx(0.0));
}

TEST_CASE("basis convention: qubit 0 is the most significant bit") {
  const auto rho = sim::apply_gate(DensityMatrix::zero_state(2), Gate::ry(0, kPi));
  CHECK(std::abs(rho.matrix()(2, 2) - 1.0) < 1e-14);
  CHECK(std::abs(rho.matrix()(1, 1)) < 1e-14);
}

TEST_CASE("apply_gate examples") {
  const auto half = sim::apply_gate(DensityMatrix::zero_state(1), Gate::ry(0, kPi / 2));
  CHECK(sim::prob_one(half, 0) == doctest::Approx(0.5).epsilon(1e-14));

  std::mt19937_64 rng(3);
  DensityMatrix rho = DensityMatrix::zero_state(3);
  for (int i = 0; i < 10; ++i) sim::apply_gate_inplace(rho, random_gate(rng, 3));
  CHECK(sim::apply_gate(rho, Gate::ry(1, 0.0)).matrix() == rho.matrix());
}

TEST_CASE("axis kernels agree with dense Kronecker conjugation") {
  std::mt19937_64 rng(11);
  DensityMatrix kernel = DensityMatrix::zero_state(4);
  DensityMatrix dense = kernel;
  for (int i = 0; i < 60; ++i) {
    const Gate g = random_gate(rng, 4);
    sim::apply_gate_inplace(kernel, g);
    dense = testing::dense_apply(dense, g);
  }
  CHECK((kernel.matrix() - dense.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gate errors") {
  auto rho = DensityMatrix::zero_state(2);
  CHECK_THROWS_AS(sim::apply_gate(rho, Gate::ry(2, 0.1)), UsageError);
  CHECK_THROWS_AS(sim::apply_gate(rho, Gate::crx(1, 1, 0.1)), UsageError);
  CHECK_THROWS_AS(sim::prob_one(rho, 5), UsageError);
  const std::vector<std::size_t> dup{0, 0};
  CHECK_THROWS_AS(sim::reset_qubits(rho, dup), UsageError);
}

TEST_CASE("prob_one matches sin^2(theta/2)") {
  CHECK(sim::prob_one(DensityMatrix::zero_state(3), 0) == 0.0);
  auto two = sim::apply_gate(DensityMatrix::zero_state(2), Gate::ry(1, kPi));
  CHECK(sim::prob_one(two, 1) == doctest::Approx(1.0).epsilon(1e-14));

  // Frozen from tests/oracles/golden_values.py.
  const std::pair<double, double> cases[] = {
      {0.3, 0.022331755437196989}, {1.1, 0.27320193928721137}, {2.9, 0.98547908257479522}};
  for (auto [theta, expected] : cases) {
    const auto rho = sim::apply_gate(DensityMatrix::zero_state(1), Gate::ry(0, theta));
    CHECK(std::abs(sim::prob_one(rho, 0) - expected) < 1e-15);
  }
}

TEST_CASE("prob_one is linear in the state") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    DensityMatrix a = DensityMatrix::zero_state(3), b = DensityMatrix::zero_state(3);
    for (int i = 0; i < 8; ++i) {
      sim::apply_gate_inplace(a, random_gate(rng, 3));
      sim::apply_gate_inplace(b, random_gate(rng, 3));
    }
    const double p = std::uniform_real_distribution<double>(0, 1)(rng);
    const DensityMatrix mix(3, p * a.matrix() + (1 - p) * b.matrix());
    for (std::size_t q = 0; q < 3; ++q) {
      CHECK(std::abs(sim::prob_one(mix, q) - (p * sim::prob_one(a, q) + (1 - p) * sim::prob_one(b, q))) < 1e-12);
    }
  }
}

TEST_CASE("reset_qubits") {
  SUBCASE("|1><1| -> |0><0|") {
    CMatrix one = CMatrix::Zero(2, 2);
    one(1, 1) = 1.0;
    const std::vector<std::size_t> q0{0};
    const auto out = sim::reset_qubits(DensityMatrix(1, one), q0);
    CHECK(out.matrix().isApprox(DensityMatrix::zero_state(1).matrix()));
  }
  SUBCASE("Bell state") {
    Eigen::Vector4cd bell(1, 0, 0, 1);
    bell /= std::sqrt(2.0);
    const DensityMatrix rho(2, bell * bell.adjoint());
    const std::vector<std::size_t> q1{1};
    const auto out = sim::reset_qubits(rho, q1);
    Eigen::Vector4d expected(0.5, 0.0, 0.5, 0.0);
    CHECK((out.matrix() - CMatrix(expected.asDiagonal().toDenseMatrix().cast<std::complex<double>>()))
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  }
  SUBCASE("memory register of random product states is untouched") {
    std::mt19937_64 rng(21);
    const std::vector<std::size_t> io{0, 1, 2};
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<CMatrix> factors;
      for (int q = 0; q < 6; ++q) factors.push_back(testing::random_qubit(rng));
      const DensityMatrix rho(6, testing::kron_all(factors));
      const CMatrix mem_oracle = testing::kron_all({factors[3], factors[4], factors[5]});
      const auto reset = sim::reset_qubits(rho, io);
      CHECK((sim::partial_trace(rho, io).matrix() - mem_oracle).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((sim::partial_trace(reset, io).matrix() - mem_oracle).cwiseAbs().maxCoeff() < 1e-12);
      for (auto q : io) CHECK(sim::prob_one(reset, q) < 1e-15);
      // fresh |000> on the I/O block
      CMatrix zero3 = CMatrix::Zero(8, 8);
      zero3(0, 0) = 1.0;
      CHECK((reset.matrix() - testing::kron_all({zero3, mem_oracle})).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("invariants under random gate and reset sequences") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> coin(0, 9);
  std::uniform_int_distribution<std::size_t> qubit(0, 5);
  for (int trial = 0; trial < 30; ++trial) {
    DensityMatrix rho = DensityMatrix::zero_state(6);
    for (int i = 0; i < 25; ++i) {
      if (coin(rng) == 0) {
        const std::vector<std::size_t> q{qubit(rng)};
        rho = sim::reset_qubits(rho, q);
      } else {
        sim::apply_gate_inplace(rho, random_gate(rng, 6));
      }
    }
    CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
    CHECK(rho.hermiticity_error() < 1e-12);
    CHECK(rho.min_eigenvalue() > -1e-10);
  }
}

TEST_CASE("rotations are undone by their negative angle") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  DensityMatrix rho = DensityMatrix::zero_state(3);
  for (int i = 0; i < 10; ++i) sim::apply_gate_inplace(rho, random_gate(rng, 3));
  for (int i = 0; i < 20; ++i) {
    const double t = angle(rng);
    const std::size_t q = static_cast<std::size_t>(i % 3);
    for (const auto& [fwd, back] : {std::pair{Gate::rx(q, t), Gate::rx(q, -t)}, std::pair{Gate::ry(q, t), Gate::ry(q, -t)},
                                    std::pair{Gate::rz(q, t), Gate::rz(q, -t)}}) {
      const auto round = sim::apply_gate(sim::apply_gate(rho, fwd), back);
      CHECK((round.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("reset is idempotent") {
  std::mt19937_64 rng(8);
  DensityMatrix rho = DensityMatrix::zero_state(4);
  for (int i = 0; i < 30; ++i) sim::apply_gate_inplace(rho, random_gate(rng, 4));
  const std::vector<std::size_t> qs{0, 2};
  const auto once = sim::reset_qubits(rho, qs);
  const auto twice = sim::reset_qubits(once, qs);
  CHECK((once.matrix() - twice.matrix()).cwiseAbs().maxCoeff() < 1e-15);
}
