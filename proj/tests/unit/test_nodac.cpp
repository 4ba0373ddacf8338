#include <doctest.h>

#include <random>
#include <vector>

#include "fixtures.hpp"
#include "oscsync/error.hpp"
#include "oscsync/nodac.hpp"

using namespace oscsync;

TEST_CASE("backward differences") {
  CHECK(nth_difference(std::vector<double>{3, 5}, 1) == 2.0);
  CHECK(nth_difference(std::vector<double>{0, 1, 4}, 2) == 2.0);
  // Only the newest order + 1 samples count.
  CHECK(nth_difference(std::vector<double>{100, 0, 1, 4}, 2) == 2.0);
  for (int k = 2; k < 20; ++k) {
    const double c = 0.37;
    CHECK(nth_difference(std::vector<double>{c * (k - 2), c * (k - 1), c * k}, 2) == doctest::Approx(0.0));
  }
  // Third difference of k^3 is the constant 6.
  CHECK(nth_difference(std::vector<double>{1, 8, 27, 64}, 3) == doctest::Approx(6.0));
  CHECK_THROWS_AS(nth_difference(std::vector<double>{1, 2}, 2), InvalidArgument);
}

TEST_CASE("construction checks") {
  CHECK_THROWS_AS(Nodac(fixtures::pair().scaled(0.4), 0), InvalidArgument);
  CHECK_THROWS_AS(Nodac(fixtures::pair(), 1), InvalidArgument);  // row sum 1
  CHECK(default_nodac_weight(fixtures::five_agent()) == doctest::Approx(0.2));
  const Network w = nodac_network(fixtures::five_agent());
  CHECK(w.weights().rowwise().sum().maxCoeff() < 1.0);
  const Nodac algo(fixtures::pair().scaled(0.4), 2);
  NodacState s = algo.initial_state();
  CHECK(s.order() == 2);
  CHECK(s.inputs.size() == 3);
  CHECK_THROWS_AS(algo.step(s, Vector::Zero(3)), InvalidArgument);
}

TEST_CASE("consensus with constant input is a fixed point") {
  const Nodac algo(fixtures::pair().scaled(0.4), 2);
  NodacState s = algo.initial_state();
  s.stages.row(0).setZero();  // difference stage settles at zero
  s.stages.row(1).setConstant(1.5);
  for (auto& u : s.inputs) u = (Vector(2) << 1.0, 2.0).finished();
  const NodacState next = algo.step(s, (Vector(2) << 1.0, 2.0).finished());
  CHECK(next.stages == s.stages);
  CHECK(next.step == 1);
}

TEST_CASE("two stages track ramp inputs exactly") {
  const Nodac algo(fixtures::pair().scaled(0.4), 2);
  NodacState s = algo.initial_state();
  const Vector c = (Vector(2) << 1.0, 2.0).finished();
  double worst = 0.0;
  for (int k = 0; k <= 600; ++k) {
    s = algo.step(s, c * static_cast<double>(k));
    if (k >= 500) worst = std::max(worst, (s.output().array() - 1.5 * k).abs().maxCoeff());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("one stage averages constant inputs") {
  const Network net = build_network({{2}, {0}, {1}}, 0.3);  // directed ring, balanced
  const Nodac algo(net, 1);
  NodacState s = algo.initial_state();
  const Vector c = (Vector(3) << 4.0, -1.0, 0.5).finished();
  for (int k = 0; k < 400; ++k) s = algo.step(s, c);
  CHECK((s.output().array() - c.mean()).abs().maxCoeff() < 1e-9);
}

TEST_CASE("sum of the top stage equals the sum of the inputs") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Network net = fixtures::random_symmetric(4, rng);
  const double max_row = net.weights().rowwise().sum().maxCoeff();
  const Nodac algo(net.scaled(0.9 / max_row), 2);
  NodacState s = algo.initial_state();
  for (int k = 0; k < 50; ++k) {
    Vector in(4);
    for (int i = 0; i < 4; ++i) in(i) = u(rng) + 0.1 * k;
    s = algo.step(s, in);
    CHECK(s.output().sum() == doctest::Approx(in.sum()).epsilon(1e-10));
  }
}

TEST_CASE("polynomial tracking over random balanced graphs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<std::size_t> size(2, 5);
  for (int inst = 0; inst < 60; ++inst) {
    const std::size_t n = size(rng);
    const Network raw = fixtures::random_symmetric(n, rng);
    const Network net = raw.scaled(1.0 / (raw.weights().rowwise().sum().maxCoeff() + 1.0));
    const std::size_t degree = static_cast<std::size_t>(inst % 2);
    Vector a(static_cast<Eigen::Index>(n)), b(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a(i) = u(rng);
      b(i) = degree == 1 ? u(rng) : 0.0;
    }
    const Nodac algo(net, degree + 1);
    NodacState s = algo.initial_state();
    NodacState shifted = algo.initial_state();
    for (int k = 0; k <= 500; ++k) {
      const Vector in = a + b * static_cast<double>(k);
      s = algo.step(s, in);
      shifted = algo.step(shifted, in.array() + 3.0);
    }
    const double avg = a.mean() + b.mean() * 500.0;
    CHECK((s.output().array() - avg).abs().maxCoeff() < 1e-6);
    // A common input offset moves the tracked value by the same offset.
    CHECK((shifted.output() - s.output()).isApprox(Vector::Constant(a.size(), 3.0), 1e-9));
  }
}
