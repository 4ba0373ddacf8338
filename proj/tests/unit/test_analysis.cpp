#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oscsync/analysis.hpp"
#include "oscsync/error.hpp"

using namespace oscsync;

namespace {

Trajectory synthetic(const std::vector<double>& offsets, double slope, double intercept, double horizon, double h) {
  Trajectory t;
  const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
  t.step = h;
  t.theta.resize(static_cast<Eigen::Index>(steps + 1), static_cast<Eigen::Index>(offsets.size()));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double time = static_cast<double>(k) * h;
    t.times.push_back(time);
    for (std::size_t i = 0; i < offsets.size(); ++i)
      t.theta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = slope * time + intercept + offsets[i];
  }
  t.theta_dot = Matrix::Constant(t.theta.rows(), t.theta.cols(), slope);
  return t;
}

Trajectory run(const Network& net, const Vector& omega, const Vector& phi0, double k, double horizon) {
  return integrate(SimulationSetup{OscillatorBank(omega, phi0), net, ProtocolSpec{ProtocolKind::kuramoto, k, {}, {}},
                                   0.01, horizon, std::nullopt});
}

}  // namespace

TEST_CASE("wrap_phase") {
  CHECK(wrap_phase(0.2281 + kTwoPi) == doctest::Approx(0.2281));
  CHECK(wrap_phase(1.5 * kPi) == doctest::Approx(-0.5 * kPi));
  CHECK(wrap_phase(-kPi) == -kPi);
  CHECK(wrap_phase(kPi) == -kPi);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_int_distribution<int> turns(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const double w = wrap_phase(x);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
    CHECK(wrap_phase(w) == w);
    CHECK(std::abs(std::remainder(w - x, kTwoPi)) < 1e-9);
    CHECK(wrap_phase(x + kTwoPi * turns(rng)) == doctest::Approx(w).epsilon(1e-9));
  }
}

TEST_CASE("order parameter") {
  const OrderParameter same = order_parameter((Vector(3) << 4.0, 4.0, 4.0).finished());
  CHECK(same.r == doctest::Approx(1.0));
  REQUIRE(same.psi);
  CHECK(*same.psi == doctest::Approx(wrap_phase(4.0)));
  CHECK_FALSE(order_parameter((Vector(2) << 0.0, kPi).finished()).psi);
  const OrderParameter sym = order_parameter((Vector(3) << 0.0, kTwoPi / 3, 2 * kTwoPi / 3).finished());
  CHECK(sym.r < 1e-12);
  CHECK_FALSE(sym.psi);
  CHECK_THROWS_AS(order_parameter(std::span<const double>()), InvalidArgument);
}

TEST_CASE("consensus line fit") {
  const Trajectory exact = synthetic({0.0, 0.0, 0.0}, 2.0, 1.0, 5.0, 0.01);
  const ConsensusLine line = fit_consensus(exact, 1.0, 5.0);
  CHECK(std::abs(line.slope - 2.0) < 1e-9);
  CHECK(std::abs(line.intercept - 1.0) < 1e-9);
  CHECK(phase_error(exact, line).cwiseAbs().maxCoeff() < 1e-9);

  // Agents on other 2 pi branches are synchronized too.
  const Trajectory branches = synthetic({0.0, kTwoPi, -2 * kTwoPi}, 1.072, 0.2281, 5.0, 0.01);
  const ConsensusLine b = fit_consensus(branches, 3.0, 5.0);
  CHECK(std::abs(b.slope - 1.072) < 1e-9);
  CHECK(std::abs(b.intercept - 0.2281) < 1e-9);
  CHECK(phase_error(branches, b).cwiseAbs().maxCoeff() < 1e-9);

  // Intercepts outside [-pi, pi) are reported wrapped.
  const ConsensusLine w = fit_consensus(synthetic({0.0, 0.0}, -0.5, 4.0, 2.0, 0.01), 0.0, 2.0);
  CHECK(w.intercept == doctest::Approx(4.0 - kTwoPi));

  CHECK_THROWS_AS(fit_consensus(exact, 4.95, 5.0), InvalidArgument);
  CHECK_THROWS_AS(fit_consensus(exact, 3.0, 2.0), InvalidArgument);
}

TEST_CASE("consensus frequency") {
  const SpectralData s = spectral(fixtures::five_agent());
  CHECK(consensus_frequency(s.gamma, fixtures::five_omega()) == doctest::Approx(1.0720).epsilon(2e-4));
  // Hand dot product with the rounded reference direction.
  const Vector g = (Vector(5) << 0.6527, 0.2670, 0.0890, 0.3264, 0.6231).finished();
  CHECK(g.dot(fixtures::five_omega()) == doctest::Approx(2.0991).epsilon(1e-4));
  CHECK(g.sum() == doctest::Approx(1.9582).epsilon(1e-4));
  const Vector uniform = Vector::Constant(4, 0.5);
  const Vector omega = (Vector(4) << 1, 2, 3, 6).finished();
  CHECK(consensus_frequency(uniform, omega) == doctest::Approx(3.0));
  CHECK(consensus_frequency(s.gamma, Vector::Constant(5, 0.9)) == doctest::Approx(0.9));
  CHECK_THROWS_AS(consensus_frequency(Vector::Zero(2), Vector::Ones(2)), InvalidArgument);
}

TEST_CASE("steady error bounds") {
  const SpectralData s = spectral(fixtures::five_agent());
  const Vector omega = fixtures::five_omega();
  const ErrorBoundReport arb = bound_arbitrary(omega, s);
  CHECK(arb.kind == BoundKind::arbitrary);
  CHECK(arb.value == doctest::Approx(0.1528).epsilon(1e-3 / 0.1528));
  // Hand check with rounded constants.
  CHECK((omega.array() - 1.0720).matrix().norm() / 2.382 == doctest::Approx(0.1528).epsilon(1e-3));
  CHECK(bound_arbitrary(Vector::Constant(5, 2.0), s).value < 1e-12);
  CHECK(bound_gamma(omega, s.gamma, s.lambda2).value == doctest::Approx(arb.value));
  CHECK(to_string(BoundKind::arbitrary) == "arbitrary");

  // The weighted mean removes the consensus direction exactly.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Vector w(5);
    for (int k = 0; k < 5; ++k) w(k) = u(rng);
    CHECK(std::abs(s.gamma.dot((w.array() - consensus_frequency(s.gamma, w)).matrix())) < 1e-10);
  }

  // Pair with K = 1: lambda2_hat of the K/N weighted graph is 1.
  const SpectralData p = spectral(complete_network(2, 0.5));
  const Vector w2 = (Vector(2) << 1.0, 1.1).finished();
  CHECK(bound_alltoall(w2, p).value == doctest::Approx(0.05 * std::sqrt(2.0)));
  CHECK(bound_alltoall(Vector::Constant(2, 3.0), p).value == 0.0);
  // Balanced case: arbitrary bound has the all-to-all shape with lambda2.
  std::mt19937_64 g(9);
  const SpectralData b = spectral(fixtures::random_symmetric(5, g));
  CHECK(bound_arbitrary(omega, b).value ==
        doctest::Approx((omega.array() - omega.mean()).matrix().norm() / b.lambda2));
  CHECK(bound_gamma(omega, Vector::Constant(5, 1.0 / std::sqrt(5.0)), b.lambda2).value ==
        doctest::Approx(bound_arbitrary(omega, b).value));
}

TEST_CASE("pair bound holds in simulation") {
  const Trajectory t = run(fixtures::pair(), (Vector(2) << 1.0, 1.1).finished(), Vector::Zero(2), 1.0, 30.0);
  const ConsensusLine line = fit_consensus(t, 20.0, 30.0);
  const Matrix e = phase_error(t, line);
  const double bound = bound_alltoall((Vector(2) << 1.0, 1.1).finished(), spectral(complete_network(2, 0.5))).value;
  CHECK(e.bottomRows(500).cwiseAbs().maxCoeff() <= bound);
  CHECK(e.bottomRows(500).cwiseAbs().maxCoeff() == doctest::Approx(0.5 * std::asin(0.1)).epsilon(1e-4));
}

TEST_CASE("dynamic consensus bound") {
  std::mt19937_64 g(6);
  const SpectralData b = spectral(fixtures::random_symmetric(4, g));
  const Vector x0 = Vector::Constant(4, 0.3);
  CHECK(bound_dynamic(x0, x0, 0.0, b, 2.0).value < 1e-15);
  const Vector y0 = (Vector(4) << 0.1, -0.4, 0.9, 0.0).finished();
  const double sup = 0.8;
  const double far = bound_dynamic(y0, y0, sup, b, 200.0).value;
  CHECK(far == doctest::Approx(sup / b.lambda2_hat));
  const double start = bound_dynamic(y0, y0, 0.0, b, 0.0).value;
  const Vector centered = y0.array() - y0.mean();
  CHECK(start == doctest::Approx(centered.norm()));
  CHECK(bound_dynamic(y0, y0, 0.0, b, 1.0).value == doctest::Approx(std::exp(-b.lambda2_hat) * centered.norm()));
  // Initialization offsets add in quadrature.
  CHECK(bound_dynamic(Vector::Constant(4, 1.0), Vector::Zero(4), 0.0, b, 1.0).value == doctest::Approx(2.0));
  CHECK_THROWS_AS(bound_dynamic(y0, y0, 0.0, spectral(fixtures::five_agent()), 1.0), InvalidArgument);
}

TEST_CASE("residual of the consensus direction") {
  const Network net = fixtures::five_agent();
  const IncidenceData inc = incidence(net, 1.0);
  const SpectralData s = spectral(net);
  CHECK(residual_gamma(Vector::Constant(5, 0.7), inc, s.gamma) < 1e-15);
  const Trajectory t = run(net, fixtures::five_omega(), fixtures::five_phi0(), 5.0, 10.0);
  CHECK(residual_gamma(t.theta.row(t.theta.rows() - 1).transpose(), inc, s.gamma) < 1e-3);
  // Spread phases with weak coupling: the small-angle picture breaks down.
  const Vector spread = (Vector(5) << 0.0, 2.0, 4.0, 1.0, 3.0).finished();
  CHECK(residual_gamma(spread, inc, s.gamma) > 1e-2);
}

TEST_CASE("agreement transform and decomposition") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 6);
    const SpectralData s = spectral(fixtures::random_connected(n, rng));
    const Matrix t = agreement_transform(s.gamma);
    const auto ni = static_cast<Eigen::Index>(n);
    CHECK((t.transpose() * t - Matrix::Identity(ni, ni)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((t * t.transpose() - Matrix::Identity(ni, ni)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((t.col(0) - s.gamma).norm() < 1e-12);

    Matrix errors(3, ni);
    errors.row(0) = 0.7 * s.gamma.transpose();
    errors.row(1) = (s.projection * Vector::LinSpaced(ni, -1.0, 2.0)).transpose();
    errors.row(2) = Vector::LinSpaced(ni, 0.5, -0.3).transpose();
    const DecompositionReport d = decompose_error(errors, s);
    CHECK(d.agreement(0) == doctest::Approx(0.7));
    CHECK(d.disagreement.row(0).norm() < 1e-12);
    CHECK(std::abs(d.agreement(1)) < 1e-12);
    for (Eigen::Index k = 0; k < 3; ++k) {
      const double total = d.agreement(k) * d.agreement(k) + d.disagreement.row(k).squaredNorm();
      CHECK(std::sqrt(total) == doctest::Approx(errors.row(k).norm()).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(agreement_transform(Vector::Ones(1)), InvalidArgument);
}

TEST_CASE("largest mutual difference") {
  const MutualDifference d = max_mutual_difference((Vector(4) << 0.1, 0.3, -0.2, 0.1 + kTwoPi).finished());
  CHECK(d.value == doctest::Approx(0.5));
  CHECK(d.first == 1);
  CHECK(d.second == 2);
}

TEST_CASE("transient detection and default fit window") {
  const Trajectory locked = synthetic({0.0, 0.1, -0.05}, 1.0, 0.0, 5.0, 0.01);
  REQUIRE(detect_transient(locked));
  CHECK(*detect_transient(locked) == 0.0);
  // Drifting spread never settles: the final 10% is used instead.
  Trajectory drifting = synthetic({0.0, 0.0}, 1.0, 0.0, 5.0, 0.01);
  for (Eigen::Index k = 0; k < drifting.theta.rows(); ++k) drifting.theta(k, 1) += 0.01 * static_cast<double>(k) * 0.01;
  CHECK_FALSE(detect_transient(drifting));
  const auto w = default_fit_window(drifting);
  CHECK(w.first == doctest::Approx(4.5));
  CHECK(w.second == doctest::Approx(5.0));

  const Trajectory t = run(fixtures::five_agent(), fixtures::five_omega(), fixtures::five_phi0(), 5.0, 20.0);
  const auto settled = detect_transient(t);
  REQUIRE(settled);
  CHECK(*settled > 2.0);
  CHECK(*settled < 15.0);
  CHECK(default_fit_window(t).first == doctest::Approx(*settled));
}

TEST_CASE("steady errors respect the bound across small-angle scenarios") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 4);
    const Network net = fixtures::random_connected(n, rng);
    Vector omega(static_cast<Eigen::Index>(n)), phi0(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
      omega(i) = 1.0 + u(rng);
      phi0(i) = 10.0 * u(rng);
    }
    const double k = static_cast<double>(n);  // K/N = 1
    const Trajectory t = run(net, omega, phi0, k, 20.0);
    const auto window = default_fit_window(t);
    const ConsensusLine line = fit_consensus(t, window.first, window.second);
    double spread = 0.0;
    for (std::size_t s = t.index_at(window.first); s < t.samples(); ++s)
      spread = std::max(spread, max_mutual_difference(Vector(t.theta.row(static_cast<Eigen::Index>(s)).transpose())).value);
    if (spread >= 0.2) continue;
    ++checked;
    const Matrix e = phase_error(t, line);
    const double steady = e.bottomRows(static_cast<Eigen::Index>(t.samples() - t.index_at(window.first)))
                              .cwiseAbs()
                              .maxCoeff();
    CHECK(steady <= bound_arbitrary(omega, spectral(net)).value + 1e-6);
  }
  CHECK(checked >= 20);
}
