#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "oscsync/error.hpp"
#include "oscsync/graph.hpp"

using namespace oscsync;

TEST_CASE("build_network places weights on in-neighbor entries") {
  const Network net = fixtures::five_agent();
  CHECK(net.size() == 5);
  CHECK(net.weight(0, 1) == 1.0);
  CHECK(net.weight(0, 4) == 1.0);
  CHECK(net.weight(0, 2) == 0.0);
  CHECK(net.weight(1, 0) == 1.0);
  CHECK(net.in_neighbors(1) == std::vector<std::size_t>{0, 2, 3, 4});
  // 2 + 4 + 3 + 3 + 2 neighbor entries.
  CHECK(net.edge_count() == 14);

  const Network p = fixtures::pair();
  CHECK(p.weights().isApprox((Matrix(2, 2) << 0, 1, 1, 0).finished()));
}

TEST_CASE("build_network rejects bad lists") {
  CHECK_THROWS_AS(build_network({{1}, {2}}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_network({{0}, {0}}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_network({{1, 1}, {0}}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_network({{1}, {0}}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(build_network({{}}, 1.0), InvalidArgument);
}

TEST_CASE("Network validates its matrix") {
  CHECK_THROWS_AS(Network(Matrix::Zero(2, 3)), InvalidArgument);
  CHECK_THROWS_AS(Network((Matrix(2, 2) << 1, 1, 1, 0).finished()), InvalidArgument);
  CHECK_THROWS_AS(Network((Matrix(2, 2) << 0, -1, 1, 0).finished()), InvalidArgument);
  CHECK_THROWS_AS(Network((Matrix(2, 2) << 0, NAN, 1, 0).finished()), InvalidArgument);
}

TEST_CASE("one-way pair is not connected") {
  // Agent 1 hears agent 2 but agent 2 hears nobody: still rooted at agent 2.
  const Network one_way = build_network({{1}, {}}, 1.0);
  CHECK(is_connected(one_way));
  const Network split = build_network({{1}, {0}, {3}, {2}}, 1.0);
  CHECK_FALSE(is_connected(split));
  CHECK_THROWS_AS(spectral(split), DisconnectedNetwork);
}

TEST_CASE("laplacian rows") {
  const SpectralData s = laplacian(fixtures::five_agent());
  CHECK(s.laplacian.row(0).isApprox((Vector(5) << 2, -1, 0, 0, -1).finished().transpose()));
  CHECK(s.laplacian.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);

  CHECK(laplacian(fixtures::pair()).laplacian.isApprox((Matrix(2, 2) << 1, -1, -1, 1).finished()));
  const Matrix l3 = laplacian(complete_network(3, 1.0)).laplacian;
  CHECK(l3.isApprox((Matrix(3, 3) << 2, -1, -1, -1, 2, -1, -1, -1, 2).finished()));
}

TEST_CASE("spectral data of the five-agent network") {
  const SpectralData s = spectral(fixtures::five_agent());
  const Vector target = (Vector(5) << 0.6527, 0.2670, 0.0890, 0.3264, 0.6231).finished();
  CHECK((s.gamma - target).cwiseAbs().maxCoeff() < 1e-3);
  CHECK(s.lambda2 == doctest::Approx(2.382).epsilon(1e-3));
  CHECK_FALSE(s.balanced);
  CHECK((s.gamma.transpose() * s.laplacian).norm() < 1e-10);
  // Independent null vector: kernel of L^T by full-pivot LU.
  Vector kernel = Eigen::FullPivLU<Matrix>(s.laplacian.transpose()).kernel().col(0);
  kernel /= kernel.norm();
  if (kernel.sum() < 0) kernel = -kernel;
  CHECK((kernel - s.gamma).norm() < 1e-10);
}

TEST_CASE("spectral data of small closed-form cases") {
  const SpectralData p = spectral(fixtures::pair());
  CHECK(p.gamma(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(p.gamma(1) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(p.lambda2 == doctest::Approx(2.0));
  CHECK(p.lambda2_hat == doctest::Approx(2.0));

  // Complete graph with weight K/N has every nonzero eigenvalue equal to K.
  for (double k : {0.5, 1.0, 3.0}) {
    const std::size_t n = 6;
    const SpectralData s = spectral(complete_network(n, k / static_cast<double>(n)));
    CHECK(s.lambda2 == doctest::Approx(k));
    CHECK(s.lambda2_hat == doctest::Approx(k));
    CHECK(s.balanced);
  }
}

TEST_CASE("spectral invariants over random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const Network net = fixtures::random_connected(n, rng);
    const SpectralData s = spectral(net);
    CHECK(s.laplacian.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((s.gamma.transpose() * s.laplacian).norm() < 1e-10);
    CHECK(s.gamma.norm() == doctest::Approx(1.0));
    CHECK(s.gamma.minCoeff() >= 0.0);
    CHECK((s.projection * s.projection - s.projection).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.projection - s.projection.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.projection * s.gamma).norm() < 1e-10);
    // lambda2 is the second smallest real part.
    Eigen::EigenSolver<Matrix> es(s.laplacian);
    std::vector<double> re;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) re.push_back(es.eigenvalues()(i).real());
    std::sort(re.begin(), re.end());
    CHECK(s.lambda2 == doctest::Approx(re[1]).epsilon(1e-8));
  }
}

TEST_CASE("balanced networks have a uniform consensus direction") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 6);
    const SpectralData s = spectral(fixtures::random_symmetric(n, rng));
    CHECK(s.balanced);
    CHECK((s.gamma.array() - 1.0 / std::sqrt(static_cast<double>(n))).abs().maxCoeff() < 1e-10);
  }
  // Directed ring: balanced but not symmetric.
  const Network ring = build_network({{2}, {0}, {1}}, 1.0);
  CHECK(is_balanced(ring));
  CHECK(is_connected(ring));
  CHECK_FALSE(is_balanced(fixtures::five_agent()));
  CHECK(is_balanced(complete_network(4, 0.25)));
}

TEST_CASE("incidence reconstructs the Laplacian") {
  const IncidenceData p = incidence(fixtures::pair(), 1.0);
  CHECK(p.edges.size() == 2);
  CHECK((p.incoming * p.edge_weights * p.incidence.transpose()).isApprox((Matrix(2, 2) << 1, -1, -1, 1).finished()));

  const Network five = fixtures::five_agent();
  const IncidenceData f = incidence(five, 1.0);
  CHECK(f.edges.size() == 14);
  CHECK((f.incoming * f.edge_weights * f.incidence.transpose() - laplacian(five).laplacian).cwiseAbs().maxCoeff() <
        1e-10);
  for (std::size_t e = 1; e < f.edges.size(); ++e) {
    const auto& a = f.edges[e - 1];
    const auto& b = f.edges[e];
    CHECK((a.receiver < b.receiver || (a.receiver == b.receiver && a.sender < b.sender)));
  }

  const Network k3 = complete_network(3, 1.0);
  const IncidenceData u = undirected_incidence(k3, 1.0);
  CHECK(u.edges.size() == 3);
  CHECK((u.incidence * u.edge_weights * u.incidence.transpose() - laplacian(k3).laplacian).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK_THROWS_AS(undirected_incidence(fixtures::five_agent(), 1.0), InvalidArgument);
}

TEST_CASE("incidence identity over random directed graphs") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coupling(0.1, 4.0);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const Network net = fixtures::random_connected(n, rng);
    const double k = coupling(rng);
    const IncidenceData inc = incidence(net, k);
    for (Eigen::Index e = 0; e < inc.incidence.cols(); ++e) {
      CHECK(inc.incidence.col(e).sum() == doctest::Approx(0.0));
      CHECK(inc.incidence.col(e).maxCoeff() == 1.0);
      CHECK(inc.incidence.col(e).minCoeff() == -1.0);
    }
    CHECK(inc.incoming == inc.incidence.cwiseMax(0.0));
    const Matrix rebuilt = inc.incoming * inc.edge_weights * inc.incidence.transpose();
    CHECK((rebuilt - k * laplacian(net).laplacian).cwiseAbs().maxCoeff() < 1e-10);
  }
}
