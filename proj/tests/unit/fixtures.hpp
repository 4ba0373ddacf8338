#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "oscsync/graph.hpp"

namespace fixtures {

inline oscsync::Network five_agent() {
  return oscsync::build_network({{1, 4}, {0, 2, 3, 4}, {0, 1, 3}, {0, 1, 4}, {0, 3}}, 1.0);
}

inline oscsync::Vector five_omega() { return (oscsync::Vector(5) << 1.1, 0.8, 1.0, 1.3, 1.05).finished(); }
inline oscsync::Vector five_phi0() { return (oscsync::Vector(5) << 0.5, 2.5, 1.5, 2.0, 4.5).finished(); }

inline oscsync::Network pair() { return oscsync::build_network({{1}, {0}}, 1.0); }

/// Random directed graph with a spanning cycle, so it is always connected.
inline oscsync::Network random_connected(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.2, 3.0);
  std::bernoulli_distribution extra(0.35);
  oscsync::Matrix a = oscsync::Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>((i + 1) % n), static_cast<Eigen::Index>(i)) = w(rng);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) == 0.0 && extra(rng)) a(i, j) = w(rng);
  return oscsync::Network(a);
}

/// Random symmetric connected graph (balanced by construction).
inline oscsync::Network random_symmetric(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.2, 3.0);
  std::bernoulli_distribution extra(0.4);
  oscsync::Matrix a = oscsync::Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  auto link = [&](Eigen::Index i, Eigen::Index j) { a(i, j) = a(j, i) = w(rng); };
  for (Eigen::Index i = 1; i < a.rows(); ++i) link(i - 1, i);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 2; j < a.cols(); ++j)
      if (extra(rng)) link(i, j);
  return oscsync::Network(a);
}

}  // namespace fixtures
