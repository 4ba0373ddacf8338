#include "oscsync/graph.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "oscsync/error.hpp"

namespace oscsync {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

Network::Network(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols()) {
    throw InvalidArgument("adjacency matrix must be square");
  }
  if (weights_.rows() < 2) {
    throw InvalidArgument("a network needs at least two agents");
  }
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights_.cols(); ++j) {
      const double w = weights_(i, j);
      if (!std::isfinite(w) || w < 0.0) {
        throw InvalidArgument("weight a(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                              ") must be finite and nonnegative");
      }
      if (i == j && w != 0.0) {
        throw InvalidArgument("self-loop at agent " + std::to_string(i + 1));
      }
    }
  }
}

std::vector<std::size_t> Network::in_neighbors(std::size_t agent) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j) {
    if (weight(agent, j) > 0.0) out.push_back(j);
  }
  return out;
}

std::size_t Network::edge_count() const {
  return static_cast<std::size_t>((weights_.array() > 0.0).count());
}

Network Network::pattern() const {
  return Network((weights_.array() > 0.0).cast<double>().matrix());
}

Network Network::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidArgument("scale factor must be positive");
  }
  return Network(weights_ * factor);
}

Network build_network(const std::vector<std::vector<std::size_t>>& neighbor_lists, double weight) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw InvalidArgument("edge weight must be positive");
  }
  const std::size_t n = neighbor_lists.size();
  if (n < 2) throw InvalidArgument("a network needs at least two agents");

  Matrix a = Matrix::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbor_lists[i]) {
      if (j >= n) {
        throw InvalidArgument("agent " + std::to_string(i + 1) + " lists neighbor " +
                              std::to_string(j + 1) + " but there are only " + std::to_string(n) +
                              " agents");
      }
      if (j == i) {
        throw InvalidArgument("agent " + std::to_string(i + 1) + " lists itself as a neighbor");
      }
      if (a(idx(i), idx(j)) != 0.0) {
        throw InvalidArgument("agent " + std::to_string(i + 1) + " lists neighbor " +
                              std::to_string(j + 1) + " twice");
      }
      a(idx(i), idx(j)) = weight;
    }
  }
  return Network(std::move(a));
}

Network complete_network(std::size_t n, double weight) {
  if (!(weight > 0.0)) throw InvalidArgument("edge weight must be positive");
  Matrix a = Matrix::Constant(idx(n), idx(n), weight);
  a.diagonal().setZero();
  return Network(std::move(a));
}

SpectralData laplacian(const Network& net) {
  SpectralData s;
  const Vector degree = net.weights().rowwise().sum();
  s.out_degree = degree.asDiagonal();
  s.laplacian = s.out_degree - net.weights();
  return s;
}

SpectralData spectral(const Network& net) {
  if (!is_connected(net)) {
    throw DisconnectedNetwork("network has no spanning root; zero is a repeated Laplacian eigenvalue");
  }
  SpectralData s = laplacian(net);
  const Eigen::Index n = s.laplacian.rows();

  // Left null vector of L from the smallest singular direction of L^T.
  Eigen::JacobiSVD<Matrix> svd(s.laplacian.transpose(), Eigen::ComputeFullV);
  Vector gamma = svd.matrixV().col(n - 1);
  Eigen::Index largest = 0;
  gamma.cwiseAbs().maxCoeff(&largest);
  if (gamma(largest) < 0.0) gamma = -gamma;
  // Agents outside the root component carry exactly zero weight.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(gamma(i)) < 1e-13) gamma(i) = 0.0;
  }
  gamma.normalize();
  s.gamma = gamma;

  Eigen::EigenSolver<Matrix> eig(s.laplacian, false);
  std::vector<std::complex<double>> values(eig.eigenvalues().begin(), eig.eigenvalues().end());
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  s.lambda2 = values[1].real();
  s.lambda2_imag = values[1].imag();
  s.lambda2_magnitude = std::abs(values[1]);

  const Matrix sym = 0.5 * (s.laplacian + s.laplacian.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> sym_eig(sym, Eigen::EigenvaluesOnly);
  s.lambda2_hat = sym_eig.eigenvalues()(1);

  s.projection = Matrix::Identity(n, n) - gamma * gamma.transpose();
  s.balanced = is_balanced(net);
  return s;
}

namespace {

IncidenceData assemble(std::vector<Edge> edges, std::size_t n, double coupling) {
  IncidenceData d;
  d.edges = std::move(edges);
  const auto m = static_cast<Eigen::Index>(d.edges.size());
  d.incidence = Matrix::Zero(idx(n), m);
  d.incoming = Matrix::Zero(idx(n), m);
  d.edge_weights = Matrix::Zero(m, m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const Edge& edge = d.edges[static_cast<std::size_t>(e)];
    d.incidence(idx(edge.receiver), e) = 1.0;
    d.incidence(idx(edge.sender), e) = -1.0;
    d.incoming(idx(edge.receiver), e) = 1.0;
    d.edge_weights(e, e) = coupling * edge.weight;
  }
  return d;
}

}  // namespace

IncidenceData incidence(const Network& net, double coupling) {
  if (!(coupling > 0.0)) throw InvalidArgument("coupling must be positive");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (std::size_t j = 0; j < net.size(); ++j) {
      if (net.weight(i, j) > 0.0) edges.push_back({i, j, net.weight(i, j)});
    }
  }
  return assemble(std::move(edges), net.size(), coupling);
}

IncidenceData undirected_incidence(const Network& net, double coupling) {
  if (!(coupling > 0.0)) throw InvalidArgument("coupling must be positive");
  if (net.weights() != net.weights().transpose()) {
    throw InvalidArgument("undirected incidence needs symmetric weights");
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (std::size_t j = i + 1; j < net.size(); ++j) {
      if (net.weight(i, j) > 0.0) edges.push_back({i, j, net.weight(i, j)});
    }
  }
  return assemble(std::move(edges), net.size(), coupling);
}

bool is_connected(const Network& net) {
  const std::size_t n = net.size();
  // A root reaches everyone when information flows sender -> receiver.
  for (std::size_t root = 0; root < n; ++root) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{root};
    seen[root] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t sender = stack.back();
      stack.pop_back();
      for (std::size_t receiver = 0; receiver < n; ++receiver) {
        if (!seen[receiver] && net.weight(receiver, sender) > 0.0) {
          seen[receiver] = true;
          ++count;
          stack.push_back(receiver);
        }
      }
    }
    if (count == n) return true;
  }
  return false;
}

bool is_balanced(const Network& net, double tol) {
  const Vector in = net.weights().rowwise().sum();
  const Vector out = net.weights().colwise().sum().transpose();
  return (in - out).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace oscsync
