#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oscsync {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Weighted directed communication network.
///
/// `weight(i, j) > 0` means agent i receives the state of agent j. The
/// diagonal is zero and all weights are nonnegative; at least two agents.
class Network {
 public:
  /// Validates and adopts an adjacency matrix.
  explicit Network(Matrix weights);

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  const Matrix& weights() const noexcept { return weights_; }
  double weight(std::size_t receiver, std::size_t sender) const {
    return weights_(static_cast<Eigen::Index>(receiver), static_cast<Eigen::Index>(sender));
  }

  /// In-neighbors of `agent` in ascending order.
  std::vector<std::size_t> in_neighbors(std::size_t agent) const;
  std::size_t edge_count() const;

  /// Same edge pattern with every positive weight replaced by 1.
  Network pattern() const;
  /// Same pattern with every weight multiplied by `factor` (> 0).
  Network scaled(double factor) const;

 private:
  Matrix weights_;
};

/// Builds a network from 0-based in-neighbor lists with a single edge weight.
/// Rejects out-of-range indices, self-loops and duplicates.
Network build_network(const std::vector<std::vector<std::size_t>>& neighbor_lists,
                      double weight);

/// All-to-all network on `n` agents with uniform weight.
Network complete_network(std::size_t n, double weight);

struct SpectralData {
  Matrix laplacian;
  Matrix out_degree;  // diagonal
  Vector gamma;       // unit left null vector of L, nonnegative
  double lambda2 = 0.0;            // real part of the second eigenvalue sorted by real part
  double lambda2_magnitude = 0.0;  // |.| of the same eigenvalue
  double lambda2_imag = 0.0;
  double lambda2_hat = 0.0;        // lambda2 of the symmetric part (L + L^T)/2
  Matrix projection;               // I - gamma gamma^T
  bool balanced = false;
};

/// Laplacian L = Delta - A. Only `laplacian` and `out_degree` are filled.
SpectralData laplacian(const Network& net);

/// Full spectral decomposition. Throws DisconnectedNetwork when no spanning
/// root exists.
SpectralData spectral(const Network& net);

struct Edge {
  std::size_t receiver;
  std::size_t sender;
  double weight;
};

/// Incidence representation. Column e belongs to edges[e]; B has +1 at the
/// receiver and -1 at the sender, B~ keeps only the +1 and W holds
/// coupling * a_ij on its diagonal, so that B~ W B^T = coupling * L.
struct IncidenceData {
  std::vector<Edge> edges;  // sorted by (receiver, sender)
  Matrix incidence;
  Matrix incoming;
  Matrix edge_weights;
};

IncidenceData incidence(const Network& net, double coupling);

/// One column per unordered pair {i, j} of a symmetric network (receiver is
/// the lower index), so that B W B^T = coupling * L.
IncidenceData undirected_incidence(const Network& net, double coupling);

/// True when some agent's state reaches every other agent along the
/// information flow (sender -> receiver).
bool is_connected(const Network& net);

/// True when every agent's weighted in-degree equals its weighted out-degree.
bool is_balanced(const Network& net, double tol = 1e-12);

}  // namespace oscsync
