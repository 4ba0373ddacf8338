#pragma once

#include <cstddef>
#include <deque>
#include <span>

#include "oscsync/graph.hpp"

namespace oscsync {

/// Backward difference of order n at the newest sample:
///   sum_{m=0..n} (-1)^m C(n, m) u(k - m).
/// `history` is ordered oldest to newest and must hold at least n + 1 values;
/// only the newest n + 1 are used.
double nth_difference(std::span<const double> history, std::size_t order);

/// Memory of the n-stage discrete consensus.
struct NodacState {
  Matrix stages;              // row l-1 holds stage l for every agent
  std::deque<Vector> inputs;  // newest last, exactly order + 1 entries (zero padded)
  std::size_t step = 0;       // number of inputs consumed

  std::size_t order() const noexcept { return static_cast<std::size_t>(stages.rows()); }
  std::size_t agents() const noexcept { return static_cast<std::size_t>(stages.cols()); }
  /// Top stage, which tracks the consensus input.
  Vector output() const { return stages.row(stages.rows() - 1).transpose(); }
};

/// n-th order discrete average consensus on a fixed network.
///
/// Each step consumes the newest input sample u(k) and produces the stages at
/// k. Stage 1 diffuses and adds the n-th input difference; stage l >= 2
/// diffuses and adds the freshly updated stage l-1. Inputs before the first
/// sample count as zero, so the sum of the top stage equals the sum of the
/// inputs at every step; the disagreement decays geometrically on a connected
/// network.
class Nodac {
 public:
  /// Rejects order 0 and weights whose row sums reach 1 (the discrete
  /// diffusion would no longer be a contraction).
  Nodac(Network net, std::size_t order);

  const Network& network() const noexcept { return net_; }
  std::size_t order() const noexcept { return order_; }

  NodacState initial_state() const;
  NodacState step(const NodacState& state, const Vector& u_next) const;

 private:
  Network net_;
  std::size_t order_;
};

/// Free-function form of Nodac::step (validates the weights on every call).
NodacState nodac_step(const NodacState& state, const Vector& u_next, const Network& net);

/// Default discrete weight 1 / (max in-degree + 1).
double default_nodac_weight(const Network& net);

/// The network's edge pattern weighted with default_nodac_weight.
Network nodac_network(const Network& net);

}  // namespace oscsync
