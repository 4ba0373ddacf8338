#include "oscsync/nodac.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "oscsync/error.hpp"

namespace oscsync {

namespace {

double binomial(std::size_t n, std::size_t m) {
  double c = 1.0;
  for (std::size_t i = 1; i <= m; ++i) {
    c = c * static_cast<double>(n - m + i) / static_cast<double>(i);
  }
  return c;
}

void check_weights(const Network& net) {
  const double max_row = net.weights().rowwise().sum().maxCoeff();
  if (max_row >= 1.0) {
    throw InvalidArgument("discrete consensus weights need row sums below 1 (largest is " +
                          std::to_string(max_row) + ")");
  }
}

}  // namespace

double nth_difference(std::span<const double> history, std::size_t order) {
  if (history.size() < order + 1) {
    throw InvalidArgument("difference of order " + std::to_string(order) + " needs " +
                          std::to_string(order + 1) + " samples, got " +
                          std::to_string(history.size()));
  }
  const std::size_t newest = history.size() - 1;
  double acc = 0.0;
  for (std::size_t m = 0; m <= order; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    acc += sign * binomial(order, m) * history[newest - m];
  }
  return acc;
}

Nodac::Nodac(Network net, std::size_t order) : net_(std::move(net)), order_(order) {
  if (order_ == 0) throw InvalidArgument("NODAC order must be at least 1");
  check_weights(net_);
}

NodacState Nodac::initial_state() const {
  NodacState s;
  const auto n = static_cast<Eigen::Index>(net_.size());
  s.stages = Matrix::Zero(static_cast<Eigen::Index>(order_), n);
  s.inputs.assign(order_ + 1, Vector::Zero(n));
  return s;
}

NodacState Nodac::step(const NodacState& state, const Vector& u_next) const {
  if (state.order() != order_ || state.agents() != net_.size()) {
    throw InvalidArgument("NODAC state does not match the algorithm's order or network");
  }
  if (static_cast<std::size_t>(u_next.size()) != net_.size()) {
    throw InvalidArgument("input has " + std::to_string(u_next.size()) + " entries, expected " +
                          std::to_string(net_.size()));
  }
  NodacState next = state;
  next.inputs.pop_front();
  next.inputs.push_back(u_next);
  ++next.step;

  const Eigen::Index n = u_next.size();
  Vector diff(n);
  std::vector<double> column(order_ + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t m = 0; m <= order_; ++m) column[m] = next.inputs[m](i);
    diff(i) = nth_difference(column, order_);
  }

  const Matrix& a = net_.weights();
  const Vector degree = a.rowwise().sum();
  for (std::size_t l = 0; l < order_; ++l) {
    const auto row = static_cast<Eigen::Index>(l);
    const Vector x = state.stages.row(row).transpose();
    Vector updated = x + a * x - degree.cwiseProduct(x);
    updated += (l == 0) ? diff : Vector(next.stages.row(row - 1).transpose());
    next.stages.row(row) = updated.transpose();
  }
  return next;
}

NodacState nodac_step(const NodacState& state, const Vector& u_next, const Network& net) {
  return Nodac(net, state.order()).step(state, u_next);
}

double default_nodac_weight(const Network& net) {
  std::size_t max_degree = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    max_degree = std::max(max_degree, net.in_neighbors(i).size());
  }
  return 1.0 / static_cast<double>(max_degree + 1);
}

Network nodac_network(const Network& net) {
  return net.pattern().scaled(default_nodac_weight(net));
}

}  // namespace oscsync
