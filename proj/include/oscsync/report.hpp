#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oscsync/analysis.hpp"
#include "oscsync/dynamics.hpp"
#include "oscsync/icas.hpp"
#include "oscsync/scenario.hpp"

namespace oscsync {

/// Ordered `key = value` report. Numbers use 12 significant digits.
class MetricsReport {
 public:
  void add(std::string key, double value);
  void add(std::string key, std::string value);
  void add_int(std::string key, long long value);

  std::optional<std::string> find(std::string_view key) const;
  std::optional<double> number(std::string_view key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  std::string render() const;
  static MetricsReport parse(std::string_view text);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_number(double value);

/// Header `time,theta_1..N[,vartheta_1..N],theta_dot_1..N,r,psi`; psi is
/// empty where the order parameter vanishes.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Header `time,agent,theta,theta_dot,Omega,Theta,Theta_dot,max_abs_omega_hat,max_abs_T_hat`
/// with 1-based agent numbers.
void write_icas_csv(std::ostream& out, const icas::Result& result);

struct SimulationReport {
  Trajectory trajectory;
  ConsensusLine line;
  MetricsReport metrics;
};

/// Integrates the scenario, fits the consensus line over the configured (or
/// automatic) window and collects the metrics.
SimulationReport simulate(const ScenarioConfig& cfg);

/// Spectral quantities and every applicable steady-error bound.
MetricsReport bounds_report(const ScenarioConfig& cfg);

MetricsReport icas_report(const icas::Result& result);

/// Network whose Laplacian governs the linearized protocol: K/N times the
/// weights for the sinusoidal protocols, the weights themselves otherwise.
Network effective_network(const ScenarioConfig& cfg);

}  // namespace oscsync
