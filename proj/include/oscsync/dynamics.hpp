#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "oscsync/graph.hpp"

namespace oscsync {

/// Phase-acceleration disturbance d^2 phi_i / dt^2 for agent i at time t.
using Disturbance = std::function<double(std::size_t agent, double t)>;

/// Local harmonic oscillators phi_i(t) = omega_i t + phi0_i.
struct OscillatorBank {
  Vector natural_freq;   // rad/s
  Vector initial_phase;  // rad
  Disturbance disturbance;  // empty means identically zero

  OscillatorBank() = default;
  OscillatorBank(Vector omega, Vector phi0, Disturbance d = {});

  std::size_t size() const noexcept { return static_cast<std::size_t>(natural_freq.size()); }
  double phase_accel(std::size_t agent, double t) const {
    return disturbance ? disturbance(agent, t) : 0.0;
  }
  /// phi(t) for every agent.
  Vector phase(double t) const { return natural_freq * t + initial_phase; }
};

enum class ProtocolKind { static_consensus, dynamic_consensus, kuramoto, extended_kuramoto };

std::string_view to_string(ProtocolKind kind);
/// Throws InvalidArgument for unknown names.
ProtocolKind parse_protocol_kind(std::string_view name);

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::kuramoto;
  double coupling = 1.0;  // K; the sinusoidal terms are scaled by K/N
  std::optional<Matrix> freq_weights;   // a^vartheta, defaults to the network weights
  std::optional<Matrix> phase_weights;  // a^theta in {0,1}, defaults to the network pattern
};

/// Uniformly sampled simulation output. Row k of each matrix is time k.
struct Trajectory {
  std::vector<double> times;
  double step = 0.0;
  Matrix theta;      // phases (or consensus states x for the linear protocols)
  Matrix vartheta;   // frequency stage, extended model only (else empty)
  Matrix theta_dot;  // d theta / dt at every grid point

  std::size_t samples() const noexcept { return times.size(); }
  std::size_t agents() const noexcept { return static_cast<std::size_t>(theta.cols()); }
  bool has_vartheta() const noexcept { return vartheta.size() > 0; }
  /// Index of the first sample with time >= t (clamped to the last sample).
  std::size_t index_at(double t) const;
};

/// x' = -L x
Vector static_consensus_rhs(const Vector& x, const Network& net);

/// x' = u' - L x
Vector dynamic_consensus_rhs(const Vector& x, const Vector& u_dot, const Network& net);

/// theta_i' = omega_i + (K/N) sum_j a_ij sin(theta_j - theta_i), in-neighbors only.
Vector kuramoto_rhs(const Vector& theta, const Vector& omega, double coupling,
                    const Network& net);
Vector kuramoto_rhs(const Vector& theta, const OscillatorBank& bank, const ProtocolSpec& spec,
                    const Network& net);

/// Two-stage model. The frequency stage is the plain diffusion
///   vartheta_i' = -sum_j a^v_ij (vartheta_i - vartheta_j) + phi_i''(t)
/// and the phase stage a Kuramoto term driven by vartheta instead of omega
///   theta_i' = (K/N) sum_j a^t_ij sin(theta_j - theta_i) + vartheta_i.
/// Note the opposite difference orders of the two stages.
std::pair<Vector, Vector> extended_kuramoto_rhs(const Vector& vartheta, const Vector& theta,
                                                double t, const OscillatorBank& bank,
                                                const ProtocolSpec& spec, const Network& freq_net,
                                                const Network& phase_net);

struct InitialState {
  Vector theta;
  Vector vartheta;  // extended model only
};

/// theta(0) = phi0 for every protocol; the extended model also starts the
/// frequency stage at vartheta(0) = omega.
InitialState initialize(const ProtocolSpec& spec, const OscillatorBank& bank);

struct SimulationSetup {
  OscillatorBank bank;
  Network network;
  ProtocolSpec protocol;
  double step = 0.01;  // maximum step; the horizon is split into equal steps no larger than this
  double horizon = 5.0;
  std::optional<Vector> initial_state;  // overrides theta(0) / x(0)
};

/// Weight matrices actually used by the extended model.
Network frequency_network(const SimulationSetup& setup);
Network phase_network(const SimulationSetup& setup);

/// Fixed-step RK4 integration of the selected protocol from t = 0.
/// Dynamic consensus uses the phase functions as inputs, u'(t) = omega.
Trajectory integrate(const SimulationSetup& setup);

}  // namespace oscsync
