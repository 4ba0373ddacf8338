#include "oscsync/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oscsync/error.hpp"
#include "oscsync/integrator.hpp"

namespace oscsync {

OscillatorBank::OscillatorBank(Vector omega, Vector phi0, Disturbance d)
    : natural_freq(std::move(omega)), initial_phase(std::move(phi0)), disturbance(std::move(d)) {
  if (natural_freq.size() != initial_phase.size()) {
    throw InvalidArgument("natural_freq and initial_phase differ in length");
  }
  if (!natural_freq.allFinite() || !initial_phase.allFinite()) {
    throw InvalidArgument("oscillator parameters must be finite");
  }
}

std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::static_consensus: return "static_consensus";
    case ProtocolKind::dynamic_consensus: return "dynamic_consensus";
    case ProtocolKind::kuramoto: return "kuramoto";
    case ProtocolKind::extended_kuramoto: return "extended_kuramoto";
  }
  return "unknown";
}

ProtocolKind parse_protocol_kind(std::string_view name) {
  for (auto kind : {ProtocolKind::static_consensus, ProtocolKind::dynamic_consensus,
                    ProtocolKind::kuramoto, ProtocolKind::extended_kuramoto}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument("unknown protocol '" + std::string(name) +
                        "' (expected static_consensus, dynamic_consensus, kuramoto or "
                        "extended_kuramoto)");
}

std::size_t Trajectory::index_at(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9 * std::max(1.0, step));
  if (it == times.end()) return times.empty() ? 0 : times.size() - 1;
  return static_cast<std::size_t>(it - times.begin());
}

namespace {

void require_size(const Vector& v, const Network& net, const char* what) {
  if (static_cast<std::size_t>(v.size()) != net.size()) {
    throw InvalidArgument(std::string(what) + " has " + std::to_string(v.size()) +
                          " entries but the network has " + std::to_string(net.size()) +
                          " agents");
  }
}

// sum_j a_ij sin(theta_j - theta_i)
Vector sine_coupling(const Vector& theta, const Network& net) {
  const Eigen::Index n = theta.size();
  const Matrix& a = net.weights();
  Vector out = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(i, j) > 0.0) acc += a(i, j) * std::sin(theta(j) - theta(i));
    }
    out(i) = acc;
  }
  return out;
}

Vector diffusion(const Vector& x, const Network& net) {
  return net.weights() * x - net.weights().rowwise().sum().cwiseProduct(x);
}

}  // namespace

Vector static_consensus_rhs(const Vector& x, const Network& net) {
  require_size(x, net, "state");
  return diffusion(x, net);
}

Vector dynamic_consensus_rhs(const Vector& x, const Vector& u_dot, const Network& net) {
  require_size(x, net, "state");
  require_size(u_dot, net, "input rate");
  return u_dot + diffusion(x, net);
}

Vector kuramoto_rhs(const Vector& theta, const Vector& omega, double coupling,
                    const Network& net) {
  require_size(theta, net, "phase vector");
  require_size(omega, net, "natural frequency vector");
  const double scale = coupling / static_cast<double>(net.size());
  return omega + scale * sine_coupling(theta, net);
}

Vector kuramoto_rhs(const Vector& theta, const OscillatorBank& bank, const ProtocolSpec& spec,
                    const Network& net) {
  if (spec.kind != ProtocolKind::kuramoto) {
    throw InvalidArgument("kuramoto_rhs called with protocol " + std::string(to_string(spec.kind)));
  }
  return kuramoto_rhs(theta, bank.natural_freq, spec.coupling, net);
}

std::pair<Vector, Vector> extended_kuramoto_rhs(const Vector& vartheta, const Vector& theta,
                                                double t, const OscillatorBank& bank,
                                                const ProtocolSpec& spec, const Network& freq_net,
                                                const Network& phase_net) {
  require_size(vartheta, freq_net, "frequency state");
  require_size(theta, phase_net, "phase state");
  Vector freq_dot = diffusion(vartheta, freq_net);
  if (bank.disturbance) {
    for (Eigen::Index i = 0; i < freq_dot.size(); ++i) {
      freq_dot(i) += bank.phase_accel(static_cast<std::size_t>(i), t);
    }
  }
  const double scale = spec.coupling / static_cast<double>(phase_net.size());
  Vector phase_dot = scale * sine_coupling(theta, phase_net) + vartheta;
  return {std::move(freq_dot), std::move(phase_dot)};
}

InitialState initialize(const ProtocolSpec& spec, const OscillatorBank& bank) {
  InitialState s;
  s.theta = bank.initial_phase;
  if (spec.kind == ProtocolKind::extended_kuramoto) s.vartheta = bank.natural_freq;
  return s;
}

Network frequency_network(const SimulationSetup& setup) {
  if (setup.protocol.freq_weights) return Network(*setup.protocol.freq_weights);
  return setup.network;
}

Network phase_network(const SimulationSetup& setup) {
  if (setup.protocol.phase_weights) {
    const Matrix& w = *setup.protocol.phase_weights;
    if (((w.array() != 0.0) && (w.array() != 1.0)).any()) {
      throw InvalidArgument("phase-stage weights must be 0 or 1");
    }
    return Network(w);
  }
  return setup.network.pattern();
}

namespace {

void validate(const SimulationSetup& setup) {
  const std::size_t n = setup.network.size();
  if (setup.bank.size() != n) {
    throw InvalidArgument("oscillator bank has " + std::to_string(setup.bank.size()) +
                          " agents but the network has " + std::to_string(n));
  }
  if (!(setup.step > 0.0) || !std::isfinite(setup.step)) {
    throw InvalidArgument("integration step must be positive");
  }
  if (!(setup.horizon > 0.0) || !std::isfinite(setup.horizon)) {
    throw InvalidArgument("horizon must be positive");
  }
  const auto kind = setup.protocol.kind;
  if ((kind == ProtocolKind::kuramoto || kind == ProtocolKind::extended_kuramoto) &&
      !(setup.protocol.coupling > 0.0)) {
    throw InvalidArgument("coupling K must be positive for Kuramoto protocols");
  }
  if (kind == ProtocolKind::extended_kuramoto && !is_connected(frequency_network(setup))) {
    throw DisconnectedNetwork("frequency-stage network of the extended model is not connected");
  }
  if (setup.initial_state && static_cast<std::size_t>(setup.initial_state->size()) != n) {
    throw InvalidArgument("initial state length does not match the network");
  }
}

}  // namespace

Trajectory integrate(const SimulationSetup& setup) {
  validate(setup);
  const std::size_t n = setup.network.size();
  const auto N = static_cast<Eigen::Index>(n);
  const auto steps = static_cast<std::size_t>(std::ceil(setup.horizon / setup.step - 1e-9));
  const double h = setup.horizon / static_cast<double>(steps);

  Trajectory traj;
  traj.step = h;
  traj.times.resize(steps + 1);
  traj.theta.resize(static_cast<Eigen::Index>(steps + 1), N);
  traj.theta_dot.resize(static_cast<Eigen::Index>(steps + 1), N);

  InitialState init = initialize(setup.protocol, setup.bank);
  if (setup.initial_state) init.theta = *setup.initial_state;

  const auto record = [&](std::size_t k, double t, const Vector& theta, const Vector& theta_dot) {
    const auto row = static_cast<Eigen::Index>(k);
    traj.times[k] = t;
    traj.theta.row(row) = theta.transpose();
    traj.theta_dot.row(row) = theta_dot.transpose();
  };

  const Network& net = setup.network;
  const OscillatorBank& bank = setup.bank;
  switch (setup.protocol.kind) {
    case ProtocolKind::static_consensus: {
      auto f = [&](double, const Vector& x) -> Vector { return static_consensus_rhs(x, net); };
      integrate_fixed(f, init.theta, 0.0, h, steps,
                      [&](std::size_t k, double t, const Vector& x) { record(k, t, x, f(t, x)); });
      break;
    }
    case ProtocolKind::dynamic_consensus: {
      auto f = [&](double, const Vector& x) -> Vector {
        return dynamic_consensus_rhs(x, bank.natural_freq, net);
      };
      integrate_fixed(f, init.theta, 0.0, h, steps,
                      [&](std::size_t k, double t, const Vector& x) { record(k, t, x, f(t, x)); });
      break;
    }
    case ProtocolKind::kuramoto: {
      const double coupling = setup.protocol.coupling;
      auto f = [&](double, const Vector& th) -> Vector {
        return kuramoto_rhs(th, bank.natural_freq, coupling, net);
      };
      integrate_fixed(f, init.theta, 0.0, h, steps,
                      [&](std::size_t k, double t, const Vector& th) { record(k, t, th, f(t, th)); });
      break;
    }
    case ProtocolKind::extended_kuramoto: {
      const Network freq_net = frequency_network(setup);
      const Network phase_net = phase_network(setup);
      traj.vartheta.resize(static_cast<Eigen::Index>(steps + 1), N);
      auto f = [&](double t, const Vector& y) -> Vector {
        auto [dv, dth] = extended_kuramoto_rhs(y.head(N), y.tail(N), t, bank, setup.protocol,
                                               freq_net, phase_net);
        Vector out(2 * N);
        out << dv, dth;
        return out;
      };
      Vector y0(2 * N);
      y0 << init.vartheta, init.theta;
      integrate_fixed(f, y0, 0.0, h, steps, [&](std::size_t k, double t, const Vector& y) {
        traj.vartheta.row(static_cast<Eigen::Index>(k)) = y.head(N).transpose();
        record(k, t, y.tail(N), f(t, y).tail(N));
      });
      break;
    }
  }
  return traj;
}

}  // namespace oscsync
