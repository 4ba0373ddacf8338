#include "oscsync/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "oscsync/error.hpp"

namespace oscsync {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  // Avoid printing "-0".
  if (value == 0.0) value = 0.0;
  return fmt::format("{:.12g}", value);
}

void MetricsReport::add(std::string key, double value) { entries_.emplace_back(std::move(key), format_number(value)); }

void MetricsReport::add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }

void MetricsReport::add_int(std::string key, long long value) {
  entries_.emplace_back(std::move(key), std::to_string(value));
}

std::optional<std::string> MetricsReport::find(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::optional<double> MetricsReport::number(std::string_view key) const {
  const auto v = find(key);
  if (!v) return std::nullopt;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) return std::nullopt;
    return d;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string MetricsReport::render() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += fmt::format("{} = {}\n", k, v);
  return out;
}

MetricsReport MetricsReport::parse(std::string_view text) {
  MetricsReport r;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    const std::size_t eq = line.find(" = ");
    if (eq == std::string_view::npos) continue;
    r.add(std::string(line.substr(0, eq)), std::string(line.substr(eq + 3)));
  }
  return r;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t n = traj.agents();
  std::string header = "time";
  for (std::size_t i = 1; i <= n; ++i) header += fmt::format(",theta_{}", i);
  if (traj.has_vartheta())
    for (std::size_t i = 1; i <= n; ++i) header += fmt::format(",vartheta_{}", i);
  for (std::size_t i = 1; i <= n; ++i) header += fmt::format(",theta_dot_{}", i);
  header += ",r,psi\n";
  out << header;

  std::string row;
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    row = format_number(traj.times[k]);
    for (Eigen::Index i = 0; i < traj.theta.cols(); ++i) row += "," + format_number(traj.theta(kk, i));
    if (traj.has_vartheta())
      for (Eigen::Index i = 0; i < traj.vartheta.cols(); ++i) row += "," + format_number(traj.vartheta(kk, i));
    for (Eigen::Index i = 0; i < traj.theta_dot.cols(); ++i) row += "," + format_number(traj.theta_dot(kk, i));
    const OrderParameter op = order_parameter(Vector(traj.theta.row(kk).transpose()));
    row += "," + format_number(op.r) + "," + (op.psi ? format_number(*op.psi) : std::string());
    row += '\n';
    out << row;
  }
}

void write_icas_csv(std::ostream& out, const icas::Result& result) {
  out << "time,agent,theta,theta_dot,Omega,Theta,Theta_dot,max_abs_omega_hat,max_abs_T_hat\n";
  for (const auto& t : result.tones) {
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", format_number(t.time), t.agent + 1,
                       format_number(t.carrier_phase), format_number(t.carrier_rate), format_number(t.rep_freq),
                       format_number(t.rep_phase), format_number(t.rep_rate), format_number(t.max_abs_omega_hat),
                       format_number(t.max_abs_T_hat));
  }
}

namespace {

bool is_sinusoidal(ProtocolKind k) { return k == ProtocolKind::kuramoto || k == ProtocolKind::extended_kuramoto; }

std::string vector_text(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_number(v(i));
  return s;
}

}  // namespace

Network effective_network(const ScenarioConfig& cfg) {
  const Network net = cfg.network();
  if (!is_sinusoidal(cfg.protocol.kind)) return net;
  const double factor = cfg.protocol.coupling / static_cast<double>(net.size());
  if (!(factor > 0.0)) throw InvalidArgument("coupling must be positive for the spectral analysis");
  return net.scaled(factor);
}

SimulationReport simulate(const ScenarioConfig& cfg) {
  const SimulationSetup setup = cfg.setup();
  SimulationReport rep;
  rep.trajectory = integrate(setup);
  const Trajectory& traj = rep.trajectory;
  const std::size_t n = traj.agents();

  const std::optional<double> transient = detect_transient(traj);
  const auto window = cfg.fit_window ? *cfg.fit_window : default_fit_window(traj);
  if (window.second > traj.times.back() + 1e-9) {
    throw InvalidArgument(fmt::format("fit window ends at {} s, after the horizon {} s", window.second,
                                      traj.times.back()));
  }
  rep.line = fit_consensus(traj, window.first, window.second);

  // Consensus frequency predicted from the network that sets the common rate.
  const Network rate_net =
      cfg.protocol.kind == ProtocolKind::extended_kuramoto ? frequency_network(setup) : setup.network;
  const SpectralData rate_spec = spectral(rate_net);
  const double predicted = consensus_frequency(rate_spec.gamma, cfg.bank.natural_freq);

  MetricsReport& m = rep.metrics;
  m.add("protocol", std::string(to_string(cfg.protocol.kind)));
  m.add_int("agents", static_cast<long long>(n));
  m.add("coupling", cfg.protocol.coupling);
  m.add("step", traj.step);
  m.add("horizon", traj.times.back());
  m.add_int("samples", static_cast<long long>(traj.samples()));
  m.add("transient_end", transient ? format_number(*transient) : std::string("none"));
  m.add("fit_window_start", rep.line.window_start);
  m.add("fit_window_end", rep.line.window_end);
  m.add("consensus_slope", rep.line.slope);
  m.add("consensus_intercept", rep.line.intercept);
  m.add("predicted_consensus_frequency", predicted);
  m.add("consensus_frequency_discrepancy", std::abs(rep.line.slope - predicted));

  // Steady metrics: maxima over the fit window.
  const Matrix err = phase_error(traj, rep.line);
  const std::size_t first = traj.index_at(rep.line.window_start);
  const std::size_t last = traj.index_at(rep.line.window_end);
  double max_err = 0.0;
  std::size_t max_err_agent = 0;
  MutualDifference max_diff;
  for (std::size_t k = first; k <= last; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::abs(err(kk, static_cast<Eigen::Index>(i)));
      if (e > max_err) {
        max_err = e;
        max_err_agent = i;
      }
    }
    const MutualDifference d = max_mutual_difference(Vector(traj.theta.row(kk).transpose()));
    if (d.value > max_diff.value) max_diff = d;
  }
  m.add("max_steady_wrapped_error", max_err);
  m.add_int("max_steady_wrapped_error_agent", static_cast<long long>(max_err_agent + 1));
  m.add("max_mutual_difference", max_diff.value);
  m.add("max_mutual_difference_pair", fmt::format("{},{}", max_diff.first + 1, max_diff.second + 1));

  const auto end = static_cast<Eigen::Index>(traj.samples() - 1);
  const Vector theta_end = traj.theta.row(end).transpose();
  const double ref_end = rep.line.at(traj.times.back());
  for (std::size_t i = 0; i < n; ++i) {
    const long long branch = std::llround((theta_end(static_cast<Eigen::Index>(i)) - ref_end) / kTwoPi);
    m.add_int(fmt::format("branch_offset_{}", i + 1), branch);
  }
  m.add("order_parameter_final", order_parameter(theta_end).r);

  if (is_sinusoidal(cfg.protocol.kind)) {
    const Network phase_net =
        cfg.protocol.kind == ProtocolKind::extended_kuramoto ? phase_network(setup) : setup.network;
    const double k_over_n = cfg.protocol.coupling / static_cast<double>(n);
    const SpectralData phase_spec = spectral(phase_net.scaled(k_over_n));
    m.add("residual_gamma", residual_gamma(theta_end, incidence(phase_net, k_over_n), phase_spec.gamma));
    if (cfg.protocol.kind == ProtocolKind::kuramoto) {
      m.add("bound_arbitrary", bound_arbitrary(cfg.bank.natural_freq, phase_spec).value);
    }
  }
  if (traj.has_vartheta()) {
    const Vector v_end = traj.vartheta.row(end).transpose();
    for (std::size_t i = 0; i < n; ++i) m.add(fmt::format("vartheta_final_{}", i + 1), v_end(static_cast<Eigen::Index>(i)));
    m.add("max_vartheta_deviation", (v_end.array() - predicted).abs().maxCoeff());
  }
  return rep;
}

MetricsReport bounds_report(const ScenarioConfig& cfg) {
  const Network net = effective_network(cfg);
  const SpectralData s = spectral(net);
  const Vector& omega = cfg.bank.natural_freq;
  MetricsReport m;
  m.add("protocol", std::string(to_string(cfg.protocol.kind)));
  m.add_int("agents", static_cast<long long>(net.size()));
  m.add_int("edges", static_cast<long long>(net.edge_count()));
  m.add("connected", std::string("true"));
  m.add("balanced", std::string(s.balanced ? "true" : "false"));
  m.add("gamma", vector_text(s.gamma));
  m.add("lambda2", s.lambda2);
  m.add("lambda2_imag", s.lambda2_imag);
  m.add("lambda2_hat", s.lambda2_hat);
  m.add("consensus_frequency", consensus_frequency(s.gamma, omega));
  m.add("bound_arbitrary", bound_arbitrary(omega, s, OmegaBar::gamma_weighted).value);
  m.add("bound_arbitrary_mean", bound_arbitrary(omega, s, OmegaBar::arithmetic_mean).value);

  bool complete = true;
  for (std::size_t i = 0; i < net.size(); ++i) complete = complete && net.in_neighbors(i).size() + 1 == net.size();
  if (complete && s.balanced && s.lambda2_hat > 0.0) m.add("bound_alltoall", bound_alltoall(omega, s).value);
  if (s.balanced && s.lambda2_hat > 0.0) {
    // Dynamic consensus on the phase functions: x(0) = u(0) = phi0, u' = omega.
    const Eigen::Index n = omega.size();
    const Matrix pi = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
    const Vector phi0 = cfg.bank.initial_phase;
    m.add("bound_dynamic_final", bound_dynamic(phi0, phi0, (pi * omega).norm(), s, cfg.horizon).value);
    m.add("bound_dynamic_limit", (pi * omega).norm() / s.lambda2_hat);
  }
  return m;
}

MetricsReport icas_report(const icas::Result& result) {
  MetricsReport m;
  const auto& x = result.metrics;
  m.add_int("agents", static_cast<long long>(result.final_states.size()));
  m.add_int("tone_records", static_cast<long long>(result.tones.size()));
  m.add("horizon", x.horizon);
  m.add("max_mutual_cfo", x.max_mutual_cfo);
  m.add("max_wrapped_to_phase", x.max_wrapped_to_phase);
  m.add("max_mutual_repetition_freq", x.max_mutual_rep_freq);
  m.add("steady_cfo_peak", x.steady_cfo_peak);
  m.add("steady_to_peak", x.steady_to_peak);
  m.add("common_carrier_rate", x.common_carrier_rate);
  return m;
}

}  // namespace oscsync
