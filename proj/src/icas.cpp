#include "oscsync/icas.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "oscsync/analysis.hpp"
#include "oscsync/error.hpp"

namespace oscsync::icas {

namespace {

constexpr std::size_t kClockHistory = 64;

void check_transceiver(const Transceiver& tx, std::size_t index) {
  const std::string who = "agent " + std::to_string(index + 1) + ": ";
  if (!std::isfinite(tx.carrier_freq)) throw InvalidArgument(who + "carrier frequency must be finite");
  if (!(tx.repetition_freq > 0.0) || !std::isfinite(tx.repetition_freq)) {
    throw InvalidArgument(who + "repetition frequency must be positive");
  }
  if (!(tx.tone_duration > 0.0) || tx.tone_duration >= tx.repetition_period()) {
    throw InvalidArgument(who + "tone duration must lie in (0, T_S)");
  }
  if (tx.initial_repetition_phase < 0.0 || tx.initial_repetition_phase >= kTwoPi) {
    throw InvalidArgument(who + "initial repetition phase must lie in [0, 2 pi)");
  }
}

void check_params(const Params& p) {
  if (!(p.cfo_sampling > 0.0 && p.cfo_sampling <= 1.0)) throw InvalidArgument("cfo_sampling must lie in (0, 1]");
  if (!(p.to_sampling > 0.0 && p.to_sampling <= 1.0)) throw InvalidArgument("to_sampling must lie in (0, 1]");
  if (p.carrier_gain < 0.0 || p.repetition_gain < 0.0) throw InvalidArgument("gains must be nonnegative");
  if (p.frequency_weight && *p.frequency_weight < 0.0) throw InvalidArgument("frequency weight must be nonnegative");
  if (p.cfo_noise < 0.0 || p.to_noise < 0.0) throw InvalidArgument("noise levels must be nonnegative");
  if (p.tones == 0) throw InvalidArgument("at least one tone is required");
}

void check_finite(const AgentState& s, double now) {
  if (!std::isfinite(s.carrier_phase) || !std::isfinite(s.carrier_rate) || !std::isfinite(s.rep_freq) ||
      !std::isfinite(s.correction) || !std::isfinite(s.clock.rate())) {
    throw Divergence("pilot-tone protocol state became non-finite", now);
  }
}

}  // namespace

double Transceiver::repetition_period() const { return kTwoPi / repetition_freq; }

RepetitionClock::RepetitionClock(double phase0, double rate) {
  if (!(rate > 0.0)) throw InvalidArgument("repetition clock rate must be positive");
  // The clock crossed phase 0 at -phase0 / rate.
  segments_.push_back({-phase0 / rate, 0.0, rate});
}

double RepetitionClock::phase_at(double t) const {
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    if (it->t0 <= t) return it->phase0 + it->rate * (t - it->t0);
  }
  const Segment& first = segments_.front();
  return first.phase0 + first.rate * (t - first.t0);
}

void RepetitionClock::set_rate(double t, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Divergence("repetition clock stalled (rate " + std::to_string(rate) + ")", t);
  }
  const double phase = phase_at(t);
  while (!segments_.empty() && segments_.back().t0 >= t) segments_.pop_back();
  segments_.push_back({t, phase, rate});
  while (segments_.size() > kClockHistory) segments_.pop_front();
}

RepetitionClock::RisingEdge RepetitionClock::last_edge(double t) const {
  const double phase = phase_at(t);
  const double index = std::floor(phase / kTwoPi);
  const double target = kTwoPi * index;
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    if (it->t0 <= t && it->phase0 <= target) {
      return {it->t0 + (target - it->phase0) / it->rate, static_cast<long>(index)};
    }
  }
  throw Error("repetition clock history too short to locate the last rising edge");
}

AgentState initial_agent_state(const Transceiver& tx) {
  AgentState s;
  s.carrier_phase = 0.0;
  s.carrier_rate = tx.carrier_freq;
  s.rep_freq = tx.repetition_freq;
  s.clock = RepetitionClock(tx.initial_repetition_phase, tx.repetition_freq);
  return s;
}

NoiseSource::NoiseSource(double cfo_sigma, double to_sigma, std::uint64_t seed)
    : cfo_sigma_(cfo_sigma), to_sigma_(to_sigma), rng_(seed) {}

double NoiseSource::cfo() { return cfo_sigma_ > 0.0 ? cfo_sigma_ * normal_(rng_) : 0.0; }
double NoiseSource::to() { return to_sigma_ > 0.0 ? to_sigma_ * normal_(rng_) : 0.0; }

PairMeasurement measure_pair(const AgentState& i, const AgentState& j, double now, NoiseSource* noise) {
  const auto edge_i = i.clock.last_edge(now);
  const auto edge_j = j.clock.last_edge(now);
  PairMeasurement m;
  m.omega_hat_delta = j.carrier_rate - i.carrier_rate;
  m.T_hat_delta = edge_j.time - edge_i.time;
  m.tone_count_delta = edge_j.index - edge_i.index;
  m.correction_delta = j.correction_at(now) - i.correction_at(now);
  if (noise) {
    m.omega_hat_delta += noise->cfo();
    m.T_hat_delta += noise->to();
  }
  return m;
}

double accumulate_carrier_delta(double previous, double cfo_sampling, double tone_duration, double omega_hat) {
  return previous + cfo_sampling * tone_duration * omega_hat;
}

double repetition_phase_delta(double rep_freq_i, double T_hat, long tone_count_delta, double to_sampling) {
  return -to_sampling * (rep_freq_i * T_hat - kTwoPi * static_cast<double>(tone_count_delta));
}

double repetition_freq_delta(double rep_freq_i, double delta_now, double delta_prev) {
  return -(rep_freq_i / kTwoPi) * (delta_now - delta_prev);
}

void cfo_step(AgentState& agent, const Transceiver& tx, std::span<PairMemory> memories,
              std::span<const PairMeasurement> measurements, std::span<const double> weights,
              const Params& params, std::size_t agents, double now) {
  if (memories.size() != measurements.size() || weights.size() != measurements.size()) {
    throw InvalidArgument("cfo_step: neighbor spans differ in length");
  }
  if (agents == 0) throw InvalidArgument("cfo_step: agent count must be positive");
  const double period = tx.repetition_period();
  // Advance the carrier phase over the interval that just ended.
  if (agent.step > 0) agent.carrier_phase += period * agent.carrier_rate;

  double coupling = 0.0;
  for (std::size_t m = 0; m < memories.size(); ++m) {
    if (agent.step > 0) {
      memories[m].theta_delta = accumulate_carrier_delta(memories[m].theta_delta, params.cfo_sampling,
                                                         tx.tone_duration, measurements[m].omega_hat_delta);
    }
    coupling += weights[m] * std::sin(memories[m].theta_delta);
  }
  agent.carrier_rate = tx.carrier_freq + params.carrier_gain / static_cast<double>(agents) * coupling;
  (void)now;
}

void to_step(AgentState& agent, const Transceiver& tx, std::span<PairMemory> memories,
             std::span<const PairMeasurement> measurements, std::span<const double> freq_weights,
             std::span<const double> phase_weights, const Params& params, std::size_t agents,
             double now) {
  if (memories.size() != measurements.size() || freq_weights.size() != measurements.size() ||
      phase_weights.size() != measurements.size()) {
    throw InvalidArgument("to_step: neighbor spans differ in length");
  }
  if (agents == 0) throw InvalidArgument("to_step: agent count must be positive");
  const double period = tx.repetition_period();

  double freq_drive = 0.0;
  double phase_drive = 0.0;
  for (std::size_t m = 0; m < memories.size(); ++m) {
    PairMemory& mem = memories[m];
    const PairMeasurement& meas = measurements[m];
    mem.tone_count_delta = meas.tone_count_delta;
    mem.Theta_delta = repetition_phase_delta(agent.rep_freq, meas.T_hat_delta, meas.tone_count_delta,
                                             params.to_sampling);
    // Remove the phase-stage corrections so only the free-running drift remains.
    const double free_delta = mem.Theta_delta - meas.correction_delta;
    const double omega_delta = mem.warmed ? repetition_freq_delta(agent.rep_freq, free_delta, mem.free_delta_prev) : 0.0;
    mem.free_delta_prev = free_delta;
    mem.warmed = true;
    freq_drive += freq_weights[m] * omega_delta;
    phase_drive += phase_weights[m] * std::sin(mem.Theta_delta);
  }

  const double q = params.repetition_gain / static_cast<double>(agents) * phase_drive;
  agent.correction = agent.correction_at(now);
  agent.correction_rate = q;
  agent.last_update = now;
  agent.clock.set_rate(now, agent.rep_freq + q);
  agent.rep_freq += period * (-freq_drive);
}

double default_frequency_weight(const std::vector<Transceiver>& agents, const Network& net) {
  if (agents.empty()) throw InvalidArgument("no agents");
  double max_period = 0.0;
  for (const auto& tx : agents) max_period = std::max(max_period, tx.repetition_period());
  std::size_t max_degree = 0;
  for (std::size_t i = 0; i < net.size(); ++i) max_degree = std::max(max_degree, net.in_neighbors(i).size());
  return 1.0 / (2.0 * max_period * static_cast<double>(max_degree + 1));
}

namespace {

struct Spread {
  double cfo = 0.0;
  double to = 0.0;
  double rep_freq = 0.0;
};

Spread spread_at(const std::vector<AgentState>& states, double t) {
  Spread s;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      s.cfo = std::max(s.cfo, std::abs(states[i].carrier_rate - states[j].carrier_rate));
      s.rep_freq = std::max(s.rep_freq, std::abs(states[i].rep_freq - states[j].rep_freq));
      const double d = wrap_phase(states[j].clock.phase_at(t) - states[i].clock.phase_at(t));
      s.to = std::max(s.to, std::abs(d));
    }
  }
  return s;
}

}  // namespace

Result run(const Scenario& scenario) {
  const std::size_t n = scenario.agents.size();
  if (n != scenario.network.size()) {
    throw InvalidArgument("scenario has " + std::to_string(n) + " agents but the network has " +
                          std::to_string(scenario.network.size()));
  }
  for (std::size_t i = 0; i < n; ++i) check_transceiver(scenario.agents[i], i);
  const Params& params = scenario.params;
  check_params(params);

  const double a_freq = params.frequency_weight.value_or(default_frequency_weight(scenario.agents, scenario.network));
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<std::vector<PairMemory>> memories(n);
  std::vector<std::vector<double>> phase_w(n), freq_w(n);
  double max_period = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i] = scenario.network.in_neighbors(i);
    memories[i].assign(neighbors[i].size(), PairMemory{});
    phase_w[i].assign(neighbors[i].size(), 1.0);
    freq_w[i].assign(neighbors[i].size(), a_freq);
    max_period = std::max(max_period, scenario.agents[i].repetition_period());
  }

  std::vector<AgentState> states;
  states.reserve(n);
  for (const auto& tx : scenario.agents) states.push_back(initial_agent_state(tx));

  NoiseSource noise(params.cfo_noise, params.to_noise, params.seed);
  NoiseSource* noise_ptr = (params.cfo_noise > 0.0 || params.to_noise > 0.0) ? &noise : nullptr;

  const double horizon = static_cast<double>(params.tones) * max_period;
  const double steady_start = 0.9 * horizon;
  // Next event per agent keyed by (time, agent); the k-th event sits at k T_S,i.
  std::map<std::pair<double, std::size_t>, std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) queue.emplace(std::make_pair(0.0, i), 0);

  Result result;
  result.tones.reserve(static_cast<std::size_t>(params.tones) * n + n);
  std::vector<std::vector<PairMeasurement>> meas(n);

  while (!queue.empty() && queue.begin()->first.first <= horizon * (1.0 + 1e-12)) {
    const double now = queue.begin()->first.first;
    std::vector<std::pair<std::size_t, std::size_t>> batch;  // (agent, k)
    while (!queue.empty() && queue.begin()->first.first == now) {
      batch.emplace_back(queue.begin()->first.second, queue.begin()->second);
      queue.erase(queue.begin());
    }
    // Every agent in the batch measures before any of them updates.
    for (const auto& [i, k] : batch) {
      meas[i].resize(neighbors[i].size());
      for (std::size_t m = 0; m < neighbors[i].size(); ++m) {
        meas[i][m] = measure_pair(states[i], states[neighbors[i][m]], now, noise_ptr);
      }
    }
    for (const auto& [i, k] : batch) {
      const Transceiver& tx = scenario.agents[i];
      AgentState& s = states[i];
      cfo_step(s, tx, memories[i], meas[i], phase_w[i], params, n, now);
      to_step(s, tx, memories[i], meas[i], freq_w[i], phase_w[i], params, n, now);
      s.step = k + 1;
      check_finite(s, now);

      ToneRecord rec{};
      rec.time = now;
      rec.agent = i;
      rec.carrier_phase = s.carrier_phase;
      rec.carrier_rate = s.carrier_rate;
      rec.rep_freq = s.rep_freq;
      rec.rep_phase = s.clock.phase_at(now);
      rec.rep_rate = s.clock.rate();
      for (const auto& mm : meas[i]) {
        rec.max_abs_omega_hat = std::max(rec.max_abs_omega_hat, std::abs(mm.omega_hat_delta));
        rec.max_abs_T_hat = std::max(rec.max_abs_T_hat, std::abs(mm.T_hat_delta));
      }
      result.tones.push_back(rec);

      const double next = static_cast<double>(k + 1) * tx.repetition_period();
      queue.emplace(std::make_pair(next, i), k + 1);
    }
    if (now >= steady_start) {
      const Spread sp = spread_at(states, now);
      result.metrics.steady_cfo_peak = std::max(result.metrics.steady_cfo_peak, sp.cfo);
      result.metrics.steady_to_peak = std::max(result.metrics.steady_to_peak, sp.to);
    }
  }

  const Spread final_spread = spread_at(states, horizon);
  result.metrics.horizon = horizon;
  result.metrics.max_mutual_cfo = final_spread.cfo;
  result.metrics.max_wrapped_to_phase = final_spread.to;
  result.metrics.max_mutual_rep_freq = final_spread.rep_freq;
  double mean_rate = 0.0;
  for (const auto& s : states) mean_rate += s.carrier_rate;
  result.metrics.common_carrier_rate = mean_rate / static_cast<double>(n);
  result.final_states = std::move(states);
  return result;
}

}  // namespace oscsync::icas
