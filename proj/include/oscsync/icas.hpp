#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "oscsync/graph.hpp"

namespace oscsync::icas {

/// Pilot-tone transceiver parameters of one agent.
struct Transceiver {
  double carrier_freq = 1.0;     // omega_i, rad/s
  double repetition_freq = 6.283185307179586;  // Omega_S,i, rad/s; sets T_S,i = 2 pi / Omega_S,i
  double tone_duration = 0.5;    // T_P,i, s, must be shorter than T_S,i
  double initial_repetition_phase = 0.0;  // Theta_i(0) in [0, 2 pi)

  double repetition_period() const;
};

struct Params {
  double cfo_sampling = 1.0;     // lambda in (0, 1]
  double to_sampling = 1.0;      // Lambda in (0, 1]
  double carrier_gain = 1.0;     // K^theta
  double repetition_gain = 1.0;  // K^Theta
  std::optional<double> frequency_weight;  // a^Omega; see default_frequency_weight()
  double cfo_noise = 0.0;  // std-dev of the CFO measurement, rad/s
  double to_noise = 0.0;   // std-dev of the TO measurement, s
  std::uint64_t seed = 1;
  std::size_t tones = 1000;  // horizon = tones * max T_S,i
};

/// Protocol phase of the repetition clock as a piecewise-linear function of
/// time. Rising edges are the instants where the phase crosses 2 pi m.
class RepetitionClock {
 public:
  RepetitionClock() = default;
  /// Clock with phase `phase0` at t = 0 that ran at `rate` before then.
  RepetitionClock(double phase0, double rate);

  double phase_at(double t) const;
  double rate() const { return segments_.back().rate; }
  /// Starts a new segment at `t` (continuing the phase) with `rate`.
  void set_rate(double t, double rate);

  struct RisingEdge {
    double time;
    long index;  // m such that the phase crossed 2 pi m
  };
  /// Most recent rising edge at or before `t`.
  RisingEdge last_edge(double t) const;

 private:
  struct Segment {
    double t0;
    double phase0;
    double rate;
  };
  std::deque<Segment> segments_;
};

/// Live protocol state of one agent.
struct AgentState {
  // carrier (CFO) stage
  double carrier_phase = 0.0;  // theta_i(k)
  double carrier_rate = 0.0;   // theta_i'(k), frequency of the tone being sent
  // repetition (TO) stage
  double rep_freq = 0.0;       // Omega_i(k)
  RepetitionClock clock;       // Theta_i(t)
  double correction = 0.0;     // phase correction accumulated by the phase stage
  double correction_rate = 0.0;
  double last_update = 0.0;
  std::size_t step = 0;

  double correction_at(double t) const { return correction + correction_rate * (t - last_update); }
};

AgentState initial_agent_state(const Transceiver& tx);

/// Per (receiver i, sender j) memory.
struct PairMemory {
  double theta_delta = 0.0;      // carrier phase-difference accumulator
  double Theta_delta = 0.0;      // latest repetition phase difference
  double free_delta_prev = 0.0;  // previous difference with phase-stage corrections removed
  long tone_count_delta = 0;     // P: tones sent by j minus tones sent by i
  bool warmed = false;
};

/// Gaussian measurement noise; a default-constructed source is noiseless.
class NoiseSource {
 public:
  NoiseSource() = default;
  NoiseSource(double cfo_sigma, double to_sigma, std::uint64_t seed);
  double cfo();
  double to();

 private:
  double cfo_sigma_ = 0.0;
  double to_sigma_ = 0.0;
  std::mt19937_64 rng_{1};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct PairMeasurement {
  double omega_hat_delta = 0.0;  // carrier frequency of j minus that of i, rad/s
  double T_hat_delta = 0.0;      // rising edge of j minus rising edge of i, s
  long tone_count_delta = 0;     // tones sent by j minus tones sent by i
  double correction_delta = 0.0; // announced phase-stage corrections, j minus i
};

/// Idealized measurement of the tones of j as seen by i at time `now`.
PairMeasurement measure_pair(const AgentState& i, const AgentState& j, double now,
                             NoiseSource* noise = nullptr);

/// theta_delta(k) = theta_delta(k-1) + lambda T_P omega_hat(k)
double accumulate_carrier_delta(double previous, double cfo_sampling, double tone_duration,
                                double omega_hat);

/// Theta_delta = -Lambda (Omega_i T_hat - 2 pi P), the phase of j relative to i.
double repetition_phase_delta(double rep_freq_i, double T_hat, long tone_count_delta,
                              double to_sampling);

/// Omega_i - Omega_j estimated from two consecutive phase differences taken
/// one repetition period apart.
double repetition_freq_delta(double rep_freq_i, double delta_now, double delta_prev);

/// One carrier-stage update of agent i at time `now`: accumulators then the
/// Euler step theta(k+1) = theta(k) + T_S theta'(k). `weights[m]` is a_ij of
/// neighbor m (0 disables the pair).
void cfo_step(AgentState& agent, const Transceiver& tx, std::span<PairMemory> memories,
              std::span<const PairMeasurement> measurements, std::span<const double> weights,
              const Params& params, std::size_t agents, double now);

/// One repetition-stage update of agent i at time `now`. `freq_weights` and
/// `phase_weights` hold a^Omega_ij and a^Theta_ij per neighbor.
void to_step(AgentState& agent, const Transceiver& tx, std::span<PairMemory> memories,
             std::span<const PairMeasurement> measurements, std::span<const double> freq_weights,
             std::span<const double> phase_weights, const Params& params, std::size_t agents,
             double now);

/// 1 / (2 max T_S (max in-degree + 1)), which keeps the delayed frequency
/// loop a contraction.
double default_frequency_weight(const std::vector<Transceiver>& agents, const Network& net);

struct Scenario {
  std::vector<Transceiver> agents;
  Network network;  // edge pattern; nonzero entries mark measured pairs
  Params params;
};

/// One processed tone of one agent.
struct ToneRecord {
  double time;
  std::size_t agent;
  double carrier_phase;
  double carrier_rate;
  double rep_freq;
  double rep_phase;
  double rep_rate;
  double max_abs_omega_hat;
  double max_abs_T_hat;
};

struct Metrics {
  double horizon = 0.0;
  double max_mutual_cfo = 0.0;         // max |theta_i' - theta_j'| at the horizon
  double max_wrapped_to_phase = 0.0;   // max |wrap(Theta_j - Theta_i)| at the horizon
  double max_mutual_rep_freq = 0.0;    // max |Omega_i - Omega_j|
  double steady_cfo_peak = 0.0;        // max mutual CFO over the final 10% of the run
  double steady_to_peak = 0.0;         // max wrapped TO phase over the final 10%
  double common_carrier_rate = 0.0;    // mean theta_i' at the horizon
};

struct Result {
  std::vector<ToneRecord> tones;
  Metrics metrics;
  std::vector<AgentState> final_states;
};

/// Event-driven simulation: every agent updates at multiples of its own T_S,i;
/// updates sharing a timestamp first all measure, then all apply. Throws
/// Divergence on a non-finite state or a stalled repetition clock.
Result run(const Scenario& scenario);

}  // namespace oscsync::icas
