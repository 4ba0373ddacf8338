#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oscsync/dynamics.hpp"
#include "oscsync/graph.hpp"
#include "oscsync/icas.hpp"

namespace oscsync {

/// Sectioned `key = value` text. `#` and `;` start comments; keys are unique
/// within a section.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  static IniDocument parse(std::string_view text);

  bool has_section(std::string_view section) const;
  std::optional<Entry> get(std::string_view section, std::string_view key) const;
  /// Line of the section header, 0 when absent.
  std::size_t section_line(std::string_view section) const;
  /// Throws ConfigError for any key of `section` not listed in `known`.
  void require_known(std::string_view section, const std::vector<std::string_view>& known) const;

 private:
  struct Section {
    std::size_t line = 0;
    std::map<std::string, Entry, std::less<>> entries;
  };
  std::map<std::string, Section, std::less<>> sections_;
};

struct IcasConfig {
  std::vector<double> repetition_freq;  // Omega_S,i, rad/s
  std::vector<double> tone_duration;    // T_P,i, s
  std::vector<double> initial_phase;    // Theta_i(0), rad
  icas::Params params;
  std::string trace = "icas_tones.csv";
};

struct ScenarioConfig {
  OscillatorBank bank;
  std::vector<std::vector<std::size_t>> neighbors;  // 0-based in-neighbor lists
  double edge_weight = 1.0;
  ProtocolSpec protocol;
  double step = 0.01;
  double horizon = 5.0;
  std::optional<std::pair<double, double>> fit_window;  // empty = automatic
  std::string trajectory = "trajectory.csv";
  std::string metrics = "metrics.txt";
  std::optional<IcasConfig> icas;

  Network network() const { return build_network(neighbors, edge_weight); }
  SimulationSetup setup() const;
  icas::Scenario icas_scenario() const;
};

/// Largest step accepted from a config file; the command line may override it.
inline constexpr double kMaxConfigStep = 0.01;

/// Parses scenario text. Every semantic error carries the offending line.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Parses "a,b" into a window with a < b.
std::pair<double, double> parse_window(std::string_view text);

}  // namespace oscsync
