#include "oscsync/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "oscsync/analysis.hpp"
#include "oscsync/error.hpp"

namespace oscsync {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != ',') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double number(const IniDocument::Entry& e, std::string_view key) {
  const auto v = to_double(e.value);
  if (!v) throw ConfigError("'" + std::string(key) + "' expects a number, got '" + e.value + "'", e.line);
  return *v;
}

double positive(const IniDocument::Entry& e, std::string_view key) {
  const double v = number(e, key);
  if (!(v > 0.0)) throw ConfigError("'" + std::string(key) + "' must be positive", e.line);
  return v;
}

double nonnegative(const IniDocument::Entry& e, std::string_view key) {
  const double v = number(e, key);
  if (v < 0.0) throw ConfigError("'" + std::string(key) + "' must be nonnegative", e.line);
  return v;
}

std::uint64_t unsigned_integer(const IniDocument::Entry& e, std::string_view key) {
  const std::string_view s = trim(e.value);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("'" + std::string(key) + "' expects a nonnegative integer, got '" + e.value + "'", e.line);
  }
  return v;
}

std::vector<double> number_list(const IniDocument::Entry& e, std::string_view key) {
  std::vector<double> out;
  for (auto tok : split_tokens(e.value)) {
    const auto v = to_double(tok);
    if (!v) throw ConfigError("'" + std::string(key) + "': '" + std::string(tok) + "' is not a number", e.line);
    out.push_back(*v);
  }
  if (out.empty()) throw ConfigError("'" + std::string(key) + "' is empty", e.line);
  return out;
}

/// A list of length n, or a single value broadcast to n entries.
std::vector<double> per_agent(const IniDocument::Entry& e, std::string_view key, std::size_t n) {
  std::vector<double> v = number_list(e, key);
  if (v.size() == 1) v.assign(n, v.front());
  if (v.size() != n) {
    throw ConfigError("'" + std::string(key) + "' has " + std::to_string(v.size()) + " entries, expected " +
                          std::to_string(n),
                      e.line);
  }
  return v;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::vector<std::size_t>> parse_neighbors(const IniDocument::Entry& e, std::size_t n) {
  std::vector<std::vector<std::size_t>> lists;
  std::string_view rest = e.value;
  while (true) {
    const std::size_t bar = rest.find('|');
    const std::string_view group = rest.substr(0, bar);
    std::vector<std::size_t> list;
    for (auto tok : split_tokens(group)) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0 || v > n) {
        throw ConfigError("neighbor '" + std::string(tok) + "' of agent " + std::to_string(lists.size() + 1) +
                              " is not an agent number in 1.." + std::to_string(n),
                          e.line);
      }
      list.push_back(v - 1);
    }
    lists.push_back(std::move(list));
    if (bar == std::string_view::npos) break;
    rest.remove_prefix(bar + 1);
  }
  if (lists.size() != n) {
    throw ConfigError("'neighbors' lists " + std::to_string(lists.size()) + " agents, expected " + std::to_string(n),
                      e.line);
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto sorted = lists[i];
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("agent " + std::to_string(i + 1) + " lists a neighbor twice", e.line);
    }
    if (std::find(sorted.begin(), sorted.end(), i) != sorted.end()) {
      throw ConfigError("agent " + std::to_string(i + 1) + " lists itself as a neighbor", e.line);
    }
  }
  return lists;
}

IniDocument::Entry require(const IniDocument& doc, std::string_view section, std::string_view key) {
  if (auto e = doc.get(section, key)) return *e;
  throw ConfigError("missing key '" + std::string(key) + "' in [" + std::string(section) + "]",
                    doc.section_line(section));
}

}  // namespace

IniDocument IniDocument::parse(std::string_view text) {
  IniDocument doc;
  Section* current = nullptr;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const std::size_t c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      const std::string name = lower(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw ConfigError("empty section name", line_no);
      if (doc.sections_.count(name)) throw ConfigError("duplicate section [" + name + "]", line_no);
      current = &doc.sections_[name];
      current->line = line_no;
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
      if (!current) throw ConfigError("key outside of any section", line_no);
      const std::string key = lower(trim(line.substr(0, eq)));
      if (key.empty()) throw ConfigError("missing key before '='", line_no);
      if (current->entries.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
      current->entries[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no};
    }
    if (end == text.size()) break;
  }
  return doc;
}

bool IniDocument::has_section(std::string_view section) const { return sections_.find(section) != sections_.end(); }

std::optional<IniDocument::Entry> IniDocument::get(std::string_view section, std::string_view key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto e = s->second.entries.find(key);
  if (e == s->second.entries.end()) return std::nullopt;
  return e->second;
}

std::size_t IniDocument::section_line(std::string_view section) const {
  const auto s = sections_.find(section);
  return s == sections_.end() ? 0 : s->second.line;
}

void IniDocument::require_known(std::string_view section, const std::vector<std::string_view>& known) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return;
  for (const auto& [key, entry] : s->second.entries) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in [" + std::string(section) + "]", entry.line);
    }
  }
}

std::pair<double, double> parse_window(std::string_view text) {
  const auto toks = split_tokens(text);
  if (toks.size() != 2) throw InvalidArgument("window must be 'start,end'");
  const auto a = to_double(toks[0]);
  const auto b = to_double(toks[1]);
  if (!a || !b) throw InvalidArgument("window bounds must be numbers");
  if (!(*b > *a) || *a < 0.0) throw InvalidArgument("window needs 0 <= start < end");
  return {*a, *b};
}

ScenarioConfig parse_scenario(std::string_view text) {
  const IniDocument doc = IniDocument::parse(text);
  for (std::string_view s : {"oscillators", "network", "protocol"}) {
    if (!doc.has_section(s)) throw ConfigError("missing section [" + std::string(s) + "]", 0);
  }
  doc.require_known("oscillators", {"natural_freq", "initial_phase"});
  doc.require_known("network", {"neighbors", "topology", "weight"});
  doc.require_known("protocol", {"kind", "coupling"});
  doc.require_known("integrator", {"step", "horizon"});
  doc.require_known("analysis", {"fit_window"});
  doc.require_known("output", {"trajectory", "metrics"});
  doc.require_known("icas", {"repetition_freq", "tone_duration", "initial_phase", "cfo_sampling", "to_sampling",
                             "carrier_gain", "repetition_gain", "frequency_weight", "cfo_noise", "to_noise", "seed",
                             "tones", "trace"});

  ScenarioConfig cfg;
  const auto omega_entry = require(doc, "oscillators", "natural_freq");
  const std::vector<double> omega = number_list(omega_entry, "natural_freq");
  const std::size_t n = omega.size();
  if (n < 2) throw ConfigError("at least two agents are required", omega_entry.line);
  std::vector<double> phi0(n, 0.0);
  if (auto e = doc.get("oscillators", "initial_phase")) phi0 = per_agent(*e, "initial_phase", n);
  cfg.bank = OscillatorBank(to_vector(omega), to_vector(phi0));

  const auto neighbors = doc.get("network", "neighbors");
  const auto topology = doc.get("network", "topology");
  if (neighbors && topology) throw ConfigError("give either 'neighbors' or 'topology', not both", topology->line);
  if (neighbors) {
    cfg.neighbors = parse_neighbors(*neighbors, n);
  } else if (topology) {
    if (lower(topology->value) != "complete") {
      throw ConfigError("unknown topology '" + topology->value + "' (expected 'complete')", topology->line);
    }
    cfg.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) cfg.neighbors[i].push_back(j);
  } else {
    throw ConfigError("[network] needs 'neighbors' or 'topology'", doc.section_line("network"));
  }
  if (auto e = doc.get("network", "weight")) cfg.edge_weight = positive(*e, "weight");

  const auto kind = require(doc, "protocol", "kind");
  try {
    cfg.protocol.kind = parse_protocol_kind(lower(kind.value));
  } catch (const InvalidArgument& ex) {
    throw ConfigError(ex.what(), kind.line);
  }
  if (auto e = doc.get("protocol", "coupling")) cfg.protocol.coupling = nonnegative(*e, "coupling");

  if (auto e = doc.get("integrator", "step")) {
    cfg.step = positive(*e, "step");
    if (cfg.step > kMaxConfigStep) {
      throw ConfigError("step exceeds the 0.01 s ceiling (override with --step)", e->line);
    }
  }
  if (auto e = doc.get("integrator", "horizon")) cfg.horizon = positive(*e, "horizon");

  if (auto e = doc.get("analysis", "fit_window"); e && lower(e->value) != "auto") {
    try {
      cfg.fit_window = parse_window(e->value);
    } catch (const InvalidArgument& ex) {
      throw ConfigError(ex.what(), e->line);
    }
  }
  if (auto e = doc.get("output", "trajectory")) cfg.trajectory = e->value;
  if (auto e = doc.get("output", "metrics")) cfg.metrics = e->value;

  if (doc.has_section("icas")) {
    IcasConfig ic;
    const auto rep = require(doc, "icas", "repetition_freq");
    ic.repetition_freq = per_agent(rep, "repetition_freq", n);
    for (double v : ic.repetition_freq)
      if (!(v > 0.0)) throw ConfigError("'repetition_freq' entries must be positive", rep.line);
    ic.tone_duration.assign(n, 0.0);
    if (auto e = doc.get("icas", "tone_duration")) {
      ic.tone_duration = per_agent(*e, "tone_duration", n);
    } else {
      for (std::size_t i = 0; i < n; ++i) ic.tone_duration[i] = 0.5 * (kTwoPi / ic.repetition_freq[i]);
    }
    ic.initial_phase.assign(n, 0.0);
    if (auto e = doc.get("icas", "initial_phase")) ic.initial_phase = per_agent(*e, "initial_phase", n);
    auto& p = ic.params;
    if (auto e = doc.get("icas", "cfo_sampling")) p.cfo_sampling = positive(*e, "cfo_sampling");
    if (auto e = doc.get("icas", "to_sampling")) p.to_sampling = positive(*e, "to_sampling");
    if (auto e = doc.get("icas", "carrier_gain")) p.carrier_gain = nonnegative(*e, "carrier_gain");
    if (auto e = doc.get("icas", "repetition_gain")) p.repetition_gain = nonnegative(*e, "repetition_gain");
    if (auto e = doc.get("icas", "frequency_weight"); e && lower(e->value) != "auto") {
      p.frequency_weight = nonnegative(*e, "frequency_weight");
    }
    if (auto e = doc.get("icas", "cfo_noise")) p.cfo_noise = nonnegative(*e, "cfo_noise");
    if (auto e = doc.get("icas", "to_noise")) p.to_noise = nonnegative(*e, "to_noise");
    if (auto e = doc.get("icas", "seed")) p.seed = unsigned_integer(*e, "seed");
    if (auto e = doc.get("icas", "tones")) {
      p.tones = static_cast<std::size_t>(unsigned_integer(*e, "tones"));
      if (p.tones == 0) throw ConfigError("'tones' must be positive", e->line);
    }
    if (auto e = doc.get("icas", "trace")) ic.trace = e->value;
    // Range checks that need the whole section.
    try {
      (void)cfg.icas.emplace(std::move(ic));
      const auto sc = cfg.icas_scenario();
      for (std::size_t i = 0; i < n; ++i) {
        const auto& tx = sc.agents[i];
        if (tx.tone_duration >= tx.repetition_period()) throw InvalidArgument("tone_duration must be below 2 pi / repetition_freq");
        if (tx.initial_repetition_phase < 0.0 || tx.initial_repetition_phase >= kTwoPi)
          throw InvalidArgument("initial_phase entries must lie in [0, 2 pi)");
      }
      if (sc.params.cfo_sampling > 1.0 || sc.params.to_sampling > 1.0)
        throw InvalidArgument("sampling factors must lie in (0, 1]");
    } catch (const InvalidArgument& ex) {
      throw ConfigError(ex.what(), doc.section_line("icas"));
    }
  }

  try {
    (void)cfg.network();
  } catch (const InvalidArgument& ex) {
    throw ConfigError(ex.what(), doc.section_line("network"));
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'", 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

SimulationSetup ScenarioConfig::setup() const {
  return SimulationSetup{bank, network(), protocol, step, horizon, std::nullopt};
}

icas::Scenario ScenarioConfig::icas_scenario() const {
  if (!icas) throw InvalidArgument("scenario has no [icas] section");
  icas::Scenario sc{{}, network(), icas->params};
  for (std::size_t i = 0; i < bank.size(); ++i) {
    sc.agents.push_back({bank.natural_freq(static_cast<Eigen::Index>(i)), icas->repetition_freq[i],
                         icas->tone_duration[i], icas->initial_phase[i]});
  }
  return sc;
}

}  // namespace oscsync
