#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "oscsync/error.hpp"
#include "oscsync/icas.hpp"
#include "oscsync/report.hpp"
#include "oscsync/scenario.hpp"
#include "oscsync/verify.hpp"

namespace fs = std::filesystem;
using namespace oscsync;

namespace {

struct Options {
  std::string config;
  std::optional<double> step;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string fit_window;
  int only = 0;
};

fs::path scenario_dir() {
  if (const char* env = std::getenv("OSCSYNC_SCENARIOS")) return env;
  return OSCSYNC_SCENARIO_DIR;
}

ScenarioConfig load(const Options& opt, std::string_view fallback) {
  const fs::path path = opt.config.empty() ? scenario_dir() / fallback : fs::path(opt.config);
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(path);
  } catch (const ConfigError& ex) {
    throw ConfigError(path.string() + ": " + ex.what(), 0);
  }
  if (opt.step) cfg.step = *opt.step;
  if (opt.horizon) cfg.horizon = *opt.horizon;
  if (!opt.fit_window.empty()) {
    cfg.fit_window = opt.fit_window == "auto" ? std::nullopt : std::optional(parse_window(opt.fit_window));
  }
  if (opt.seed && cfg.icas) cfg.icas->params.seed = *opt.seed;
  return cfg;
}

fs::path output_path(const Options& opt, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? p : fs::path(opt.out_dir) / p;
}

std::ofstream open_output(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

int run_simulate(const Options& opt) {
  const ScenarioConfig cfg = load(opt, "reference_kuramoto.ini");
  const SimulationReport rep = simulate(cfg);
  const fs::path csv = output_path(opt, cfg.trajectory);
  const fs::path metrics = output_path(opt, cfg.metrics);
  {
    auto out = open_output(csv);
    write_trajectory_csv(out, rep.trajectory);
  }
  {
    auto out = open_output(metrics);
    out << rep.metrics.render();
  }
  std::cout << rep.metrics.render();
  std::cerr << fmt::format("wrote {} and {}\n", csv.string(), metrics.string());
  return 0;
}

int run_bounds(const Options& opt) {
  const ScenarioConfig cfg = load(opt, "reference_kuramoto.ini");
  std::cout << bounds_report(cfg).render();
  return 0;
}

int run_icas(const Options& opt) {
  const ScenarioConfig cfg = load(opt, "icas_reference.ini");
  if (!cfg.icas) throw ConfigError("scenario has no [icas] section", 0);
  const icas::Result result = icas::run(cfg.icas_scenario());
  const MetricsReport m = icas_report(result);
  const fs::path trace = output_path(opt, cfg.icas->trace);
  const fs::path metrics = output_path(opt, cfg.metrics);
  {
    auto out = open_output(trace);
    write_icas_csv(out, result);
  }
  {
    auto out = open_output(metrics);
    out << m.render();
  }
  std::cout << m.render();
  std::cerr << fmt::format("wrote {} and {}\n", trace.string(), metrics.string());
  return 0;
}

int run_verify(const Options& opt) {
  VerifyOptions vo{load(opt, "reference_kuramoto.ini")};
  if (opt.seed) vo.seed = *opt.seed;
  bool all = true;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (opt.only && id != opt.only) continue;
    const CriterionResult r = verify_criterion(id, vo);
    all = all && r.passed;
    std::cout << fmt::format("criterion {:>2}: {} {} ({:.3f} s)\n    {}\n", r.id, r.passed ? "PASS" : "FAIL", r.title,
                             r.seconds, r.detail);
  }
  std::cout << (all ? "all criteria passed\n" : "some criteria FAILED\n");
  return all ? 0 : 1;
}

void add_common(CLI::App* app, Options& opt) {
  app->add_option("--config", opt.config, "Scenario file (defaults to the bundled five-agent scenario)");
  app->add_option("--step", opt.step, "Integration step in seconds, overrides the 0.01 s ceiling")
      ->check(CLI::PositiveNumber);
  app->add_option("--horizon", opt.horizon, "Simulated time in seconds")->check(CLI::PositiveNumber);
  app->add_option("--seed", opt.seed, "Random seed (noise and Monte Carlo draws)");
  app->add_option("--out-dir", opt.out_dir, "Directory for CSV and metrics files");
  app->add_option("--fit-window", opt.fit_window, "Consensus fit window 'start,end' in seconds, or 'auto'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled-oscillator synchronization simulator"};
  app.require_subcommand(1);
  Options opt;
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate a scenario, write the trajectory CSV and metrics");
  auto* bounds_cmd = app.add_subcommand("bounds", "Print spectral data and steady-error bounds");
  auto* icas_cmd = app.add_subcommand("icas", "Run the discrete pilot-tone protocol");
  auto* verify_cmd = app.add_subcommand("verify", "Run the reproduction suite, one line per criterion");
  for (auto* cmd : {simulate_cmd, bounds_cmd, icas_cmd, verify_cmd}) add_common(cmd, opt);
  verify_cmd->add_option("--only", opt.only, "Run a single criterion")->check(CLI::Range(1, kCriterionCount));

  CLI11_PARSE(app, argc, argv);
  try {
    if (simulate_cmd->parsed()) return run_simulate(opt);
    if (bounds_cmd->parsed()) return run_bounds(opt);
    if (icas_cmd->parsed()) return run_icas(opt);
    if (verify_cmd->parsed()) return run_verify(opt);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}
