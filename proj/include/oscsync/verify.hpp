#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oscsync/scenario.hpp"

namespace oscsync {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;  // measured values against their targets
  double seconds = 0.0;
};

struct VerifyOptions {
  ScenarioConfig reference;  // five-agent reference scenario (Kuramoto)
  std::uint64_t seed = 2024;
};

inline constexpr int kCriterionCount = 10;

/// Runs one reproduction criterion (1..10).
CriterionResult verify_criterion(int id, const VerifyOptions& options);

/// Runs all criteria in order.
std::vector<CriterionResult> run_verification(const VerifyOptions& options);

}  // namespace oscsync
