#pragma once

// The ten acceptance criteria as one callable suite.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace fracspde::harness {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;    ///< measured values against their tolerances
  double seconds = 0.0;
  double budget = 0.0;   ///< runtime budget in seconds (0: none)
};

struct AcceptanceOptions {
  std::vector<int> only;              ///< empty: all ten
  unsigned workers = 1;
  std::filesystem::path scratch_dir;  ///< run directories of the determinism check
};

inline constexpr int kCriteria = 10;

CriterionResult run_criterion(int id, const AcceptanceOptions& options);

/// Runs the selected criteria in order, calling on_result after each.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  [n] name  (detail, t s)" or "FAIL ..."
std::string format_result(const CriterionResult& r);

}  // namespace fracspde::harness
