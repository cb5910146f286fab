#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fracspde {

/// Precondition violated by the caller (bad order, grid, shape, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not meet its requested accuracy.
class AccuracyNotAchieved : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iteration diverged or produced non-finite values.
class NumericalInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monte Carlo error bands too wide to support a conclusion.
class InconclusiveStatistics : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collects non-fatal warnings. Pass a pointer to opt in; nullptr drops them.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
  bool empty() const { return warnings.empty(); }
};

inline void warn(Diagnostics* diag, std::string msg) {
  if (diag) diag->warn(std::move(msg));
}

}  // namespace fracspde
