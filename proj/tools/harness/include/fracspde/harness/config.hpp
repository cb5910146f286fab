#pragma once

// Run configuration of the command line tool: one JSON document, optionally
// overridden field by field from flags.

#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "fracspde/frac_time.hpp"
#include "fracspde/torus.hpp"

namespace fracspde::harness {

enum class Kind { ml, fraccalc, kernel, solve, lp, sweep };

const char* to_string(Kind kind);
Kind kind_from_string(const std::string& name);

/// Rejected configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Kind kind = Kind::ml;
  double alpha = 0.5, beta = 0.25;
  int dim = 1;
  std::size_t n = 32;             ///< points per axis
  double side_length = 6.283185307179586;
  double t_end = 1.0;
  std::size_t n_steps = 64;
  std::uint64_t seed = 1;
  std::size_t replicates = 1;
  unsigned workers = 1;           ///< replicate-level threads; results never depend on it
  std::string output_dir;         ///< empty: $FRACSPDE_OUTPUT_DIR, else ./fracspde_out
  double tol = 1e-8;              ///< Picard tolerance and similar targets
  nlohmann::json params = nlohmann::json::object();  ///< kind-specific settings

  FracOrders orders() const { return FracOrders(alpha, beta); }
  TorusGrid grid() const { return TorusGrid(dim, n, side_length); }
  TimeGrid time_grid() const { return TimeGrid(t_end, n_steps); }
};

/// Unknown keys are rejected; missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

/// Throws ConfigError unless the orders are admissible, n >= 8 (even),
/// n_steps >= 16, 1 <= dim <= 3, replicates >= 1, workers >= 1.
void validate(const RunConfig& config);

/// config.output_dir, else $FRACSPDE_OUTPUT_DIR, else "fracspde_out".
std::string resolve_output_dir(const RunConfig& config);

/// Parameter lookup with default; throws ConfigError on a type mismatch.
template <class T>
T param(const RunConfig& config, const std::string& key, const T& fallback) {
  if (!config.params.contains(key)) return fallback;
  try {
    return config.params.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("params." + key + ": " + e.what());
  }
}

}  // namespace fracspde::harness
