#include "fracspde/harness/config.hpp"

#include <cstdlib>
#include <set>

namespace fracspde::harness {

namespace {

constexpr const char* kKinds[] = {"ml", "fraccalc", "kernel", "solve", "lp", "sweep"};

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

}  // namespace

const char* to_string(Kind kind) { return kKinds[static_cast<int>(kind)]; }

Kind kind_from_string(const std::string& name) {
  for (int i = 0; i < 6; ++i) {
    if (name == kKinds[i]) return static_cast<Kind>(i);
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> known{"kind", "alpha", "beta", "dim", "n", "side_length", "t_end", "n_steps",
                                           "seed", "replicates", "workers", "output_dir", "tol", "params"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown configuration key '" + key + "'");
  }
  RunConfig c;
  if (j.contains("kind")) {
    std::string kind;
    read(j, "kind", kind);
    c.kind = kind_from_string(kind);
  }
  read(j, "alpha", c.alpha);
  read(j, "beta", c.beta);
  read(j, "dim", c.dim);
  read(j, "n", c.n);
  read(j, "side_length", c.side_length);
  read(j, "t_end", c.t_end);
  read(j, "n_steps", c.n_steps);
  read(j, "seed", c.seed);
  read(j, "replicates", c.replicates);
  read(j, "workers", c.workers);
  read(j, "output_dir", c.output_dir);
  read(j, "tol", c.tol);
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("params must be an object");
    c.params = j.at("params");
  }
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"dim", c.dim},
          {"n", c.n},
          {"side_length", c.side_length},
          {"t_end", c.t_end},
          {"n_steps", c.n_steps},
          {"seed", c.seed},
          {"replicates", c.replicates},
          {"workers", c.workers},
          {"output_dir", c.output_dir},
          {"tol", c.tol},
          {"params", c.params}};
}

void validate(const RunConfig& c) {
  try {
    (void)c.orders();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (c.dim < 1 || c.dim > 3) throw ConfigError("dim must be 1, 2 or 3");
  if (c.n < 8 || c.n % 2 != 0) throw ConfigError("n must be even and >= 8");
  if (!(c.side_length > 0.0)) throw ConfigError("side_length must be positive");
  if (!(c.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (c.n_steps < 16) throw ConfigError("n_steps must be >= 16");
  if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  if (!(c.tol > 0.0)) throw ConfigError("tol must be positive");
}

std::string resolve_output_dir(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("FRACSPDE_OUTPUT_DIR"); env && *env) return env;
  return "fracspde_out";
}

}  // namespace fracspde::harness
