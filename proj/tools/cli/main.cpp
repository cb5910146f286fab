#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "fracspde/harness/acceptance.hpp"
#include "fracspde/harness/config.hpp"
#include "fracspde/harness/run.hpp"

namespace {

using namespace fracspde::harness;

struct Overrides {
  std::string config_path;
  double alpha = 0, beta = 0, side_length = 0, t_end = 0, tol = 0;
  int dim = 0;
  std::size_t n = 0, n_steps = 0, replicates = 0;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string output_dir;
  std::vector<std::string> params;
  std::vector<CLI::Option*> opts;
};

void add_run_options(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config_path, "JSON run configuration or a manifest.json from an earlier run")
      ->check(CLI::ExistingFile);
  o.opts = {
      sub->add_option("--alpha", o.alpha, "time-derivative order"),
      sub->add_option("--beta", o.beta, "noise order"),
      sub->add_option("--dim", o.dim, "space dimension (1-3)"),
      sub->add_option("--n", o.n, "grid points per axis"),
      sub->add_option("--L,--side-length", o.side_length, "torus side length"),
      sub->add_option("--t-end", o.t_end, "final time"),
      sub->add_option("--n-steps", o.n_steps, "time steps"),
      sub->add_option("--seed", o.seed, "master seed"),
      sub->add_option("--replicates", o.replicates, "Monte Carlo replicates"),
      sub->add_option("--workers", o.workers, "worker threads"),
      sub->add_option("-o,--output-dir", o.output_dir, "artifact directory (default $FRACSPDE_OUTPUT_DIR)"),
      sub->add_option("--tol", o.tol, "iteration tolerance"),
  };
  sub->add_option("-p,--param", o.params, "kind-specific key=value (value parsed as JSON, else string)");
}

RunConfig build_config(Kind kind, const Overrides& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream is(o.config_path);
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(o.config_path + ": " + e.what());
    }
    if (j.contains("config") && j.contains("code_version")) j = j.at("config");
  }
  if (j.contains("kind") && j.at("kind") != to_string(kind)) {
    throw ConfigError("configuration is for '" + j.at("kind").get<std::string>() + "', not '" + to_string(kind) + "'");
  }
  j["kind"] = to_string(kind);
  RunConfig c = config_from_json(j);
  // flags win over the file
  auto set = [&](std::size_t i, auto& field, const auto& value) {
    if (o.opts[i]->count() > 0) field = value;
  };
  set(0, c.alpha, o.alpha);
  set(1, c.beta, o.beta);
  set(2, c.dim, o.dim);
  set(3, c.n, o.n);
  set(4, c.side_length, o.side_length);
  set(5, c.t_end, o.t_end);
  set(6, c.n_steps, o.n_steps);
  set(7, c.seed, o.seed);
  set(8, c.replicates, o.replicates);
  set(9, c.workers, o.workers);
  set(10, c.output_dir, o.output_dir);
  set(11, c.tol, o.tol);
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    const auto parsed = nlohmann::json::parse(value, nullptr, false);
    c.params[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracspde: time-fractional SPDE toolkit"};
  app.require_subcommand(1);

  const std::pair<Kind, const char*> kinds[] = {
      {Kind::ml, "Mittag-Leffler values on a z grid against closed forms"},
      {Kind::fraccalc, "Riemann-Liouville / Caputo operators and the semigroup law"},
      {Kind::kernel, "kernel field, cell mass, scaling and decay"},
      {Kind::solve, "solve the model equation (white, deterministic, l1, picard)"},
      {Kind::lp, "Littlewood-Paley ratios over the adversarial family"},
      {Kind::sweep, "regularity gain against beta from spectral decay"},
  };
  Overrides over[6];
  CLI::App* subs[6];
  for (int i = 0; i < 6; ++i) {
    subs[i] = app.add_subcommand(to_string(kinds[i].first), kinds[i].second);
    add_run_options(subs[i], over[i]);
  }

  AcceptanceOptions acc;
  std::string acc_csv;
  CLI::App* self = app.add_subcommand("selftest", "run the acceptance suite");
  self->add_option("--only", acc.only, "criterion ids (1-10)")->check(CLI::Range(1, kCriteria));
  self->add_option("--workers", acc.workers, "worker threads")->check(CLI::PositiveNumber);
  self->add_option("--scratch-dir", acc.scratch_dir, "run directories of the determinism check");
  self->add_option("--csv", acc_csv, "write id,name,passed to this file");

  CLI11_PARSE(app, argc, argv);

  if (self->parsed()) {
    const auto results = run_acceptance(acc, [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; });
    bool ok = true;
    for (const auto& r : results) ok = ok && r.passed;
    if (!acc_csv.empty()) {
      std::ofstream os(acc_csv);
      os << "id,name,passed\n";
      for (const auto& r : results) os << r.id << ',' << r.name << ',' << (r.passed ? "true" : "false") << '\n';
    }
    return ok ? kExitOk : kExitFailed;
  }

  for (int i = 0; i < 6; ++i) {
    if (!subs[i]->parsed()) continue;
    RunConfig config;
    try {
      config = build_config(kinds[i].first, over[i]);
    } catch (const ConfigError& e) {
      std::cerr << "invalid configuration: " << e.what() << '\n';
      return kExitInvalidConfig;
    }
    const RunResult r = run(config);
    if (!r.message.empty()) std::cerr << r.message << '\n';
    if (r.exit_code == kExitOk || r.exit_code == kExitInconclusive) std::cout << "artifacts in " << r.dir.string() << '\n';
    return r.exit_code;
  }
  return kExitInvalidConfig;
}
