#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fracspde/harness/config.hpp"
#include "fracspde/harness/output.hpp"
#include "fracspde/harness/parallel.hpp"
#include "fracspde/harness/run.hpp"

namespace fs = std::filesystem;
using namespace fracspde::harness;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fracspde_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  const RunConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, MissingKeysKeepDefaults) {
  const RunConfig c = config_from_json({{"kind", "solve"}, {"alpha", 0.7}});
  EXPECT_EQ(c.kind, Kind::solve);
  EXPECT_EQ(c.alpha, 0.7);
  EXPECT_EQ(c.beta, RunConfig{}.beta);
  EXPECT_EQ(c.n, RunConfig{}.n);
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(config_from_json({{"kind", "ml"}, {"alpah", 0.5}}), ConfigError);
  EXPECT_THROW(kind_from_string("nope"), ConfigError);
}

TEST(Config, ValidateRejectsBadValues) {
  RunConfig c;
  EXPECT_NO_THROW(validate(c));
  c.n = 6;
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.dim = 4;
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.replicates = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.alpha = 2.5;
  EXPECT_THROW(validate(c), std::exception);
}

TEST(Config, OutputDirPrecedence) {
  RunConfig c;
  c.output_dir = "explicit";
  EXPECT_EQ(resolve_output_dir(c), "explicit");
  c.output_dir.clear();
  ::setenv("FRACSPDE_OUTPUT_DIR", "from_env", 1);
  EXPECT_EQ(resolve_output_dir(c), "from_env");
  ::unsetenv("FRACSPDE_OUTPUT_DIR");
  EXPECT_EQ(resolve_output_dir(c), "fracspde_out");
}

TEST(Config, ParamTypeMismatchIsConfigError) {
  RunConfig c;
  c.params = {{"samples", "many"}};
  EXPECT_THROW(param(c, "samples", 10), ConfigError);
  EXPECT_EQ(param(c, "absent", 3), 3);
}

TEST(Output, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, RethrowsLowestIndexFailure) {
  try {
    parallel_for(64, 4, [](std::size_t i) {
      if (i == 7 || i == 40) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "no exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(Run, InvalidConfigExitCode) {
  RunConfig c;
  c.n = 7;
  c.output_dir = scratch("invalid").string();
  EXPECT_EQ(run(c).exit_code, kExitInvalidConfig);
}

TEST(Run, MlWritesArtifacts) {
  RunConfig c;
  c.kind = Kind::ml;
  c.output_dir = scratch("ml").string();
  c.params = {{"a", 1.0}, {"b", 1.0}, {"samples", 11}};
  const RunResult r = run(c);
  ASSERT_EQ(r.exit_code, kExitOk) << r.message;
  for (const char* f : {"manifest.json", "results.csv", "reports.ndjson", "summary.txt"}) {
    EXPECT_TRUE(fs::exists(r.dir / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(slurp(r.dir / "manifest.json"));
  EXPECT_EQ(manifest.at("code_version"), code_version());
  EXPECT_EQ(manifest.at("kind"), "ml");
}

TEST(Run, SolveIndependentOfWorkerCount) {
  RunConfig c;
  c.kind = Kind::solve;
  c.n = 16;
  c.n_steps = 32;
  c.replicates = 6;
  c.seed = 77;
  c.params = {{"mode", "white"}};
  c.output_dir = scratch("w1").string();
  c.workers = 1;
  const RunResult a = run(c);
  c.output_dir = scratch("w3").string();
  c.workers = 3;
  const RunResult b = run(c);
  ASSERT_NE(a.exit_code, kExitInvalidConfig) << a.message;
  ASSERT_EQ(a.exit_code, b.exit_code);
  EXPECT_EQ(slurp(a.dir / "results.csv"), slurp(b.dir / "results.csv"));
}

TEST(Run, ManifestReproducesRun) {
  RunConfig c;
  c.kind = Kind::lp;
  c.alpha = 0.8;
  c.beta = 0.6;
  c.n = 16;
  c.n_steps = 16;
  c.output_dir = scratch("lp_a").string();
  const RunResult a = run(c);
  ASSERT_EQ(a.exit_code, kExitOk) << a.message;
  RunConfig again = config_from_json(nlohmann::json::parse(slurp(a.dir / "manifest.json")).at("config"));
  again.output_dir = scratch("lp_b").string();
  const RunResult b = run(again);
  ASSERT_EQ(b.exit_code, kExitOk) << b.message;
  EXPECT_EQ(slurp(a.dir / "results.csv"), slurp(b.dir / "results.csv"));
}
