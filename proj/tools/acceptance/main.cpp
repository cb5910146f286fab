#include <CLI11.hpp>

#include <iostream>

#include "fracspde/harness/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace fracspde::harness;
  CLI::App app{"fracspde acceptance suite: one PASS/FAIL line per criterion"};
  AcceptanceOptions opt;
  app.add_option("--only", opt.only, "criterion ids (1-10)")->check(CLI::Range(1, kCriteria));
  app.add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--scratch-dir", opt.scratch_dir, "run directories of the determinism check");
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  const auto results = run_acceptance(opt, [&](const CriterionResult& r) {
    std::cout << format_result(r) << std::endl;
    if (!r.passed) ++failed;
  });
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
