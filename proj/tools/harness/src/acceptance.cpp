#include "fracspde/harness/acceptance.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "fracspde/frac_time.hpp"
#include "fracspde/harness/output.hpp"
#include "fracspde/harness/parallel.hpp"
#include "fracspde/harness/run.hpp"
#include "fracspde/kernels.hpp"
#include "fracspde/lp_check.hpp"
#include "fracspde/mittag_leffler.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/philox.hpp"
#include "fracspde/solver.hpp"

namespace fracspde::harness {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

struct Check {
  bool ok = true;
  std::vector<std::string> parts;

  void add(bool pass, const std::string& what) {
    ok = ok && pass;
    parts.push_back(what + (pass ? "" : " [x]"));
  }
  std::string detail() const {
    std::string s;
    for (const auto& p : parts) s += (s.empty() ? "" : "; ") + p;
    return s;
  }
};

// ---- 1: Mittag-Leffler identities

Check mittag_leffler_identities() {
  Check c;
  const MittagLeffler e11(1.0, 1.0), e21(2.0, 1.0), e05(0.5, 1.0);
  double exp_err = 0.0, cos_err = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double x = -20.0 + 40.0 * i / 399.0;
    exp_err = std::max(exp_err, std::fabs(e11(x) - std::exp(x)));
    const double y = 20.0 * i / 399.0;
    cos_err = std::max(cos_err, std::fabs(e21(-y * y) - std::cos(y)));
  }
  // 200 terms of sum (-1)^k / Gamma(k/2 + 1) in 50 digits
  using big = boost::multiprecision::cpp_bin_float_50;
  big series = 0;
  for (int k = 0; k < 200; ++k) series += (k % 2 ? -1 : 1) / boost::multiprecision::tgamma(big(k) / 2 + 1);
  const double oracle = static_cast<double>(series);
  const double erfc_err = std::fabs(e05(-1.0) - oracle);
  const double closed_err = std::fabs(oracle - std::exp(1.0) * std::erfc(1.0));
  c.add(exp_err <= 1e-10, "max|E11 - exp| " + num(exp_err) + " <= 1e-10");
  c.add(cos_err <= 1e-8, "max|E21(-x^2) - cos| " + num(cos_err) + " <= 1e-8");
  c.add(erfc_err <= 1e-10, "|E_{1/2}(-1) - series| " + num(erfc_err) + " <= 1e-10");
  c.add(closed_err <= 1e-10, "|series - e erfc 1| " + num(closed_err));
  return c;
}

// ---- 2: semigroup law

Check semigroup() {
  Check c;
  auto disc = [](std::size_t n) {
    const TimeGrid g(1.0, n);
    const auto phi = SampledPath::sample(g, [](double t) { return std::sin(t); });
    return semigroup_check(phi, 0.3, 0.4) / phi.max_abs();
  };
  const double coarse = disc(1024), fine = disc(2048);
  c.add(fine <= 1e-4, "n=2048: " + num(fine) + " <= 1e-4 ||phi||");
  c.add(coarse / fine >= 2.0, "refinement ratio " + num(coarse / fine) + " >= 2");
  return c;
}

// ---- 3: kernel mass and scaling

Check kernel_mass_scaling() {
  Check c;
  double worst = 0.0;
  for (double a : {0.3, 0.5, 1.0, 1.5}) {
    for (double t : {0.25, 1.0, 4.0}) {
      for (int d : {1, 2}) {
        const TorusGrid grid(d, d == 1 ? 256 : 64, 20.0);
        const Field k = kernel_field(FracOrders(a, a), t, grid);
        double mass = 0.0;
        for (double v : k.values) mass += v;
        worst = std::max(worst, std::fabs(mass * grid.cell_volume() - 1.0));
      }
    }
  }
  c.add(worst <= 1e-8, "max|mass - 1| " + num(worst) + " <= 1e-8");
  const double s = scaling_check(FracOrders(0.6, 0.3), 2.0, TorusGrid(2, 256, 20.0));
  c.add(s <= 1e-6, "scaling " + num(s) + " <= 1e-6");
  return c;
}

// ---- 4: Ito isometry

Check ito_isometry(unsigned workers) {
  Check c;
  const FracOrders o(0.5, 0.3);
  const TorusGrid grid(1, 16, kTwoPi);
  const TimeGrid tg(1.0, 128);
  const WeightCache cache(o, tg, grid);
  const NoiseBasis basis = NoiseBasis::fourier_white(grid);
  const std::size_t k = 3;
  const BasisMode& bm = basis.mode(k);
  const double amp = 0.5 * bm.amplitude * static_cast<double>(grid.size());
  const double oracle = amp * amp * discrete_mode_variance(cache.at(bm.flat), tg.dt());
  std::vector<double> w(grid.size(), 0.0);
  w[k] = 1.0;
  const NoiseBasis single = NoiseBasis::diagonal_colored(grid, w);
  const auto h = SpaceTimePath::sample(tg, grid, [](double, const auto&) { return 1.0; });
  const std::size_t reps = 10000;
  std::vector<double> sq(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    const auto u = stochastic_white_final(cache, single, h, sample_noise(replicate_seed(404, r), tg, k + 1));
    sq[r] = std::norm(u.coeffs[bm.flat]);
  });
  double mean = 0.0, m2 = 0.0;
  for (double s : sq) mean += s / static_cast<double>(reps);
  for (double s : sq) m2 += (s - mean) * (s - mean);
  const double se = std::sqrt(m2 / static_cast<double>(reps - 1) / static_cast<double>(reps));
  const double z = (mean - oracle) / se;
  c.add(std::fabs(z) <= 4.0, "E|u^|^2 " + num(mean) + " vs oracle " + num(oracle) + ", z = " + num(z) + " (|z| <= 4)");
  return c;
}

// ---- 5: spectral vs L1 solver

Check cross_solver() {
  Check c;
  const TorusGrid grid(1, 16, kTwoPi);
  const NoiseBasis basis = NoiseBasis::fourier_white(grid);
  const FracOrders o(0.8, 0.25);
  const auto master = sample_noise(2024, TimeGrid(1.0, 2048), 1);
  std::vector<double> errs;
  for (std::size_t factor : {4u, 2u, 1u}) {
    const auto noise = master.coarsened(factor);
    const TimeGrid& tg = noise.grid();
    const auto g = StackPath::constant(tg, {basis.function(1)});
    const auto us = solve_stochastic_additive(o, g, noise);
    const auto ul = solve_l1_oracle(o, SpaceTimePath(tg, grid), g, &noise);
    errs.push_back((us - ul).lp_norm(2) / us.lp_norm(2));
  }
  c.add(errs[2] <= 5e-2, "n=2048: " + num(errs[2]) + " <= 5e-2");
  c.add(errs[0] > errs[1] && errs[1] > errs[2],
        "n=512,1024,2048: " + num(errs[0]) + ", " + num(errs[1]) + ", " + num(errs[2]) + " decreasing");
  return c;
}

// ---- 6: spectral decay

Check spectral_decay(unsigned workers) {
  Check c;
  const std::pair<double, double> cases[] = {{1.0, 1.0}, {0.5, 0.25}, {0.8, 0.6}};
  std::vector<SpectralDecayReport> reps(3);
  const EstimateConfig cfg{TorusGrid(1, 128, kTwoPi), TimeGrid(0.25, 4096), 606, 400, 0, 1.0};
  parallel_for(3, workers, [&](std::size_t i) {
    reps[i] = spectral_decay_check(FracOrders(cases[i].first, cases[i].second), cfg, 2.0, 24.0);
  });
  for (std::size_t i = 0; i < 3; ++i) {
    const double diff = reps[i].measured_exponent - reps[i].oracle_exponent;
    c.add(std::fabs(diff) <= 0.2, "(" + num(cases[i].first) + "," + num(cases[i].second) + ") " +
                                      num(reps[i].measured_exponent) + " vs " + num(reps[i].oracle_exponent));
  }
  return c;
}

// ---- 7: dimension threshold

Check dimension_threshold_check() {
  Check c;
  const auto div = dimension_threshold(FracOrders(1.0, 1.0), 2, kTwoPi, 1.0, {8, 16, 32});
  bool grows = div.expect_divergent;
  std::string g;
  for (double x : div.growth) {
    grows = grows && x >= 0.2;
    g += (g.empty() ? "" : ", ") + num(100 * x) + "%";
  }
  c.add(grows, "d=2 heat growth " + g + " (>= 20%)");
  const auto lad = dimension_threshold(FracOrders(1.0, 1.0), 2, kTwoPi, 1.0, {16, 32, 64, 128});
  double dev = 0.0;
  for (std::size_t i = 1; i < lad.sums.size(); ++i) {
    dev = std::max(dev, std::fabs((lad.sums[i] - lad.sums[i - 1]) / (std::numbers::pi * std::log(2.0)) - 1.0));
  }
  c.add(dev <= 0.01, "increment / (pi log 2) - 1 up to n=128: " + num(dev));
  const auto conv = dimension_threshold(FracOrders(0.5, 0.25), 3, kTwoPi, 1.0, {8, 16, 32, 64});
  bool contracts = !conv.expect_divergent;
  std::string r;
  for (std::size_t i = 2; i < conv.sums.size(); ++i) {
    const double q = (conv.sums[i] - conv.sums[i - 1]) / (conv.sums[i - 1] - conv.sums[i - 2]);
    contracts = contracts && q <= 0.6;
    r += (r.empty() ? "" : ", ") + num(q);
  }
  c.add(contracts && conv.growth.back() < 0.05,
        "d=3 increment ratios " + r + " (<= 0.6), last growth " + num(100 * conv.growth.back()) + "% (< 5%)");
  return c;
}

// ---- 8: Littlewood-Paley ratio

Check littlewood_paley() {
  Check c;
  const FracOrders o(0.75, 0.6);
  std::vector<std::vector<LPReport>> runs;
  for (std::size_t n : {64u, 128u}) {
    const TorusGrid grid(1, n, kTwoPi);
    const TimeGrid tg(1.0, 2 * n);
    runs.push_back(lp_inequality_check(o, adversarial_family(grid, tg, 0.5, 808), {2.0, 4.0}));
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const double a = runs[0][i].n_star, b = runs[1][i].n_star, rel = std::fabs(b / a - 1.0);
    c.add(rel <= 0.1, "p=" + num(runs[0][i].p) + " N* " + num(a) + " -> " + num(b) + " (" + num(100 * rel) + "%)");
  }
  double defect = 0.0;
  bool bounded = true;
  for (const auto& r : runs) {
    defect = std::max(defect, r[0].plancherel_defect);
    bounded = bounded && r[0].n_star <= r[0].symbol_bound;
  }
  c.add(defect <= 1e-6, "p=2 Plancherel defect " + num(defect) + " <= 1e-6");
  c.add(bounded, "N2* <= symbol bound " + num(runs[1][0].symbol_bound));
  return c;
}

// ---- 9: Picard contraction

Check picard() {
  Check c;
  const TorusGrid grid(1, 32, kTwoPi);
  const TimeGrid tg(0.5, 128);
  const FracOrders o(0.7, 0.3);
  const auto noise = sample_noise(909, tg, 2);
  const Field eta1 = NoiseBasis::fourier_white(grid).function(1);
  const FieldMap f = [](double, const Field& u) {
    Field r = u;
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = std::sin(u.values[i]) + std::cos(u.grid.point(i)[0]);
    return r;
  };
  const StackMap g = [&](double, const Field& u) {
    Field r = u;
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = 0.1 * u.values[i] * eta1.values[i];
    return FieldStack{r};
  };
  const PicardOptions opt;
  const auto r = solve_semilinear(o, grid, f, g, noise, opt);
  c.add(r.converged && r.contraction < 1.0,
        std::to_string(r.increments.size()) + " iterations, max ratio " + num(r.contraction) + " < 1");
  const auto again = solve_semilinear(o, grid, f, g, noise, opt, &r.u);
  c.add(again.increments.front() <= opt.tol, "re-solve increment " + num(again.increments.front()) + " <= " + num(opt.tol));
  return c;
}

// ---- 10: determinism

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

Check determinism(const AcceptanceOptions& options) {
  Check c;
  const std::filesystem::path root =
      options.scratch_dir.empty() ? std::filesystem::temp_directory_path() / "fracspde_acceptance" : options.scratch_dir;
  std::vector<RunConfig> configs(3);
  configs[0].kind = Kind::solve;
  configs[0].alpha = 0.6;
  configs[0].beta = 0.3;
  configs[0].replicates = 6;
  configs[0].workers = options.workers;
  configs[1].kind = Kind::lp;
  configs[1].alpha = 0.75;
  configs[1].beta = 0.6;
  configs[1].n = 16;
  configs[1].n_steps = 32;
  configs[2].kind = Kind::sweep;
  configs[2].alpha = 0.5;
  configs[2].n = 16;
  configs[2].n_steps = 64;
  configs[2].replicates = 8;
  configs[2].params = {{"betas", {0.25, 0.5}}, {"xi_lo", 1.0}, {"xi_hi", 6.0}};
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto first_dir = root / ("run" + std::to_string(i) + "_a");
    const auto second_dir = root / ("run" + std::to_string(i) + "_b");
    std::filesystem::remove_all(first_dir);
    std::filesystem::remove_all(second_dir);
    configs[i].output_dir = first_dir.string();
    const RunResult a = run(configs[i]);
    // second run from the manifest alone
    std::ifstream ms(first_dir / "manifest.json");
    RunConfig again = config_from_json(nlohmann::json::parse(ms).at("config"));
    again.output_dir = second_dir.string();
    const RunResult b = run(again);
    bool same = a.exit_code == b.exit_code && (a.exit_code == kExitOk || a.exit_code == kExitInconclusive);
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(first_dir)) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      same = same && slurp(entry.path()) == slurp(second_dir / entry.path().filename());
    }
    c.add(same && files > 0, std::string(to_string(configs[i].kind)) + ": " + std::to_string(files) +
                                 " CSV files byte-identical");
  }
  return c;
}

struct Spec {
  const char* name;
  double budget;
};

const Spec kSpecs[kCriteria] = {
    {"Mittag-Leffler identities", 5},      {"fractional-calculus semigroup", 5},
    {"kernel mass and scaling", 60},       {"Ito isometry", 60},
    {"cross-solver agreement", 120},       {"regularity-gain law", 600},
    {"dimension threshold", 300},          {"Littlewood-Paley ratio stability", 600},
    {"Picard contraction", 120},           {"determinism", 0},
};

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  if (id < 1 || id > kCriteria) throw std::out_of_range("criterion id must be 1..10");
  CriterionResult res;
  res.id = id;
  res.name = kSpecs[id - 1].name;
  res.budget = kSpecs[id - 1].budget;
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  try {
    switch (id) {
      case 1: c = mittag_leffler_identities(); break;
      case 2: c = semigroup(); break;
      case 3: c = kernel_mass_scaling(); break;
      case 4: c = ito_isometry(options.workers); break;
      case 5: c = cross_solver(); break;
      case 6: c = spectral_decay(options.workers); break;
      case 7: c = dimension_threshold_check(); break;
      case 8: c = littlewood_paley(); break;
      case 9: c = picard(); break;
      case 10: c = determinism(options); break;
    }
  } catch (const std::exception& e) {
    c.add(false, std::string("exception: ") + e.what());
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (res.budget > 0.0) c.add(res.seconds < res.budget, "runtime " + num(res.seconds) + " s < " + num(res.budget) + " s");
  res.passed = c.ok;
  res.detail = c.detail();
  return res;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<int> ids = options.only;
  if (ids.empty()) {
    for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
  }
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, options));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.name << "  (" << r.detail << ")";
  return os.str();
}

}  // namespace fracspde::harness
