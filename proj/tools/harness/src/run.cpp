#include "fracspde/harness/run.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fracspde/field_io.hpp"
#include "fracspde/harness/output.hpp"
#include "fracspde/harness/parallel.hpp"
#include "fracspde/kernels.hpp"
#include "fracspde/lp_check.hpp"
#include "fracspde/mittag_leffler.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/philox.hpp"
#include "fracspde/solver.hpp"

#ifndef FRACSPDE_VERSION
#define FRACSPDE_VERSION "unknown"
#endif

namespace fracspde::harness {

const char* code_version() { return FRACSPDE_VERSION; }

namespace {

using nlohmann::json;

struct Outcome {
  bool inconclusive = false;
  std::string note;
};

CsvTable field_table(const Field& f) {
  const int d = f.grid.dim();
  std::vector<std::string> header;
  for (int a = 0; a < d; ++a) header.push_back("x" + std::to_string(a));
  header.push_back("value");
  CsvTable t(header);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto x = f.grid.point(i);
    std::vector<std::string> r;
    for (int a = 0; a < d; ++a) r.push_back(cell(x[a]));
    r.push_back(cell(f.values[i]));
    t.row(std::move(r));
  }
  return t;
}

std::function<double(double)> named_function(const std::string& name) {
  if (name == "sin") return [](double t) { return std::sin(t); };
  if (name == "cos") return [](double t) { return std::cos(t); };
  if (name == "exp") return [](double t) { return std::exp(t); };
  if (name == "t") return [](double t) { return t; };
  if (name == "sqrt") return [](double t) { return std::sqrt(t); };
  throw ConfigError("params.function must be one of sin, cos, exp, t, sqrt");
}

// ---- ml

Outcome run_ml(const RunConfig& c, RunOutput& out) {
  const double a = param(c, "a", c.alpha), b = param(c, "b", 1.0);
  const double z_min = param(c, "z_min", -20.0), z_max = param(c, "z_max", 20.0);
  const std::size_t samples = param(c, "samples", std::size_t{400});
  if (samples < 2 || !(z_max > z_min)) throw ConfigError("ml: need samples >= 2 and z_max > z_min");
  const MittagLeffler ml(a, b);
  std::function<double(double)> ref;
  std::string ref_name = "none";
  if (a == 1.0 && b == 1.0) {
    ref = [](double z) { return std::exp(z); };
    ref_name = "exp(z)";
  } else if (a == 2.0 && b == 1.0) {
    ref = [](double z) { return z <= 0.0 ? std::cos(std::sqrt(-z)) : std::cosh(std::sqrt(z)); };
    ref_name = "cos(sqrt(-z))";
  } else if (a == 0.5 && b == 1.0) {
    ref = [](double z) { return std::exp(z * z) * std::erfc(-z); };
    ref_name = "exp(z^2) erfc(-z)";
  }
  CsvTable t({"z", "value", "branch", "error_estimate", "reference", "abs_error"});
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double z = z_min + (z_max - z_min) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const MLResult r = ml.evaluate(z);
    const double rv = ref ? ref(z) : std::nan("");
    const double err = ref ? std::fabs(r.value - rv) : std::nan("");
    if (ref) worst = std::max(worst, err);
    t.row({cell(z), cell(r.value), to_string(r.branch), cell(r.error_estimate), cell(rv), cell(err)});
  }
  out.write_table("results.csv", t);
  out.report({{"a", a}, {"b", b}, {"reference", ref_name}, {"max_abs_error", ref ? json(worst) : json(nullptr)}});
  out.summary("E_{" + format_number(a) + "," + format_number(b) + "} on [" + format_number(z_min) + ", " +
              format_number(z_max) + "], " + std::to_string(samples) + " samples");
  if (ref) out.summary("max |E - " + ref_name + "| = " + format_number(worst));
  return {};
}

// ---- fraccalc

Outcome run_fraccalc(const RunConfig& c, RunOutput& out) {
  const std::string op = param(c, "op", std::string("integral"));
  const double order = param(c, "order", 0.5);
  const auto f = named_function(param(c, "function", std::string("sin")));
  const TimeGrid tg = c.time_grid();
  if (op == "semigroup") {
    const double order2 = param(c, "order2", 0.4);
    CsvTable t({"n_steps", "dt", "discrepancy", "ratio"});
    double prev = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const TimeGrid g(c.t_end, c.n_steps << k);
      const double d = semigroup_check(SampledPath::sample(g, f), order, order2);
      t.row({cell(g.n_steps), cell(g.dt()), cell(d), cell(prev > 0.0 ? prev / d : std::nan(""))});
      out.summary("n_steps " + std::to_string(g.n_steps) + ": |I^a I^b phi - I^{a+b} phi| = " + format_number(d));
      prev = d;
    }
    out.write_table("results.csv", t);
    out.report({{"op", op}, {"a", order}, {"b", order2}, {"finest_discrepancy", prev}});
    return {};
  }
  const SampledPath phi = SampledPath::sample(tg, f);
  Diagnostics diag;
  SampledPath res;
  if (op == "integral") {
    res = rl_integral(phi, order);
  } else if (op == "riemann") {
    res = rl_derivative(phi, order, &diag);
  } else if (op == "caputo") {
    res = caputo_derivative(phi, order, &diag);
  } else {
    throw ConfigError("params.op must be integral, riemann, caputo or semigroup");
  }
  CsvTable t({"t", "phi", "result"});
  for (std::size_t j = 0; j < tg.n_nodes(); ++j) t.row({cell(tg.node(j)), cell(phi.values[j]), cell(res.values[j])});
  out.write_table("results.csv", t);
  out.report({{"op", op}, {"order", order}, {"warnings", diag.warnings}});
  out.summary(op + " of order " + format_number(order) + " on " + std::to_string(tg.n_steps) + " steps");
  for (const auto& w : diag.warnings) out.summary("warning: " + w);
  return {};
}

// ---- kernel

Outcome run_kernel(const RunConfig& c, RunOutput& out) {
  const double t = param(c, "t", 1.0);
  const std::string sampling = param(c, "sampling", std::string("truncated"));
  if (sampling != "truncated" && sampling != "periodized") throw ConfigError("params.sampling: truncated or periodized");
  const FracOrders o = c.orders();
  const TorusGrid grid = c.grid();
  Diagnostics diag;
  const Field k = kernel_field(KernelSymbol(o, t), grid, &diag,
                               sampling == "truncated" ? KernelSampling::truncated : KernelSampling::periodized);
  out.write_table("results.csv", field_table(k));
  double mass = 0.0;
  for (double v : k.values) mass += v;
  mass *= grid.cell_volume();
  json rep{{"t", t}, {"sampling", sampling}, {"cell_sum", mass}, {"symbol_at_zero", KernelSymbol(o, t)(0.0)}};
  out.summary("cell sum " + format_number(mass));
  if (param(c, "scaling", false)) {
    const double s = scaling_check(o, t, grid, &diag);
    rep["scaling_discrepancy"] = s;
    out.summary("scaling discrepancy " + format_number(s));
  }
  if (c.params.contains("gamma")) {
    const DecayReport d = decay_check(o, grid, param(c, "gamma", 0.0), t, &diag);
    rep["decay"] = {{"near_exponent", d.near_exponent}, {"far_exponent", d.far_exponent},
                    {"near_bound", d.near_bound},       {"far_bound", d.far_bound},
                    {"super_polynomial", d.super_polynomial}, {"exponent_asserted", d.exponent_asserted},
                    {"near_ok", d.near_ok},             {"far_ok", d.far_ok},
                    {"n_star", d.n_star}};
    out.summary("decay: near " + format_number(d.near_exponent) + " (bound " + format_number(d.near_bound) +
                "), far " + format_number(d.far_exponent) + " (bound " + format_number(d.far_bound) + ")");
  }
  rep["warnings"] = diag.warnings;
  for (const auto& w : diag.warnings) out.summary("warning: " + w);
  out.report(rep);
  return {};
}

// ---- solve

Field eta1(const TorusGrid& grid) { return NoiseBasis::fourier_white(grid).function(1); }

Outcome run_solve(const RunConfig& c, RunOutput& out) {
  const std::string mode = param(c, "mode", std::string("white"));
  const FracOrders o = c.orders();
  const TorusGrid grid = c.grid();
  const TimeGrid tg = c.time_grid();
  const double k0 = 2.0 * std::numbers::pi / grid.side_length();

  if (mode == "deterministic") {
    const auto u = solve_deterministic(o, SpaceTimePath::sample(tg, grid, [&](double, const auto& x) {
      return std::cos(k0 * x[0]);
    }));
    out.write_table("results.csv", field_table(u.at(tg.n_steps)));
    out.report({{"mode", mode}, {"forcing", "cos(k0 x0)"}, {"l2_T", lp_norm(u.at(tg.n_steps), 2.0)}});
    out.summary("deterministic solve, ||u(T)||_2 = " + format_number(lp_norm(u.at(tg.n_steps), 2.0)));
    return {};
  }
  if (mode == "l1") {
    const auto noise = sample_noise(c.seed, tg, 1);
    const auto g = StackPath::constant(tg, {eta1(grid)});
    const auto us = solve_stochastic_additive(o, g, noise);
    const auto ul = solve_l1_oracle(o, SpaceTimePath(tg, grid), g, &noise);
    CsvTable t({"t", "l2_spectral", "l2_l1", "l2_difference"});
    for (std::size_t n = 0; n < tg.n_nodes(); ++n) {
      Field d = us.at(n);
      for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= ul.at(n).values[i];
      t.row({cell(tg.node(n)), cell(lp_norm(us.at(n), 2.0)), cell(lp_norm(ul.at(n), 2.0)), cell(lp_norm(d, 2.0))});
    }
    const double rel = (us - ul).lp_norm(2) / us.lp_norm(2);
    out.write_table("results.csv", t);
    out.report({{"mode", mode}, {"relative_l2_time_space", rel}});
    out.summary("spectral vs L1 relative L2 difference " + format_number(rel));
    return {};
  }
  if (mode == "picard") {
    const Field e1 = eta1(grid);
    const FieldMap f = [](double, const Field& u) {
      Field r = u;
      for (std::size_t i = 0; i < r.values.size(); ++i) {
        r.values[i] = std::sin(u.values[i]) + std::cos(2.0 * std::numbers::pi * u.grid.point(i)[0] / u.grid.side_length());
      }
      return r;
    };
    const double coupling = param(c, "coupling", 0.1);
    const StackMap gm = [&](double, const Field& u) {
      Field r = u;
      for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = coupling * u.values[i] * e1.values[i];
      return FieldStack{r};
    };
    PicardOptions opt;
    opt.tol = c.tol;
    opt.max_iter = param(c, "max_iter", 50);
    Diagnostics diag;
    const auto noise = sample_noise(c.seed, tg, 2);
    const PicardResult r = solve_semilinear(o, grid, f, gm, noise, opt, nullptr, &diag);
    CsvTable t({"iteration", "increment", "ratio"});
    for (std::size_t i = 0; i < r.increments.size(); ++i) {
      t.row({cell(i + 1), cell(r.increments[i]), cell(i >= 1 && i - 1 < r.ratios.size() ? r.ratios[i - 1] : std::nan(""))});
    }
    out.write_table("results.csv", t);
    out.write_table("field_T.csv", field_table(r.u.at(tg.n_steps)));
    out.report({{"mode", mode}, {"iterations", r.increments.size()}, {"contraction", r.contraction},
                {"converged", r.converged}, {"warnings", diag.warnings}});
    out.summary("Picard: " + std::to_string(r.increments.size()) + " iterations, contraction " +
                format_number(r.contraction));
    return {};
  }
  if (mode != "white") throw ConfigError("params.mode must be white, deterministic, l1 or picard");

  const NoiseBasis basis = NoiseBasis::fourier_white(grid);
  const std::size_t K = param(c, "n_modes", std::size_t{0}) == 0 ? basis.size() : param(c, "n_modes", std::size_t{0});
  if (K > basis.size()) throw ConfigError("params.n_modes exceeds the grid modes");
  const double hv = param(c, "h", 1.0);
  const WeightCache cache(o, tg, grid);
  const SpaceTimePath h = hv * SpaceTimePath::sample(tg, grid, [](double, const auto&) { return 1.0; });
  std::vector<double> l2(c.replicates), path(c.replicates);
  Field first;
  parallel_for(c.replicates, c.workers, [&](std::size_t r) {
    const auto u = solve_stochastic_white(cache, basis, h, sample_noise(replicate_seed(c.seed, r), tg, K));
    l2[r] = lp_norm(u.at(tg.n_steps), 2.0);
    path[r] = u.lp_norm(2.0);
    if (r == 0) first = u.at(tg.n_steps);
  });
  CsvTable t({"replicate", "seed", "l2_T", "l2_path"});
  double mean = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < c.replicates; ++r) {
    t.row({cell(r), std::to_string(replicate_seed(c.seed, r)), cell(l2[r]), cell(path[r])});
    const double v = l2[r] * l2[r], delta = v - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (v - mean);
  }
  out.write_table("results.csv", t);
  out.write_table("field_T.csv", field_table(first));
  Outcome oc;
  json rep{{"mode", mode}, {"n_modes", K}, {"mean_l2_T_sq", mean}};
  if (c.replicates > 1) {
    const double se = std::sqrt(m2 / static_cast<double>(c.replicates - 1) / static_cast<double>(c.replicates));
    rep["mean_l2_T_sq_se"] = se;
    oc.inconclusive = 2.0 * se > 0.05 * mean;
    out.summary("E||u(T)||_2^2 = " + format_number(mean) + " +- " + format_number(2.0 * se) + " (2 se)");
  } else {
    out.summary("||u(T)||_2^2 = " + format_number(mean));
  }
  rep["inconclusive"] = oc.inconclusive;
  out.report(rep);
  if (oc.inconclusive) oc.note = "replicate mean has fewer than two significant digits";
  return oc;
}

// ---- lp

Outcome run_lp(const RunConfig& c, RunOutput& out) {
  const auto ps = param(c, "ps", std::vector<double>{2.0, 4.0});
  const double t_support = param(c, "t_support", 0.5 * c.t_end);
  const int q = param(c, "quad_points", 4);
  const TorusGrid grid = c.grid();
  const TimeGrid tg = c.time_grid();
  Diagnostics diag;
  const auto family = adversarial_family(grid, tg, t_support, c.seed);
  const auto reps = lp_inequality_check(c.orders(), family, ps, q, &diag);
  CsvTable t({"sample", "p", "ratio", "ratio_spectral"});
  for (const LPReport& r : reps) {
    for (std::size_t s = 0; s < r.ratios.size(); ++s) {
      t.row({cell(s), cell(r.p), cell(r.ratios[s]),
             cell(s < r.ratios_spectral.size() ? r.ratios_spectral[s] : std::nan(""))});
    }
    json j{{"p", r.p}, {"n_star", r.n_star}, {"argmax", r.argmax}, {"any_under_resolved", r.any_under_resolved}};
    if (r.p == 2.0) {
      j["symbol_bound"] = r.symbol_bound;
      j["plancherel_defect"] = r.plancherel_defect;
    }
    out.report(j);
    out.summary("p = " + format_number(r.p) + ": N* = " + format_number(r.n_star) + " (sample " +
                std::to_string(r.argmax) + ")");
  }
  out.write_table("results.csv", t);
  if (!diag.empty()) out.summary("warning: " + diag.warnings.front() + " (" + std::to_string(diag.warnings.size()) + " samples)");
  return {};
}

// ---- sweep

struct Fit {
  double slope = 0.0, se = 0.0;
};

// least-squares slope of log y on log x with the standard error propagated
// from independent per-point errors sigma (on y)
Fit log_fit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& sigma) {
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i] / static_cast<double>(n);
    my += ly[i] / static_cast<double>(n);
  }
  double sxx = 0.0, sxy = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sigma[i] / y[i];
    var += (lx[i] - mx) * (lx[i] - mx) * s * s;
  }
  return {sxy / sxx, std::sqrt(var) / sxx};
}

Outcome run_sweep(const RunConfig& c, RunOutput& out) {
  const auto betas = param(c, "betas", std::vector<double>{0.25, 0.5, 0.75});
  const double xi_lo = param(c, "xi_lo", 2.0);
  const double xi_hi = param(c, "xi_hi", 0.375 * static_cast<double>(c.n) * 2.0 * std::numbers::pi / c.side_length);
  if (c.replicates < 2) throw ConfigError("sweep needs replicates >= 2");
  const EstimateConfig ec{c.grid(), c.time_grid(), c.seed, c.replicates, param(c, "n_modes", std::size_t{0}),
                          param(c, "h", 1.0)};
  std::vector<SpectralDecayReport> reps(betas.size());
  std::vector<FracOrders> orders;
  for (double b : betas) {
    try {
      orders.emplace_back(c.alpha, b);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("params.betas: ") + e.what());
    }
  }
  parallel_for(betas.size(), c.workers, [&](std::size_t i) { reps[i] = spectral_decay_check(orders[i], ec, xi_lo, xi_hi); });

  CsvTable t({"alpha", "beta", "c0_prime", "predicted_gain", "oracle_gain", "measured_gain", "measured_gain_se",
              "measured_exponent", "oracle_exponent"});
  CsvTable spec({"beta", "xi", "measured", "measured_se", "discrete", "oracle"});
  Outcome oc;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const SpectralDecayReport& r = reps[i];
    std::vector<double> x, y, s;
    for (std::size_t k = 0; k < r.xi.size(); ++k) {
      spec.row({cell(betas[i]), cell(r.xi[k]), cell(r.measured[k]), cell(r.measured_se[k]), cell(r.discrete[k]),
                cell(r.oracle[k])});
      if (r.xi[k] >= xi_lo && r.xi[k] <= xi_hi) {
        x.push_back(r.xi[k]);
        y.push_back(r.measured[k]);
        s.push_back(r.measured_se[k]);
      }
    }
    const Fit fit = log_fit(x, y, s);
    // E|u^|^2 ~ |xi|^{-2 gain} against a flat noise spectrum
    const double gain = -0.5 * r.measured_exponent, gain_se = 0.5 * fit.se;
    const double predicted = 2.0 - orders[i].c0_prime();
    t.row({cell(c.alpha), cell(betas[i]), cell(orders[i].c0_prime()), cell(predicted), cell(-0.5 * r.oracle_exponent),
           cell(gain), cell(gain_se), cell(r.measured_exponent), cell(r.oracle_exponent)});
    const bool wide = 2.0 * gain_se > 0.05 * std::fabs(gain);
    oc.inconclusive = oc.inconclusive || wide;
    out.report({{"alpha", c.alpha}, {"beta", betas[i]}, {"predicted_gain", predicted},
                {"oracle_gain", -0.5 * r.oracle_exponent}, {"measured_gain", gain}, {"measured_gain_se", gain_se},
                {"inconclusive", wide}});
    out.summary("beta " + format_number(betas[i]) + ": gain measured " + format_number(gain) + " +- " +
                format_number(2.0 * gain_se) + ", oracle " + format_number(-0.5 * r.oracle_exponent) +
                ", asymptotic " + format_number(predicted));
  }
  out.write_table("results.csv", t);
  out.write_table("spectrum.csv", spec);
  if (oc.inconclusive) oc.note = "a fitted gain has a 2 se band wider than 5%";
  return oc;
}

}  // namespace

RunResult run(const RunConfig& config) {
  RunResult res;
  try {
    validate(config);
    res.dir = resolve_output_dir(config);
    RunOutput out(res.dir);
    RunConfig echo = config;
    echo.output_dir = res.dir.string();
    out.write_manifest({{"config", to_json(echo)},
                        {"code_version", code_version()},
                        {"seed", config.seed},
                        {"kind", to_string(config.kind)}});
    Outcome oc;
    switch (config.kind) {
      case Kind::ml: oc = run_ml(config, out); break;
      case Kind::fraccalc: oc = run_fraccalc(config, out); break;
      case Kind::kernel: oc = run_kernel(config, out); break;
      case Kind::solve: oc = run_solve(config, out); break;
      case Kind::lp: oc = run_lp(config, out); break;
      case Kind::sweep: oc = run_sweep(config, out); break;
    }
    if (oc.inconclusive) {
      res.exit_code = kExitInconclusive;
      res.message = "inconclusive: " + oc.note;
      out.summary(res.message);
    }
    out.close();
  } catch (const ConfigError& e) {
    res = {kExitInvalidConfig, std::string("invalid configuration: ") + e.what(), res.dir};
  } catch (const InvalidArgument& e) {
    res = {kExitInvalidConfig, std::string("invalid configuration: ") + e.what(), res.dir};
  } catch (const AccuracyNotAchieved& e) {
    res = {kExitNumerical, std::string("accuracy not achieved: ") + e.what(), res.dir};
  } catch (const NumericalInstability& e) {
    res = {kExitNumerical, std::string("numerical instability: ") + e.what(), res.dir};
  } catch (const InconclusiveStatistics& e) {
    res = {kExitInconclusive, std::string("inconclusive: ") + e.what(), res.dir};
  } catch (const std::runtime_error& e) {
    res = {kExitInvalidConfig, e.what(), res.dir};
  }
  return res;
}

}  // namespace fracspde::harness
