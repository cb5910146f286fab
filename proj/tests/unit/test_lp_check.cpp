#include "fracspde/lp_check.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using namespace fracspde;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

StackPath single_stack(const TimeGrid& tg, const TorusGrid& grid,
                       const std::function<double(double, const std::array<double, 3>&)>& f) {
  StackPath g{tg, {}};
  for (std::size_t j = 0; j < tg.n_steps; ++j) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(tg.node(j), grid.point(i));
    g.stacks.push_back({Field(grid, std::move(v))});
  }
  return g;
}

double max_abs(const SpaceTimePath& a) {
  double m = 0.0;
  for (const Field& f : a.snapshots) {
    for (double v : f.values) m = std::max(m, std::fabs(v));
  }
  return m;
}

TEST(LPInstance, Preconditions) {
  const TimeGrid tg(1.0, 8);
  const TorusGrid grid(1, 8, kTwoPi);
  const StackPath g = single_stack(tg, grid, [](double, const auto&) { return 1.0; });
  EXPECT_THROW(LPInstance(FracOrders(0.75, 0.5), 2.0, g), InvalidArgument);
  EXPECT_THROW(LPInstance(FracOrders(0.75, 0.6), 1.5, g), InvalidArgument);
  StackPath short_g = g;
  short_g.stacks.pop_back();
  EXPECT_THROW(LPInstance(FracOrders(0.75, 0.6), 2.0, short_g), InvalidArgument);
  EXPECT_NO_THROW(LPInstance(FracOrders(0.75, 0.6), 2.0, g));
}

TEST(ApplyT, ZeroInputGivesZero) {
  const TimeGrid tg(1.0, 16);
  const TorusGrid grid(1, 16, kTwoPi);
  const LPInstance inst(FracOrders(0.75, 0.6), 2.0, single_stack(tg, grid, [](double, const auto&) { return 0.0; }));
  const TReport t = apply_T(inst);
  EXPECT_EQ(max_abs(t.field), 0.0);
  EXPECT_FALSE(t.under_resolved);
  EXPECT_EQ(T_norm_sq_spectral(inst), 0.0);
}

TEST(ApplyT, HeatImpulseOnOneMode) {
  // alpha = beta = 1: c1 = 1 and K = exp(-lambda r). g = cos(2x)/dt on [0, dt)
  // gives Tg(t_n, x)^2 = lambda e^{-2 lambda t_n} (e^{2 lambda dt} - 1) / (2 lambda) cos^2(2x) / dt^2.
  const TimeGrid tg(0.5, 32);
  const TorusGrid grid(1, 16, kTwoPi);
  const double dt = tg.dt(), lam = 4.0;
  StackPath g = single_stack(tg, grid, [&](double t, const auto& x) { return t < 0.5 * dt ? std::cos(2 * x[0]) / dt : 0.0; });
  const LPInstance inst(FracOrders(1.0, 1.0), 2.0, std::move(g));
  const TReport t = apply_T(inst);
  double worst = 0.0, scale = 0.0;
  for (std::size_t n = 1; n < tg.n_nodes(); ++n) {
    const double amp2 = lam * std::exp(-2 * lam * tg.node(n)) * std::expm1(2 * lam * dt) / (2 * lam) / (dt * dt);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double c = std::cos(2 * grid.point(i)[0]);
      const double exact = std::sqrt(amp2) * std::fabs(c);
      worst = std::max(worst, std::fabs(t.field.at(n).values[i] - exact));
      scale = std::max(scale, exact);
    }
  }
  EXPECT_LE(worst, 1e-6 * scale);
  for (double v : t.field.at(0).values) EXPECT_EQ(v, 0.0);
}

TEST(ApplyT, ParabolicScalingCovariance) {
  // the same nodal values on [0, L) x [0, T] and on [0, L s^{-a/2}) x [0, T/s]
  const FracOrders o(0.75, 0.6);
  const double s = 2.0;
  const TorusGrid grid(1, 32, kTwoPi), small(1, 32, kTwoPi * std::pow(s, -0.5 * o.alpha()));
  const TimeGrid tg(1.0, 40), fast(1.0 / s, 40);
  auto f = [](double t, const std::array<double, 3>& x) {
    return std::sin(3 * t) * (std::cos(x[0]) + 0.4 * std::sin(5 * x[0])) + t * std::cos(7 * x[0]);
  };
  const StackPath g = single_stack(tg, grid, f);
  StackPath gs{fast, {}};
  for (const FieldStack& st : g.stacks) gs.stacks.push_back({Field(small, st.front().values)});
  const TReport a = apply_T(LPInstance(o, 2.0, g));
  const TReport b = apply_T(LPInstance(o, 2.0, gs));
  double worst = 0.0;
  for (std::size_t n = 0; n < tg.n_nodes(); ++n) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst = std::max(worst, std::fabs(a.field.at(n).values[i] - b.field.at(n).values[i]));
    }
  }
  EXPECT_LE(worst, 1e-10 * max_abs(a.field));
}

TEST(ApplyT, Sublinear) {
  const FracOrders o(0.8, 0.7);
  const TimeGrid tg(1.0, 32);
  const TorusGrid grid(2, 16, kTwoPi);
  const StackPath g1 = single_stack(tg, grid, [](double t, const auto& x) { return std::cos(x[0] + 2 * x[1]) * (1 - t); });
  const StackPath g2 = single_stack(tg, grid, [](double t, const auto& x) { return std::sin(3 * x[0]) * t - 0.3; });
  StackPath sum = g1;
  for (std::size_t j = 0; j < tg.n_steps; ++j) {
    for (std::size_t i = 0; i < grid.size(); ++i) sum.stacks[j][0].values[i] += g2.stacks[j][0].values[i];
  }
  const SpaceTimePath t1 = apply_T(LPInstance(o, 2.0, g1)).field;
  const SpaceTimePath t2 = apply_T(LPInstance(o, 2.0, g2)).field;
  const SpaceTimePath ts = apply_T(LPInstance(o, 2.0, sum)).field;
  for (std::size_t n = 0; n < tg.n_nodes(); ++n) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ASSERT_LE(ts.at(n).values[i], t1.at(n).values[i] + t2.at(n).values[i] + 1e-10);
    }
  }
}

TEST(ApplyT, PlancherelIdentity) {
  const FracOrders o(0.75, 0.6);
  const TimeGrid tg(1.0, 24);
  const TorusGrid grid(2, 16, kTwoPi);
  StackPath g{tg, {}};
  for (std::size_t j = 0; j < tg.n_steps; ++j) {
    const double t = tg.node(j);
    g.stacks.push_back({Field::sample(grid, [&](const auto& x) { return std::cos(x[0] - x[1]) + t * std::sin(4 * x[1]); }),
                        Field::sample(grid, [&](const auto& x) { return std::exp(std::sin(x[0])) * (1 - t); })});
  }
  const LPInstance inst(o, 2.0, g);
  const double phys = std::pow(apply_T(inst).field.lp_norm(2.0), 2.0);
  const double spec = T_norm_sq_spectral(inst);
  EXPECT_NEAR(phys, spec, 1e-8 * spec);
}

TEST(ApplyT, PointEvaluationMatchesField) {
  const TimeGrid tg(1.0, 16);
  const TorusGrid grid(1, 16, kTwoPi);
  const LPInstance inst(FracOrders(0.75, 0.6), 2.0,
                        single_stack(tg, grid, [](double t, const auto& x) { return std::cos(x[0]) + t; }));
  const TReport t = apply_T(inst);
  EXPECT_EQ(apply_T(inst, 9, 5), t.field.at(9).values[5]);
  EXPECT_THROW(apply_T(inst, 17, 0), InvalidArgument);
}

TEST(SymbolBound, DiscreteMatchesContinuous) {
  for (auto [a, b] : {std::pair{0.75, 0.6}, {1.0, 1.0}, {1.2, 0.8}}) {
    const FracOrders o(a, b);
    const TimeGrid tg(1.0, 64);
    const TorusGrid grid(1, 64, kTwoPi);
    const double cont = T_symbol_bound_continuous(o, 1.0, grid);
    EXPECT_NEAR(T_symbol_bound(o, tg, grid), cont, 1e-3 * cont) << a << " " << b;
  }
}

TEST(LPInequality, RatiosBelowSymbolBound) {
  const FracOrders o(0.75, 0.6);
  const TimeGrid tg(1.0, 32);
  const TorusGrid grid(1, 16, kTwoPi);
  const auto family = adversarial_family(grid, tg, 0.5, 3);
  const auto reps = lp_inequality_check(o, family, {2.0, 4.0});
  ASSERT_EQ(reps.size(), 2u);
  const LPReport& r2 = reps[0];
  ASSERT_EQ(r2.ratios.size(), 30u);
  ASSERT_EQ(r2.ratios_spectral.size(), 30u);
  // the constant mode is annihilated by |xi|^{c1}
  EXPECT_EQ(r2.ratios[0], 0.0);
  for (double r : r2.ratios) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, r2.symbol_bound * (1 + 1e-12));
  }
  EXPECT_LE(r2.plancherel_defect, 1e-8);
  EXPECT_EQ(r2.n_star, *std::max_element(r2.ratios.begin(), r2.ratios.end()));
  EXPECT_EQ(r2.ratios[r2.argmax], r2.n_star);
  EXPECT_TRUE(reps[1].ratios_spectral.empty());
  EXPECT_GT(reps[1].n_star, 0.0);
}

TEST(LPInequality, ZeroSampleHasNoRatio) {
  const TimeGrid tg(1.0, 8);
  const TorusGrid grid(1, 8, kTwoPi);
  const StackPath z = single_stack(tg, grid, [](double, const auto&) { return 0.0; });
  EXPECT_THROW(lp_inequality_check(FracOrders(0.75, 0.6), {z}, {2.0}), InvalidArgument);
}

TEST(LPInequality, NStarStableUnderRefinement) {
  const FracOrders o(0.75, 0.6);
  double prev[2] = {0, 0};
  for (std::size_t n : {32u, 64u}) {
    const TimeGrid tg(1.0, 2 * n);
    const TorusGrid grid(1, n, kTwoPi);
    const auto reps = lp_inequality_check(o, adversarial_family(grid, tg, 0.5, 5), {2.0, 4.0});
    for (int i = 0; i < 2; ++i) {
      if (prev[i] > 0.0) {
        EXPECT_LE(std::fabs(reps[i].n_star / prev[i] - 1.0), 0.1) << reps[i].p;
      }
      prev[i] = reps[i].n_star;
    }
  }
}

TEST(AdversarialFamily, ShapeAndDeterminism) {
  const TimeGrid tg(1.0, 20);
  const TorusGrid grid(2, 16, kTwoPi);
  const auto a = adversarial_family(grid, tg, 0.5, 9);
  const auto b = adversarial_family(grid, tg, 0.5, 9);
  const auto c = adversarial_family(grid, tg, 0.5, 10);
  ASSERT_EQ(a.size(), 30u);
  bool differs = false;
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (std::size_t j = 0; j < tg.n_steps; ++j) {
      for (std::size_t k = 0; k < a[s].stacks[j].size(); ++k) {
        EXPECT_EQ(a[s].stacks[j][k].values, b[s].stacks[j][k].values);
        if (s >= 20 && a[s].stacks[j][k].values != c[s].stacks[j][k].values) differs = true;
        if (tg.node(j) > 0.5) {
          for (double v : a[s].stacks[j][k].values) ASSERT_EQ(v, 0.0);
        }
      }
    }
    EXPECT_GT(stack_lp_norm(a[s], 2.0), 0.0);
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(adversarial_family(grid, tg, 1.5, 9), InvalidArgument);
}

TEST(StackNorm, MatchesHandSum) {
  const TimeGrid tg(1.0, 4);
  const TorusGrid grid(1, 8, 8.0);
  StackPath g{tg, {}};
  for (std::size_t j = 0; j < 4; ++j) {
    g.stacks.push_back({Field(grid, {1, 0, 0, 0, 0, 0, 0, 0}), Field(grid, {0, 2, 0, 0, 0, 0, 0, 0})});
  }
  // per step: h (1 + 2^p) with h = 1, dt = 1/4
  EXPECT_NEAR(stack_lp_norm(g, 2.0), std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(stack_lp_norm(g, 4.0), std::pow(17.0, 0.25), 1e-14);
}

TEST(ModeVarianceSum, MatchesSumOverModes) {
  const FracOrders o(0.8, 0.6);
  const TorusGrid grid(2, 8, kTwoPi);
  double brute = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto m = grid.mode(i);
    brute += mode_variance(o, m[0] * m[0] + m[1] * m[1], 0.7);
  }
  EXPECT_NEAR(mode_variance_sum(o, grid, 0.7), brute, 1e-12 * brute);
}

TEST(DimensionThreshold, HeatInTwoDimensionsGainsPiLog2PerDoubling) {
  // for lambda T >> 1 each mode carries 1/(2 lambda); an annulus doubling in
  // 2d adds int 2 pi m dm / (2 m^2) = pi log 2
  const auto r = dimension_threshold(FracOrders(1.0, 1.0), 2, kTwoPi, 1.0, {16, 32, 64, 128});
  EXPECT_TRUE(r.expect_divergent);
  EXPECT_DOUBLE_EQ(r.d0, 2.0);
  for (std::size_t i = 1; i < r.sums.size(); ++i) {
    EXPECT_NEAR(r.sums[i] - r.sums[i - 1], std::numbers::pi * std::log(2.0), 1e-2);
    EXPECT_GT(r.growth[i - 1], 0.0);
  }
}

TEST(DimensionThreshold, BelowThresholdIncrementsContract) {
  const auto r = dimension_threshold(FracOrders(1.0, 1.0), 1, kTwoPi, 1.0, {16, 32, 64, 128});
  EXPECT_FALSE(r.expect_divergent);
  for (std::size_t i = 2; i < r.sums.size(); ++i) {
    const double prev = r.sums[i - 1] - r.sums[i - 2], cur = r.sums[i] - r.sums[i - 1];
    EXPECT_LT(cur, 0.6 * prev);
  }
  EXPECT_LT(r.growth.back(), 0.01);
  EXPECT_THROW(dimension_threshold(FracOrders(1.0, 1.0), 1, kTwoPi, 1.0, {16}), InvalidArgument);
}

TEST(SpectralDecay, MeasuredMatchesDiscreteVariance) {
  EstimateConfig cfg{TorusGrid(1, 32, kTwoPi), TimeGrid(0.25, 256), 21, 200, 0, 1.0};
  const auto r = spectral_decay_check(FracOrders(1.0, 1.0), cfg, 2.0, 12.0);
  ASSERT_EQ(r.xi.size(), 17u);
  for (std::size_t i = 0; i < r.xi.size(); ++i) {
    EXPECT_NEAR(r.measured[i], r.discrete[i], 5.0 * r.measured_se[i]) << r.xi[i];
  }
  // heat kernel: int_0^T e^{-2 lambda r} dr
  for (std::size_t i = 1; i < r.xi.size(); ++i) {
    const double lam = r.xi[i] * r.xi[i];
    EXPECT_NEAR(r.oracle[i], -std::expm1(-2 * lam * 0.25) / (2 * lam), 1e-12);
  }
  EXPECT_DOUBLE_EQ(r.predicted_exponent, -2.0);
  EXPECT_NEAR(r.measured_exponent, r.oracle_exponent, 0.3);
  EXPECT_THROW(spectral_decay_check(FracOrders(1.0, 1.0), cfg, 12.0, 2.0), InvalidArgument);
}

TEST(AprioriEstimate, MonteCarloMatchesWeightOracle) {
  // E ||u||^2_{H^1} at t_n = sum_xi (1 + lambda) sum_{m<=n} K_m^2 dt for white noise
  const FracOrders o(1.0, 1.0);
  EstimateConfig cfg{TorusGrid(1, 16, kTwoPi), TimeGrid(0.5, 64), 4, 300, 0, 1.0};
  const EstimateReport rep = apriori_estimate_check(o, -1.0, 2.0, cfg);
  const WeightCache cache(o, cfg.time_grid, cfg.grid);
  const double dt = cfg.time_grid.dt();
  double oracle = 0.0;
  for (std::size_t n = 0; n < cfg.time_grid.n_nodes(); ++n) {
    double e = 0.0;
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
      const ModeWeights& w = cache.at(i);
      double v = 0.0;
      for (std::size_t m = 1; m <= n; ++m) v += w.K[m] * w.K[m] * dt;
      e += (1.0 + w.lambda) * v;
    }
    oracle += (n == 0 || n == cfg.time_grid.n_steps ? 0.5 * dt : dt) * e;
  }
  const double u2 = rep.u_norm * rep.u_norm, se2 = 2.0 * rep.u_norm * rep.u_norm_se;
  EXPECT_NEAR(u2, oracle, 4.0 * se2);
  // gamma + c0' = 0: ||eta^k||_2 = 1 for each of the 16 modes
  EXPECT_NEAR(rep.g_norm, std::sqrt(0.5 * 16.0), 1e-12);
  EXPECT_NEAR(rep.ratio, rep.u_norm / rep.g_norm, 1e-15);
  EXPECT_FALSE(rep.inconclusive);
}

TEST(AprioriEstimate, FewReplicatesAreInconclusive) {
  EstimateConfig cfg{TorusGrid(1, 8, kTwoPi), TimeGrid(0.5, 16), 4, 3, 0, 1.0};
  Diagnostics diag;
  const EstimateReport rep = apriori_estimate_check(FracOrders(1.0, 1.0), -1.0, 2.0, cfg, &diag);
  EXPECT_TRUE(rep.inconclusive);
  EXPECT_FALSE(diag.warnings.empty());
  cfg.replicates = 1;
  EXPECT_THROW(apriori_estimate_check(FracOrders(1.0, 1.0), -1.0, 2.0, cfg), InvalidArgument);
}

}  // namespace
