#include "fracspde/frac_time.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using fracspde::FracOrders;
using fracspde::SampledPath;
using fracspde::TimeGrid;

double max_error(const SampledPath& p, auto&& exact, std::size_t from = 0) {
  double m = 0.0;
  for (std::size_t j = from; j < p.values.size(); ++j) {
    m = std::max(m, std::fabs(p.values[j] - exact(p.grid.node(j))));
  }
  return m;
}

TEST(FracOrders, DerivedConstants) {
  const FracOrders heat(1.0, 1.0);
  EXPECT_EQ(heat.lambda(), 1);
  EXPECT_DOUBLE_EQ(heat.c0(), 1.0);
  EXPECT_DOUBLE_EQ(heat.c0_prime(), 1.0);
  EXPECT_DOUBLE_EQ(heat.c1(), 1.0);
  EXPECT_DOUBLE_EQ(heat.theta(), 1.0);
  EXPECT_DOUBLE_EQ(heat.d0(), 2.0);

  const FracOrders sub(0.5, 0.25);
  EXPECT_DOUBLE_EQ(sub.c0(), 0.0);
  EXPECT_DOUBLE_EQ(sub.c1(), 2.0);
  EXPECT_DOUBLE_EQ(sub.theta(), 0.5);
  EXPECT_DOUBLE_EQ(sub.d0(), 4.0);

  const FracOrders lp(0.75, 0.6);
  EXPECT_NEAR(lp.c0(), 0.2 / 0.75, 1e-15);
  EXPECT_NEAR(lp.c1(), 2.0 - 0.2 / 0.75, 1e-15);

  const FracOrders half(0.8, 0.5, 0.3);
  EXPECT_DOUBLE_EQ(half.c0(), 0.0);
  EXPECT_DOUBLE_EQ(half.c0_prime(), 0.3);

  const FracOrders super(1.5, 1.8);
  EXPECT_EQ(super.lambda(), 2);
  EXPECT_DOUBLE_EQ(super.theta(), 0.4);

  EXPECT_EQ(FracOrders(0.5, -3.0).lambda(), 1);
}

TEST(FracOrders, Validation) {
  EXPECT_THROW(FracOrders(0.0, 0.0), fracspde::InvalidArgument);
  EXPECT_THROW(FracOrders(2.0, 1.0), fracspde::InvalidArgument);
  EXPECT_THROW(FracOrders(0.5, 1.0), fracspde::InvalidArgument);
  EXPECT_THROW(FracOrders(0.5, 0.5, 0.0), fracspde::InvalidArgument);
  EXPECT_THROW(FracOrders(0.5, 0.5, 1.0), fracspde::InvalidArgument);
  EXPECT_NO_THROW(FracOrders(0.5, 0.5, 0.5));
  EXPECT_NO_THROW(FracOrders(1.9, 2.3));
}

TEST(TimeGrid, Validation) {
  EXPECT_THROW(TimeGrid(0.0, 4), fracspde::InvalidArgument);
  EXPECT_THROW(TimeGrid(1.0, 0), fracspde::InvalidArgument);
  const TimeGrid g(2.0, 8);
  EXPECT_DOUBLE_EQ(g.dt(), 0.25);
  EXPECT_EQ(g.n_nodes(), 9u);
  EXPECT_THROW(SampledPath(g, std::vector<double>(8)), fracspde::InvalidArgument);
  std::vector<double> bad(9, 0.0);
  bad[3] = NAN;
  EXPECT_THROW(SampledPath(g, bad), fracspde::InvalidArgument);
}

TEST(RLIntegral, OrderZeroIsIdentity) {
  const TimeGrid g(1.0, 100);
  const auto phi = SampledPath::sample(g, [](double t) { return std::sin(7 * t) + 0.1; });
  EXPECT_EQ(fracspde::rl_integral(phi, 0.0).values, phi.values);
  EXPECT_EQ(fracspde::semigroup_check(phi, 0.0, 0.5), 0.0);
  EXPECT_THROW(fracspde::rl_integral(phi, -0.1), fracspde::InvalidArgument);
}

TEST(RLIntegral, Monomials) {
  const TimeGrid g(1.0, 256);
  const auto one = SampledPath::sample(g, [](double) { return 1.0; });
  EXPECT_LE(max_error(fracspde::rl_integral(one, 1.0), [](double t) { return t; }), 1e-14);
  EXPECT_LE(max_error(fracspde::rl_integral(one, 0.5),
                      [](double t) { return std::sqrt(t) / std::tgamma(1.5); }),
            1e-13);

  const auto lin = SampledPath::sample(g, [](double t) { return t; });
  const auto i03 = fracspde::rl_integral(lin, 0.3);
  EXPECT_EQ(i03.values[0], 0.0);
  EXPECT_LE(max_error(i03, [](double t) { return std::pow(t, 1.3) / std::tgamma(2.3); }), 1e-13);

  // t^2 is not reproduced by the linear interpolant: second order in dt.
  double prev = 0.0;
  for (std::size_t n : {64u, 128u, 256u, 512u}) {
    const TimeGrid gn(1.0, n);
    const auto sq = SampledPath::sample(gn, [](double t) { return t * t; });
    for (double order : {0.3, 0.7, 1.4}) {
      const double err = max_error(fracspde::rl_integral(sq, order), [&](double t) {
        return 2.0 * std::pow(t, 2.0 + order) / std::tgamma(3.0 + order);
      });
      EXPECT_LE(err, gn.dt() * gn.dt());
      if (order == 0.7 && prev > 0.0) {
        EXPECT_NEAR(prev / err, 4.0, 0.1);
      }
      if (order == 0.7) prev = err;
    }
  }
}

TEST(RLIntegral, LongGridsKeepWeightsAccurate) {
  const TimeGrid g(1.0, 4096);
  const auto one = SampledPath::sample(g, [](double) { return 1.0; });
  for (double order : {0.1, 0.5, 0.9, 1.5}) {
    const double err = max_error(fracspde::rl_integral(one, order), [&](double t) {
      return std::pow(t, order) / std::tgamma(order + 1.0);
    });
    EXPECT_LE(err, 1e-12) << order;
  }
}

TEST(RLIntegral, Linearity) {
  const TimeGrid g(2.0, 300);
  const auto a = SampledPath::sample(g, [](double t) { return std::cos(3 * t); });
  const auto b = SampledPath::sample(g, [](double t) { return std::exp(-t) * t; });
  std::vector<double> comb(g.n_nodes());
  for (std::size_t j = 0; j < comb.size(); ++j) comb[j] = 2.5 * a.values[j] - 1.5 * b.values[j];
  const auto ic = fracspde::rl_integral(SampledPath(g, comb), 0.45);
  const auto ia = fracspde::rl_integral(a, 0.45);
  const auto ib = fracspde::rl_integral(b, 0.45);
  for (std::size_t j = 0; j < comb.size(); ++j) {
    EXPECT_NEAR(ic.values[j], 2.5 * ia.values[j] - 1.5 * ib.values[j], 1e-14);
  }
}

TEST(RLIntegral, ComplexSamplesMatchRealParts) {
  const fracspde::RLIntegrator integ(0.6, 50, 0.02);
  std::vector<double> re(51), im(51);
  std::vector<std::complex<double>> z(51);
  for (int j = 0; j <= 50; ++j) {
    re[j] = std::sin(0.1 * j);
    im[j] = std::cos(0.3 * j);
    z[j] = {re[j], im[j]};
  }
  const auto ir = integ.apply(std::span<const double>(re));
  const auto ii = integ.apply(std::span<const double>(im));
  const auto iz = integ.apply(std::span<const std::complex<double>>(z));
  for (int j = 0; j <= 50; ++j) {
    EXPECT_DOUBLE_EQ(iz[j].real(), ir[j]);
    EXPECT_DOUBLE_EQ(iz[j].imag(), ii[j]);
  }
}

TEST(Semigroup, SineConvergesAtFirstOrderOrBetter) {
  double prev = 0.0;
  for (std::size_t n : {512u, 1024u, 2048u}) {
    const TimeGrid g(1.0, n);
    const auto phi = SampledPath::sample(g, [](double t) { return std::sin(t); });
    const double d = fracspde::semigroup_check(phi, 0.3, 0.4);
    EXPECT_LE(d, g.dt());
    if (prev > 0.0) {
      EXPECT_GE(prev / d, 1.9);
    }
    prev = d;
  }
}

TEST(Semigroup, LinearPathDiscrepancyIsTrapezoidError) {
  // I^1 t = t^2/2 exactly; I^1 of the samples of t^2/2 is the trapezoid rule,
  // whose error on a quadratic is dt^2 t / 12. I^2 t is exact.
  const TimeGrid g(1.0, 64);
  const auto lin = SampledPath::sample(g, [](double t) { return t; });
  const auto two = fracspde::rl_integral(lin, 2.0);
  EXPECT_LE(max_error(two, [](double t) { return t * t * t / 6.0; }), 1e-15);
  const double d = fracspde::semigroup_check(lin, 1.0, 1.0);
  EXPECT_NEAR(d, g.dt() * g.dt() / 12.0, 1e-15);
}

TEST(RLDerivative, InvertsIntegral) {
  // sqrt(t) is not smooth at 0: the first few nodes carry a grid-independent
  // error, everything beyond a fixed time converges.
  double prev = 0.0;
  for (std::size_t n : {256u, 1024u, 4096u}) {
    const TimeGrid g(1.0, n);
    const auto phi = SampledPath::sample(g, [](double t) { return std::sqrt(t) / std::tgamma(1.5); });
    const auto d = fracspde::rl_derivative(phi, 0.5);
    EXPECT_LE(max_error(d, [](double) { return 1.0; }, 10), 3e-3);
    const double far = max_error(d, [](double) { return 1.0; }, n / 20);
    if (prev > 0.0) {
      EXPECT_LT(far, prev / 4);
    }
    prev = far;
  }
  EXPECT_LT(prev, 5e-5);
}

TEST(RLDerivative, OfConstant) {
  const TimeGrid g(1.0, 1024);
  const auto c = SampledPath::sample(g, [](double) { return 3.0; });
  const auto d = fracspde::rl_derivative(c, 0.5);
  const auto exact = [](double t) { return 3.0 / std::sqrt(t) / std::tgamma(0.5); };
  for (std::size_t j = 100; j < g.n_nodes(); ++j) {
    EXPECT_NEAR(d.values[j], exact(g.node(j)), 1e-4 * exact(g.node(j)));
  }
}

TEST(RLDerivative, IntegerOrderIsClassical) {
  const TimeGrid g(2.0, 50);
  const auto sq = SampledPath::sample(g, [](double t) { return t * t; });
  EXPECT_LE(max_error(fracspde::rl_derivative(sq, 1.0), [](double t) { return 2 * t; }), 1e-12);
  EXPECT_LE(max_error(fracspde::rl_derivative(sq, 2.0), [](double) { return 2.0; }, 2), 1e-10);
}

TEST(RLDerivative, CompositionWithIntegral) {
  double prev = 0.0;
  for (std::size_t n : {128u, 256u, 512u}) {
    const TimeGrid g(1.0, n);
    const auto phi = SampledPath::sample(g, [](double t) { return std::cos(2 * t); });
    const auto lhs = fracspde::rl_derivative(fracspde::rl_integral(phi, 0.9), 0.4);
    const auto rhs = fracspde::rl_integral(phi, 0.5);
    double d = 0.0, far = 0.0;
    for (std::size_t j = 0; j < lhs.values.size(); ++j) {
      const double e = std::fabs(lhs.values[j] - rhs.values[j]);
      d = std::max(d, e);
      if (g.node(j) >= 0.1) far = std::max(far, e);
    }
    // the max sits at t = 0, where the one-sided difference meets a t^{1/2} kink
    if (prev > 0.0) {
      EXPECT_LT(d, 0.75 * prev);
    }
    prev = d;
    EXPECT_LT(far, 2.0 * g.dt() * g.dt());
  }
}

TEST(RLDerivative, FlagsBlowUp) {
  const TimeGrid g(1.0, 64);
  std::vector<double> spike(g.n_nodes(), 0.0);
  spike[32] = 1.0;
  fracspde::Diagnostics diag;
  fracspde::rl_derivative(SampledPath(g, spike), 2.5, &diag);
  EXPECT_FALSE(diag.empty());

  fracspde::Diagnostics quiet;
  const auto smooth = SampledPath::sample(g, [](double t) { return t * t; });
  fracspde::rl_derivative(smooth, 0.5, &quiet);
  EXPECT_TRUE(quiet.empty());
  EXPECT_THROW(fracspde::rl_derivative(smooth, -1.0), fracspde::InvalidArgument);
}

TEST(Caputo, Monomials) {
  const TimeGrid g(1.0, 1024);
  const auto lin = SampledPath::sample(g, [](double t) { return t; });
  const auto d1 = fracspde::caputo_derivative(lin, 0.5);
  EXPECT_LE(max_error(d1, [](double t) { return std::sqrt(t) / std::tgamma(1.5); }, 2), 1e-3);

  const auto seven = SampledPath::sample(g, [](double) { return 7.0; });
  for (double v : fracspde::caputo_derivative(seven, 0.5).values) EXPECT_EQ(v, 0.0);

  const auto sq = SampledPath::sample(g, [](double t) { return t * t; });
  const auto d2 = fracspde::caputo_derivative(sq, 1.5);
  EXPECT_LE(max_error(d2, [](double t) { return 2.0 * std::sqrt(t) / std::tgamma(1.5); }, 10), 2e-3);
}

TEST(Caputo, IgnoresConstantShift) {
  const TimeGrid g(1.0, 256);
  const auto phi = SampledPath::sample(g, [](double t) { return std::sin(3 * t); });
  const auto psi = SampledPath::sample(g, [](double t) { return std::sin(3 * t) + 4.0; });
  for (double order : {0.2, 0.6, 0.95}) {
    const auto a = fracspde::caputo_derivative(phi, order);
    const auto b = fracspde::caputo_derivative(psi, order);
    for (std::size_t j = 0; j < a.values.size(); ++j) EXPECT_NEAR(a.values[j], b.values[j], 1e-11);
  }
  EXPECT_THROW(fracspde::caputo_derivative(phi, 2.0), fracspde::InvalidArgument);
  EXPECT_THROW(fracspde::caputo_derivative(phi, 0.0), fracspde::InvalidArgument);
}

}  // namespace
