#include "fracspde/mittag_leffler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "fracspde/errors.hpp"

namespace {

using fracspde::MittagLeffler;
using fracspde::MLParams;

struct Reference {
  double a, b, z, value;
};

const Reference kReferences[] = {
#include "ml_reference_values.inc"
};

TEST(MittagLeffler, MatchesHighPrecisionSeries) {
  for (const auto& r : kReferences) {
    const MittagLeffler ml(r.a, r.b);
    const double v = ml(r.z);
    EXPECT_LE(std::fabs(v - r.value), 1e-12 * std::max(1.0, std::fabs(r.value)))
        << "a=" << r.a << " b=" << r.b << " z=" << r.z;
  }
}

TEST(MittagLeffler, ExponentialIdentity) {
  const MittagLeffler ml(1.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const double x = -20.0 + 40.0 * i / 399.0;
    EXPECT_LE(std::fabs(ml(x) - std::exp(x)), 1e-12 * std::max(1.0, std::exp(x))) << x;
  }
  EXPECT_DOUBLE_EQ(fracspde::ml_eval({1.0, 1.0, 1e-12}, 1.0), std::numbers::e);
}

TEST(MittagLeffler, CosineIdentity) {
  const MittagLeffler ml(2.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const double x = 20.0 * i / 399.0;
    EXPECT_LE(std::fabs(ml(-x * x) - std::cos(x)), 1e-12) << x;
  }
  EXPECT_LE(std::fabs(ml(-std::pow(std::numbers::pi / 2, 2))), 1e-15);
}

TEST(MittagLeffler, ErfcIdentity) {
  const MittagLeffler ml(0.5, 1.0);
  EXPECT_NEAR(ml(-1.0), std::exp(1.0) * std::erfc(1.0), 1e-15);
  for (double x : {0.1, 0.7, 2.0, 5.0, 12.0}) {
    EXPECT_NEAR(ml(-x), std::exp(x * x) * std::erfc(x), 1e-13) << x;
  }
  EXPECT_NEAR(ml(-1.0), 0.4275836, 1e-7);
}

TEST(MittagLeffler, ValueAtZeroIsReciprocalGamma) {
  for (double a : {0.2, 0.7, 1.0, 1.9}) {
    for (double b : {0.5, 1.0, 1.3, 2.5}) {
      EXPECT_EQ(MittagLeffler(a, b)(0.0), 1.0 / std::tgamma(b));
    }
  }
  EXPECT_EQ(MittagLeffler(0.7, 0.0)(0.0), 0.0);
  EXPECT_EQ(MittagLeffler(0.7, -2.0)(0.0), 0.0);
}

TEST(MittagLeffler, BranchesAgreeAroundSwitchPoint) {
  for (double a : {0.3, 0.5, 0.8, 1.0, 1.3, 1.7}) {
    for (double b : {0.6, 1.0, 1.5}) {
      const MittagLeffler ml(a, b);
      const double zs = ml.switch_point();
      int compared = 0;
      for (double f = 0.7; f <= 1.5; f += 0.02) {
        const double z = -f * zs;
        const auto s = ml.series(z);
        const auto as = ml.asymptotic(z);
        const double scale = std::max(1.0, std::fabs(s.value));
        if (s.error_estimate > ml.tol() * scale || as.error_estimate > ml.tol() * scale) continue;
        EXPECT_LE(std::fabs(s.value - as.value), 10 * ml.tol() * scale)
            << "a=" << a << " b=" << b << " z=" << z;
        ++compared;
      }
      EXPECT_GT(compared, 5) << "no overlap window for a=" << a << " b=" << b;
    }
  }
}

TEST(MittagLeffler, AcceptedBranchesNeverDisagree) {
  // Includes parameters where b - a k hits poles of Gamma after rounding.
  for (double a = 0.1; a < 2.0; a += 0.1) {
    for (double b : {-0.7, 0.3, 0.5, 0.6, 1.0, 1.5, 2.0, 2.5}) {
      const MittagLeffler ml(a, b);
      for (double x = 0.05; x < 5e3; x *= 1.15) {
        const auto s = ml.series(-x);
        const auto as = ml.asymptotic(-x);
        const double scale = std::max(1.0, std::fabs(s.value));
        if (s.error_estimate > ml.tol() * scale || as.error_estimate > ml.tol() * scale) continue;
        EXPECT_LE(std::fabs(s.value - as.value), 10 * ml.tol() * scale)
            << "a=" << a << " b=" << b << " z=" << -x;
      }
    }
  }
}

TEST(MittagLeffler, DecreasingOnNegativeAxisForSubdiffusiveOrders) {
  for (double a : {0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
    const MittagLeffler ml(a, 1.0);
    double prev = ml(0.0);
    for (double x = 0.01; x < 1e6; x *= 1.03) {
      const double v = ml(-x);
      EXPECT_LE(v, prev) << "a=" << a << " x=" << x;
      EXPECT_GE(v, 0.0);
      if (a < 1.0) {
        EXPECT_GT(v, 0.0);
      }
      prev = v;
    }
  }
}

TEST(MittagLeffler, NeverThrowsOnNegativeAxis) {
  for (double a = 0.05; a <= 2.0; a += 0.15) {
    for (double b : {-0.7, 0.5, 1.0, 1.8, 3.0}) {
      const MittagLeffler ml(a, b);
      for (double x = 1e-3; x < 1e7; x *= 1.3) {
        const auto r = ml.evaluate(-x);
        EXPECT_TRUE(std::isfinite(r.value));
        EXPECT_LE(r.error_estimate, ml.tol() * std::max(1.0, std::fabs(r.value)));
      }
    }
  }
}

TEST(MittagLeffler, RejectsInvalidInput) {
  EXPECT_THROW(MittagLeffler(0.0, 1.0), fracspde::InvalidArgument);
  EXPECT_THROW(MittagLeffler(2.5, 1.0), fracspde::InvalidArgument);
  EXPECT_THROW(MittagLeffler(1.0, 1.0, 0.0), fracspde::InvalidArgument);
  EXPECT_THROW(MittagLeffler(1.0, 1.0)(std::nan("")), fracspde::InvalidArgument);
  EXPECT_THROW(MittagLeffler(1.0, 1.0)(INFINITY), fracspde::InvalidArgument);
}

TEST(MittagLeffler, ReportsUnreachableAccuracy) {
  // Large positive arguments grow like exp(z^{1/a}); the series cannot reach
  // them and the asymptotic branch is only implemented for z < 0.
  EXPECT_THROW(MittagLeffler(0.5, 1.0)(1e4), fracspde::AccuracyNotAchieved);
}

TEST(MittagLeffler, BoundCheck) {
  std::vector<double> z;
  for (int i = 0; i <= 2000; ++i) z.push_back(-100.0 * i / 2000.0);
  const auto heat = fracspde::ml_bound_check({1.0, 1.0, 1e-12}, z);
  EXPECT_GE(heat.c_star, 1.0);
  EXPECT_EQ(heat.n_samples, z.size());

  for (const MLParams p : {MLParams{0.5, 1.0, 1e-12}, MLParams{1.5, 0.5, 1e-12}}) {
    std::vector<double> coarse, fine;
    for (int i = 0; i <= 4000; ++i) coarse.push_back(-1e4 * std::pow(i / 4000.0, 3));
    for (int i = 0; i <= 16000; ++i) fine.push_back(-1e4 * std::pow(i / 16000.0, 3));
    const auto rc = fracspde::ml_bound_check(p, coarse);
    const auto rf = fracspde::ml_bound_check(p, fine);
    EXPECT_TRUE(std::isfinite(rc.c_star));
    EXPECT_NEAR(rf.c_star, rc.c_star, 0.01 * rc.c_star) << "a=" << p.a;
  }
  const double positive[] = {0.5};
  EXPECT_THROW(fracspde::ml_bound_check({1.0, 1.0, 1e-12}, positive), fracspde::InvalidArgument);
}

TEST(MittagLeffler, ConcurrentEvaluationIsConsistent) {
  const MittagLeffler ml(0.6, 1.4);
  std::vector<double> serial;
  for (int i = 0; i < 200; ++i) serial.push_back(ml(-0.37 * i));
  std::vector<std::thread> threads;
  std::vector<std::vector<double>> out(4);
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 200; ++i) out[t].push_back(ml(-0.37 * i));
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& o : out) EXPECT_EQ(o, serial);
}

}  // namespace
