#include "fracspde/mittag_leffler.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "fracspde/errors.hpp"

namespace fracspde {

namespace {

using quad = __float128;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long double kPiL = 3.141592653589793238462643383279502884L;

// Series is only attempted while |z|^{1/a} stays below this; beyond it the
// largest term exceeds what even 113-bit arithmetic can cancel.
constexpr double kSeriesReach = 80.0;
constexpr int kAsymptoticTerms = 400;

// a k + b is formed from rounded inputs, so a pole can land just above zero.
bool is_pole(long double v, long double scale) {
  const long double r = std::nearbyint(v);
  if (r > 0) return false;
  return std::fabs(v - r) <= 16 * LDBL_EPSILON * std::max(1.0L, scale);
}

// sin(pi v) with the argument reduced first so large |v| keeps full accuracy.
long double sinpi(long double v) {
  const long double n = std::nearbyint(v);
  const long double f = v - n;
  const long double s = std::sin(kPiL * f);
  return (static_cast<long long>(n) % 2 == 0) ? s : -s;
}

long double inv_gamma_ld(long double v, long double scale) {
  if (is_pole(v, scale)) return 0.0L;
  if (v > 0) {
    if (v < 1700.0L) return 1.0L / std::tgamma(v);
    return std::exp(-std::lgamma(v));
  }
  // reflection: 1/Gamma(v) = sin(pi v) Gamma(1 - v) / pi
  return sinpi(v) * std::tgamma(1.0L - v) / kPiL;
}

quad inv_gamma_q(quad v) {
  if (v > 0) return expq(-lgammaq(v));
  const quad n = rintq(v);
  const quad f = v - n;
  quad s = sinq(M_PIq * f);
  if (fmodq(fabsq(n), 2.0Q) != 0) s = -s;
  return s * tgammaq(1.0Q - v) / M_PIq;
}

template <class Real>
struct SeriesSum {
  Real sum = 0;
  Real comp = 0;  // Neumaier compensation
  Real abs_sum = 0;

  void add(Real t) {
    const Real s = sum + t;
    const Real at = t < 0 ? -t : t;
    const Real as = sum < 0 ? -sum : sum;
    if (as >= at) {
      comp += (sum - s) + t;
    } else {
      comp += (t - s) + sum;
    }
    sum = s;
    abs_sum += at;
  }
  Real value() const { return sum + comp; }
};

}  // namespace

double inv_gamma(double x) {
  return static_cast<double>(inv_gamma_ld(x, std::fabs(x)));
}

const char* to_string(MLBranch branch) {
  switch (branch) {
    case MLBranch::zero: return "zero";
    case MLBranch::series_extended: return "series_extended";
    case MLBranch::series_quad: return "series_quad";
    case MLBranch::asymptotic: return "asymptotic";
  }
  return "unknown";
}

struct MittagLeffler::Tables {
  // 1/Gamma(a k + b), k = 0..n-1
  std::vector<long double> series_ld;
  // log|1/Gamma(b - a k)| and its sign, k = 1..kAsymptoticTerms (index k-1);
  // sign 0 marks a pole. asym_env is the log of the same magnitude with the
  // reflection factor |sin(pi v)| replaced by 1, so accidental near-zeros of
  // 1/Gamma cannot pose as a converged truncation.
  std::vector<double> asym_log;
  std::vector<double> asym_env;
  std::vector<int> asym_sign;
  int asym_last = 0;  // last non-pole k; beyond it the expansion terminates

  std::once_flag quad_once;
  std::vector<quad> series_q;
};

MittagLeffler::MittagLeffler(const MLParams& params) : params_(params) {
  const double a = params.a, b = params.b;
  if (!(a > 0.0 && a <= 2.0) || !std::isfinite(a)) {
    std::ostringstream os;
    os << "Mittag-Leffler order a=" << a << " outside (0, 2]";
    throw InvalidArgument(os.str());
  }
  if (!std::isfinite(b)) throw InvalidArgument("Mittag-Leffler parameter b must be finite");
  if (!(params.tol > 0.0)) throw InvalidArgument("Mittag-Leffler tol must be positive");

  tables_ = std::make_shared<Tables>();
  const auto n_series = static_cast<std::size_t>(
      std::min(200000.0, std::ceil(4.0 * kSeriesReach / a) + 16.0));
  tables_->series_ld.resize(n_series);
  for (std::size_t k = 0; k < n_series; ++k) {
    const long double v = static_cast<long double>(a) * k + b;
    tables_->series_ld[k] = inv_gamma_ld(v, std::fabs(b) + a * k);
  }

  tables_->asym_log.resize(kAsymptoticTerms);
  tables_->asym_env.resize(kAsymptoticTerms);
  tables_->asym_sign.resize(kAsymptoticTerms);
  for (int k = 1; k <= kAsymptoticTerms; ++k) {
    const long double v = b - static_cast<long double>(a) * k;
    double lg = 0.0, env = 0.0;
    int sign = 0;
    if (!is_pole(v, std::fabs(b) + a * k)) {
      if (v >= 0.5) {
        lg = env = -static_cast<double>(std::lgamma(v));
        sign = 1;  // Gamma > 0 on the positive axis
      } else {
        const long double s = sinpi(v);
        env = static_cast<double>(std::lgamma(1.0L - v) - std::log(kPiL));
        lg = static_cast<double>(std::log(std::fabs(s))) + env;
        sign = s > 0 ? 1 : -1;
      }
    }
    tables_->asym_log[k - 1] = lg;
    tables_->asym_env[k - 1] = env;
    tables_->asym_sign[k - 1] = sign;
    if (sign != 0) tables_->asym_last = k;
  }
}

bool MittagLeffler::accepted(const MLResult& r) const {
  return std::isfinite(r.value) &&
         r.error_estimate <= params_.tol * std::max(1.0, std::fabs(r.value));
}

MLResult MittagLeffler::series(double z) const {
  const double a = params_.a;
  const double reach = std::pow(std::fabs(z), 1.0 / a);
  if (z == 0.0) {
    return {static_cast<double>(tables_->series_ld[0]), 0.0, MLBranch::zero};
  }
  if (reach > kSeriesReach) return {0.0, kInf, MLBranch::series_quad};

  const long double peak = reach / a + 2.0;
  const auto& c_ld = tables_->series_ld;

  SeriesSum<long double> s;
  long double power = 1.0L;
  bool converged = false;
  for (std::size_t k = 0; k < c_ld.size(); ++k) {
    const long double t = c_ld[k] * power;
    s.add(t);
    if (k > peak && c_ld[k] != 0.0L && std::fabs(t) <= LDBL_EPSILON * std::fabs(s.value())) {
      converged = true;
      break;
    }
    power *= z;
  }
  MLResult ld{static_cast<double>(s.value()),
              converged ? static_cast<double>(8 * LDBL_EPSILON * s.abs_sum) +
                              4 * DBL_EPSILON * std::fabs(static_cast<double>(s.value()))
                        : kInf,
              MLBranch::series_extended};
  if (accepted(ld)) return ld;

  std::call_once(tables_->quad_once, [this, a] {
    auto& q = tables_->series_q;
    q.resize(tables_->series_ld.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (tables_->series_ld[k] == 0.0L) {
        q[k] = 0;
      } else {
        q[k] = inv_gamma_q(static_cast<quad>(a) * k + static_cast<quad>(params_.b));
      }
    }
  });
  const auto& c_q = tables_->series_q;
  const quad eps_q = FLT128_EPSILON;
  SeriesSum<quad> sq;
  quad power_q = 1;
  const quad zq = z;
  converged = false;
  for (std::size_t k = 0; k < c_q.size(); ++k) {
    const quad t = c_q[k] * power_q;
    sq.add(t);
    if (k > peak && c_q[k] != 0 && fabsq(t) <= eps_q * fabsq(sq.value())) {
      converged = true;
      break;
    }
    power_q *= zq;
  }
  const double value = static_cast<double>(sq.value());
  return {value,
          converged ? static_cast<double>(8 * eps_q * sq.abs_sum) + DBL_EPSILON * std::fabs(value)
                    : kInf,
          MLBranch::series_quad};
}

MLResult MittagLeffler::asymptotic(double z) const {
  if (!(z < 0.0)) throw InvalidArgument("asymptotic Mittag-Leffler branch needs z < 0");
  const double a = params_.a, b = params_.b;
  const double x = -z;
  const double log_x = std::log(x);

  double exp_part = 0.0;
  double error = 0.0;
  if (a > 1.0) {
    // two conjugate saddle contributions at w = x^{1/a} e^{±i pi/a}
    const double mag = std::pow(x, 1.0 / a);
    const double phase = std::numbers::pi / a;
    exp_part = (2.0 / a) * std::exp((1.0 - b) * log_x / a + mag * std::cos(phase)) *
               std::cos((1.0 - b) * phase + mag * std::sin(phase));
  } else if (a == 1.0) {
    const double mag = std::exp((1.0 - b) * log_x - x);
    if (b == std::nearbyint(b)) {
      exp_part = (static_cast<long long>(std::nearbyint(1.0 - b)) % 2 == 0) ? mag : -mag;
    } else {
      error += mag;  // Stokes line: contribution not resolved, only bounded
    }
  }

  // Optimal truncation: stop before the smallest envelope term; the error is
  // that envelope term.
  double sum = 0.0, abs_sum = std::fabs(exp_part);
  double best_env = kInf, best_sum = 0.0;
  for (int k = 1; k <= kAsymptoticTerms; ++k) {
    const int sc = tables_->asym_sign[k - 1];
    if (sc == 0) continue;
    const double log_env = tables_->asym_env[k - 1] - k * log_x;
    if (log_env < -745.0) {  // everything from here on underflows
      best_env = 0.0;
      best_sum = sum;
      break;
    }
    const double env = std::exp(log_env);
    if (env < best_env) {
      best_env = env;
      best_sum = sum;
    } else if (env > 1e8 * best_env) {
      break;
    }
    // t_k = -c_k z^{-k} = -c_k (-1)^k x^{-k}
    const double mag = std::exp(tables_->asym_log[k - 1] - k * log_x);
    sum += ((k % 2 == 0) ? -sc : sc) * mag;
    abs_sum += mag;
    if (k == tables_->asym_last && k < kAsymptoticTerms - 8) {  // integer a: finite expansion
      best_env = 0.0;
      best_sum = sum;
      break;
    }
    if (env < 1e-22 * std::fabs(sum)) {
      best_env = env;
      best_sum = sum;
      break;
    }
  }
  if (best_env == kInf) {  // no non-zero algebraic term at all
    best_env = 0.0;
    best_sum = sum;
  }
  const double best_mag = best_env;
  const double value = exp_part + best_sum;
  error += best_mag + 4 * DBL_EPSILON * abs_sum;
  return {value, error, MLBranch::asymptotic};
}

MLResult MittagLeffler::evaluate(double z) const {
  if (!std::isfinite(z)) throw InvalidArgument("Mittag-Leffler argument must be finite");
  if (z == 0.0) return series(0.0);

  MLResult best{0.0, kInf, MLBranch::zero};
  if (z < 0.0 && std::pow(-z, 1.0 / params_.a) >= 0.5) {
    best = asymptotic(z);
    if (accepted(best)) return best;
  }
  const MLResult s = series(z);
  if (accepted(s)) return s;
  if (s.error_estimate < best.error_estimate) best = s;

  std::ostringstream os;
  os.precision(17);
  os << "Mittag-Leffler E_{" << params_.a << "," << params_.b << "}(" << z
     << "): best error estimate " << best.error_estimate << " (" << to_string(best.branch)
     << ") exceeds tol " << params_.tol;
  throw AccuracyNotAchieved(os.str());
}

double MittagLeffler::switch_point() const {
  double x = 0.05;
  int streak = 0;
  double first_ok = kInf;
  while (x < 1e8) {
    const MLResult r = asymptotic(-x);
    if (accepted(r)) {
      if (streak == 0) first_ok = x;
      if (++streak == 4) break;
    } else {
      streak = 0;
    }
    x *= 1.05;
  }
  if (streak < 4) return kInf;
  // refine the lower end by bisection between the last failure and first_ok
  double lo = first_ok / 1.05, hi = first_ok;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (accepted(asymptotic(-mid))) hi = mid; else lo = mid;
  }
  return hi;
}

double ml_eval(const MLParams& params, double z) {
  return MittagLeffler(params)(z);
}

BoundReport ml_bound_check(const MLParams& params, std::span<const double> z_samples) {
  const MittagLeffler ml(params);
  BoundReport report;
  for (double z : z_samples) {
    if (!(z <= 0.0)) throw InvalidArgument("ml_bound_check samples must be <= 0");
    const double envelope = std::min(1.0, 1.0 / std::fabs(z));
    const double ratio = std::fabs(ml(z)) / envelope;
    if (ratio > report.c_star || report.n_samples == 0) {
      report.c_star = ratio;
      report.argmax_z = z;
    }
    ++report.n_samples;
  }
  return report;
}

}  // namespace fracspde
