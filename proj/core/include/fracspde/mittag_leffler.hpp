#pragma once

// Two-parameter Mittag-Leffler function E_{a,b}(z) = sum_k z^k / Gamma(a k + b)
// for real z and 0 < a <= 2.
//
// Branch policy on the negative axis: an optimally truncated asymptotic
// expansion (with the oscillating exponential pair added for a > 1) whenever
// its error estimate meets the tolerance, otherwise the power series in
// 80-bit and then 113-bit floating point. Every result carries an error
// estimate, and evaluation fails loudly instead of returning a value whose
// estimate exceeds the tolerance.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace fracspde {

/// 1/Gamma(x), exactly zero at the poles x = 0, -1, -2, ...
double inv_gamma(double x);

struct MLParams {
  double a = 1.0;
  double b = 1.0;
  double tol = 1e-12;  ///< absolute target for |E| <= 1, relative above
};

enum class MLBranch { zero, series_extended, series_quad, asymptotic };

const char* to_string(MLBranch branch);

struct MLResult {
  double value = 0.0;
  double error_estimate = 0.0;
  MLBranch branch = MLBranch::zero;
};

/// Evaluator with per-(a, b) coefficient tables. Immutable after construction
/// and safe to share between threads.
class MittagLeffler {
 public:
  explicit MittagLeffler(const MLParams& params);
  MittagLeffler(double a, double b, double tol = 1e-12)
      : MittagLeffler(MLParams{a, b, tol}) {}

  /// Value of E_{a,b}(z). Throws AccuracyNotAchieved when no branch meets tol.
  double operator()(double z) const { return evaluate(z).value; }
  MLResult evaluate(double z) const;

  /// Power series only, in the cheapest precision that meets tol (or the
  /// highest available if none does; check error_estimate).
  MLResult series(double z) const;

  /// Asymptotic expansion only; z must be negative.
  MLResult asymptotic(double z) const;

  /// Smallest |z| (z < 0) from which the asymptotic branch meets tol; the
  /// effective series/asymptotic switch point for these parameters.
  double switch_point() const;

  double a() const { return params_.a; }
  double b() const { return params_.b; }
  double tol() const { return params_.tol; }

 private:
  struct Tables;

  bool accepted(const MLResult& r) const;

  MLParams params_;
  std::shared_ptr<Tables> tables_;
};

/// One-shot evaluation; builds a fresh evaluator.
double ml_eval(const MLParams& params, double z);

struct BoundReport {
  double c_star = 0.0;     ///< max |E(z)| / (1 ∧ |z|^{-1}) over the samples
  double argmax_z = 0.0;
  std::size_t n_samples = 0;
};

/// Empirical constant in |E_{a,b}(z)| <= C (1 ∧ |z|^{-1}) over z <= 0.
BoundReport ml_bound_check(const MLParams& params, std::span<const double> z_samples);

}  // namespace fracspde
