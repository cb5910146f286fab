#pragma once

// Riemann-Liouville integrals and derivatives, and Caputo derivatives, of
// functions sampled on a uniform time grid. The integral uses product
// integration: the piecewise-linear interpolant of the samples is integrated
// exactly against the weight (t - s)^{order-1} / Gamma(order).

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fracspde/errors.hpp"

namespace fracspde {

struct TimeGrid {
  double t_end = 1.0;
  std::size_t n_steps = 1;

  TimeGrid() = default;
  TimeGrid(double t_end, std::size_t n_steps);

  double dt() const { return t_end / static_cast<double>(n_steps); }
  std::size_t n_nodes() const { return n_steps + 1; }
  double node(std::size_t j) const { return static_cast<double>(j) * dt(); }
  std::vector<double> nodes() const;

  bool operator==(const TimeGrid&) const = default;
};

struct SampledPath {
  TimeGrid grid;
  std::vector<double> values;

  SampledPath() = default;
  SampledPath(TimeGrid grid, std::vector<double> values);

  /// Samples f at every node.
  template <class F>
  static SampledPath sample(const TimeGrid& grid, F&& f) {
    std::vector<double> v(grid.n_nodes());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.node(j));
    return SampledPath(grid, std::move(v));
  }

  double max_abs() const;
};

/// The order pair (alpha, beta) of the time-fractional equation together with
/// the constants derived from it.
class FracOrders {
 public:
  /// Throws InvalidArgument unless 0 < alpha < 2, beta < alpha + 1/2 and,
  /// when beta == 1/2, 0 < kappa < 1.
  FracOrders(double alpha, double beta, double kappa = 0.5);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double kappa() const { return kappa_; }

  /// max(ceil(alpha), ceil(beta)), at least 1.
  int lambda() const;
  /// (2 beta - 1)_+ / alpha
  double c0() const;
  /// c0 + kappa 1{beta = 1/2}: the derivatives the noise term costs.
  double c0_prime() const;
  /// 2 - c0'
  double c1() const { return 2.0 - c0_prime(); }
  /// min{1, alpha, 2(alpha - beta) + 1}
  double theta() const;
  /// Space-time white noise is admissible iff d < d0 = 4 - 2(2 beta - 1)_+ / alpha.
  double d0() const;

  bool operator==(const FracOrders&) const = default;

 private:
  double alpha_, beta_, kappa_;
};

/// Product-integration weights for I^order on a uniform grid, reusable across
/// many sample vectors of the same length.
class RLIntegrator {
 public:
  RLIntegrator(double order, std::size_t n_steps, double dt);

  double order() const { return order_; }
  std::size_t n_steps() const { return n_steps_; }

  /// values.size() must be n_steps + 1. Node 0 maps to 0 for order > 0.
  std::vector<double> apply(std::span<const double> values) const;
  std::vector<std::complex<double>> apply(std::span<const std::complex<double>> values) const;
  /// Value at the last node only, O(n_steps).
  double apply_at_end(std::span<const double> values) const;

 private:
  template <class T>
  std::vector<T> apply_impl(std::span<const T> values) const;

  double order_;
  std::size_t n_steps_;
  double scale_;               // dt^order / Gamma(order + 2)
  std::vector<double> inner_;  // weight of node n - m, 1 <= m
  std::vector<double> first_;  // weight of node 0 at target node n
};

SampledPath rl_integral(const SampledPath& path, double order);

/// D^order = (d/dt)^n I^{n - order} with n = floor(order) + 1 (n = order for
/// integers). Derivatives use second-order differences; node values near
/// t = 0 inherit the singularity of the exact result. A result exceeding
/// max|phi| / dt^2 is reported through diag as an instability.
SampledPath rl_derivative(const SampledPath& path, double order, Diagnostics* diag = nullptr);

/// Caputo derivative for order in (0, 2): the Taylor head phi(0) (+ t phi'(0)
/// for order > 1, phi'(0) by a one-sided 3-point difference) is removed before
/// the Riemann-Liouville derivative is taken.
SampledPath caputo_derivative(const SampledPath& path, double order, Diagnostics* diag = nullptr);

/// max over nodes of |I^a I^b phi - I^{a+b} phi|.
double semigroup_check(const SampledPath& path, double a, double b);

/// Second-order first derivative of uniformly spaced samples (central in the
/// interior, one-sided 3-point at both ends).
std::vector<double> finite_difference(std::span<const double> values, double dt);

}  // namespace fracspde
