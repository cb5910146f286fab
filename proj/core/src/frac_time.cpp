#include "fracspde/frac_time.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fracspde {

TimeGrid::TimeGrid(double t_end_, std::size_t n_steps_) : t_end(t_end_), n_steps(n_steps_) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("TimeGrid: t_end must be > 0");
  if (n_steps < 1) throw InvalidArgument("TimeGrid: n_steps must be >= 1");
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> t(n_nodes());
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = node(j);
  return t;
}

SampledPath::SampledPath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.n_nodes()) {
    std::ostringstream os;
    os << "SampledPath: " << values.size() << " samples for " << grid.n_nodes() << " nodes";
    throw InvalidArgument(os.str());
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw InvalidArgument("SampledPath: non-finite sample");
  }
}

double SampledPath::max_abs() const {
  double m = 0.0;
  for (double x : values) m = std::max(m, std::fabs(x));
  return m;
}

FracOrders::FracOrders(double alpha, double beta, double kappa)
    : alpha_(alpha), beta_(beta), kappa_(kappa) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("FracOrders: alpha must lie in (0, 2)");
  if (!(beta < alpha + 0.5) || !std::isfinite(beta)) {
    throw InvalidArgument("FracOrders: beta must be < alpha + 1/2");
  }
  if (beta == 0.5 && !(kappa > 0.0 && kappa < 1.0)) {
    throw InvalidArgument("FracOrders: kappa must lie in (0, 1) when beta = 1/2");
  }
  const double c0p = c0_prime();
  if (!(c0p >= 0.0 && c0p < 2.0)) throw InvalidArgument("FracOrders: c0' outside [0, 2)");
  if (!(theta() > 0.0)) throw InvalidArgument("FracOrders: theta must be positive");
}

int FracOrders::lambda() const {
  return std::max({1, static_cast<int>(std::ceil(alpha_)), static_cast<int>(std::ceil(beta_))});
}

double FracOrders::c0() const { return std::max(0.0, 2.0 * beta_ - 1.0) / alpha_; }

double FracOrders::c0_prime() const { return c0() + (beta_ == 0.5 ? kappa_ : 0.0); }

double FracOrders::theta() const {
  return std::min({1.0, alpha_, 2.0 * (alpha_ - beta_) + 1.0});
}

double FracOrders::d0() const { return 4.0 - 2.0 * std::max(0.0, 2.0 * beta_ - 1.0) / alpha_; }

RLIntegrator::RLIntegrator(double order, std::size_t n_steps, double dt)
    : order_(order), n_steps_(n_steps) {
  if (!(order >= 0.0) || !std::isfinite(order)) throw InvalidArgument("rl_integral: order must be >= 0");
  if (order == 0.0) return;
  scale_ = std::pow(dt, order) / std::tgamma(order + 2.0);

  // m^{p} second differences lose ~log10(m) digits to cancellation; long
  // double plus the expm1 form keeps the weights accurate to ~1e-15.
  const long double p = order + 1.0L;
  inner_.assign(n_steps + 1, 0.0);
  first_.assign(n_steps + 1, 0.0);
  inner_[0] = 1.0;
  if (n_steps >= 1) inner_[1] = static_cast<double>(std::pow(2.0L, p) - 2.0L);
  for (std::size_t m = 2; m <= n_steps; ++m) {
    const long double lm = static_cast<long double>(m);
    const long double up = std::expm1(p * std::log1p(1.0L / lm));
    const long double dn = std::expm1(p * std::log1p(-1.0L / lm));
    inner_[m] = static_cast<double>(std::pow(lm, p) * (up + dn));
  }
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const long double ln = static_cast<long double>(n);
    first_[n] = static_cast<double>(std::pow(ln - 1.0L, p) -
                                    (ln - 1.0L - order) * std::pow(ln, p - 1.0L));
  }
}

template <class T>
std::vector<T> RLIntegrator::apply_impl(std::span<const T> values) const {
  if (values.size() != n_steps_ + 1) throw InvalidArgument("rl_integral: sample count mismatch");
  if (order_ == 0.0) return {values.begin(), values.end()};
  std::vector<T> out(values.size(), T{});
  for (std::size_t n = 1; n <= n_steps_; ++n) {
    T acc = first_[n] * values[0] + values[n];
    for (std::size_t j = 1; j < n; ++j) acc += inner_[n - j] * values[j];
    out[n] = scale_ * acc;
  }
  return out;
}

std::vector<double> RLIntegrator::apply(std::span<const double> values) const {
  return apply_impl(values);
}

std::vector<std::complex<double>> RLIntegrator::apply(
    std::span<const std::complex<double>> values) const {
  return apply_impl(values);
}

double RLIntegrator::apply_at_end(std::span<const double> values) const {
  if (values.size() != n_steps_ + 1) throw InvalidArgument("rl_integral: sample count mismatch");
  if (order_ == 0.0) return values.back();
  const std::size_t n = n_steps_;
  double acc = first_[n] * values[0] + values[n];
  for (std::size_t j = 1; j < n; ++j) acc += inner_[n - j] * values[j];
  return scale_ * acc;
}

SampledPath rl_integral(const SampledPath& path, double order) {
  if (!(order >= 0.0)) throw InvalidArgument("rl_integral: order must be >= 0");
  if (order == 0.0) return path;
  const RLIntegrator integrator(order, path.grid.n_steps, path.grid.dt());
  return SampledPath(path.grid, integrator.apply(std::span<const double>(path.values)));
}

std::vector<double> finite_difference(std::span<const double> v, double dt) {
  const std::size_t n = v.size();
  if (n < 3) throw InvalidArgument("finite_difference: need at least 3 samples");
  std::vector<double> d(n);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (v[j + 1] - v[j - 1]) / (2.0 * dt);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
  return d;
}

SampledPath rl_derivative(const SampledPath& path, double order, Diagnostics* diag) {
  if (!(order >= 0.0) || !std::isfinite(order)) throw InvalidArgument("rl_derivative: order must be >= 0");
  if (order == 0.0) return path;
  const double fl = std::floor(order);
  const int n = (order == fl) ? static_cast<int>(fl) : static_cast<int>(fl) + 1;

  std::vector<double> v = rl_integral(path, n - order).values;
  const double dt = path.grid.dt();
  for (int k = 0; k < n; ++k) v = finite_difference(v, dt);

  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::fabs(x));
  if (peak > path.max_abs() / (dt * dt)) {
    std::ostringstream os;
    os << "rl_derivative: |D^" << order << " phi| reached " << peak
       << ", above max|phi|/dt^2; result is not resolved";
    warn(diag, os.str());
  }
  return SampledPath(path.grid, std::move(v));
}

SampledPath caputo_derivative(const SampledPath& path, double order, Diagnostics* diag) {
  if (!(order > 0.0 && order < 2.0)) throw InvalidArgument("caputo_derivative: order must lie in (0, 2)");
  const auto& v = path.values;
  if (v.size() < 3) throw InvalidArgument("caputo_derivative: need at least 2 steps");
  const double phi0 = v[0];
  double slope0 = 0.0;
  if (order > 1.0) slope0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * path.grid.dt());

  std::vector<double> shifted(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) shifted[j] = v[j] - phi0 - slope0 * path.grid.node(j);
  return rl_derivative(SampledPath(path.grid, std::move(shifted)), order, diag);
}

double semigroup_check(const SampledPath& path, double a, double b) {
  if (!(a >= 0.0 && b >= 0.0)) throw InvalidArgument("semigroup_check: orders must be >= 0");
  const SampledPath lhs = rl_integral(rl_integral(path, b), a);
  const SampledPath rhs = rl_integral(path, a + b);
  double m = 0.0;
  for (std::size_t j = 0; j < lhs.values.size(); ++j) {
    m = std::max(m, std::fabs(lhs.values[j] - rhs.values[j]));
  }
  return m;
}

}  // namespace fracspde
