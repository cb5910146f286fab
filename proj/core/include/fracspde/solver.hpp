#pragma once

// Solvers for the model equation with zero initial data on the torus,
//
//   d_t^alpha u = Delta u + f + d_t^beta sum_k int_0^t g^k dw^k,
//
// mode by mode in Fourier space. With lambda = |xi|^2:
//
//   deterministic part  u(t) = int_0^t k(t - s) f(s) ds,
//                       k(r) = r^{alpha-1} E_{alpha,alpha}(-lambda r^alpha),
//   stochastic part     u(t) = sum_k int_0^t K(t - s) g^k(s) dw^k_s,
//                       K(r) = r^{alpha-beta} E_{alpha,1+alpha-beta}(-lambda r^alpha).
//
// The deterministic convolution integrates the piecewise-linear interpolant
// of f exactly through the antiderivatives
//   A(r) = r^alpha E_{alpha,alpha+1}(-lambda r^alpha),
//   B(r) = r^{alpha+1} E_{alpha,alpha+2}(-lambda r^alpha).
// The stochastic sum is the Ito (left-endpoint) rule
//   u(t_n) = sum_{j<n} K(t_n - t_j) sum_k g^k(t_j) dw^k_j,
// except that for alpha < beta the singular last interval uses the
// mean-square weight dt^{alpha-beta} E(-lambda dt^alpha) / sqrt(2(alpha-beta)+1).
//
// solve_l1_oracle is an independent discretization: the L1 Caputo scheme
// (alpha <= 1), with beta < 1/2 noise reduced to the rough forcing
//   fbar(t) = Gamma(1-beta)^{-1} sum_k int_0^t (t-s)^{-beta} g^k(s) dw^k_s.

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "fracspde/errors.hpp"
#include "fracspde/frac_time.hpp"
#include "fracspde/mittag_leffler.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/torus.hpp"

namespace fracspde {

struct SpaceTimePath {
  TimeGrid time_grid;
  std::vector<Field> snapshots;  ///< one per node

  SpaceTimePath() = default;
  /// Zero path.
  SpaceTimePath(const TimeGrid& time_grid, const TorusGrid& grid);
  /// Throws InvalidArgument unless there is one snapshot per node on a common grid.
  SpaceTimePath(const TimeGrid& time_grid, std::vector<Field> snapshots);

  /// f(t, x) sampled at every node.
  static SpaceTimePath sample(const TimeGrid& time_grid, const TorusGrid& grid,
                              const std::function<double(double, const std::array<double, 3>&)>& f);

  const TorusGrid& grid() const { return snapshots.front().grid; }
  const Field& at(std::size_t j) const { return snapshots[j]; }

  /// Discrete L_p([0,T] x torus): node values with trapezoid weights in time
  /// and cell volume in space.
  double lp_norm(double p) const;
};

SpaceTimePath operator+(const SpaceTimePath& a, const SpaceTimePath& b);
SpaceTimePath operator-(const SpaceTimePath& a, const SpaceTimePath& b);
SpaceTimePath operator*(double s, const SpaceTimePath& a);

/// g^k at a node, k = 0 .. K-1.
using FieldStack = std::vector<Field>;

/// Stacks indexed by time node; entries beyond n_steps - 1 are never used
/// (Ito sums see g at left endpoints only).
struct StackPath {
  TimeGrid time_grid;
  std::vector<FieldStack> stacks;

  /// The same stack at every node.
  static StackPath constant(const TimeGrid& time_grid, const FieldStack& stack);
};

/// Per-mode convolution weights for one lambda on one time grid.
struct ModeWeights {
  double lambda = 0.0;
  std::vector<double> A, B;  ///< A(t_m), B(t_m), m = 0..N (deterministic kernel)
  std::vector<double> D;     ///< D[0] = B_1/dt, D[m] = (B_{m+1} - 2B_m + B_{m-1})/dt, m < N
  std::vector<double> K;     ///< stochastic weights, K[m] for r = t_m, m = 1..N (K[0] unused)
};

/// Weight tables keyed by integer |m|^2, built on first use. Thread safe.
class WeightCache {
 public:
  WeightCache(const FracOrders& orders, const TimeGrid& time_grid, const TorusGrid& grid);

  const FracOrders& orders() const { return orders_; }
  const TimeGrid& time_grid() const { return time_grid_; }
  const TorusGrid& grid() const { return grid_; }
  /// Weights of the spectral position flat.
  const ModeWeights& at(std::size_t flat) const;
  const ModeWeights& for_lambda(double lambda) const;

 private:
  FracOrders orders_;
  TimeGrid time_grid_;
  TorusGrid grid_;
  MittagLeffler ml_a1_, ml_a2_, ml_k_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::unique_ptr<ModeWeights>> table_;
};

/// Deterministic weight of the node value f_j in u(t_n), j = 0..n.
double deterministic_weight(const ModeWeights& w, std::size_t n, std::size_t j, double dt);

/// sum_{j<=n} weight * f_j for one mode.
std::complex<double> deterministic_mode(const ModeWeights& w, std::span<const std::complex<double>> f,
                                        std::size_t n, double dt);

/// Exact for forcing that is piecewise linear in time between nodes; a
/// time-constant forcing f gives A(t_n) f at every node.
SpaceTimePath solve_deterministic(const FracOrders& orders, const SpaceTimePath& f);
SpaceTimePath solve_deterministic(const WeightCache& cache, const SpaceTimePath& f);

/// Stochastic convolution with general stacks. noise must carry at least as
/// many modes as the stacks and share their time grid.
SpaceTimePath solve_stochastic_additive(const FracOrders& orders, const StackPath& g,
                                        const NoisePath& noise);
SpaceTimePath solve_stochastic_additive(const WeightCache& cache, const StackPath& g,
                                        const NoisePath& noise);

/// Fast path for g^k = h(t, x) weight_k eta^k over the first noise.n_modes()
/// basis functions: the increments sum_k weight_k eta^k dw^k_j are formed in
/// Fourier space. h is a path of multipliers (one field per node).
SpaceTimePath solve_stochastic_white(const WeightCache& cache, const NoiseBasis& basis,
                                     const SpaceTimePath& h, const NoisePath& noise);

/// Spectral coefficients of u(T) only (same sums as the full solvers).
SpectralField stochastic_white_final(const WeightCache& cache, const NoiseBasis& basis,
                                     const SpaceTimePath& h, const NoisePath& noise);

/// Spectral increments X_j(xi) = DFT(sum_k g^k(t_j) dw^k_j), j = 0..N-1.
std::vector<SpectralField> stochastic_increments(const StackPath& g, const NoisePath& noise);
std::vector<SpectralField> stochastic_increments_white(const NoiseBasis& basis, const SpaceTimePath& h,
                                                       const NoisePath& noise);

/// sum_{j<n} K(t_n - t_j) X_j for one mode.
std::complex<double> stochastic_mode(const ModeWeights& w, std::span<const std::complex<double>> x,
                                     std::size_t n);

/// Discrete Ito variance of a unit-amplitude mode at T: sum_{m=1..N} K_m^2 dt.
double discrete_mode_variance(const ModeWeights& w, double dt);

/// int_0^T K(r)^2 dr by double-exponential quadrature (split at the kernel's
/// relaxation time lambda^{-1/alpha}).
double mode_variance(const FracOrders& orders, double lambda, double t_end);

using FieldMap = std::function<Field(double t, const Field& u)>;
using StackMap = std::function<FieldStack(double t, const Field& u)>;

struct PicardOptions {
  double tol = 1e-8;
  int max_iter = 50;
  double p = 2.0;  ///< exponent of the stopping norm
};

struct PicardResult {
  SpaceTimePath u;
  std::vector<double> increments;  ///< ||u^{(n+1)} - u^{(n)}|| per iteration
  std::vector<double> ratios;      ///< successive increment ratios
  bool converged = false;
  double contraction = 0.0;        ///< max ratio over the trace (0 with one iteration)
};

/// u^{(n+1)} = solve_deterministic(f(u^{(n)})) + solve_stochastic_additive(g(u^{(n)})),
/// starting from initial (zero when empty). Throws AccuracyNotAchieved when
/// max_iter is exhausted and NumericalInstability on non-finite iterates.
/// An increase of the increment is reported through diag as a Lipschitz warning.
PicardResult solve_semilinear(const FracOrders& orders, const TorusGrid& grid, const FieldMap& f_fn,
                              const StackMap& g_fn, const NoisePath& noise,
                              const PicardOptions& options = {}, const SpaceTimePath* initial = nullptr,
                              Diagnostics* diag = nullptr);

/// L1 time stepping of d_t^alpha u = Delta u + f + fbar (implicit in Delta).
/// Requires alpha <= 1, and beta < 1/2 when g is given. g may be empty
/// (deterministic run); noise is then ignored.
SpaceTimePath solve_l1_oracle(const FracOrders& orders, const SpaceTimePath& f, const StackPath& g,
                              const NoisePath* noise);

}  // namespace fracspde
