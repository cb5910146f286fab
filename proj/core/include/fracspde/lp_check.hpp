#pragma once

// Empirical checks of the parabolic Littlewood-Paley inequality and of the
// a priori estimate of the model equation.
//
// For g = (g^k) with values in H = R^K,
//
//   Tg(t, x)^2 = int_0^t sum_k |(-Delta)^{c1/2} T_{t-s} g^k(s)(x)|^2 ds,
//   (T_r g)^(xi) = K(r, xi) g^(xi),   K(r, xi) = r^{a-b} E_{a,1+a-b}(-|xi|^2 r^a),
//
// with c1 = 2 - (2b - 1)/a. g is piecewise constant in time (g(t_j) on
// [t_j, t_{j+1})), and each cell in r = t - s is integrated with Gauss-Legendre
// nodes; the first cell is mapped by r = dt v^{1/(2(a-b)+1)} so the factor
// r^{2(a-b)} is integrated exactly. Tg is evaluated at the time nodes.
//
// Norms: ||g||_p^p = sum_{j<N} dt h^d sum_x |g_j(x)|_H^p; ||Tg||_p^p uses the
// trapezoid rule over the nodes (SpaceTimePath::lp_norm).

#include <cstdint>
#include <vector>

#include "fracspde/errors.hpp"
#include "fracspde/frac_time.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/solver.hpp"
#include "fracspde/torus.hpp"

namespace fracspde {

struct LPInstance {
  FracOrders orders;
  double p = 2.0;
  StackPath g;

  /// Throws InvalidArgument unless 1/2 < beta, p >= 2 and g has one non-empty
  /// stack per step on a common grid.
  LPInstance(const FracOrders& orders, double p, StackPath g);

  const TorusGrid& grid() const { return g.stacks.front().front().grid; }
  const TimeGrid& time_grid() const { return g.time_grid; }
};

struct TReport {
  SpaceTimePath field;              ///< Tg at every node (node 0 is zero)
  double last_interval_share = 0.0; ///< share of the r < dt cell in ||Tg||_2^2
  bool under_resolved = false;      ///< last_interval_share > 0.1
};

/// Tg on the whole space-time grid. quad_points in {2, 4, 8}.
TReport apply_T(const LPInstance& inst, int quad_points = 4, Diagnostics* diag = nullptr);

/// Tg at one node and grid point (computes the whole field).
double apply_T(const LPInstance& inst, std::size_t time_node, std::size_t flat);

/// ||g||_{L_p([0,T] x torus; H)} with the left-endpoint cells above.
double stack_lp_norm(const StackPath& g, double p);

/// ||Tg||_2^2 computed from Fourier coefficients (same quadrature, no
/// inverse transforms).
double T_norm_sq_spectral(const LPInstance& inst, int quad_points = 4);

/// sup over the grid modes of sum_m int_{cell m} |xi|^{2 c1} K(r, xi)^2 dr:
/// the discrete bound on the p = 2 ratio.
double T_symbol_bound(const FracOrders& orders, const TimeGrid& time_grid, const TorusGrid& grid,
                      int quad_points = 4);
/// sup over the grid modes of int_0^T |xi|^{2 c1} K(r, xi)^2 dr.
double T_symbol_bound_continuous(const FracOrders& orders, double t_end, const TorusGrid& grid);

struct LPReport {
  double p = 2.0;
  std::vector<double> ratios;        ///< ||Tg||_p^p / ||g||_p^p per sample
  std::vector<double> ratios_spectral;  ///< p = 2 only: the same ratio from the mode sum
  double n_star = 0.0;
  std::size_t argmax = 0;
  double symbol_bound = 0.0;         ///< p = 2 only
  double plancherel_defect = 0.0;    ///< p = 2 only: max relative |physical - spectral|
  bool any_under_resolved = false;
};

/// Ratios for each sample g (sharing orders, grids). ps lists the exponents
/// reported; Tg is computed once per sample.
std::vector<LPReport> lp_inequality_check(const FracOrders& orders, const std::vector<StackPath>& samples,
                                          const std::vector<double>& ps, int quad_points = 4,
                                          Diagnostics* diag = nullptr);

/// Adversarial family of 30 deterministic g (10 single modes, 10 multi-scale,
/// 10 randomized from seed), supported in [0, t_support], on the given grids.
std::vector<StackPath> adversarial_family(const TorusGrid& grid, const TimeGrid& time_grid, double t_support,
                                          std::uint64_t seed);

struct EstimateConfig {
  TorusGrid grid;
  TimeGrid time_grid;
  std::uint64_t seed = 1;
  std::size_t replicates = 100;
  std::size_t n_modes = 0;  ///< noise modes; 0 = full basis
  double h = 1.0;           ///< g^k = h eta^k
};

struct EstimateReport {
  double u_norm = 0.0, u_norm_se = 0.0;  ///< ||u||_{H^{gamma+2}_p}, Monte Carlo
  double g_norm = 0.0;                   ///< ||g||_{H^{gamma+c0'}_p(l2)}
  double ratio = 0.0, ratio_se = 0.0;
  bool inconclusive = false;             ///< 2 sigma band wider than 5% of the ratio
};

/// Replicate-averaged norms of the white-noise solution (full space-time paths).
EstimateReport apriori_estimate_check(const FracOrders& orders, double gamma, double p,
                                      const EstimateConfig& config, Diagnostics* diag = nullptr);

struct SpectralDecayReport {
  std::vector<double> xi;          ///< |xi| of each shell used (one entry per distinct |m|^2)
  std::vector<double> measured;    ///< L^d / n_x^2 E|u^(T, xi)|^2, shell average
  std::vector<double> measured_se;
  std::vector<double> discrete;    ///< discrete Ito variance sum_m K_m^2 dt
  std::vector<double> oracle;      ///< int_0^T K(r, xi)^2 dr
  double measured_exponent = 0.0;  ///< least-squares slope of log measured vs log |xi| in the window
  double oracle_exponent = 0.0;
  double predicted_exponent = 0.0; ///< -4 + 2 c0
  double xi_lo = 0.0, xi_hi = 0.0;
};

/// E|u^(T, xi)|^2 for white noise (final time only) against the per-mode
/// oracle, with slopes fitted over |xi| in [xi_lo, xi_hi].
SpectralDecayReport spectral_decay_check(const FracOrders& orders, const EstimateConfig& config, double xi_lo,
                                         double xi_hi);

/// sum over the grid modes of int_0^T K(r, xi)^2 dr.
double mode_variance_sum(const FracOrders& orders, const TorusGrid& grid, double t_end);

struct ThresholdReport {
  std::vector<std::size_t> n;
  std::vector<double> sums;
  std::vector<double> growth;  ///< sums[i+1] / sums[i] - 1
  double d0 = 0.0;
  int dim = 0;
  bool expect_divergent = false;  ///< dim >= d0
};

/// Mode-variance sums on [0, L)^d for each n in ns.
ThresholdReport dimension_threshold(const FracOrders& orders, int dim, double side_length, double t_end,
                                    const std::vector<std::size_t>& ns);

}  // namespace fracspde
