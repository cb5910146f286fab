#pragma once

// Fourier symbols of the solution kernels and their periodic realizations.
//
//   K(t, xi) = t^{alpha-beta-sigma} E_{alpha, 1+alpha-beta-sigma}(-|xi|^2 t^alpha)
//
// beta = alpha, sigma = 0 gives the fundamental solution p; beta = 1 the
// kernel q of the deterministic forcing. A kernel field is the inverse DFT of
// the symbol scaled by 1/h^d, so its cell sum equals K(t, 0).

#include <memory>
#include <optional>
#include <vector>

#include "fracspde/errors.hpp"
#include "fracspde/frac_time.hpp"
#include "fracspde/mittag_leffler.hpp"
#include "fracspde/torus.hpp"

namespace fracspde {

class KernelSymbol {
 public:
  KernelSymbol(const FracOrders& orders, double t, double sigma = 0.0);
  /// Raw orders: only 0 < alpha <= 2 is required (beta = 1 with alpha <= 1/2
  /// is a valid kernel although not a valid equation).
  KernelSymbol(double alpha, double beta, double t, double sigma = 0.0);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double sigma() const { return sigma_; }
  double t() const { return t_; }
  /// Second Mittag-Leffler parameter 1 + alpha - beta - sigma.
  double ml_b() const { return ml_->b(); }

  double operator()(double xi_sq) const;
  /// Same symbol at another time, sharing the Mittag-Leffler tables.
  KernelSymbol at(double t) const;
  const MittagLeffler& mittag_leffler() const { return *ml_; }

 private:
  double alpha_, beta_, sigma_, t_;
  std::shared_ptr<const MittagLeffler> ml_;
};

double symbol_eval(const KernelSymbol& sym, double xi_sq);

/// Symbol value at every flat spectral position of the grid; the symbol is
/// evaluated once per distinct integer |m|^2.
std::vector<double> symbol_on_grid(const KernelSymbol& sym, const TorusGrid& grid);

enum class KernelSampling {
  truncated,   ///< inverse DFT of the symbol on the grid modes
  periodized,  ///< exact point samples of the periodic kernel (d = 1 only)
};

/// Real kernel field. Warns through diag when the symbol at the Nyquist
/// wavenumber exceeds 1e-8 (truncated sampling only).
Field kernel_field(const KernelSymbol& sym, const TorusGrid& grid, Diagnostics* diag = nullptr,
                   KernelSampling sampling = KernelSampling::truncated);
Field kernel_field(const FracOrders& orders, double t, const TorusGrid& grid,
                   Diagnostics* diag = nullptr);

/// Max relative discrepancy between q(t, .) and the scaling law
/// t^{-alpha d/2 + alpha - beta} q(1, . t^{-alpha/2}) on the common grid.
double scaling_check(const FracOrders& orders, double t, const TorusGrid& grid,
                     Diagnostics* diag = nullptr);

struct DecayReport {
  double near_lo = 0, near_hi = 0, far_lo = 0, far_hi = 0;  ///< fit windows in |x|
  double near_exponent = 0;     ///< fitted slope of log|k| against log|x|
  double far_exponent = 0;      ///< slope of the monotone upper envelope
  double far_cutoff = 0;        ///< |x| where |k| reached the noise floor (0: never)
  bool super_polynomial = false;  ///< far field fell to the noise floor inside its window
  double near_bound = 0;        ///< -d + 2 - gamma
  double far_bound = 0;         ///< -d - gamma
  bool near_ok = false;         ///< near_exponent >= near_bound - 0.3
  bool far_ok = false;          ///< far_exponent <= far_bound + 0.3 or super-polynomial
  bool exponent_asserted = true;  ///< false for d = 1 and in the logarithmic case d + gamma = 2
  double n_star = 0;            ///< max |k| / (|x|^{near_bound} ^ |x|^{far_bound}) over both windows
  std::size_t near_points = 0, far_points = 0;
};

/// Fits the decay of (-Delta)^{gamma/2} q_{alpha,beta}(t, .) in the near field
/// [2 dx, t^{alpha/2}] and far field [2 t^{alpha/2}, L/4]. Throws
/// InvalidArgument when a window spans less than one decade.
DecayReport decay_check(const FracOrders& orders, const TorusGrid& grid, double gamma,
                        double t = 1.0, Diagnostics* diag = nullptr);

/// Max-node discrepancy between kernel_field(alpha, beta, t) and the field
/// whose modes are I^{alpha-beta} of the time-sampled p symbol
/// (n_steps uniform steps on [0, t]); requires alpha >= beta.
double q_from_p_check(const FracOrders& orders, double t, const TorusGrid& grid,
                      std::size_t n_steps);

}  // namespace fracspde
