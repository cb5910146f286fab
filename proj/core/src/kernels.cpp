#include "fracspde/kernels.hpp"

#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace fracspde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

KernelSymbol::KernelSymbol(const FracOrders& orders, double t, double sigma)
    : KernelSymbol(orders.alpha(), orders.beta(), t, sigma) {}

KernelSymbol::KernelSymbol(double alpha, double beta, double t, double sigma)
    : alpha_(alpha), beta_(beta), sigma_(sigma), t_(t) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidArgument("KernelSymbol: alpha must lie in (0, 2]");
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("KernelSymbol: t must be > 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma) || !std::isfinite(beta)) {
    throw InvalidArgument("KernelSymbol: sigma must be >= 0 and beta finite");
  }
  ml_ = std::make_shared<const MittagLeffler>(alpha, 1.0 + alpha - beta - sigma);
}

double KernelSymbol::operator()(double xi_sq) const {
  if (!(xi_sq >= 0.0)) throw InvalidArgument("KernelSymbol: xi_sq must be >= 0");
  return std::pow(t_, alpha_ - beta_ - sigma_) * (*ml_)(-xi_sq * std::pow(t_, alpha_));
}

KernelSymbol KernelSymbol::at(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("KernelSymbol: t must be > 0");
  KernelSymbol copy = *this;
  copy.t_ = t;
  return copy;
}

double symbol_eval(const KernelSymbol& sym, double xi_sq) { return sym(xi_sq); }

std::vector<double> symbol_on_grid(const KernelSymbol& sym, const TorusGrid& grid) {
  const std::size_t half = grid.n() / 2;
  const std::size_t max_msq = static_cast<std::size_t>(grid.dim()) * half * half;
  std::vector<double> by_msq(max_msq + 1, std::numeric_limits<double>::quiet_NaN());
  const double k = kTwoPi / grid.side_length();
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto m = grid.mode(i);
    std::size_t msq = 0;
    for (int a = 0; a < grid.dim(); ++a) msq += static_cast<std::size_t>(m[a] * m[a]);
    double& v = by_msq[msq];
    if (std::isnan(v)) v = sym(k * k * static_cast<double>(msq));
    out[i] = v;
  }
  return out;
}

namespace {

// Sum of the symbol over all aliases m + n l of one grid mode (d = 1). The
// first kImages images on each side are summed exactly; beyond them the
// two-term algebraic expansion K ~ c1 xi^-2 + c2 xi^-4 is summed in closed
// form through polygamma functions.
double folded_symbol(const KernelSymbol& sym, const TorusGrid& grid, int m) {
  constexpr int kImages = 32;
  const double n = static_cast<double>(grid.n());
  const double k = kTwoPi / grid.side_length();
  double s = 0.0;
  for (int l = -kImages; l <= kImages; ++l) {
    const double w = k * (m + n * l);
    s += sym(w * w);
  }
  const double a = sym.alpha(), b = sym.ml_b(), t = sym.t();
  const double pre = std::pow(t, a - sym.beta() - sym.sigma());
  const double c1 = pre * std::pow(t, -a) * inv_gamma(b - a);
  const double c2 = -pre * std::pow(t, -2 * a) * inv_gamma(b - 2 * a);
  const double kn = k * n;
  for (double c : {kImages + 1 + m / n, kImages + 1 - m / n}) {
    s += c1 * boost::math::trigamma(c) / (kn * kn);
    s += c2 * boost::math::polygamma(3, c) / 6.0 / std::pow(kn, 4);
  }
  return s;
}

}  // namespace

Field kernel_field(const KernelSymbol& sym, const TorusGrid& grid, Diagnostics* diag,
                   KernelSampling sampling) {
  const double inv_cell = 1.0 / grid.cell_volume();
  SpectralField spec(grid);
  if (sampling == KernelSampling::periodized) {
    if (grid.dim() != 1 || sym.alpha() > 1.0) {
      throw InvalidArgument("periodized kernel sampling needs d = 1 and alpha <= 1");
    }
    std::vector<double> cache(grid.n() / 2 + 1, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const int m = grid.wavenumber(i);
      double& v = cache[static_cast<std::size_t>(std::abs(m))];
      if (std::isnan(v)) v = folded_symbol(sym, grid, std::abs(m));
      spec.coeffs[i] = v * inv_cell;
    }
    return inverse(spec);
  }

  const double k_nyq = std::numbers::pi * static_cast<double>(grid.n()) / grid.side_length();
  const double nyq = std::fabs(sym(k_nyq * k_nyq));
  if (nyq > 1e-8) {
    std::ostringstream os;
    os << "kernel under-resolved: symbol at the Nyquist wavenumber is " << nyq
       << " (alpha=" << sym.alpha() << ", beta=" << sym.beta() << ", t=" << sym.t() << ")";
    warn(diag, os.str());
  }
  const auto values = symbol_on_grid(sym, grid);
  for (std::size_t i = 0; i < values.size(); ++i) spec.coeffs[i] = values[i] * inv_cell;
  return inverse(spec);
}

Field kernel_field(const FracOrders& orders, double t, const TorusGrid& grid, Diagnostics* diag) {
  return kernel_field(KernelSymbol(orders, t), grid, diag);
}

double scaling_check(const FracOrders& orders, double t, const TorusGrid& grid, Diagnostics* diag) {
  const KernelSymbol sym(orders, t);
  const Field direct = kernel_field(sym, grid, diag);
  const double a = orders.alpha();
  const TorusGrid unit_grid(grid.dim(), grid.n(), grid.side_length() * std::pow(t, -0.5 * a));
  const Field unit = kernel_field(sym.at(1.0), unit_grid, diag);
  const double factor = std::pow(t, -0.5 * a * grid.dim() + a - orders.beta());
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < direct.values.size(); ++i) {
    diff = std::max(diff, std::fabs(direct.values[i] - factor * unit.values[i]));
    scale = std::max(scale, std::fabs(direct.values[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

namespace {

struct Fit {
  double slope = 0.0;
  std::size_t n = 0;
};

// Log-log slope over bins of 1/20 decade, so every scale carries equal weight
// regardless of how many grid points (growing like r^{d-1}) fall into it.
// Each bin is represented by its mean log|v|, or with `envelope` by the
// running maximum of |v| over the bin and all larger radii, which removes the
// dips at sign changes and measures how fast the kernel is bounded.
Fit fit_loglog(const std::vector<std::pair<double, double>>& pts, bool envelope) {
  if (pts.empty()) return {};
  constexpr double kBinsPerDecade = 20.0;
  double r_min = pts.front().first;
  for (const auto& p : pts) r_min = std::min(r_min, p.first);
  std::vector<double> bx, by, bmax;
  std::vector<std::size_t> bn;
  for (const auto& [r, v] : pts) {
    const auto b = static_cast<std::size_t>(kBinsPerDecade * std::log10(r / r_min));
    if (b >= bn.size()) {
      bx.resize(b + 1, 0.0);
      by.resize(b + 1, 0.0);
      bmax.resize(b + 1, 0.0);
      bn.resize(b + 1, 0);
    }
    bx[b] += std::log(r);
    by[b] += std::log(v);
    bmax[b] = std::max(bmax[b], v);
    ++bn[b];
  }
  if (envelope) {
    double run = 0.0;
    for (std::size_t b = bn.size(); b-- > 0;) {
      run = std::max(run, bmax[b]);
      if (bn[b] > 0) by[b] = bn[b] * std::log(run);
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t b = 0; b < bn.size(); ++b) {
    if (bn[b] == 0) continue;
    const double x = bx[b] / bn[b], y = by[b] / bn[b];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  const double den = n * sxx - sx * sx;
  return {den > 0.0 ? (n * sxy - sx * sy) / den : 0.0, pts.size()};
}

}  // namespace

DecayReport decay_check(const FracOrders& orders, const TorusGrid& grid, double gamma, double t,
                        Diagnostics* diag) {
  if (!(gamma >= 0.0 && gamma < 2.0)) throw InvalidArgument("decay_check: gamma must lie in [0, 2)");
  const int d = grid.dim();
  const double L = grid.side_length();
  const double scale = std::pow(t, 0.5 * orders.alpha());

  DecayReport rep;
  rep.near_lo = 2.0 * grid.dx();
  rep.near_hi = scale;
  rep.far_lo = 2.0 * scale;
  rep.far_hi = L / 4.0;
  rep.near_bound = -d + 2.0 - gamma;
  rep.far_bound = -d - gamma;
  rep.exponent_asserted = d >= 2 && d + gamma != 2.0;
  if (rep.near_hi < 10.0 * rep.near_lo || rep.far_hi < 10.0 * rep.far_lo) {
    std::ostringstream os;
    os << "decay_check: fit windows [" << rep.near_lo << ", " << rep.near_hi << "] and ["
       << rep.far_lo << ", " << rep.far_hi << "] must each span a decade; refine n or enlarge L";
    throw InvalidArgument(os.str());
  }

  const KernelSymbol sym(orders, t);
  SpectralField spec(grid);
  const auto values = symbol_on_grid(sym, grid);
  const double inv_cell = 1.0 / grid.cell_volume();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double xi_sq = grid.xi_sq(i);
    const double lap = gamma == 0.0 ? 1.0 : (xi_sq == 0.0 ? 0.0 : std::pow(xi_sq, 0.5 * gamma));
    spec.coeffs[i] = values[i] * lap * inv_cell;
  }
  const double k_nyq = std::numbers::pi / grid.dx();
  if (std::fabs(sym(k_nyq * k_nyq)) * std::pow(k_nyq, gamma) > 1e-8) {
    warn(diag, "decay_check: kernel symbol not negligible at the Nyquist wavenumber");
  }
  const Field field = inverse(spec);

  double vmax = 0.0;
  for (double v : field.values) vmax = std::max(vmax, std::fabs(v));
  const double floor = 1e-10 * vmax;

  std::vector<std::pair<double, double>> near, far;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    const auto x = grid.point(i);
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double xa = std::min(x[a], L - x[a]);
      r2 += xa * xa;
    }
    const double r = std::sqrt(r2);
    const double v = std::fabs(field.values[i]);
    if (r >= rep.near_lo && r <= rep.near_hi) near.emplace_back(r, v);
    if (r >= rep.far_lo && r <= rep.far_hi) far.emplace_back(r, v);
  }
  std::sort(far.begin(), far.end());
  for (const auto& [r, v] : far) {
    if (v < floor) {
      rep.far_cutoff = r;
      break;
    }
  }
  if (rep.far_cutoff > 0.0) {
    rep.super_polynomial = true;
    std::erase_if(far, [&](const auto& p) { return p.first >= rep.far_cutoff; });
  }
  std::erase_if(near, [&](const auto& p) { return p.second < floor; });

  auto n_star_of = [&](const std::vector<std::pair<double, double>>& pts) {
    double m = 0.0;
    for (const auto& [r, v] : pts) {
      double bound = std::min(std::pow(r, rep.near_bound), std::pow(r, rep.far_bound));
      if (!rep.exponent_asserted) bound *= 1.0 + std::fabs(std::log(r));
      m = std::max(m, v / bound);
    }
    return m;
  };
  rep.n_star = std::max(n_star_of(near), n_star_of(far));

  const Fit fn = fit_loglog(near, false);
  rep.near_exponent = fn.slope;
  rep.near_points = fn.n;
  if (far.size() >= 3) {
    const Fit ff = fit_loglog(far, true);
    rep.far_exponent = ff.slope;
    rep.far_points = ff.n;
  } else {
    rep.far_exponent = -std::numeric_limits<double>::infinity();
    rep.far_points = far.size();
  }
  rep.near_ok = rep.near_points >= 3 && rep.near_exponent >= rep.near_bound - 0.3;
  rep.far_ok = rep.super_polynomial || rep.far_exponent <= rep.far_bound + 0.3;
  return rep;
}

double q_from_p_check(const FracOrders& orders, double t, const TorusGrid& grid,
                      std::size_t n_steps) {
  const double a = orders.alpha(), b = orders.beta();
  if (a < b) throw InvalidArgument("q_from_p_check: needs alpha >= beta");
  const TimeGrid tg(t, n_steps);
  const RLIntegrator integ(a - b, n_steps, tg.dt());
  const MittagLeffler p_ml(a, 1.0);

  const KernelSymbol q_sym(orders, t);
  const auto direct = symbol_on_grid(q_sym, grid);

  // I^{a-b} of s -> E_{a,1}(-xi^2 s^a), per distinct |m|^2
  const std::size_t half = grid.n() / 2;
  std::vector<double> by_msq(static_cast<std::size_t>(grid.dim()) * half * half + 1,
                             std::numeric_limits<double>::quiet_NaN());
  const double k = kTwoPi / grid.side_length();
  std::vector<double> samples(n_steps + 1);
  SpectralField s1(grid), s2(grid);
  const double inv_cell = 1.0 / grid.cell_volume();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto m = grid.mode(i);
    std::size_t msq = 0;
    for (int ax = 0; ax < grid.dim(); ++ax) msq += static_cast<std::size_t>(m[ax] * m[ax]);
    double& v = by_msq[msq];
    if (std::isnan(v)) {
      const double xi_sq = k * k * static_cast<double>(msq);
      for (std::size_t j = 0; j <= n_steps; ++j) samples[j] = p_ml(-xi_sq * std::pow(tg.node(j), a));
      v = integ.apply_at_end(samples);
    }
    s1.coeffs[i] = direct[i] * inv_cell;
    s2.coeffs[i] = v * inv_cell;
  }
  const Field f1 = inverse(s1), f2 = inverse(s2);
  double diff = 0.0;
  for (std::size_t i = 0; i < f1.values.size(); ++i) {
    diff = std::max(diff, std::fabs(f1.values[i] - f2.values[i]));
  }
  return diff;
}

}  // namespace fracspde
