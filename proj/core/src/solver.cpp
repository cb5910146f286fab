#include "fracspde/solver.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fracspde {

SpaceTimePath::SpaceTimePath(const TimeGrid& tg, const TorusGrid& grid)
    : time_grid(tg), snapshots(tg.n_nodes(), Field(grid)) {}

SpaceTimePath::SpaceTimePath(const TimeGrid& tg, std::vector<Field> snaps)
    : time_grid(tg), snapshots(std::move(snaps)) {
  if (snapshots.size() != tg.n_nodes()) {
    throw InvalidArgument("SpaceTimePath: need one snapshot per time node");
  }
  for (const Field& f : snapshots) {
    if (!(f.grid == snapshots.front().grid)) throw InvalidArgument("SpaceTimePath: snapshots on different grids");
  }
}

SpaceTimePath SpaceTimePath::sample(const TimeGrid& tg, const TorusGrid& grid,
                                    const std::function<double(double, const std::array<double, 3>&)>& f) {
  std::vector<Field> snaps;
  snaps.reserve(tg.n_nodes());
  for (std::size_t j = 0; j < tg.n_nodes(); ++j) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(tg.node(j), grid.point(i));
    snaps.emplace_back(grid, std::move(v));
  }
  return SpaceTimePath(tg, std::move(snaps));
}

double SpaceTimePath::lp_norm(double p) const {
  if (!(p >= 1.0)) throw InvalidArgument("SpaceTimePath::lp_norm: p must be >= 1");
  const double h = grid().cell_volume(), dt = time_grid.dt();
  double acc = 0.0;
  for (std::size_t j = 0; j < snapshots.size(); ++j) {
    double s = 0.0;
    for (double x : snapshots[j].values) s += std::pow(std::fabs(x), p);
    const double wt = (j == 0 || j + 1 == snapshots.size()) ? 0.5 * dt : dt;
    acc += wt * h * s;
  }
  return std::pow(acc, 1.0 / p);
}

namespace {

SpaceTimePath combine(const SpaceTimePath& a, const SpaceTimePath& b, double sb) {
  if (!(a.time_grid == b.time_grid) || !(a.grid() == b.grid())) {
    throw InvalidArgument("SpaceTimePath: operands on different grids");
  }
  SpaceTimePath r = a;
  for (std::size_t j = 0; j < r.snapshots.size(); ++j) {
    auto& v = r.snapshots[j].values;
    const auto& w = b.snapshots[j].values;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += sb * w[i];
  }
  return r;
}

}  // namespace

SpaceTimePath operator+(const SpaceTimePath& a, const SpaceTimePath& b) { return combine(a, b, 1.0); }
SpaceTimePath operator-(const SpaceTimePath& a, const SpaceTimePath& b) { return combine(a, b, -1.0); }

SpaceTimePath operator*(double s, const SpaceTimePath& a) {
  SpaceTimePath r = a;
  for (Field& f : r.snapshots) {
    for (double& v : f.values) v *= s;
  }
  return r;
}

StackPath StackPath::constant(const TimeGrid& tg, const FieldStack& stack) {
  return StackPath{tg, std::vector<FieldStack>(tg.n_steps, stack)};
}

WeightCache::WeightCache(const FracOrders& orders, const TimeGrid& tg, const TorusGrid& grid)
    : orders_(orders),
      time_grid_(tg),
      grid_(grid),
      ml_a1_(orders.alpha(), orders.alpha() + 1.0),
      ml_a2_(orders.alpha(), orders.alpha() + 2.0),
      ml_k_(orders.alpha(), 1.0 + orders.alpha() - orders.beta()) {}

const ModeWeights& WeightCache::at(std::size_t flat) const { return for_lambda(grid_.xi_sq(flat)); }

const ModeWeights& WeightCache::for_lambda(double lambda) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = table_.find(lambda);
    if (it != table_.end()) return *it->second;
  }
  const double a = orders_.alpha(), ab = orders_.alpha() - orders_.beta();
  const std::size_t n = time_grid_.n_steps;
  const double dt = time_grid_.dt();
  auto w = std::make_unique<ModeWeights>();
  w->lambda = lambda;
  w->A.assign(n + 1, 0.0);
  w->B.assign(n + 1, 0.0);
  w->K.assign(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    const double r = static_cast<double>(m) * dt;
    const double ra = std::pow(r, a);
    const double z = -lambda * ra;
    w->A[m] = ra * ml_a1_(z);
    w->B[m] = ra * r * ml_a2_(z);
    w->K[m] = std::pow(r, ab) * ml_k_(z);
  }
  if (ab < 0.0) w->K[1] /= std::sqrt(2.0 * ab + 1.0);
  w->D.assign(n, 0.0);
  w->D[0] = w->B[1] / dt;
  for (std::size_t m = 1; m < n; ++m) w->D[m] = (w->B[m + 1] - 2.0 * w->B[m] + w->B[m - 1]) / dt;

  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = table_.emplace(lambda, std::move(w));
  return *it->second;
}

double deterministic_weight(const ModeWeights& w, std::size_t n, std::size_t j, double dt) {
  if (n == 0 || j > n) return 0.0;
  if (j == 0) return w.A[n] - (w.B[n] - w.B[n - 1]) / dt;
  return w.D[n - j];
}

std::complex<double> deterministic_mode(const ModeWeights& w, std::span<const std::complex<double>> f,
                                        std::size_t n, double dt) {
  if (n == 0) return 0.0;
  std::complex<double> s = deterministic_weight(w, n, 0, dt) * f[0];
  for (std::size_t j = 1; j <= n; ++j) s += w.D[n - j] * f[j];
  return s;
}

std::complex<double> stochastic_mode(const ModeWeights& w, std::span<const std::complex<double>> x,
                                     std::size_t n) {
  std::complex<double> s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += w.K[n - j] * x[j];
  return s;
}

double discrete_mode_variance(const ModeWeights& w, double dt) {
  double s = 0.0;
  for (std::size_t m = 1; m < w.K.size(); ++m) s += w.K[m] * w.K[m];
  return s * dt;
}

namespace {

// Series per spectral position: out[flat][j] = in[j].coeffs[flat].
std::vector<std::vector<std::complex<double>>> transpose(const std::vector<SpectralField>& in,
                                                         std::size_t modes) {
  std::vector<std::vector<std::complex<double>>> out(modes, std::vector<std::complex<double>>(in.size()));
  for (std::size_t j = 0; j < in.size(); ++j) {
    for (std::size_t i = 0; i < modes; ++i) out[i][j] = in[j].coeffs[i];
  }
  return out;
}

// Assembles real snapshots from per-mode series over nodes 0..N; only one
// member of each Hermitian pair is computed.
template <class ModeFn>
SpaceTimePath assemble(const TimeGrid& tg, const TorusGrid& grid, ModeFn&& mode_values) {
  const std::size_t modes = grid.size(), nodes = tg.n_nodes();
  std::vector<SpectralField> spec(nodes, SpectralField(grid));
  std::vector<std::complex<double>> series(nodes);
  for (std::size_t i = 0; i < modes; ++i) {
    const std::size_t partner = grid.conjugate(i);
    if (partner < i) continue;
    mode_values(i, series);
    for (std::size_t n = 0; n < nodes; ++n) {
      spec[n].coeffs[i] = series[n];
      spec[n].coeffs[partner] = std::conj(series[n]);
    }
    if (partner == i) {
      for (std::size_t n = 0; n < nodes; ++n) spec[n].coeffs[i] = series[n].real();
    }
  }
  std::vector<Field> snaps;
  snaps.reserve(nodes);
  for (std::size_t n = 0; n < nodes; ++n) {
    snaps.push_back(n == 0 ? Field(grid) : inverse(spec[n]));
  }
  return SpaceTimePath(tg, std::move(snaps));
}

void check_cache(const WeightCache& cache, const TimeGrid& tg, const TorusGrid& grid, const char* who) {
  if (!(cache.time_grid() == tg) || !(cache.grid() == grid)) {
    throw InvalidArgument(std::string(who) + ": weight cache built for other grids");
  }
}

}  // namespace

SpaceTimePath solve_deterministic(const FracOrders& orders, const SpaceTimePath& f) {
  return solve_deterministic(WeightCache(orders, f.time_grid, f.grid()), f);
}

SpaceTimePath solve_deterministic(const WeightCache& cache, const SpaceTimePath& f) {
  const TorusGrid& grid = f.grid();
  check_cache(cache, f.time_grid, grid, "solve_deterministic");
  std::vector<SpectralField> fh;
  fh.reserve(f.snapshots.size());
  for (const Field& s : f.snapshots) fh.push_back(forward(s));
  const auto series_in = transpose(fh, grid.size());
  const double dt = f.time_grid.dt();
  return assemble(f.time_grid, grid, [&](std::size_t i, std::vector<std::complex<double>>& out) {
    const ModeWeights& w = cache.at(i);
    out[0] = 0.0;
    for (std::size_t n = 1; n < out.size(); ++n) out[n] = deterministic_mode(w, series_in[i], n, dt);
  });
}

std::vector<SpectralField> stochastic_increments(const StackPath& g, const NoisePath& noise) {
  const TimeGrid& tg = g.time_grid;
  if (!(noise.grid() == tg)) throw InvalidArgument("stochastic_increments: noise on another time grid");
  if (g.stacks.size() < tg.n_steps) throw InvalidArgument("stochastic_increments: need a stack for every step");
  if (g.stacks.empty() || g.stacks.front().empty()) throw InvalidArgument("stochastic_increments: empty stack");
  const TorusGrid grid = g.stacks.front().front().grid;
  std::vector<SpectralField> x;
  x.reserve(tg.n_steps);
  for (std::size_t j = 0; j < tg.n_steps; ++j) {
    const FieldStack& st = g.stacks[j];
    if (st.size() > noise.n_modes()) {
      throw InvalidArgument("stochastic_increments: stack has more modes than the noise path");
    }
    Field sum(grid);
    for (std::size_t k = 0; k < st.size(); ++k) {
      if (!(st[k].grid == grid)) throw InvalidArgument("stochastic_increments: stack fields on different grids");
      const double dw = noise.increment(k, j);
      for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += st[k].values[i] * dw;
    }
    x.push_back(forward(sum));
  }
  return x;
}

std::vector<SpectralField> stochastic_increments_white(const NoiseBasis& basis, const SpaceTimePath& h,
                                                       const NoisePath& noise) {
  const TimeGrid& tg = h.time_grid;
  const TorusGrid& grid = basis.grid();
  if (!(noise.grid() == tg)) throw InvalidArgument("stochastic_increments_white: noise on another time grid");
  if (!(h.grid() == grid)) throw InvalidArgument("stochastic_increments_white: h on another grid");
  if (noise.n_modes() > basis.size()) {
    throw InvalidArgument("stochastic_increments_white: noise has more modes than the basis");
  }
  std::vector<SpectralField> x;
  x.reserve(tg.n_steps);
  for (std::size_t j = 0; j < tg.n_steps; ++j) {
    SpectralField w(grid);
    for (std::size_t k = 0; k < noise.n_modes(); ++k) {
      const BasisMode& m = basis.mode(k);
      const std::complex<double> c = basis.weight(k) * basis.spectral_coefficient(k) * noise.increment(k, j);
      const std::size_t partner = grid.conjugate(m.flat);
      w.coeffs[m.flat] += c;
      if (partner != m.flat) w.coeffs[partner] += std::conj(c);
    }
    const auto& hv = h.snapshots[j].values;
    const bool uniform = std::all_of(hv.begin(), hv.end(), [&](double v) { return v == hv.front(); });
    if (uniform) {
      for (auto& c : w.coeffs) c *= hv.front();
      x.push_back(std::move(w));
    } else {
      Field phys = inverse(w);
      for (std::size_t i = 0; i < hv.size(); ++i) phys.values[i] *= hv[i];
      x.push_back(forward(phys));
    }
  }
  return x;
}

namespace {

SpaceTimePath stochastic_from_increments(const WeightCache& cache, const std::vector<SpectralField>& x,
                                         const TimeGrid& tg, const TorusGrid& grid) {
  const auto series_in = transpose(x, grid.size());
  return assemble(tg, grid, [&](std::size_t i, std::vector<std::complex<double>>& out) {
    const ModeWeights& w = cache.at(i);
    out[0] = 0.0;
    for (std::size_t n = 1; n < out.size(); ++n) out[n] = stochastic_mode(w, series_in[i], n);
  });
}

}  // namespace

SpaceTimePath solve_stochastic_additive(const FracOrders& orders, const StackPath& g, const NoisePath& noise) {
  if (g.stacks.empty() || g.stacks.front().empty()) throw InvalidArgument("solve_stochastic_additive: empty stack");
  return solve_stochastic_additive(WeightCache(orders, g.time_grid, g.stacks.front().front().grid), g, noise);
}

SpaceTimePath solve_stochastic_additive(const WeightCache& cache, const StackPath& g, const NoisePath& noise) {
  const auto x = stochastic_increments(g, noise);
  const TorusGrid& grid = x.front().grid;
  check_cache(cache, g.time_grid, grid, "solve_stochastic_additive");
  return stochastic_from_increments(cache, x, g.time_grid, grid);
}

SpaceTimePath solve_stochastic_white(const WeightCache& cache, const NoiseBasis& basis, const SpaceTimePath& h,
                                     const NoisePath& noise) {
  check_cache(cache, h.time_grid, basis.grid(), "solve_stochastic_white");
  return stochastic_from_increments(cache, stochastic_increments_white(basis, h, noise), h.time_grid,
                                    basis.grid());
}

SpectralField stochastic_white_final(const WeightCache& cache, const NoiseBasis& basis, const SpaceTimePath& h,
                                     const NoisePath& noise) {
  check_cache(cache, h.time_grid, basis.grid(), "stochastic_white_final");
  const auto x = stochastic_increments_white(basis, h, noise);
  const TorusGrid& grid = basis.grid();
  const std::size_t n = h.time_grid.n_steps;
  SpectralField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ModeWeights& w = cache.at(i);
    std::complex<double> s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w.K[n - j] * x[j].coeffs[i];
    out.coeffs[i] = s;
  }
  return out;
}

double mode_variance(const FracOrders& orders, double lambda, double t_end) {
  if (!(lambda >= 0.0) || !(t_end > 0.0)) throw InvalidArgument("mode_variance: need lambda >= 0 and T > 0");
  const double a = orders.alpha(), ab = orders.alpha() - orders.beta();
  const MittagLeffler ml(a, 1.0 + ab);
  const double relax = lambda > 0.0 ? std::pow(lambda, -1.0 / a) : t_end;
  const double r0 = std::min(t_end, relax);
  auto k = [&](double r) { return std::pow(r, ab) * ml(-lambda * std::pow(r, a)); };
  // r = r0 s, normalized by K(r0)^2: the Kronrod error estimate has an
  // absolute floor that tiny integrands never get under
  const double k_ref = k(r0);
  const double scale = k_ref != 0.0 ? 1.0 / (k_ref * k_ref) : 1.0;
  auto k2 = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double v = k(r0 * s);
    return scale * v * v;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = ts.integrate(k2, 0.0, 1.0, 1e-12);
  // the tail decays like a power of r: geometric panels
  const double s_end = t_end / r0;
  for (double lo = 1.0; lo < s_end;) {
    const double hi = std::min(s_end, 4.0 * lo);
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(k2, lo, hi, 8, 1e-10);
    lo = hi;
  }
  total *= r0 / scale;
  return total;
}

PicardResult solve_semilinear(const FracOrders& orders, const TorusGrid& grid, const FieldMap& f_fn,
                              const StackMap& g_fn, const NoisePath& noise, const PicardOptions& options,
                              const SpaceTimePath* initial, Diagnostics* diag) {
  if (!(options.tol > 0.0) || options.max_iter < 1) throw InvalidArgument("solve_semilinear: bad Picard options");
  const TimeGrid& tg = noise.grid();
  const WeightCache cache(orders, tg, grid);
  PicardResult res;
  res.u = initial ? *initial : SpaceTimePath(tg, grid);
  if (!(res.u.time_grid == tg) || !(res.u.grid() == grid)) {
    throw InvalidArgument("solve_semilinear: initial iterate on other grids");
  }
  for (int it = 0; it < options.max_iter; ++it) {
    SpaceTimePath next(tg, grid);
    if (f_fn) {
      std::vector<Field> fs;
      fs.reserve(tg.n_nodes());
      for (std::size_t j = 0; j < tg.n_nodes(); ++j) fs.push_back(f_fn(tg.node(j), res.u.at(j)));
      next = next + solve_deterministic(cache, SpaceTimePath(tg, std::move(fs)));
    }
    if (g_fn) {
      StackPath g{tg, {}};
      g.stacks.reserve(tg.n_steps);
      for (std::size_t j = 0; j < tg.n_steps; ++j) g.stacks.push_back(g_fn(tg.node(j), res.u.at(j)));
      next = next + solve_stochastic_additive(cache, g, noise);
    }
    const double inc = (next - res.u).lp_norm(options.p);
    if (!std::isfinite(inc)) throw NumericalInstability("solve_semilinear: non-finite Picard iterate");
    if (!res.increments.empty()) {
      const double ratio = res.increments.back() > 0.0 ? inc / res.increments.back() : 0.0;
      res.ratios.push_back(ratio);
      res.contraction = std::max(res.contraction, ratio);
      if (ratio > 1.0) {
        std::ostringstream os;
        os << "solve_semilinear: Picard increment grew by " << ratio << " at iteration " << it + 1
           << "; the maps may violate their Lipschitz bounds";
        warn(diag, os.str());
      }
    }
    res.increments.push_back(inc);
    res.u = std::move(next);
    if (inc <= options.tol) {
      res.converged = true;
      return res;
    }
  }
  std::ostringstream os;
  os << "solve_semilinear: no convergence in " << options.max_iter << " iterations (last increment "
     << res.increments.back() << ", contraction estimate " << res.contraction << ")";
  throw AccuracyNotAchieved(os.str());
}

SpaceTimePath solve_l1_oracle(const FracOrders& orders, const SpaceTimePath& f, const StackPath& g,
                              const NoisePath* noise) {
  const double a = orders.alpha(), beta = orders.beta();
  if (a > 1.0) throw InvalidArgument("solve_l1_oracle: the L1 scheme needs alpha <= 1");
  const bool stochastic = !g.stacks.empty();
  if (stochastic) {
    if (!(beta < 0.5)) throw InvalidArgument("solve_l1_oracle: the stochastic branch needs beta < 1/2");
    if (!noise) throw InvalidArgument("solve_l1_oracle: stacks given without noise");
    if (!(g.time_grid == f.time_grid)) throw InvalidArgument("solve_l1_oracle: g and f on different time grids");
  }
  const TimeGrid& tg = f.time_grid;
  const TorusGrid& grid = f.grid();
  const std::size_t n_steps = tg.n_steps;
  const double dt = tg.dt();

  std::vector<SpectralField> fh;
  fh.reserve(tg.n_nodes());
  for (const Field& s : f.snapshots) fh.push_back(forward(s));
  auto series_f = transpose(fh, grid.size());
  if (stochastic) {
    const auto x = stochastic_increments(g, *noise);
    const auto series_x = transpose(x, grid.size());
    // fbar(t_n) = sum_{j<n} (t_n - t_j)^{-beta} X_j / Gamma(1 - beta)
    std::vector<double> kern(n_steps + 1, 0.0);
    for (std::size_t m = 1; m <= n_steps; ++m) {
      kern[m] = std::pow(static_cast<double>(m) * dt, -beta) * inv_gamma(1.0 - beta);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t n = 1; n <= n_steps; ++n) {
        std::complex<double> s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += kern[n - j] * series_x[i][j];
        series_f[i][n] += s;
      }
    }
  }

  std::vector<double> b(n_steps, 0.0);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double kk = static_cast<double>(k);
    b[k] = std::pow(kk + 1.0, 1.0 - a) - std::pow(kk, 1.0 - a);
  }
  const double c = std::pow(dt, -a) * inv_gamma(2.0 - a);

  return assemble(tg, grid, [&](std::size_t i, std::vector<std::complex<double>>& u) {
    const double lambda = grid.xi_sq(i);
    const auto& fs = series_f[i];
    u[0] = 0.0;
    for (std::size_t n = 1; n <= n_steps; ++n) {
      std::complex<double> hist = u[n - 1];
      for (std::size_t k = 1; k < n; ++k) hist -= b[k] * (u[n - k] - u[n - k - 1]);
      u[n] = (fs[n] + c * hist) / (c + lambda);
    }
  });
}

}  // namespace fracspde
