#include "fracspde/lp_check.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "fracspde/philox.hpp"

namespace fracspde {

LPInstance::LPInstance(const FracOrders& o, double p_, StackPath g_) : orders(o), p(p_), g(std::move(g_)) {
  if (!(orders.beta() > 0.5)) throw InvalidArgument("LPInstance: the Littlewood-Paley setting needs beta > 1/2");
  if (!(p >= 2.0) || !std::isfinite(p)) throw InvalidArgument("LPInstance: p must be >= 2");
  if (g.stacks.size() < g.time_grid.n_steps) throw InvalidArgument("LPInstance: need a stack for every step");
  const FieldStack& first = g.stacks.front();
  if (first.empty()) throw InvalidArgument("LPInstance: empty stack");
  for (std::size_t j = 0; j < g.time_grid.n_steps; ++j) {
    if (g.stacks[j].size() != first.size()) throw InvalidArgument("LPInstance: stack sizes differ between steps");
    for (const Field& f : g.stacks[j]) {
      if (!(f.grid == first.front().grid)) throw InvalidArgument("LPInstance: stack fields on different grids");
    }
  }
}

namespace {

struct CellRule {
  std::vector<double> r, w;        // nodes and weights, cell-major
  std::vector<std::size_t> start;  // cell m (1-based) owns nodes [start[m-1], start[m])
};

std::vector<std::pair<double, double>> gauss_unit(int q) {
  auto build = [](const auto& x, const auto& w, bool odd) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (odd && i == 0) {
        out.emplace_back(0.5, 0.5 * w[0]);
        continue;
      }
      out.emplace_back(0.5 * (1.0 - x[i]), 0.5 * w[i]);
      out.emplace_back(0.5 * (1.0 + x[i]), 0.5 * w[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  using boost::math::quadrature::gauss;
  switch (q) {
    case 2: return build(gauss<double, 2>::abscissa(), gauss<double, 2>::weights(), false);
    case 4: return build(gauss<double, 4>::abscissa(), gauss<double, 4>::weights(), false);
    case 8: return build(gauss<double, 8>::abscissa(), gauss<double, 8>::weights(), false);
    default: throw InvalidArgument("quadrature points must be 2, 4 or 8");
  }
}

// Gauss-Legendre on every cell. The first cell is split into geometric panels
// down to a tenth of the fastest relaxation time (lambda_max^{-1/a}); the
// innermost panel is mapped by r = r0 v^kappa, which removes r^{2(a-b)}.
CellRule cell_rule(const FracOrders& orders, const TimeGrid& tg, const TorusGrid& grid, int q) {
  const auto unit = gauss_unit(q);
  const double dt = tg.dt(), ab = orders.alpha() - orders.beta();
  const double k0 = 2.0 * std::numbers::pi / grid.side_length();
  const double half = static_cast<double>(grid.n() / 2);
  const double lambda_max = k0 * k0 * grid.dim() * half * half;
  const double t_fast = std::pow(lambda_max, -1.0 / orders.alpha());
  const int panels = std::clamp(static_cast<int>(std::ceil(std::log2(10.0 * dt / t_fast))), 0, 60);
  const double kappa = ab < 0.0 ? 1.0 / (2.0 * ab + 1.0) : 1.0;

  CellRule rule;
  rule.start.push_back(0);
  const double r0 = std::ldexp(dt, -panels);
  for (auto [v, w] : unit) {
    rule.r.push_back(r0 * std::pow(v, kappa));
    rule.w.push_back(r0 * w * kappa * std::pow(v, kappa - 1.0));
  }
  for (int k = panels; k >= 1; --k) {
    const double lo = std::ldexp(dt, -k), width = lo;
    for (auto [v, w] : unit) {
      rule.r.push_back(lo + width * v);
      rule.w.push_back(width * w);
    }
  }
  rule.start.push_back(rule.r.size());
  for (std::size_t m = 2; m <= tg.n_steps; ++m) {
    for (auto [v, w] : unit) {
      rule.r.push_back(dt * (static_cast<double>(m - 1) + v));
      rule.w.push_back(dt * w);
    }
    rule.start.push_back(rule.r.size());
  }
  return rule;
}

// |xi|^{c1} K(r, xi) for every rule node and every distinct |m|^2 of the grid.
struct MultiplierTable {
  std::vector<std::size_t> shell;  // flat -> shell index
  std::vector<double> lambda;      // per shell
  std::vector<double> values;      // node-major: values[node * shells + shell]
  std::size_t shells = 0;

  double at(std::size_t node, std::size_t flat) const { return values[node * shells + shell[flat]]; }
};

MultiplierTable multiplier_table(const FracOrders& orders, const TorusGrid& grid, const std::vector<double>& r) {
  MultiplierTable t;
  std::map<long, std::size_t> index;
  t.shell.resize(grid.size());
  const double k0 = 2.0 * std::numbers::pi / grid.side_length();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto m = grid.mode(i);
    const long s = static_cast<long>(m[0]) * m[0] + static_cast<long>(m[1]) * m[1] + static_cast<long>(m[2]) * m[2];
    auto [it, fresh] = index.emplace(s, index.size());
    if (fresh) t.lambda.push_back(k0 * k0 * static_cast<double>(s));
    t.shell[i] = it->second;
  }
  t.shells = t.lambda.size();
  const double a = orders.alpha(), ab = orders.alpha() - orders.beta(), c1 = orders.c1();
  const MittagLeffler ml(a, 1.0 + ab);
  t.values.resize(r.size() * t.shells);
  for (std::size_t node = 0; node < r.size(); ++node) {
    const double ra = std::pow(r[node], a), rab = std::pow(r[node], ab);
    for (std::size_t s = 0; s < t.shells; ++s) {
      const double lam = t.lambda[s];
      t.values[node * t.shells + s] = std::pow(lam, 0.5 * c1) * rab * ml(-lam * ra);
    }
  }
  return t;
}

std::vector<std::vector<SpectralField>> stack_spectra(const LPInstance& inst) {
  const std::size_t n = inst.time_grid().n_steps;
  std::vector<std::vector<SpectralField>> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (const Field& f : inst.g.stacks[j]) out[j].push_back(forward(f));
  }
  return out;
}

double trapezoid_weight(std::size_t n, std::size_t last, double dt) {
  return (n == 0 || n == last) ? 0.5 * dt : dt;
}

}  // namespace

TReport apply_T(const LPInstance& inst, int quad_points, Diagnostics* diag) {
  const TimeGrid& tg = inst.time_grid();
  const TorusGrid& grid = inst.grid();
  const std::size_t n_steps = tg.n_steps, nx = grid.size();
  const CellRule rule = cell_rule(inst.orders, tg, grid, quad_points);
  const MultiplierTable mult = multiplier_table(inst.orders, grid, rule.r);
  const auto ghat = stack_spectra(inst);

  std::vector<std::vector<double>> t2(n_steps + 1, std::vector<double>(nx, 0.0));
  std::vector<double> first(n_steps + 1, 0.0);
  std::vector<std::complex<double>> buf(nx);
  const double inv_n = 1.0 / static_cast<double>(nx);
  for (std::size_t j = 0; j < n_steps; ++j) {
    for (const SpectralField& gk : ghat[j]) {
      for (std::size_t m = 1; m + j <= n_steps; ++m) {
        auto& acc = t2[j + m];
        for (std::size_t node = rule.start[m - 1]; node < rule.start[m]; ++node) {
          for (std::size_t i = 0; i < nx; ++i) buf[i] = mult.at(node, i) * gk.coeffs[i];
          dft_inplace(grid, buf, +1);
          const double w = rule.w[node] * inv_n * inv_n;
          double s = 0.0;
          for (std::size_t i = 0; i < nx; ++i) {
            const double v = w * std::norm(buf[i]);
            acc[i] += v;
            s += v;
          }
          if (m == 1) first[j + m] += s;
        }
      }
    }
  }

  TReport rep;
  std::vector<Field> snaps;
  snaps.reserve(n_steps + 1);
  double total = 0.0, near = 0.0;
  for (std::size_t n = 0; n <= n_steps; ++n) {
    const double w = trapezoid_weight(n, n_steps, tg.dt());
    near += w * first[n];
    for (double& v : t2[n]) {
      total += w * v;
      v = std::sqrt(v);
    }
    snaps.emplace_back(grid, std::move(t2[n]));
  }
  if (total > 0.0) rep.last_interval_share = near / total;
  rep.field = SpaceTimePath(tg, std::move(snaps));
  rep.under_resolved = rep.last_interval_share > 0.1;
  if (rep.under_resolved) {
    std::ostringstream os;
    os << "apply_T: the r < dt cell carries " << rep.last_interval_share
       << " of ||Tg||_2^2; refine the time grid";
    warn(diag, os.str());
  }
  return rep;
}

double apply_T(const LPInstance& inst, std::size_t time_node, std::size_t flat) {
  if (time_node > inst.time_grid().n_steps || flat >= inst.grid().size()) {
    throw InvalidArgument("apply_T: point outside the grid");
  }
  return apply_T(inst).field.at(time_node).values[flat];
}

double stack_lp_norm(const StackPath& g, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("stack_lp_norm: p must be >= 1");
  const TimeGrid& tg = g.time_grid;
  if (g.stacks.size() < tg.n_steps || g.stacks.front().empty()) throw InvalidArgument("stack_lp_norm: bad stack path");
  const TorusGrid& grid = g.stacks.front().front().grid;
  double acc = 0.0;
  for (std::size_t j = 0; j < tg.n_steps; ++j) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double sq = 0.0;
      for (const Field& f : g.stacks[j]) sq += f.values[i] * f.values[i];
      acc += std::pow(sq, 0.5 * p);
    }
  }
  return std::pow(acc * tg.dt() * grid.cell_volume(), 1.0 / p);
}

double T_norm_sq_spectral(const LPInstance& inst, int quad_points) {
  const TimeGrid& tg = inst.time_grid();
  const TorusGrid& grid = inst.grid();
  const std::size_t n_steps = tg.n_steps, nx = grid.size();
  const CellRule rule = cell_rule(inst.orders, tg, grid, quad_points);
  const MultiplierTable mult = multiplier_table(inst.orders, grid, rule.r);
  const auto ghat = stack_spectra(inst);
  // per cell offset m and flat: sum_q w |M|^2
  std::vector<double> cell(n_steps * nx, 0.0);
  for (std::size_t m = 1; m <= n_steps; ++m) {
    for (std::size_t i = 0; i < nx; ++i) {
      double s = 0.0;
      for (std::size_t node = rule.start[m - 1]; node < rule.start[m]; ++node) {
        const double v = mult.at(node, i);
        s += rule.w[node] * v * v;
      }
      cell[(m - 1) * nx + i] = s;
    }
  }
  const double c = grid.cell_volume() / static_cast<double>(nx);
  double total = 0.0;
  for (std::size_t j = 0; j < n_steps; ++j) {
    std::vector<double> power(nx, 0.0);
    for (const SpectralField& gk : ghat[j]) {
      for (std::size_t i = 0; i < nx; ++i) power[i] += std::norm(gk.coeffs[i]);
    }
    for (std::size_t m = 1; m + j <= n_steps; ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < nx; ++i) s += cell[(m - 1) * nx + i] * power[i];
      total += trapezoid_weight(j + m, n_steps, tg.dt()) * c * s;
    }
  }
  return total;
}

double T_symbol_bound(const FracOrders& orders, const TimeGrid& tg, const TorusGrid& grid, int quad_points) {
  const CellRule rule = cell_rule(orders, tg, grid, quad_points);
  const MultiplierTable mult = multiplier_table(orders, grid, rule.r);
  double best = 0.0;
  for (std::size_t s = 0; s < mult.shells; ++s) {
    double acc = 0.0;
    for (std::size_t node = 0; node < rule.r.size(); ++node) {
      const double v = mult.values[node * mult.shells + s];
      acc += rule.w[node] * v * v;
    }
    best = std::max(best, acc);
  }
  return best;
}

double T_symbol_bound_continuous(const FracOrders& orders, double t_end, const TorusGrid& grid) {
  std::map<long, double> lambdas;
  const double k0 = 2.0 * std::numbers::pi / grid.side_length();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto m = grid.mode(i);
    const long s = static_cast<long>(m[0]) * m[0] + static_cast<long>(m[1]) * m[1] + static_cast<long>(m[2]) * m[2];
    lambdas.emplace(s, k0 * k0 * static_cast<double>(s));
  }
  double best = 0.0;
  for (const auto& [s, lam] : lambdas) {
    if (s == 0) continue;  // |xi|^{2 c1} vanishes
    best = std::max(best, std::pow(lam, orders.c1()) * mode_variance(orders, lam, t_end));
  }
  return best;
}

std::vector<LPReport> lp_inequality_check(const FracOrders& orders, const std::vector<StackPath>& samples,
                                          const std::vector<double>& ps, int quad_points, Diagnostics* diag) {
  if (samples.empty()) throw InvalidArgument("lp_inequality_check: no samples");
  if (ps.empty()) throw InvalidArgument("lp_inequality_check: no exponents");
  std::vector<LPReport> reps(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) reps[i].p = ps[i];
  double symbol_bound = -1.0;
  for (const StackPath& g : samples) {
    const LPInstance inst(orders, ps.front(), g);
    const TReport t = apply_T(inst, quad_points, diag);
    for (LPReport& rep : reps) {
      rep.any_under_resolved = rep.any_under_resolved || t.under_resolved;
      const double num = std::pow(t.field.lp_norm(rep.p), rep.p);
      const double den = std::pow(stack_lp_norm(g, rep.p), rep.p);
      if (!(den > 0.0)) throw InvalidArgument("lp_inequality_check: g = 0 has no ratio");
      const double ratio = num / den;
      rep.ratios.push_back(ratio);
      if (ratio > rep.n_star) {
        rep.n_star = ratio;
        rep.argmax = rep.ratios.size() - 1;
      }
      if (rep.p == 2.0) {
        const double spec = T_norm_sq_spectral(inst, quad_points) / den;
        rep.ratios_spectral.push_back(spec);
        rep.plancherel_defect = std::max(rep.plancherel_defect, std::fabs(ratio - spec) / spec);
        if (symbol_bound < 0.0) symbol_bound = T_symbol_bound(orders, g.time_grid, inst.grid(), quad_points);
        rep.symbol_bound = symbol_bound;
      }
    }
  }
  return reps;
}

namespace {

double family_normal(std::uint64_t seed, std::uint32_t a, std::uint32_t b) {
  const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return standard_normal(philox4x32_10({a, b, 0x4c50u, 0u}, key));
}

double family_uniform(std::uint64_t seed, std::uint32_t a, std::uint32_t b) {
  const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto blk = philox4x32_10({a, b, 0x4c50u, 1u}, key);
  return uniform_open(blk[0], blk[1]);
}

// sin^2 bump on [t0, t0 + width]
double bump(double t, double t0, double width) {
  if (t < t0 || t > t0 + width) return 0.0;
  const double s = std::sin(std::numbers::pi * (t - t0) / width);
  return s * s;
}

// direction used to place scalar wavenumbers in d > 1
std::array<int, 3> lift(int m, int dim) {
  std::array<int, 3> v{m, 0, 0};
  if (dim >= 2) v[1] = m / 2;
  if (dim >= 3) v[2] = m / 3;
  return v;
}

double phase(const std::array<int, 3>& m, const std::array<double, 3>& x, double k0, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += m[a] * x[a];
  return k0 * s;
}

}  // namespace

std::vector<StackPath> adversarial_family(const TorusGrid& grid, const TimeGrid& tg, double t_support,
                                          std::uint64_t seed) {
  if (!(t_support > 0.0) || t_support > tg.t_end) {
    throw InvalidArgument("adversarial_family: support must lie in (0, T]");
  }
  const int d = grid.dim();
  const double k0 = 2.0 * std::numbers::pi / grid.side_length();
  const int m_max = static_cast<int>(grid.n() / 2) - 1;
  using Profile = std::function<double(std::size_t k, double t, const std::array<double, 3>& x)>;
  auto make = [&](std::size_t K, const Profile& f) {
    StackPath g{tg, {}};
    g.stacks.reserve(tg.n_steps);
    for (std::size_t j = 0; j < tg.n_steps; ++j) {
      FieldStack st;
      for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(k, tg.node(j), grid.point(i));
        st.emplace_back(grid, std::move(v));
      }
      g.stacks.push_back(std::move(st));
    }
    return g;
  };

  std::vector<StackPath> family;
  // single modes, including the constant
  for (int s = 0; s < 10; ++s) {
    const auto m = lift(std::min(s, m_max), d);
    family.push_back(make(1, [=](std::size_t, double t, const auto& x) {
      return bump(t, 0.0, t_support) * std::cos(phase(m, x, k0, d));
    }));
  }
  // multi-scale: octaves 1, 2, 4, 8 with spectral slope s
  for (int s = 0; s < 10; ++s) {
    const double slope = 0.25 * s;
    family.push_back(make(2, [=](std::size_t k, double t, const auto& x) {
      double v = 0.0;
      for (int o = 0; o < 4; ++o) {
        const int mm = std::min(1 << o, m_max);
        const double ph = phase(lift(mm, d), x, k0, d);
        v += std::pow(2.0, -slope * o) * (k == 0 ? std::cos(ph) : std::sin(ph + 0.3 * o));
      }
      return bump(t, 0.0, t_support) * v;
    }));
  }
  // randomized: Gaussian coefficients on |m| <= 6, random time windows
  for (std::uint32_t s = 0; s < 10; ++s) {
    const double t0 = 0.5 * t_support * family_uniform(seed, s, 1000);
    const double width = (t_support - t0) * (0.3 + 0.7 * family_uniform(seed, s, 1001));
    std::vector<double> ca(3 * 7), cb(3 * 7);
    for (std::uint32_t c = 0; c < ca.size(); ++c) {
      ca[c] = family_normal(seed, s, 2 * c);
      cb[c] = family_normal(seed, s, 2 * c + 1);
    }
    family.push_back(make(3, [=](std::size_t k, double t, const auto& x) {
      double v = 0.0;
      for (int mm = 0; mm <= std::min(6, m_max); ++mm) {
        const double ph = phase(lift(mm, d), x, k0, d);
        v += ca[k * 7 + mm] * std::cos(ph) + cb[k * 7 + mm] * std::sin(ph);
      }
      return bump(t, t0, width) * v;
    }));
  }
  return family;
}

EstimateReport apriori_estimate_check(const FracOrders& orders, double gamma, double p, const EstimateConfig& cfg,
                                      Diagnostics* diag) {
  if (cfg.replicates < 2) throw InvalidArgument("apriori_estimate_check: need at least 2 replicates");
  if (!(p >= 2.0)) throw InvalidArgument("apriori_estimate_check: p must be >= 2");
  const TorusGrid& grid = cfg.grid;
  const TimeGrid& tg = cfg.time_grid;
  const NoiseBasis basis = NoiseBasis::fourier_white(grid);
  const std::size_t K = cfg.n_modes == 0 ? basis.size() : cfg.n_modes;
  if (K > basis.size()) throw InvalidArgument("apriori_estimate_check: more noise modes than grid modes");
  const WeightCache cache(orders, tg, grid);
  const SpaceTimePath h = cfg.h * SpaceTimePath::sample(tg, grid, [](double, const auto&) { return 1.0; });

  double mean = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    const NoisePath noise = sample_noise(replicate_seed(cfg.seed, r), tg, K);
    const SpaceTimePath u = solve_stochastic_white(cache, basis, h, noise);
    double v = 0.0;
    for (std::size_t n = 0; n < tg.n_nodes(); ++n) {
      v += trapezoid_weight(n, tg.n_steps, tg.dt()) * std::pow(bessel_norm(u.at(n), gamma + 2.0, p), p);
    }
    const double delta = v - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (v - mean);
  }
  const double se_mean = std::sqrt(m2 / static_cast<double>(cfg.replicates - 1) / static_cast<double>(cfg.replicates));

  EstimateReport rep;
  rep.u_norm = std::pow(mean, 1.0 / p);
  rep.u_norm_se = rep.u_norm * se_mean / (p * mean);
  const Field hf(grid, std::vector<double>(grid.size(), cfg.h));
  const auto stack = white_noise_stack(basis, hf, K);
  rep.g_norm = std::pow(tg.t_end, 1.0 / p) * bessel_norm_l2seq(stack, gamma + orders.c0_prime(), p);
  rep.ratio = rep.u_norm / rep.g_norm;
  rep.ratio_se = rep.u_norm_se / rep.g_norm;
  rep.inconclusive = 2.0 * rep.ratio_se > 0.05 * rep.ratio;
  if (rep.inconclusive) {
    std::ostringstream os;
    os << "apriori_estimate_check: ratio " << rep.ratio << " +- " << 2.0 * rep.ratio_se
       << " has fewer than two significant digits";
    warn(diag, os.str());
  }
  return rep;
}

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

SpectralDecayReport spectral_decay_check(const FracOrders& orders, const EstimateConfig& cfg, double xi_lo,
                                         double xi_hi) {
  if (cfg.replicates < 2) throw InvalidArgument("spectral_decay_check: need at least 2 replicates");
  if (!(xi_lo > 0.0 && xi_hi > xi_lo)) throw InvalidArgument("spectral_decay_check: bad fit window");
  const TorusGrid& grid = cfg.grid;
  const TimeGrid& tg = cfg.time_grid;
  const NoiseBasis basis = NoiseBasis::fourier_white(grid);
  const std::size_t K = cfg.n_modes == 0 ? basis.size() : cfg.n_modes;
  const WeightCache cache(orders, tg, grid);
  const SpaceTimePath h = cfg.h * SpaceTimePath::sample(tg, grid, [](double, const auto&) { return 1.0; });

  // shells of equal integer |m|^2
  std::map<long, std::vector<std::size_t>> shells;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto m = grid.mode(i);
    shells[static_cast<long>(m[0]) * m[0] + static_cast<long>(m[1]) * m[1] + static_cast<long>(m[2]) * m[2]]
        .push_back(i);
  }
  const double scale = std::pow(grid.side_length(), grid.dim()) / std::pow(static_cast<double>(grid.size()), 2) /
                       (cfg.h * cfg.h);
  std::vector<double> sum(shells.size(), 0.0), sum2(shells.size(), 0.0);
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    const NoisePath noise = sample_noise(replicate_seed(cfg.seed, r), tg, K);
    const SpectralField u = stochastic_white_final(cache, basis, h, noise);
    std::size_t s = 0;
    for (const auto& [key, flats] : shells) {
      double v = 0.0;
      for (std::size_t i : flats) v += std::norm(u.coeffs[i]);
      v *= scale / static_cast<double>(flats.size());
      sum[s] += v;
      sum2[s] += v * v;
      ++s;
    }
  }
  SpectralDecayReport rep;
  rep.xi_lo = xi_lo;
  rep.xi_hi = xi_hi;
  rep.predicted_exponent = -4.0 + 2.0 * orders.c0();
  const double k0 = 2.0 * std::numbers::pi / grid.side_length();
  const double reps = static_cast<double>(cfg.replicates);
  std::vector<double> lx, lm, lo;
  std::size_t s = 0;
  for (const auto& [key, flats] : shells) {
    const double xi = k0 * std::sqrt(static_cast<double>(key));
    const double mean = sum[s] / reps;
    const double var = std::max(0.0, (sum2[s] - reps * mean * mean) / (reps - 1.0));
    rep.xi.push_back(xi);
    rep.measured.push_back(mean);
    rep.measured_se.push_back(std::sqrt(var / reps));
    rep.discrete.push_back(discrete_mode_variance(cache.at(flats.front()), tg.dt()));
    rep.oracle.push_back(mode_variance(orders, xi * xi, tg.t_end));
    if (xi >= xi_lo && xi <= xi_hi) {
      lx.push_back(std::log(xi));
      lm.push_back(std::log(mean));
      lo.push_back(std::log(rep.oracle.back()));
    }
    ++s;
  }
  if (lx.size() < 3) throw InvalidArgument("spectral_decay_check: fewer than 3 shells in the fit window");
  rep.measured_exponent = slope(lx, lm);
  rep.oracle_exponent = slope(lx, lo);
  return rep;
}

double mode_variance_sum(const FracOrders& orders, const TorusGrid& grid, double t_end) {
  std::map<long, std::size_t> count;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto m = grid.mode(i);
    ++count[static_cast<long>(m[0]) * m[0] + static_cast<long>(m[1]) * m[1] + static_cast<long>(m[2]) * m[2]];
  }
  const double k0 = 2.0 * std::numbers::pi / grid.side_length();
  double total = 0.0;
  for (const auto& [s, c] : count) {
    total += static_cast<double>(c) * mode_variance(orders, k0 * k0 * static_cast<double>(s), t_end);
  }
  return total;
}

ThresholdReport dimension_threshold(const FracOrders& orders, int dim, double side_length, double t_end,
                                    const std::vector<std::size_t>& ns) {
  if (ns.size() < 2) throw InvalidArgument("dimension_threshold: need at least two resolutions");
  ThresholdReport rep;
  rep.dim = dim;
  rep.d0 = orders.d0();
  rep.expect_divergent = dim >= rep.d0;
  rep.n = ns;
  for (std::size_t n : ns) rep.sums.push_back(mode_variance_sum(orders, TorusGrid(dim, n, side_length), t_end));
  for (std::size_t i = 0; i + 1 < rep.sums.size(); ++i) rep.growth.push_back(rep.sums[i + 1] / rep.sums[i] - 1.0);
  return rep;
}

}  // namespace fracspde
