#include "fracspde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <tuple>

#include "fracspde/errors.hpp"
#include "fracspde/field_io.hpp"
#include "fracspde/philox.hpp"

namespace fracspde {

double wiener_increment(std::uint64_t seed, std::size_t k, std::size_t j, double dt) {
  const PhiloxCounter ctr{static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(j >> 32),
                          static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::sqrt(dt) * standard_normal(philox4x32_10(ctr, key));
}

NoisePath::NoisePath(std::uint64_t seed, const TimeGrid& grid, std::size_t n_modes)
    : seed_(seed), grid_(grid), n_modes_(n_modes), inc_(n_modes * grid.n_steps) {
  if (n_modes == 0) throw InvalidArgument("sample_noise: n_modes must be >= 1");
  const double dt = grid.dt();
  for (std::size_t k = 0; k < n_modes; ++k) {
    for (std::size_t j = 0; j < grid.n_steps; ++j) {
      inc_[k * grid.n_steps + j] = wiener_increment(seed, k, j, dt);
    }
  }
}

NoisePath::NoisePath(std::uint64_t seed, TimeGrid grid, std::size_t n_modes, std::vector<double> inc)
    : seed_(seed), grid_(grid), n_modes_(n_modes), inc_(std::move(inc)) {
  if (n_modes == 0 || inc_.size() != n_modes * grid.n_steps) {
    throw InvalidArgument("NoisePath: increment table does not match K x n_steps");
  }
}

std::vector<double> NoisePath::path(std::size_t k) const {
  if (k >= n_modes_) throw InvalidArgument("NoisePath::path: mode out of range");
  std::vector<double> w(grid_.n_nodes(), 0.0);
  for (std::size_t j = 0; j < grid_.n_steps; ++j) w[j + 1] = w[j] + increment(k, j);
  return w;
}

NoisePath NoisePath::with_increments(std::vector<double> increments) const {
  return NoisePath(seed_, grid_, n_modes_, std::move(increments));
}

NoisePath NoisePath::coarsened(std::size_t factor) const {
  if (factor == 0 || grid_.n_steps % factor != 0) {
    throw InvalidArgument("NoisePath::coarsened: factor must divide n_steps");
  }
  const TimeGrid coarse(grid_.t_end, grid_.n_steps / factor);
  std::vector<double> inc(n_modes_ * coarse.n_steps, 0.0);
  for (std::size_t k = 0; k < n_modes_; ++k) {
    for (std::size_t j = 0; j < coarse.n_steps; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < factor; ++i) s += increment(k, j * factor + i);
      inc[k * coarse.n_steps + j] = s;
    }
  }
  return NoisePath(seed_, coarse, n_modes_, std::move(inc));
}

NoisePath sample_noise(std::uint64_t seed, const TimeGrid& grid, std::size_t n_modes) {
  return NoisePath(seed, grid, n_modes);
}

NoiseBasis::NoiseBasis(NoiseKind kind, const TorusGrid& grid, std::vector<double> weights)
    : kind_(kind), grid_(grid), weights_(std::move(weights)) {
  const std::size_t n = grid.size();
  if (weights_.size() != n) throw InvalidArgument("NoiseBasis: need one weight per basis function");
  for (double w : weights_) {
    if (!std::isfinite(w)) throw InvalidArgument("NoiseBasis: non-finite weight");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto key = [&](std::size_t i) {
    const auto m = grid.mode(i);
    return std::make_tuple(m[0] * m[0] + m[1] * m[1] + m[2] * m[2], m[0], m[1], m[2]);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  const double volume = std::pow(grid.side_length(), grid.dim());
  std::vector<char> seen(n, 0);
  modes_.reserve(n);
  for (std::size_t i : order) {
    if (seen[i]) continue;
    const std::size_t partner = grid.conjugate(i);
    seen[i] = seen[partner] = 1;
    if (partner == i) {
      modes_.push_back({i, grid.mode(i), false, 1.0 / std::sqrt(volume), grid.xi_sq(i)});
    } else {
      const double amp = std::sqrt(2.0 / volume);
      modes_.push_back({partner, grid.mode(partner), false, amp, grid.xi_sq(partner)});
      modes_.push_back({partner, grid.mode(partner), true, amp, grid.xi_sq(partner)});
    }
  }
}

NoiseBasis NoiseBasis::fourier_white(const TorusGrid& grid) {
  return NoiseBasis(NoiseKind::fourier_white, grid, std::vector<double>(grid.size(), 1.0));
}

NoiseBasis NoiseBasis::diagonal_colored(const TorusGrid& grid, std::vector<double> weights) {
  return NoiseBasis(NoiseKind::diagonal_colored, grid, std::move(weights));
}

Field NoiseBasis::function(std::size_t k) const {
  if (k >= modes_.size()) throw InvalidArgument("NoiseBasis::function: index out of range");
  const BasisMode& b = modes_[k];
  const double two_pi_over_l = 2.0 * std::numbers::pi / grid_.side_length();
  std::vector<double> v(grid_.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    // integer phase m . idx mod n keeps the argument exact
    const auto idx = grid_.unflatten(i);
    long long phase = 0;
    for (int a = 0; a < grid_.dim(); ++a) phase += static_cast<long long>(b.m[a]) * static_cast<long long>(idx[a]);
    const auto nn = static_cast<long long>(grid_.n());
    phase = ((phase % nn) + nn) % nn;
    const double arg = two_pi_over_l * grid_.dx() * static_cast<double>(phase);
    v[i] = b.amplitude * (b.sine ? std::sin(arg) : std::cos(arg));
  }
  return Field(grid_, std::move(v));
}

std::complex<double> NoiseBasis::spectral_coefficient(std::size_t k) const {
  if (k >= modes_.size()) throw InvalidArgument("NoiseBasis::spectral_coefficient: index out of range");
  const BasisMode& b = modes_[k];
  const double n = static_cast<double>(grid_.size());
  if (grid_.conjugate(b.flat) == b.flat) return {b.amplitude * n, 0.0};
  return b.sine ? std::complex<double>(0.0, -0.5 * b.amplitude * n)
                : std::complex<double>(0.5 * b.amplitude * n, 0.0);
}

std::vector<Field> white_noise_stack(const NoiseBasis& basis, const Field& h, std::size_t n_modes) {
  if (!(h.grid == basis.grid())) throw InvalidArgument("white_noise_stack: h is on another grid");
  if (n_modes == 0) n_modes = basis.size();
  if (n_modes > basis.size()) {
    throw InvalidArgument("white_noise_stack: " + std::to_string(n_modes) + " modes requested, grid has " +
                          std::to_string(basis.size()));
  }
  std::vector<Field> stack;
  stack.reserve(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    Field f = basis.function(k);
    const double w = basis.weight(k);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= w * h.values[i];
    stack.push_back(std::move(f));
  }
  return stack;
}

void write_noise_binary(const std::string& path, const NoisePath& noise) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  write_u64_le(os, noise.seed());
  write_u64_le(os, noise.n_modes());
  write_u64_le(os, noise.grid().n_steps);
  write_f64_le(os, noise.grid().t_end);
  for (double x : noise.data()) write_f64_le(os, x);
  if (!os) throw InvalidArgument("write to " + path + " failed");
}

NoisePath read_noise_binary(const std::string& path, bool verify) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  const std::uint64_t seed = read_u64_le(is);
  const std::uint64_t k = read_u64_le(is);
  const std::uint64_t steps = read_u64_le(is);
  const double t_end = read_f64_le(is);
  if (k == 0 || steps == 0 || k * steps > (std::uint64_t{1} << 32)) {
    throw InvalidArgument(path + ": bad noise header");
  }
  const TimeGrid grid(t_end, steps);
  std::vector<double> inc(k * steps);
  for (double& x : inc) x = read_f64_le(is);
  if (verify) {
    const NoisePath regenerated = sample_noise(seed, grid, k);
    if (!std::equal(inc.begin(), inc.end(), regenerated.data().begin())) {
      throw InvalidArgument(path + ": increments differ from regeneration with seed " +
                            std::to_string(seed));
    }
  }
  return NoisePath(seed, grid, k, std::move(inc));
}

}  // namespace fracspde
