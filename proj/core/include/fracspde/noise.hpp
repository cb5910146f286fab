#pragma once

// Wiener increments and the noise bases they drive.
//
// Increment (k, j), the step [t_j, t_{j+1}] of the k-th scalar Wiener process,
// is sqrt(dt) times a standard normal drawn from the Philox block with
// counter (j, k) and key seed. Any sub-block can be regenerated on its own.
//
// The real Fourier basis of the grid is orthonormal for the discrete inner
// product (u, v) = h^d sum_x u(x) v(x). Modes m are visited in order of
// increasing |m|^2, ties broken lexicographically on the signed wavenumbers.
// A self-conjugate mode (every component 0 or -n/2) contributes one function
// L^{-d/2} cos(xi_m . x). Any other pair {m, -m} contributes, at the position
// of its lexicographically smaller member, sqrt(2/L^d) cos(xi . x) followed by
// sqrt(2/L^d) sin(xi . x), where xi belongs to the larger member. In d = 1 this
// is 1, cos, sin, cos 2, sin 2, ..., then the Nyquist cosine (all scaled).

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fracspde/frac_time.hpp"
#include "fracspde/torus.hpp"

namespace fracspde {

class NoisePath;
NoisePath read_noise_binary(const std::string& path, bool verify = true);

/// Single increment; sqrt(dt) N(0, 1).
double wiener_increment(std::uint64_t seed, std::size_t k, std::size_t j, double dt);

/// Immutable K x n_steps table of increments.
class NoisePath {
 public:
  NoisePath(std::uint64_t seed, const TimeGrid& grid, std::size_t n_modes);

  std::uint64_t seed() const { return seed_; }
  const TimeGrid& grid() const { return grid_; }
  std::size_t n_modes() const { return n_modes_; }
  double increment(std::size_t k, std::size_t j) const { return inc_[k * grid_.n_steps + j]; }
  /// Increments of mode k over all steps.
  std::span<const double> mode(std::size_t k) const {
    return {inc_.data() + k * grid_.n_steps, grid_.n_steps};
  }
  std::span<const double> data() const { return inc_; }

  /// Wiener path of mode k at every node (w(0) = 0).
  std::vector<double> path(std::size_t k) const;

  /// Same seed and grid carrying other increments (shape must match); used to
  /// build perturbed paths, e.g. for adaptedness tests.
  NoisePath with_increments(std::vector<double> increments) const;
  /// The same Wiener paths on a grid with n_steps / factor steps (sums of
  /// consecutive increments). The result no longer regenerates from seed().
  NoisePath coarsened(std::size_t factor) const;

 private:
  friend NoisePath read_noise_binary(const std::string& path, bool verify);
  NoisePath(std::uint64_t seed, TimeGrid grid, std::size_t n_modes, std::vector<double> inc);

  std::uint64_t seed_;
  TimeGrid grid_;
  std::size_t n_modes_;
  std::vector<double> inc_;
};

/// Throws InvalidArgument when n_modes == 0.
NoisePath sample_noise(std::uint64_t seed, const TimeGrid& grid, std::size_t n_modes);

enum class NoiseKind { fourier_white, diagonal_colored };

/// One real basis function: amplitude * cos(xi . x) or amplitude * sin(xi . x).
struct BasisMode {
  std::size_t flat = 0;     ///< spectral position of xi
  std::array<int, 3> m{};   ///< signed wavenumbers of xi
  bool sine = false;
  double amplitude = 0.0;   ///< L^{-d/2} or sqrt(2 / L^d)
  double xi_sq = 0.0;
};

class NoiseBasis {
 public:
  static NoiseBasis fourier_white(const TorusGrid& grid);
  /// weights[k] multiplies the k-th basis function; one weight per grid point.
  static NoiseBasis diagonal_colored(const TorusGrid& grid, std::vector<double> weights);

  NoiseKind kind() const { return kind_; }
  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return modes_.size(); }
  const BasisMode& mode(std::size_t k) const { return modes_[k]; }
  double weight(std::size_t k) const { return weights_[k]; }
  const std::vector<double>& weights() const { return weights_; }

  /// eta^k sampled on the grid (without the weight).
  Field function(std::size_t k) const;
  /// Unnormalized DFT of eta^k: nonzero only at xi and -xi.
  /// Returns the coefficient at flat (the coefficient at the partner is its conjugate).
  std::complex<double> spectral_coefficient(std::size_t k) const;

 private:
  NoiseBasis(NoiseKind kind, const TorusGrid& grid, std::vector<double> weights);

  NoiseKind kind_;
  TorusGrid grid_;
  std::vector<BasisMode> modes_;
  std::vector<double> weights_;
};

/// {weight_k h eta^k}_{k < n_modes}; n_modes = 0 selects the full basis.
/// Throws InvalidArgument when n_modes exceeds the basis size or h lives on
/// another grid.
std::vector<Field> white_noise_stack(const NoiseBasis& basis, const Field& h,
                                     std::size_t n_modes = 0);

// Binary noise record (little-endian): u64 seed, u64 n_modes, u64 n_steps,
// f64 t_end, then n_modes * n_steps f64 increments, mode-major.
void write_noise_binary(const std::string& path, const NoisePath& noise);
/// Reads a record and checks it against regeneration from its seed when
/// verify is set (throws InvalidArgument on mismatch).
NoisePath read_noise_binary(const std::string& path, bool verify);

}  // namespace fracspde
