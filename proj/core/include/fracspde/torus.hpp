#pragma once

// Periodic grids on the torus [0, L)^d and their discrete Fourier transforms.
//
// SpectralField holds the unnormalized DFT, c(m) = sum_x u(x) e^{-i xi_m . x};
// the inverse divides by the point count. Index i along an axis carries the
// wavenumber m = i for i < n/2 and m = i - n otherwise, so the self-conjugate
// Nyquist index n/2 is m = -n/2. Multipliers that depend on |xi|^2 only are
// therefore Hermitian-preserving.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracspde {

class TorusGrid {
 public:
  TorusGrid() = default;
  /// dim in {1,2,3}; n even and >= 8; L > 0. Throws InvalidArgument.
  TorusGrid(int dim, std::size_t n_per_axis, double side_length);

  int dim() const { return dim_; }
  std::size_t n() const { return n_; }
  double side_length() const { return length_; }
  std::size_t size() const;
  double dx() const { return length_ / static_cast<double>(n_); }
  double cell_volume() const;

  /// Signed wavenumber index along one axis.
  int wavenumber(std::size_t axis_index) const {
    const auto i = static_cast<long>(axis_index), n = static_cast<long>(n_);
    return static_cast<int>(i < n / 2 ? i : i - n);
  }
  /// Row-major multi-index of a flat position (unused axes are 0).
  std::array<std::size_t, 3> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<std::size_t, 3>& idx) const;
  /// |xi|^2 at a flat spectral position.
  double xi_sq(std::size_t flat) const;
  /// Wavenumber multi-index m at a flat spectral position.
  std::array<int, 3> mode(std::size_t flat) const;
  /// Flat spectral position of -m (Hermitian partner).
  std::size_t conjugate(std::size_t flat) const;
  /// Physical coordinate of a flat grid position.
  std::array<double, 3> point(std::size_t flat) const;
  /// |xi|^2 of every spectral position, cached per call site by the caller.
  std::vector<double> xi_sq_table() const;

  bool operator==(const TorusGrid&) const = default;

 private:
  int dim_ = 1;
  std::size_t n_ = 8;
  double length_ = 1.0;
};

struct Field {
  TorusGrid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(TorusGrid grid);  ///< zero field
  Field(TorusGrid grid, std::vector<double> values);

  template <class F>
  static Field sample(const TorusGrid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.point(i));
    return Field(grid, std::move(v));
  }

  double sum() const;
};

struct SpectralField {
  TorusGrid grid;
  std::vector<std::complex<double>> coeffs;

  SpectralField() = default;
  explicit SpectralField(TorusGrid grid);
  SpectralField(TorusGrid grid, std::vector<std::complex<double>> coeffs);

  /// max |c(m) - conj c(-m)| relative to max |c|.
  double hermitian_defect() const;
};

/// Unnormalized forward DFT.
SpectralField forward(const Field& field);
/// Inverse DFT (divided by the point count), real part; the discarded
/// imaginary part is at rounding level for Hermitian input.
Field inverse(const SpectralField& spec);

/// In-place complex transforms on raw buffers of grid.size() entries.
/// sign = -1 forward, +1 backward (unnormalized). Thread safe.
void dft_inplace(const TorusGrid& grid, std::span<std::complex<double>> data, int sign);

/// Multiply every coefficient by m(|xi|^2).
void apply_multiplier(SpectralField& spec, const std::function<double(double)>& m);
Field apply_multiplier(const Field& field, const std::function<double(double)>& m);

/// (-Delta)^{s/2}: multiplier |xi|^s, s in (-2, 2]. For s > 0 the zero mode
/// maps to zero; for s < 0 the input mean must vanish to 1e-10 of its total
/// absolute mass, and the zero mode of the output is zero.
Field fractional_laplacian(const Field& field, double s);

/// Grid-cell L_p norm (h^d sum |v|^p)^{1/p}, p >= 1.
double lp_norm(const Field& field, double p);
double lp_norm(const TorusGrid& grid, std::span<const double> values, double p);

/// ||(1 - Delta)^{gamma/2} u||_{L_p}, p >= 2.
double bessel_norm(const Field& field, double gamma, double p);

/// || |(1 - Delta)^{gamma/2} g|_{l2} ||_{L_p} for a finite stack g^k.
double bessel_norm_l2seq(std::span<const Field> fields, double gamma, double p);

}  // namespace fracspde
