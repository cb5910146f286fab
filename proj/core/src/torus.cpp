#include "fracspde/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "fracspde/errors.hpp"

namespace fracspde {

TorusGrid::TorusGrid(int dim, std::size_t n_per_axis, double side_length)
    : dim_(dim), n_(n_per_axis), length_(side_length) {
  if (dim < 1 || dim > 3) throw InvalidArgument("TorusGrid: dim must be 1, 2 or 3");
  if (n_per_axis < 8 || n_per_axis % 2 != 0) {
    throw InvalidArgument("TorusGrid: n_per_axis must be even and >= 8");
  }
  if (!(side_length > 0.0) || !std::isfinite(side_length)) {
    throw InvalidArgument("TorusGrid: side length must be > 0");
  }
}

std::size_t TorusGrid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim_; ++a) s *= n_;
  return s;
}

double TorusGrid::cell_volume() const { return std::pow(dx(), dim_); }

std::array<std::size_t, 3> TorusGrid::unflatten(std::size_t flat) const {
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = flat % n_;
    flat /= n_;
  }
  return idx;
}

std::size_t TorusGrid::flatten(const std::array<std::size_t, 3>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + idx[a];
  return flat;
}

std::array<int, 3> TorusGrid::mode(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::array<int, 3> m{0, 0, 0};
  for (int a = 0; a < dim_; ++a) m[a] = wavenumber(idx[a]);
  return m;
}

double TorusGrid::xi_sq(std::size_t flat) const {
  const auto m = mode(flat);
  const double k = 2.0 * std::numbers::pi / length_;
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) s += static_cast<double>(m[a]) * m[a];
  return k * k * s;
}

std::size_t TorusGrid::conjugate(std::size_t flat) const {
  auto idx = unflatten(flat);
  for (int a = 0; a < dim_; ++a) idx[a] = (n_ - idx[a]) % n_;
  return flatten(idx);
}

std::array<double, 3> TorusGrid::point(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = static_cast<double>(idx[a]) * dx();
  return x;
}

std::vector<double> TorusGrid::xi_sq_table() const {
  std::vector<double> t(size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = xi_sq(i);
  return t;
}

Field::Field(TorusGrid g) : grid(g), values(g.size(), 0.0) {}

Field::Field(TorusGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw InvalidArgument("Field: value count does not match grid");
  for (double x : values) {
    if (!std::isfinite(x)) throw InvalidArgument("Field: non-finite value");
  }
}

double Field::sum() const {
  double s = 0.0;
  for (double x : values) s += x;
  return s;
}

SpectralField::SpectralField(TorusGrid g) : grid(g), coeffs(g.size()) {}

SpectralField::SpectralField(TorusGrid g, std::vector<std::complex<double>> c)
    : grid(g), coeffs(std::move(c)) {
  if (coeffs.size() != grid.size()) {
    throw InvalidArgument("SpectralField: coefficient count does not match grid");
  }
}

double SpectralField::hermitian_defect() const {
  double defect = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    defect = std::max(defect, std::abs(coeffs[i] - std::conj(coeffs[grid.conjugate(i)])));
    scale = std::max(scale, std::abs(coeffs[i]));
  }
  return scale > 0.0 ? defect / scale : 0.0;
}

namespace {

// FFTW planning is not thread safe; execution of an existing plan on new
// arrays is. Plans are created once per (dim, n, sign) and never destroyed.
class PlanCache {
 public:
  fftw_plan get(int dim, std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    int dims[3];
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
      dims[a] = static_cast<int>(n);
      total *= n;
    }
    fftw_complex* buf = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, dims, buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan) throw NumericalInstability("FFTW could not create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

void dft_inplace(const TorusGrid& grid, std::span<std::complex<double>> data, int sign) {
  if (data.size() != grid.size()) throw InvalidArgument("dft_inplace: buffer size mismatch");
  const fftw_plan plan =
      plan_cache().get(grid.dim(), grid.n(), sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

SpectralField forward(const Field& field) {
  SpectralField spec(field.grid);
  std::copy(field.values.begin(), field.values.end(), spec.coeffs.begin());
  dft_inplace(field.grid, spec.coeffs, -1);
  return spec;
}

Field inverse(const SpectralField& spec) {
  std::vector<std::complex<double>> buf = spec.coeffs;
  dft_inplace(spec.grid, buf, +1);
  const double scale = 1.0 / static_cast<double>(buf.size());
  std::vector<double> v(buf.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = buf[i].real() * scale;
  return Field(spec.grid, std::move(v));
}

void apply_multiplier(SpectralField& spec, const std::function<double(double)>& m) {
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i) spec.coeffs[i] *= m(spec.grid.xi_sq(i));
}

Field apply_multiplier(const Field& field, const std::function<double(double)>& m) {
  SpectralField spec = forward(field);
  apply_multiplier(spec, m);
  return inverse(spec);
}

Field fractional_laplacian(const Field& field, double s) {
  if (!(s > -2.0 && s <= 2.0)) throw InvalidArgument("fractional_laplacian: s must lie in (-2, 2]");
  if (s == 0.0) return field;
  if (s < 0.0) {
    double mass = 0.0;
    for (double x : field.values) mass += std::fabs(x);
    if (std::fabs(field.sum()) > 1e-10 * mass) {
      std::ostringstream os;
      os << "fractional_laplacian: negative power " << s << " needs a mean-zero field (mean "
         << field.sum() / static_cast<double>(field.values.size()) << ")";
      throw InvalidArgument(os.str());
    }
  }
  return apply_multiplier(field, [s](double xi_sq) {
    return xi_sq == 0.0 ? 0.0 : std::pow(xi_sq, 0.5 * s);
  });
}

double lp_norm(const TorusGrid& grid, std::span<const double> values, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("lp_norm: p must be >= 1");
  double acc = 0.0;
  if (p == 2.0) {
    for (double x : values) acc += x * x;
    return std::sqrt(grid.cell_volume() * acc);
  }
  for (double x : values) acc += std::pow(std::fabs(x), p);
  return std::pow(grid.cell_volume() * acc, 1.0 / p);
}

double lp_norm(const Field& field, double p) { return lp_norm(field.grid, field.values, p); }

namespace {

auto bessel_multiplier(double gamma) {
  return [gamma](double xi_sq) { return std::pow(1.0 + xi_sq, 0.5 * gamma); };
}

}  // namespace

double bessel_norm(const Field& field, double gamma, double p) {
  if (!(p >= 2.0)) throw InvalidArgument("bessel_norm: p must be >= 2");
  if (gamma == 0.0) return lp_norm(field, p);
  return lp_norm(apply_multiplier(field, bessel_multiplier(gamma)), p);
}

double bessel_norm_l2seq(std::span<const Field> fields, double gamma, double p) {
  if (!(p >= 2.0)) throw InvalidArgument("bessel_norm_l2seq: p must be >= 2");
  if (fields.empty()) throw InvalidArgument("bessel_norm_l2seq: empty stack");
  const TorusGrid& grid = fields.front().grid;
  std::vector<double> sq(grid.size(), 0.0);
  for (const Field& g : fields) {
    if (!(g.grid == grid)) throw InvalidArgument("bessel_norm_l2seq: stack fields on different grids");
    const Field v = gamma == 0.0 ? g : apply_multiplier(g, bessel_multiplier(gamma));
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += v.values[i] * v.values[i];
  }
  for (double& x : sq) x = std::sqrt(x);
  return lp_norm(grid, sq, p);
}

}  // namespace fracspde
