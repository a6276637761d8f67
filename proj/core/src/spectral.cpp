#include "jmgt/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace jmgt {

namespace {

// Plan creation in FFTW is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

struct Grid::Impl {
  int dim = 1;
  int n = 8;
  std::array<double, 3> lengths{1.0, 1.0, 1.0};
  std::size_t size = 0;
  fftw_plan plan_forward = nullptr;
  fftw_plan plan_backward = nullptr;
  std::array<std::vector<double>, 3> dsymbol;
  std::vector<double> xi2;
  mutable std::mutex cache_mutex;
  mutable std::map<double, std::vector<double>> homogeneous_cache;
  mutable std::map<double, std::vector<double>> bessel_cache;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_forward) fftw_destroy_plan(plan_forward);
    if (plan_backward) fftw_destroy_plan(plan_backward);
  }
};

Grid::Grid(int dim, int n, double length) : Grid(dim, n, {length, length, length}) {}

Grid::Grid(int dim, int n, std::array<double, 3> lengths) : impl_(std::make_shared<Impl>()) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (n < 8 || !is_power_of_two(n))
    throw std::invalid_argument("points per axis must be a power of two >= 8, got " +
                                std::to_string(n));
  for (int a = 0; a < dim; ++a)
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
      throw std::invalid_argument("box length must be positive");
  impl_->dim = dim;
  impl_->n = n;
  impl_->lengths = lengths;
  std::size_t size = 1;
  for (int a = 0; a < dim; ++a) size *= static_cast<std::size_t>(n);
  impl_->size = size;

  std::vector<std::complex<double>> scratch(size);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::array<int, 3> dims{n, n, n};
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    impl_->plan_forward = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_FORWARD, flags);
    impl_->plan_backward = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_BACKWARD, flags);
  }
  if (!impl_->plan_forward || !impl_->plan_backward)
    throw std::runtime_error("FFTW planning failed");

  impl_->xi2.assign(size, 0.0);
  for (int a = 0; a < dim; ++a) impl_->dsymbol[a].assign(size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
      const int k = mode(i, a);
      const double xi = 2.0 * std::numbers::pi * k / lengths[a];
      s += xi * xi;
      impl_->dsymbol[a][i] = (k == -n / 2) ? 0.0 : xi;
    }
    impl_->xi2[i] = s;
  }
}

int Grid::dim() const { return impl_->dim; }
int Grid::n() const { return impl_->n; }
std::size_t Grid::size() const { return impl_->size; }
double Grid::length(int axis) const { return impl_->lengths[axis]; }
double Grid::spacing(int axis) const { return impl_->lengths[axis] / impl_->n; }

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < impl_->dim; ++a) v *= spacing(a);
  return v;
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < impl_->dim; ++a) v *= impl_->lengths[a];
  return v;
}

int Grid::index(std::size_t node, int axis) const {
  std::size_t stride = 1;
  for (int a = impl_->dim - 1; a > axis; --a) stride *= static_cast<std::size_t>(impl_->n);
  return static_cast<int>((node / stride) % static_cast<std::size_t>(impl_->n));
}

double Grid::coordinate(std::size_t node, int axis) const {
  return index(node, axis) * spacing(axis);
}

int Grid::mode(std::size_t spectral, int axis) const {
  const int i = index(spectral, axis);
  return i < impl_->n / 2 ? i : i - impl_->n;
}

const std::vector<double>& Grid::derivative_symbol(int axis) const { return impl_->dsymbol[axis]; }
const std::vector<double>& Grid::xi_squared() const { return impl_->xi2; }

const std::vector<double>& Grid::homogeneous_weight(double kappa) const {
  std::lock_guard<std::mutex> lock(impl_->cache_mutex);
  auto it = impl_->homogeneous_cache.find(kappa);
  if (it != impl_->homogeneous_cache.end()) return it->second;
  std::vector<double> w(impl_->size);
  const bool integer = kappa == std::floor(kappa);
  for (std::size_t i = 0; i < impl_->size; ++i) {
    const double x = impl_->xi2[i];
    if (kappa == 0.0) {
      w[i] = 1.0;
    } else if (integer) {
      double p = 1.0;
      for (int j = 0; j < static_cast<int>(kappa); ++j) p *= x;
      w[i] = p;
    } else {
      w[i] = std::pow(x, kappa);
    }
  }
  return impl_->homogeneous_cache.emplace(kappa, std::move(w)).first->second;
}

const std::vector<double>& Grid::bessel_weight(double s) const {
  std::lock_guard<std::mutex> lock(impl_->cache_mutex);
  auto it = impl_->bessel_cache.find(s);
  if (it != impl_->bessel_cache.end()) return it->second;
  std::vector<double> w(impl_->size);
  for (std::size_t i = 0; i < impl_->size; ++i) w[i] = std::pow(1.0 + impl_->xi2[i], s);
  return impl_->bessel_cache.emplace(s, std::move(w)).first->second;
}

void Grid::forward(const double* in, std::complex<double>* out) const {
  for (std::size_t i = 0; i < impl_->size; ++i) {
    if (!std::isfinite(in[i])) throw std::domain_error("non-finite value in transform input");
    out[i] = {in[i], 0.0};
  }
  auto* buf = reinterpret_cast<fftw_complex*>(out);
  fftw_execute_dft(impl_->plan_forward, buf, buf);
}

void Grid::inverse(const std::complex<double>* in, double* out) const {
  std::vector<std::complex<double>> tmp(in, in + impl_->size);
  auto* buf = reinterpret_cast<fftw_complex*>(tmp.data());
  fftw_execute_dft(impl_->plan_backward, buf, buf);
  const double scale = 1.0 / static_cast<double>(impl_->size);
  for (std::size_t i = 0; i < impl_->size; ++i) out[i] = tmp[i].real() * scale;
}

bool Grid::operator==(const Grid& other) const {
  if (impl_ == other.impl_) return true;
  if (impl_->dim != other.impl_->dim || impl_->n != other.impl_->n) return false;
  for (int a = 0; a < impl_->dim; ++a)
    if (impl_->lengths[a] != other.impl_->lengths[a]) return false;
  return true;
}

// ---------------------------------------------------------------------------

Field::Field(const Grid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
}

Field Field::from_function(const Grid& grid,
                           const std::function<double(const std::array<double, 3>&)>& f) {
  Field out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coordinate(i, a);
    out.values_[i] = f(x);
  }
  return out;
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid() != b.grid()) throw std::invalid_argument("fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double a) {
  for (double& x : values_) x *= a;
  return *this;
}

Field& Field::axpy(double a, const Field& x) {
  require_same_grid(*this, x);
  const double* xs = x.data();
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * xs[i];
  return *this;
}

void Field::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool Field::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }

Field hadamard(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Spectrum forward(const Field& f) {
  Spectrum s(f.size());
  f.grid().forward(f.data(), s.data());
  return s;
}

Field inverse(const Grid& grid, const Spectrum& s) {
  Field out(grid);
  grid.inverse(s.data(), out.data());
  return out;
}

std::vector<Field> gradient(const Field& f) {
  const Grid& g = f.grid();
  const Spectrum fh = forward(f);
  std::vector<Field> out;
  out.reserve(g.dim());
  Spectrum tmp(fh.size());
  for (int a = 0; a < g.dim(); ++a) {
    const auto& xi = g.derivative_symbol(a);
    for (std::size_t i = 0; i < fh.size(); ++i) tmp[i] = std::complex<double>(0.0, xi[i]) * fh[i];
    out.push_back(inverse(g, tmp));
  }
  return out;
}

Field apply_symbol(const Field& f, const std::vector<double>& symbol) {
  Spectrum fh = forward(f);
  for (std::size_t i = 0; i < fh.size(); ++i) fh[i] *= symbol[i];
  return inverse(f.grid(), fh);
}

Field laplacian(const Field& f) {
  Spectrum fh = forward(f);
  const auto& xi2 = f.grid().xi_squared();
  for (std::size_t i = 0; i < fh.size(); ++i) fh[i] *= -xi2[i];
  return inverse(f.grid(), fh);
}

Field divergence(const std::vector<Field>& components) {
  if (components.empty()) throw std::invalid_argument("empty vector field");
  const Grid& g = components.front().grid();
  if (static_cast<int>(components.size()) != g.dim())
    throw std::invalid_argument("vector field component count must equal the dimension");
  Spectrum acc(g.size());
  for (int a = 0; a < g.dim(); ++a) {
    const Spectrum ch = forward(components[a]);
    const auto& xi = g.derivative_symbol(a);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::complex<double>(0.0, xi[i]) * ch[i];
  }
  return inverse(g, acc);
}

std::vector<Field> partials_tensor(const Field& f, int kappa) {
  if (kappa != 1 && kappa != 2) throw std::invalid_argument("partials_tensor supports kappa 1 or 2");
  const Grid& g = f.grid();
  if (kappa == 1) return gradient(f);
  const Spectrum fh = forward(f);
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(g.dim() * g.dim()));
  Spectrum tmp(fh.size());
  for (int a = 0; a < g.dim(); ++a) {
    for (int b = 0; b < g.dim(); ++b) {
      if (a == b) {
        // Second derivative along one axis keeps the Nyquist mode.
        for (std::size_t i = 0; i < fh.size(); ++i) {
          const double xi = 2.0 * std::numbers::pi * g.mode(i, a) / g.length(a);
          tmp[i] = -xi * xi * fh[i];
        }
      } else {
        const auto& xa = g.derivative_symbol(a);
        const auto& xb = g.derivative_symbol(b);
        for (std::size_t i = 0; i < fh.size(); ++i) tmp[i] = -xa[i] * xb[i] * fh[i];
      }
      out.push_back(inverse(g, tmp));
    }
  }
  return out;
}

double l2_inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid().cell_volume();
}

double l2_norm(const Field& f) { return std::sqrt(l2_inner(f, f)); }

double l2_norm(const std::vector<Field>& components) {
  double s = 0.0;
  for (const auto& c : components) s += l2_inner(c, c);
  return std::sqrt(s);
}

double max_norm(const Field& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

double max_norm(const std::vector<Field>& components) {
  if (components.empty()) return 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < components.front().size(); ++i) {
    double s = 0.0;
    for (const auto& c : components) s += c[i] * c[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

double spectral_inner(const Grid& grid, const Spectrum& a, const Spectrum& b,
                      const std::vector<double>& weight) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += weight[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  return s * grid.cell_volume() / static_cast<double>(grid.size());
}

double spectral_inner(const Grid& grid, const Spectrum& a, const Spectrum& b, double kappa) {
  return spectral_inner(grid, a, b, grid.homogeneous_weight(kappa));
}

double homogeneous_inner(const Field& f, const Field& g, double kappa) {
  require_same_grid(f, g);
  if (kappa < 0.0) throw std::invalid_argument("kappa must be nonnegative");
  return spectral_inner(f.grid(), forward(f), forward(g), kappa);
}

double homogeneous_norm(const Field& f, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("kappa must be nonnegative");
  const Spectrum fh = forward(f);
  return std::sqrt(std::max(0.0, spectral_inner(f.grid(), fh, fh, kappa)));
}

double sobolev_norm(const Field& f, double s) {
  const Spectrum fh = forward(f);
  return std::sqrt(std::max(0.0, spectral_inner(f.grid(), fh, fh, f.grid().bessel_weight(s))));
}

Field dealias(const Field& f) {
  const Grid& g = f.grid();
  Spectrum fh = forward(f);
  const int cutoff = g.n() / 3;
  for (std::size_t i = 0; i < fh.size(); ++i)
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(g.mode(i, a)) > cutoff) {
        fh[i] = 0.0;
        break;
      }
  return inverse(g, fh);
}

}  // namespace jmgt
