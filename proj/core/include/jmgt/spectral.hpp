#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace jmgt {

using Spectrum = std::vector<std::complex<double>>;

// Periodic box [0, L)^dim sampled with n points per axis. Copies share the
// FFT plans and the cached wavenumber tables.
class Grid {
 public:
  Grid(int dim, int n, double length);
  Grid(int dim, int n, std::array<double, 3> lengths);

  int dim() const;
  int n() const;
  std::size_t size() const;
  double length(int axis) const;
  double spacing(int axis) const;
  double cell_volume() const;
  double volume() const;

  // Physical coordinate of a node along an axis; nodes are stored row-major
  // with the last axis fastest.
  double coordinate(std::size_t node, int axis) const;
  int index(std::size_t node, int axis) const;

  // Signed integer mode k in [-n/2, n/2) for a spectral index.
  int mode(std::size_t spectral, int axis) const;
  // First-derivative multiplier xi_j (zero on the Nyquist plane).
  const std::vector<double>& derivative_symbol(int axis) const;
  // |xi|^2 with the true Nyquist value.
  const std::vector<double>& xi_squared() const;
  // |xi|^(2 kappa) for real kappa >= 0, cached.
  const std::vector<double>& homogeneous_weight(double kappa) const;
  // (1 + |xi|^2)^s, cached.
  const std::vector<double>& bessel_weight(double s) const;

  void forward(const double* in, std::complex<double>* out) const;
  // Normalised inverse: inverse(forward(f)) = f.
  void inverse(const std::complex<double>* in, double* out) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Real grid function.
class Field {
 public:
  explicit Field(const Grid& grid);
  Field(const Grid& grid, std::vector<double> values);
  static Field from_function(const Grid& grid,
                             const std::function<double(const std::array<double, 3>&)>& f);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double a);
  // this += a * x
  Field& axpy(double a, const Field& x);
  void fill(double value);
  bool finite() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);
// Pointwise product.
Field hadamard(const Field& a, const Field& b);

void require_same_grid(const Field& a, const Field& b);

Spectrum forward(const Field& f);
Field inverse(const Grid& grid, const Spectrum& s);

std::vector<Field> gradient(const Field& f);
Field laplacian(const Field& f);
Field divergence(const std::vector<Field>& components);
// Applies a real multiplier m(xi) given per spectral index.
Field apply_symbol(const Field& f, const std::vector<double>& symbol);

// Ordered kappa-th partials: kappa = 1 gives n components, kappa = 2 gives n*n
// (row-major over the index pair).
std::vector<Field> partials_tensor(const Field& f, int kappa);

double l2_inner(const Field& f, const Field& g);
double l2_norm(const Field& f);
double l2_norm(const std::vector<Field>& components);
double max_norm(const Field& f);
// Pointwise Euclidean norm of a vector field, maximised over the grid.
double max_norm(const std::vector<Field>& components);

// (sum_xi |xi|^(2 kappa) |f^|^2 * cell volume / size)^(1/2)
double homogeneous_norm(const Field& f, double kappa);
double homogeneous_inner(const Field& f, const Field& g, double kappa);
// Inhomogeneous Sobolev norm with multiplier (1 + |xi|^2)^(s/2).
double sobolev_norm(const Field& f, double s);

// Spectral-side sums shared by the energy functionals. The weight array has
// one entry per spectral index.
double spectral_inner(const Grid& grid, const Spectrum& a, const Spectrum& b,
                      const std::vector<double>& weight);
double spectral_inner(const Grid& grid, const Spectrum& a, const Spectrum& b, double kappa);

// 2/3-rule truncation.
Field dealias(const Field& f);

}  // namespace jmgt
