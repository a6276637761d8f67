#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jmgt/kernel.hpp"
#include "jmgt/spectral.hpp"

namespace jmgt {

enum class Regime { subcritical, critical, supercritical };
std::string to_string(Regime r);

// alpha is normalised to 1.
struct SystemParams {
  double tau = 1.0;
  double b = 1.5;
  double c2 = 1.0;
  double k = 1.0;
  MemoryKernel kernel = MemoryKernel::exponential(0.2, 1.0, 1.0);

  double alpha() const { return 1.0; }
  double delta() const { return b - tau * c2; }
  double mass() const { return kernel.mass(); }
  double cg2() const { return c2 - kernel.mass(); }
  // Throws std::invalid_argument naming the offending quantity. A kernel
  // without memory is accepted only when allow_memoryless is set.
  void validate(bool allow_memoryless = false) const;
};

Regime classify_regime(const SystemParams& p);

enum class MemoryMode { none, dafermos, closure };
std::string to_string(MemoryMode m);

struct HistoryConfig {
  MemoryMode mode = MemoryMode::dafermos;
  int intervals = 256;  // N_s
  double s_max = 30.0;
};

enum class Weight { g, minus_dg, d2g };

// Product-integration weights on the uniform s-grid: the history is taken
// piecewise linear in s and g is integrated exactly against each hat
// function. The nodal -g' and g'' weights are backward differences of the g
// weights, which makes the discrete transport satisfy summation by parts
// exactly. tail() and weights_from() integrate the continuous weight and are
// used for the transported jump.
class HistoryQuadrature {
 public:
  HistoryQuadrature(const MemoryKernel& kernel, int intervals, double s_max);

  int intervals() const { return intervals_; }
  std::size_t nodes() const { return static_cast<std::size_t>(intervals_) + 1; }
  double ds() const { return s_max_ / intervals_; }
  double s_max() const { return s_max_; }
  double s(std::size_t j) const { return ds() * static_cast<double>(j); }
  const MemoryKernel& kernel() const { return kernel_; }

  const std::vector<double>& weights(Weight w) const;
  // Integral of the weight over [a, s_max].
  double tail(Weight w, double a) const;
  // Hat-function weights restricted to [a, s_max].
  std::vector<double> weights_from(Weight w, double a) const;

 private:
  struct Set {
    std::vector<double> left, right;  // per interval: weight * (1 - theta), weight * theta
    std::vector<double> nodal;
    std::vector<double> cumulative;   // integral from s_j to s_max
  };
  double weight_value(Weight w, double s) const;
  const Set& set(Weight w) const;

  MemoryKernel kernel_;
  int intervals_;
  double s_max_;
  std::array<Set, 3> sets_;
};

// Discretised history eta(s) on the s-grid. Internally eta = zeta + J H(s - a)
// where zeta is continuous with zeta(0) = 0, J is the initial displacement
// psi_0 and a is the elapsed time: the jump that the initial datum
// eta(0, s) = psi_0 carries along the corner characteristic is transported
// exactly instead of being smeared by the s-discretisation.
class HistoryField {
 public:
  HistoryField(const Grid& grid, std::shared_ptr<const HistoryQuadrature> quad);

  const Grid& grid() const { return grid_; }
  const HistoryQuadrature& quadrature() const { return *quad_; }
  std::shared_ptr<const HistoryQuadrature> quadrature_ptr() const { return quad_; }
  std::size_t nodes() const { return zeta_.size(); }
  double ds() const { return quad_->ds(); }
  double s(std::size_t j) const { return quad_->s(j); }

  std::vector<Field>& smooth() { return zeta_; }
  const std::vector<Field>& smooth() const { return zeta_; }

  bool has_jump() const { return jump_.has_value(); }
  const Field& jump() const { return *jump_; }
  double front() const { return front_; }
  void set_jump(Field j, double front);
  void set_front(double a) { front_ = a; }
  void clear_jump() { jump_.reset(); }
  // True when node j lies strictly beyond the jump front.
  bool beyond_front(std::size_t j) const { return has_jump() && s(j) > front_; }

  Field eta(std::size_t j) const;
  void set_eta(std::size_t j, const Field& value);

  // Integral of g(s) eta(s) ds.
  Field memory_integral() const;

 private:
  Grid grid_;
  std::shared_ptr<const HistoryQuadrature> quad_;
  std::vector<Field> zeta_;
  std::optional<Field> jump_;
  double front_ = 0.0;
};

// Closure moment M = int g eta ds for exponential kernels.
struct ClosureMoment {
  Field M;
};

struct StateVector {
  Field psi, v, w;
  std::variant<std::monostate, HistoryField, ClosureMoment> history;

  explicit StateVector(const Grid& grid);
  const Grid& grid() const { return psi.grid(); }
  MemoryMode mode() const;
  HistoryField* dafermos() { return std::get_if<HistoryField>(&history); }
  const HistoryField* dafermos() const { return std::get_if<HistoryField>(&history); }
  ClosureMoment* closure() { return std::get_if<ClosureMoment>(&history); }
  const ClosureMoment* closure() const { return std::get_if<ClosureMoment>(&history); }
  bool finite() const;
};

// y += a x over every evolving component (zeta nodes, jump front, closure
// moment); the jump field itself is data and is left untouched.
void axpy(StateVector& y, double a, const StateVector& x);
void scale(StateVector& y, double a);
// Same shape as x with all evolving components zero; jump data is copied.
StateVector zeros_like(const StateVector& x);

std::shared_ptr<const HistoryQuadrature> make_quadrature(const MemoryKernel& kernel,
                                                         const HistoryConfig& cfg);

StateVector init_state(const SystemParams& params, const Field& psi0, const Field& psi1,
                       const Field& psi2, const HistoryConfig& cfg);
// Same, reusing an existing quadrature (avoids rebuilding weights).
StateVector init_state(const SystemParams& params, const Field& psi0, const Field& psi1,
                       const Field& psi2, MemoryMode mode,
                       std::shared_ptr<const HistoryQuadrature> quad);

// Spectral view of a history for the energy functionals.
struct HistorySpectra {
  std::vector<Spectrum> zeta;
  std::optional<Spectrum> jump;
  double front = 0.0;
  std::shared_ptr<const HistoryQuadrature> quad;
};
HistorySpectra history_spectra(const HistoryField& h);

// int w(s) <eta_a(s), eta_b(s)>_mult ds where <f, g>_mult = sum mult |..| over
// the spectrum (cell-volume normalised).
double history_inner(const Grid& grid, const HistorySpectra& a, const HistorySpectra& b, Weight w,
                     const std::vector<double>& mult);
// int w(s) <eta(s), f>_mult ds
double history_cross(const Grid& grid, const HistorySpectra& a, const Spectrum& f, Weight w,
                     const std::vector<double>& mult);

// (int weight(s) ||grad^kappa eta(s)||^2 ds)^(1/2)
double history_weighted_norm(const HistoryField& h, Weight w, double kappa);
double history_weighted_norm(const StateVector& s, Weight w, double kappa);

// Binary checkpoint; layout documented in the implementation and README.
struct Checkpoint {
  double time = 0.0;
  SystemParams params;
  StateVector state;
};
void write_checkpoint(const std::string& path, const StateVector& state, const SystemParams& params,
                      double time);
// A tabulated kernel is not stored; pass it in to restore such checkpoints.
Checkpoint read_checkpoint(const std::string& path, const MemoryKernel* kernel = nullptr);

}  // namespace jmgt
