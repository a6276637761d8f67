#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jmgt/state.hpp"

namespace jmgt {

// upwind: method of lines with a backward difference in s, stable for
// dt <= ds. characteristic: ds = dt, the history is shifted one node per
// step (exact transport along s - t = const) and the memory integral uses
// fourth-order end-corrected quadrature on either side of the corner kink.
enum class Transport { upwind, characteristic };
std::string to_string(Transport t);

struct RhsConfig {
  MemoryMode memory_mode = MemoryMode::dafermos;
  bool nonlinear = false;
  bool dealias = false;
  Transport transport = Transport::upwind;
};

// Forcing S(t) entering the third equation as tau w_t = ... + S.
using Source = std::function<Field(double t)>;

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// int g(s) eta(s) ds, or the closure moment M.
Field memory_integral(const StateVector& state, const SystemParams& params);
// int g(s) Laplacian eta(s) ds
Field memory_term(const StateVector& state, const SystemParams& params);

// 2 (k v w + grad psi . grad v)
Field nonlinearity(const StateVector& state, double k, bool dealias = false);
// kappa-th derivative of the nonlinearity assembled from commutators:
// 2k[D,v]w + 2k v Dw + 2[D,grad psi].grad v + 2 grad psi . grad(Dv). The
// components are ordered like partials_tensor (1, n or n*n fields).
std::vector<Field> nonlinearity_kappa(const StateVector& state, double k, int kappa);

StateVector rhs(const StateVector& state, const SystemParams& params, const RhsConfig& config,
                const Field* source = nullptr);

// One classical RK4 step from time t. Throws BlowUpError on non-finite data.
StateVector step(const StateVector& state, const SystemParams& params, const RhsConfig& config,
                 double dt, double t = 0.0, const Source* source = nullptr);

using Observer = std::function<void(double t, const StateVector& state)>;

struct SimulationResult {
  StateVector final_state;
  double t_end = 0.0;
  long steps = 0;
  bool blew_up = false;
  double blowup_time = 0.0;
  std::string reason;
};

// Advances to T (rounded to whole steps). The observer sees t = 0, every
// stride-th step and the final state. Blow-up is reported, not thrown: a
// non-finite value, or the energy proxy ||grad psi||^2 + ||v||_{H^1}^2 +
// ||w||^2 exceeding blowup_factor times its initial value.
SimulationResult simulate(const StateVector& initial, const SystemParams& params,
                          const RhsConfig& config, double T, double dt, const Observer& observer,
                          int stride = 1, const Source* source = nullptr,
                          double blowup_factor = 1e12);

double energy_proxy(const StateVector& state);

namespace detail {
// RK4 step allowing negative dt (used to integrate the memoryless linear
// system backwards in time).
StateVector rk4(const StateVector& state, const SystemParams& params, const RhsConfig& config,
                double dt, double t, const Source* source);
std::vector<double> gregory_weights(std::size_t points, double h);
}  // namespace detail

// psi_ex(x, t) = X(x) theta(t) with theta = cos(omega t + phase).
struct ManufacturedSolution {
  Field X;
  double omega = 1.0;
  double phase = 0.0;

  // theta, theta', theta'', theta'''
  std::array<double, 4> theta(double t) const;
  Field psi(double t) const;
  Field psi_t(double t) const;
  Field psi_tt(double t) const;
  // int_0^t g(s) theta(t - s) ds: closed form for exponential kernels,
  // adaptive Gauss-Kronrod (relative tolerance 1e-13) otherwise.
  double memory_convolution(const MemoryKernel& kernel, double t) const;
};

// Residual of the scalar equation at psi_ex; adding it as a source makes
// psi_ex an exact solution of the first-order system.
Field manufactured_residual(const ManufacturedSolution& ms, const SystemParams& params, double t,
                            bool nonlinear);

}  // namespace jmgt
