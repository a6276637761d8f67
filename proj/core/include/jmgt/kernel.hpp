#pragma once

#include <memory>
#include <string>
#include <vector>

namespace jmgt {

struct KernelValues {
  double g = 0.0;
  double dg = 0.0;
  double d2g = 0.0;
};

enum class KernelKind { none, exponential, tabulated };

// Relaxation kernel g(s) of the memory convolution. The exponential form is
// g(s) = m c^2 exp(-s / tau_r); tabulated kernels are interpolated with a
// monotone piecewise cubic and vanish past the last sample.
class MemoryKernel {
 public:
  MemoryKernel();
  static MemoryKernel none();
  static MemoryKernel exponential(double m, double c2, double tau_r);
  // Samples must be strictly increasing and start at s = 0. The decay rate
  // zeta defaults to the largest value consistent with g' <= -zeta g at the
  // samples (zero if none is).
  static MemoryKernel tabulated(std::vector<double> s, std::vector<double> g);

  KernelKind kind() const { return kind_; }
  bool memoryless() const { return kind_ == KernelKind::none; }
  bool is_exponential() const { return kind_ == KernelKind::exponential; }
  std::string describe() const;

  double zeta() const { return zeta_; }
  MemoryKernel with_zeta(double zeta) const;

  double relaxation_parameter() const { return m_; }
  double speed_squared() const { return c2_; }
  double relaxation_time() const { return tau_r_; }

  KernelValues eval(double s) const;
  double g(double s) const { return eval(s).g; }

  // Integral of g over [a, b] (b may be infinite).
  double integral(double a, double b) const;
  double mass() const { return mass_; }
  // Smallest s with g(s') / g(0) below ratio for all s' >= s.
  double decay_length(double ratio) const;

 private:
  struct Table;
  KernelKind kind_ = KernelKind::none;
  double m_ = 0.0, c2_ = 0.0, tau_r_ = 1.0;
  double zeta_ = 0.0;
  double mass_ = 0.0;
  std::shared_ptr<const Table> table_;
};

double total_mass(const MemoryKernel& kernel);
// c_g^2 = c^2 - mass; throws if the result is not positive.
double c_g_squared(const MemoryKernel& kernel, double c2);

struct AssumptionResult {
  bool pass = true;
  double worst = 0.0;  // largest violation magnitude (0 when none)
  double at = 0.0;     // sample where it occurs
};

struct KernelReport {
  double mass = 0.0;
  double cg2 = 0.0;
  AssumptionResult regularity;  // g' finite with bounded differences, g in W^{1,1}
  AssumptionResult positivity;  // g >= 0 and 0 < mass < c^2
  AssumptionResult decay;       // g' + zeta g <= tol
  AssumptionResult convexity;   // g'' >= -tol
  bool all_pass() const {
    return regularity.pass && positivity.pass && decay.pass && convexity.pass;
  }
};

KernelReport check_assumptions(const MemoryKernel& kernel, double c2,
                               const std::vector<double>& s_grid, double tol);

std::vector<double> uniform_s_grid(double s_max, int intervals);

// Two columns "s,g" per line; blank lines, '#' comments and a non-numeric
// header line are skipped.
MemoryKernel load_kernel_csv(const std::string& path);

}  // namespace jmgt
