#include "jmgt/kernel.hpp"

// pchip.hpp calls isnan unqualified.
#include <cmath>
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace jmgt {

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

struct MemoryKernel::Table {
  std::vector<double> s;
  std::vector<double> g;
  std::unique_ptr<Pchip> interp;
};

MemoryKernel::MemoryKernel() = default;

MemoryKernel MemoryKernel::none() { return MemoryKernel(); }

MemoryKernel MemoryKernel::exponential(double m, double c2, double tau_r) {
  if (!(m >= 0.0) || !(c2 > 0.0) || !(tau_r > 0.0))
    throw std::invalid_argument("exponential kernel needs m >= 0, c2 > 0, tau_r > 0");
  MemoryKernel k;
  k.kind_ = KernelKind::exponential;
  k.m_ = m;
  k.c2_ = c2;
  k.tau_r_ = tau_r;
  k.zeta_ = 1.0 / tau_r;
  k.mass_ = m * c2 * tau_r;
  return k;
}

MemoryKernel MemoryKernel::tabulated(std::vector<double> s, std::vector<double> g) {
  if (s.size() != g.size() || s.size() < 4)
    throw std::invalid_argument("tabulated kernel needs at least four (s, g) samples");
  if (s.front() != 0.0) throw std::invalid_argument("tabulated kernel must start at s = 0");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw std::invalid_argument("kernel samples must increase strictly");
  for (double x : g)
    if (!std::isfinite(x)) throw std::invalid_argument("kernel values must be finite");

  MemoryKernel k;
  k.kind_ = KernelKind::tabulated;
  auto table = std::make_shared<Table>();
  table->s = s;
  table->g = g;
  table->interp = std::make_unique<Pchip>(std::move(s), std::move(g));
  k.table_ = table;

  // Cubic pieces are integrated exactly by two-point Gauss per interval.
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < table->s.size(); ++i) {
    const double a = table->s[i], b = table->s[i + 1];
    mass += boost::math::quadrature::gauss<double, 4>::integrate(
        [&](double x) { return (*table->interp)(x); }, a, b);
  }
  k.mass_ = mass;

  double zeta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table->s.size(); ++i) {
    const KernelValues v = k.eval(table->s[i]);
    if (v.g > 0.0) zeta = std::min(zeta, -v.dg / v.g);
  }
  k.zeta_ = std::isfinite(zeta) ? std::max(zeta, 0.0) : 0.0;
  return k;
}

std::string MemoryKernel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case KernelKind::none:
      os << "none";
      break;
    case KernelKind::exponential:
      os << "exponential(m=" << m_ << ", c2=" << c2_ << ", tau_r=" << tau_r_ << ")";
      break;
    case KernelKind::tabulated:
      os << "tabulated(" << table_->s.size() << " samples)";
      break;
  }
  return os.str();
}

MemoryKernel MemoryKernel::with_zeta(double zeta) const {
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  MemoryKernel k = *this;
  k.zeta_ = zeta;
  return k;
}

KernelValues MemoryKernel::eval(double s) const {
  if (s < 0.0 || std::isnan(s)) throw std::domain_error("kernel evaluated at negative s");
  switch (kind_) {
    case KernelKind::none:
      return {};
    case KernelKind::exponential: {
      const double g = m_ * c2_ * std::exp(-s / tau_r_);
      return {g, -g / tau_r_, g / (tau_r_ * tau_r_)};
    }
    case KernelKind::tabulated: {
      const auto& t = *table_;
      if (s > t.s.back()) return {};
      KernelValues v;
      v.g = (*t.interp)(s);
      v.dg = t.interp->prime(s);
      // The interpolant is cubic on each interval: difference the derivative
      // inside the interval that contains s.
      auto it = std::upper_bound(t.s.begin(), t.s.end(), s);
      std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - t.s.begin()),
                                             t.s.size() - 1);
      std::size_t lo = hi - 1;
      const double a = t.s[lo], b = t.s[hi];
      const double h = 1e-6 * (b - a);
      const double x0 = std::max(a, s - h), x1 = std::min(b, s + h);
      v.d2g = (t.interp->prime(x1) - t.interp->prime(x0)) / (x1 - x0);
      return v;
    }
  }
  return {};
}

double MemoryKernel::integral(double a, double b) const {
  if (b <= a || kind_ == KernelKind::none) return 0.0;
  if (kind_ == KernelKind::exponential) {
    const double upper = std::isinf(b) ? 0.0 : std::exp(-b / tau_r_);
    return m_ * c2_ * tau_r_ * (std::exp(-a / tau_r_) - upper);
  }
  const auto& t = *table_;
  const double hi = std::min(b, t.s.back());
  if (hi <= a) return 0.0;
  double sum = 0.0;
  auto it = std::upper_bound(t.s.begin(), t.s.end(), a);
  double left = a;
  for (; left < hi; ++it) {
    const double right = (it == t.s.end()) ? hi : std::min(*it, hi);
    if (right > left)
      sum += boost::math::quadrature::gauss<double, 4>::integrate(
          [&](double x) { return (*t.interp)(x); }, left, right);
    left = right;
    if (it == t.s.end()) break;
  }
  return sum;
}

double MemoryKernel::decay_length(double ratio) const {
  switch (kind_) {
    case KernelKind::none:
      return 0.0;
    case KernelKind::exponential:
      return tau_r_ * std::log(1.0 / ratio);
    case KernelKind::tabulated: {
      const auto& t = *table_;
      const double g0 = std::abs(t.g.front());
      for (std::size_t i = t.s.size(); i-- > 0;)
        if (std::abs(t.g[i]) >= ratio * g0) return i + 1 < t.s.size() ? t.s[i + 1] : t.s.back();
      return 0.0;
    }
  }
  return 0.0;
}

double total_mass(const MemoryKernel& kernel) { return kernel.mass(); }

double c_g_squared(const MemoryKernel& kernel, double c2) {
  const double cg2 = c2 - kernel.mass();
  if (!(cg2 > 0.0))
    throw std::invalid_argument("kernel mass must stay below c^2 (modified speed not positive)");
  return cg2;
}

KernelReport check_assumptions(const MemoryKernel& kernel, double c2,
                               const std::vector<double>& s_grid, double tol) {
  KernelReport r;
  r.mass = kernel.mass();
  r.cg2 = c2 - r.mass;

  const auto record = [tol](AssumptionResult& a, double violation, double s) {
    if (violation > a.worst) {
      a.worst = violation;
      a.at = s;
    }
    if (violation > tol) a.pass = false;
  };

  std::vector<KernelValues> vals;
  vals.reserve(s_grid.size());
  for (double s : s_grid) vals.push_back(kernel.eval(s));

  const double zeta = kernel.zeta();
  double dg_l1 = 0.0;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const auto& v = vals[i];
    const double s = s_grid[i];
    if (!std::isfinite(v.g) || !std::isfinite(v.dg) || !std::isfinite(v.d2g)) {
      r.regularity.pass = false;
      r.regularity.worst = std::numeric_limits<double>::infinity();
      r.regularity.at = s;
    }
    record(r.positivity, -v.g, s);
    record(r.decay, v.dg + zeta * v.g, s);
    record(r.convexity, -v.d2g, s);
    if (i > 0) {
      const double ds = s_grid[i] - s_grid[i - 1];
      dg_l1 += 0.5 * ds * (std::abs(v.dg) + std::abs(vals[i - 1].dg));
      const double jump = std::abs(v.dg - vals[i - 1].dg) / ds;
      if (std::isfinite(jump) && jump > r.regularity.worst) {
        r.regularity.worst = jump;
        r.regularity.at = s;
      }
    }
  }
  if (!std::isfinite(dg_l1)) r.regularity.pass = false;

  // Strict bounds on the mass; distance outside (0, c^2) is the violation.
  if (!(r.mass > 0.0)) {
    r.positivity.pass = false;
    r.positivity.worst = std::max(r.positivity.worst, -r.mass);
  }
  if (!(r.mass < c2)) {
    r.positivity.pass = false;
    r.positivity.worst = std::max(r.positivity.worst, r.mass - c2);
  }
  return r;
}

std::vector<double> uniform_s_grid(double s_max, int intervals) {
  if (!(s_max > 0.0) || intervals < 1) throw std::invalid_argument("bad s-grid");
  std::vector<double> s(static_cast<std::size_t>(intervals) + 1);
  for (int j = 0; j <= intervals; ++j) s[j] = s_max * j / intervals;
  return s;
}

MemoryKernel load_kernel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel table " + path);
  std::vector<double> s, g;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) {
      if (s.empty() && lineno == 1) continue;
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    s.push_back(a);
    g.push_back(b);
  }
  return MemoryKernel::tabulated(std::move(s), std::move(g));
}

}  // namespace jmgt
