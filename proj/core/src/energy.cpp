#include "jmgt/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jmgt::energy {

namespace {

Spectrum laplacian_spectrum(const Grid& g, const Spectrum& s) {
  const auto& xi2 = g.xi_squared();
  Spectrum out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = -xi2[i] * s[i];
  return out;
}

// sum over ordered kappa-multi-indices of (A_alpha, d^alpha phi), plus one
// extra gradient level when grad_level is set.
double pair_tensor(const std::vector<Field>& F, const Field& phi, int kappa, bool grad_level) {
  std::vector<Field> dphi;
  if (kappa == 0)
    dphi.push_back(phi);
  else
    dphi = partials_tensor(phi, kappa);
  if (dphi.size() != F.size()) throw std::logic_error("tensor ranks differ");
  double sum = 0.0;
  for (std::size_t a = 0; a < F.size(); ++a)
    sum += grad_level ? homogeneous_inner(F[a], dphi[a], 1.0) : l2_inner(F[a], dphi[a]);
  return sum;
}

}  // namespace

Snapshot::Snapshot(const StateVector& state, const SystemParams& params)
    : psi(forward(state.psi)),
      v(forward(state.v)),
      w(forward(state.w)),
      grid_(state.grid()),
      params_(params) {
  if (state.mode() == MemoryMode::none) {
    cg2_ = params.c2;
  } else {
    cg2_ = params.cg2();
    // Closure states carry no resolved history; the history terms are dropped.
    if (const auto* h = state.dafermos()) hist_ = history_spectra(*h);
  }
}

Spectrum Snapshot::combo(const Spectrum& x, double a, const Spectrum& y, double b) const {
  Spectrum out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

double Snapshot::inner(const Spectrum& a, const Spectrum& b, double kappa) const {
  return spectral_inner(grid_, a, b, kappa);
}

double Snapshot::history_norm2(Weight wt, double kappa) const {
  if (!hist_) return 0.0;
  return history_inner(grid_, *hist_, *hist_, wt, grid_.homogeneous_weight(kappa));
}

double Snapshot::history_cross(const Spectrum& f, Weight wt, double kappa) const {
  if (!hist_) return 0.0;
  return jmgt::history_cross(grid_, *hist_, f, wt, grid_.homogeneous_weight(kappa));
}

// ---------------------------------------------------------------------------

double problem_inner(const StateVector& a, const StateVector& b, const SystemParams& params, int m) {
  if (m < 1) throw std::invalid_argument("problem inner product needs m >= 1");
  if (a.mode() == MemoryMode::closure || b.mode() == MemoryMode::closure)
    throw std::invalid_argument("problem inner product needs a resolved history");
  if (a.grid() != b.grid()) throw std::invalid_argument("states on different grids");
  const Snapshot A(a, params), B(b, params);
  const double tau = params.tau;
  const double cg2 = A.cg2();
  const double d = params.b - tau * cg2;
  const auto pa = A.combo(A.psi, 1.0, A.v, tau), pb = B.combo(B.psi, 1.0, B.v, tau);
  const auto za = A.combo(A.v, 1.0, A.w, tau), zb = B.combo(B.v, 1.0, B.w, tau);
  const Grid& g = A.grid();
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    const auto& m1 = g.homogeneous_weight(k + 1);
    sum += cg2 * spectral_inner(g, pa, pb, m1);
    sum += tau * d * (spectral_inner(g, A.v, B.v, m1) + spectral_inner(g, A.v, B.v, k));
    sum += spectral_inner(g, za, zb, k);
    if (A.history() && B.history()) {
      sum += tau * history_inner(g, *A.history(), *B.history(), Weight::minus_dg, m1);
      sum += history_inner(g, *A.history(), *B.history(), Weight::g, m1);
    }
    if (A.history()) sum += tau * jmgt::history_cross(g, *A.history(), B.v, Weight::g, m1);
    if (B.history()) sum += tau * jmgt::history_cross(g, *B.history(), A.v, Weight::g, m1);
  }
  return sum;
}

double problem_norm(const StateVector& s, const SystemParams& params, int m) {
  return std::sqrt(std::max(0.0, problem_inner(s, s, params, m)));
}

double standard_norm(const StateVector& s, const SystemParams& params, int m) {
  if (m < 1) throw std::invalid_argument("standard norm needs m >= 1");
  if (s.mode() == MemoryMode::closure)
    throw std::invalid_argument("standard norm needs a resolved history");
  const Snapshot S(s, params);
  double sum = 0.0;
  for (int j = 0; j <= m; ++j) {
    if (j >= 1) sum += S.norm2(S.psi, j) + S.history_norm2(Weight::minus_dg, j);
    sum += S.norm2(S.v, j);
    if (j <= m - 1) sum += S.norm2(S.w, j);
  }
  return std::sqrt(std::max(0.0, sum));
}

double E1(const Snapshot& s, int kappa) {
  const double tau = s.params().tau;
  const double cg2 = s.cg2();
  const auto pv = s.combo(s.psi, 1.0, s.v, tau);
  const auto vw = s.combo(s.v, 1.0, s.w, tau);
  const double k1 = kappa + 1;
  double sum = cg2 * s.norm2(pv, k1);
  sum += tau * (s.params().b - tau * cg2) * s.norm2(s.v, k1);
  sum += s.norm2(vw, kappa);
  sum += tau * s.history_norm2(Weight::minus_dg, k1);
  sum += s.history_norm2(Weight::g, k1);
  sum += 2.0 * tau * s.history_cross(s.v, Weight::g, k1);
  return 0.5 * sum;
}

// Built from Laplacians of the fields rather than from E1 at kappa + 1.
double E2(const Snapshot& s, int kappa) {
  const Grid& g = s.grid();
  const double tau = s.params().tau;
  const double cg2 = s.cg2();
  const auto lpv = laplacian_spectrum(g, s.combo(s.psi, 1.0, s.v, tau));
  const auto lv = laplacian_spectrum(g, s.v);
  const auto vw = s.combo(s.v, 1.0, s.w, tau);
  double sum = cg2 * s.norm2(lpv, kappa);
  sum += tau * (s.params().b - tau * cg2) * s.norm2(lv, kappa);
  sum += s.norm2(vw, kappa + 1);
  if (const auto* h = s.history()) {
    const auto& base = g.homogeneous_weight(kappa);
    const auto& xi2 = g.xi_squared();
    std::vector<double> lap(base.size());
    for (std::size_t i = 0; i < lap.size(); ++i) lap[i] = xi2[i] * xi2[i] * base[i];
    sum += tau * history_inner(g, *h, *h, Weight::minus_dg, lap);
    sum += history_inner(g, *h, *h, Weight::g, lap);
    // int g Lap D v . Lap D eta: both Laplacians give xi^2, so xi^4 overall
    sum += 2.0 * tau * jmgt::history_cross(g, *h, s.v, Weight::g, lap);
  }
  return 0.5 * sum;
}

double E1(const StateVector& s, const SystemParams& p, int kappa) { return E1(Snapshot(s, p), kappa); }
double E2(const StateVector& s, const SystemParams& p, int kappa) { return E2(Snapshot(s, p), kappa); }

CrossValues cross_functionals(const Snapshot& s, int kappa) {
  const double tau = s.params().tau;
  const auto pv = s.combo(s.psi, 1.0, s.v, tau);
  const auto vw = s.combo(s.v, 1.0, s.w, tau);
  CrossValues out;
  out.F1 = s.inner(pv, vw, kappa + 1);
  out.F2 = -tau * s.inner(s.v, vw, kappa + 1);
  return out;
}

CrossValues cross_functionals(const StateVector& s, const SystemParams& p, int kappa) {
  return cross_functionals(Snapshot(s, p), kappa);
}

double lyapunov(const Snapshot& s, int kappa, const LyapunovWeights& wts) {
  if (!(wts.L1 > 0.0 && wts.L2 > 0.0 && wts.eps > 0.0))
    throw std::invalid_argument("Lyapunov weights must be positive");
  const auto F = cross_functionals(s, kappa);
  return wts.L1 * (E1(s, kappa) + E2(s, kappa) + wts.eps * s.params().tau * s.norm2(s.w, kappa)) +
         F.F1 + wts.L2 * F.F2;
}

double lyapunov(const StateVector& s, const SystemParams& p, int kappa, const LyapunovWeights& wts) {
  return lyapunov(Snapshot(s, p), kappa, wts);
}

double script_E1(const Snapshot& s, int kappa) {
  const double tau = s.params().tau;
  const auto pv = s.combo(s.psi, 1.0, s.v, tau);
  const auto vw = s.combo(s.v, 1.0, s.w, tau);
  return s.norm2(pv, kappa + 1) + s.norm2(vw, kappa) + s.norm2(s.v, kappa + 1) +
         s.history_norm2(Weight::minus_dg, kappa + 1);
}

double script_E2(const Snapshot& s, int kappa) { return script_E1(s, kappa + 1); }

ScriptValues script_functionals(const Snapshot& s, int kappa) {
  const double tau = s.params().tau;
  const auto pv = s.combo(s.psi, 1.0, s.v, tau);
  const auto vw = s.combo(s.v, 1.0, s.w, tau);
  const double pv1 = s.norm2(pv, kappa + 1), pv2 = s.norm2(pv, kappa + 2);
  const double vw0 = s.norm2(vw, kappa), vw1 = s.norm2(vw, kappa + 1);
  const double v1 = s.norm2(s.v, kappa + 1), v2 = s.norm2(s.v, kappa + 2);
  const double e1 = s.history_norm2(Weight::minus_dg, kappa + 1);
  const double e2 = s.history_norm2(Weight::minus_dg, kappa + 2);
  const double w0 = s.norm2(s.w, kappa);
  ScriptValues out;
  out.E = pv1 + vw0 + v1 + e1 + w0 + pv2 + vw1 + v2 + e2;
  out.D = v1 + e1 + pv2 + vw1 + v2 + e2 + w0;
  return out;
}

ScriptValues script_functionals(const StateVector& s, const SystemParams& p, int kappa) {
  return script_functionals(Snapshot(s, p), kappa);
}

double lambda_instant(const StateVector& s) {
  const Grid& g = s.grid();
  const double e = (g.dim() - 2) / 2.0;
  const auto& B = g.bessel_weight(e);
  const auto& xi2 = g.xi_squared();
  std::vector<double> B1(B.size()), B2(B.size());
  for (std::size_t i = 0; i < B.size(); ++i) {
    B1[i] = xi2[i] * B[i];
    B2[i] = xi2[i] * xi2[i] * B[i];
  }
  const Spectrum ph = forward(s.psi), vh = forward(s.v), wh = forward(s.w);
  auto nrm = [&](const Spectrum& f, const std::vector<double>& wt) {
    return std::sqrt(std::max(0.0, spectral_inner(g, f, f, wt)));
  };
  double out = max_norm(s.v) + max_norm(gradient(s.v)) + max_norm(s.w) + max_norm(gradient(s.psi));
  out += nrm(ph, B1) + nrm(ph, B2) + nrm(vh, B) + nrm(vh, B1) + nrm(wh, B);
  return out;
}

NonlinearPairings nonlinear_pairings(const StateVector& s, const SystemParams& p, int kappa) {
  const auto F = nonlinearity_kappa(s, p.k, kappa);
  const double tau = p.tau;
  Field vw = s.v;
  vw.axpy(tau, s.w);
  Field pv = s.psi;
  pv.axpy(tau, s.v);
  NonlinearPairings out;
  out.e1 = std::abs(pair_tensor(F, vw, kappa, false));
  out.e2 = std::abs(pair_tensor(F, vw, kappa, true));
  out.w = std::abs(pair_tensor(F, s.w, kappa, false));
  const double f_pv = std::abs(pair_tensor(F, pv, kappa, true));
  const double f_v = tau * std::abs(pair_tensor(F, s.v, kappa, true));
  out.lyap = out.e1 + out.e2 + out.w + f_pv + f_v;
  return out;
}

Sample measure(const StateVector& s, const SystemParams& params, int p, bool nonlinear, double t) {
  if (p < 0) throw std::invalid_argument("derivative order p must be nonnegative");
  const Snapshot S(s, params);
  const double tau = params.tau;
  const auto pv = S.combo(S.psi, 1.0, S.v, tau);
  Sample out;
  out.t = t;
  out.order.resize(p + 1);
  for (int k = 0; k <= p; ++k) {
    OrderSample& o = out.order[k];
    o.E1 = E1(S, k);
    o.E2 = E2(S, k);
    const auto F = cross_functionals(S, k);
    o.F1 = F.F1;
    o.F2 = F.F2;
    o.W = S.norm2(S.w, k);
    const auto sc = script_functionals(S, k);
    o.scriptE = sc.E;
    o.scriptD = sc.D;
    o.scriptE2 = script_E2(S, k);
    o.v1 = S.norm2(S.v, k + 1);
    o.v2 = S.norm2(S.v, k + 2);
    o.eta1 = S.history_norm2(Weight::minus_dg, k + 1);
    o.eta2 = S.history_norm2(Weight::minus_dg, k + 2);
    o.eta2g = S.history_norm2(Weight::g, k + 2);
    o.pv2 = S.norm2(pv, k + 2);
    if (nonlinear && params.k != 0.0) o.rhs = nonlinear_pairings(s, params, k);
  }
  out.lambda = lambda_instant(s);
  out.l2_psi = l2_norm(s.psi);
  out.l2_v = l2_norm(s.v);
  out.l2_w = l2_norm(s.w);
  return out;
}

Recorder::Recorder(const SystemParams& params, int p, bool nonlinear) {
  report_.p = p;
  report_.nonlinear = nonlinear;
  report_.params = params;
}

void Recorder::operator()(double t, const StateVector& s) {
  report_.samples.push_back(measure(s, report_.params, report_.p, report_.nonlinear, t));
}

Observer Recorder::observer() {
  return [this](double t, const StateVector& s) { (*this)(t, s); };
}

TrajectoryNorms trajectory_norms(const EnergyReport& report, int p) {
  if (report.samples.empty()) throw std::invalid_argument("empty trajectory");
  if (p < 0 || p > report.p) throw std::invalid_argument("order p not recorded");
  TrajectoryNorms out;
  double sup = 0.0, integral = 0.0, prev_d = 0.0, prev_t = 0.0;
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const Sample& s = report.samples[i];
    double e = 0.0, d = 0.0;
    for (int k = 0; k <= p; ++k) {
      e += s.order[k].scriptE;
      d += s.order[k].scriptD;
    }
    sup = i == 0 ? e : std::max(sup, e);
    if (i > 0) integral += 0.5 * (d + prev_d) * (s.t - prev_t);
    prev_d = d;
    prev_t = s.t;
    out.t.push_back(s.t);
    out.E.push_back(sup);
    out.D.push_back(integral);
  }
  return out;
}

double lambda_sup(const EnergyReport& report, double t) {
  double out = 0.0;
  for (const auto& s : report.samples)
    if (s.t <= t) out = std::max(out, s.lambda);
  return out;
}

double lyapunov_value(const OrderSample& o, double tau, const LyapunovWeights& wts) {
  return wts.L1 * (o.E1 + o.E2 + wts.eps * tau * o.W) + o.F1 + wts.L2 * o.F2;
}

}  // namespace jmgt::energy
