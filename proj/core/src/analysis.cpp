#include "jmgt/analysis.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace jmgt::analysis {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const HistoryField& require_history(const StateVector& s, const char* what) {
  const auto* h = s.dafermos();
  if (!h) throw std::invalid_argument(std::string(what) + " needs a resolved (dafermos) history");
  return *h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Random data

Field random_field(const Grid& grid, std::mt19937_64& rng, int kmax, double amplitude) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int dim = grid.dim();
  Field out(grid);
  std::array<int, 3> k{0, 0, 0};
  const int span = 2 * kmax + 1;
  int total = 1;
  for (int a = 0; a < dim; ++a) total *= span;
  for (int code = 0; code < total; ++code) {
    int c = code;
    for (int a = dim - 1; a >= 0; --a) {
      k[a] = c % span - kmax;
      c /= span;
    }
    // one representative of each +-k pair, skipping k = 0
    int first = 0;
    for (int a = 0; a < dim; ++a)
      if (k[a] != 0) {
        first = k[a];
        break;
      }
    if (first <= 0) continue;
    double k2 = 0.0;
    for (int a = 0; a < dim; ++a) k2 += static_cast<double>(k[a] * k[a]);
    const double scale = amplitude / (1.0 + k2);
    const double ca = scale * normal(rng), sa = scale * normal(rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double ph = 0.0;
      for (int a = 0; a < dim; ++a)
        ph += 2.0 * std::numbers::pi * k[a] * grid.coordinate(i, a) / grid.length(a);
      out[i] += ca * std::cos(ph) + sa * std::sin(ph);
    }
  }
  return out;
}

StateVector random_domain_state(const Grid& grid, std::shared_ptr<const HistoryQuadrature> quad,
                                std::mt19937_64& rng, const RandomStateOptions& opt) {
  std::uniform_real_distribution<double> expo(-1.5, 1.5);
  const auto amp = [&] { return opt.amplitude * std::pow(10.0, expo(rng)); };
  StateVector s(grid);
  s.psi = random_field(grid, rng, opt.kmax, amp());
  s.v = random_field(grid, rng, opt.kmax, amp());
  s.w = random_field(grid, rng, opt.kmax, amp());
  HistoryField h(grid, std::move(quad));
  auto& z = h.smooth();
  for (int l = 0; l < opt.history_profiles; ++l) {
    const Field a = random_field(grid, rng, opt.kmax, amp());
    const double rate = 0.25 * std::pow(4.0, l);
    for (std::size_t j = 1; j < z.size(); ++j) {
      const double s_j = h.s(j);
      z[j].axpy((1.0 - std::exp(-s_j)) * std::exp(-rate * s_j), a);
    }
  }
  s.history = std::move(h);
  return s;
}

StateVector resolve_jump(const StateVector& s) {
  StateVector out = s;
  if (auto* h = out.dafermos(); h && h->has_jump()) {
    auto& z = h->smooth();
    for (std::size_t j = 0; j < z.size(); ++j)
      if (h->beyond_front(j)) z[j] += h->jump();
    h->clear_jump();
  }
  return out;
}

StateVector difference(const StateVector& a, const StateVector& b) {
  if (a.mode() != b.mode()) throw std::invalid_argument("states have different memory modes");
  const auto* ha = a.dafermos();
  const auto* hb = b.dafermos();
  bool same_jump = false;
  if (ha && hb && ha->has_jump() && hb->has_jump() && ha->front() == hb->front())
    same_jump = ha->jump().values() == hb->jump().values();
  StateVector out = same_jump ? a : resolve_jump(a);
  const StateVector rb = same_jump ? b : resolve_jump(b);
  out.psi -= rb.psi;
  out.v -= rb.v;
  out.w -= rb.w;
  if (auto* h = out.dafermos()) {
    auto& z = h->smooth();
    const auto& zb = rb.dafermos()->smooth();
    for (std::size_t j = 0; j < z.size(); ++j) z[j] -= zb[j];
    h->clear_jump();
  } else if (auto* c = out.closure()) {
    c->M -= rb.closure()->M;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dissipation checks

std::string to_string(Check c) {
  switch (c) {
    case Check::E1:
      return "E1";
    case Check::E2:
      return "E2";
    case Check::W:
      return "W";
    case Check::Lyapunov:
      return "Lyapunov";
  }
  return "?";
}

namespace {

// Mean of f over [t_j, t_{j+1}]: fourth-order four-point rule
// (-f_{j-1} + 13 f_j + 13 f_{j+1} - f_{j+2}) / 24 on uniform interior
// intervals, trapezoid otherwise.
template <class F>
double interval_mean(const std::vector<energy::Sample>& S, std::size_t j, F f) {
  const double a = f(S[j].order), b = f(S[j + 1].order);
  if (j >= 1 && j + 2 < S.size()) {
    const double h = S[j + 1].t - S[j].t;
    const bool uniform = std::abs(S[j].t - S[j - 1].t - h) <= 1e-9 * h &&
                         std::abs(S[j + 2].t - S[j + 1].t - h) <= 1e-9 * h;
    if (uniform) return (-f(S[j - 1].order) + 13.0 * (a + b) - f(S[j + 2].order)) / 24.0;
  }
  return 0.5 * (a + b);
}

double lyapunov_margin(const energy::EnergyReport& rep, int kappa,
                       const energy::LyapunovWeights& wts) {
  const double tau = rep.params.tau;
  const double C = wts.L1 * (1.0 + wts.eps) + 1.0 + wts.L2;
  double theta = kInf;
  for (std::size_t j = 0; j + 1 < rep.samples.size(); ++j) {
    const auto& a = rep.samples[j].order[kappa];
    const auto& b = rep.samples[j + 1].order[kappa];
    const double dt = rep.samples[j + 1].t - rep.samples[j].t;
    if (!(dt > 0.0)) continue;
    const double dL =
        (energy::lyapunov_value(b, tau, wts) - energy::lyapunov_value(a, tau, wts)) / dt;
    const double D = interval_mean(rep.samples, j, [&](const auto& o) {
      return o[kappa].v1 + o[kappa].eta1 + o[kappa].scriptE2 + o[kappa].W;
    });
    const double R = interval_mean(rep.samples, j, [&](const auto& o) { return o[kappa].rhs.lyap; });
    if (D <= 0.0) {
      if (-dL - C * R < 0.0) return -kInf;
      continue;
    }
    theta = std::min(theta, (-dL - C * R) / D);
  }
  return theta;
}

}  // namespace

DissipationVerdict verify_dissipation(const energy::EnergyReport& rep, Check which,
                                      const DissipationOptions& opt) {
  if (opt.kappa < 0 || opt.kappa > rep.p)
    throw std::invalid_argument("trajectory lacks the requested derivative order");
  DissipationVerdict out;
  out.check = which;
  const auto& S = rep.samples;
  const int k = opt.kappa;
  const double tau = rep.params.tau;
  const double coef = rep.params.b - tau * rep.params.c2;

  if (which == Check::E1 || which == Check::E2) {
    out.coefficient = coef;
    const auto phi = [&](const energy::OrderSample& o) { return which == Check::E1 ? o.E1 : o.E2; };
    const auto diss = [&](const energy::OrderSample& o) {
      return which == Check::E1 ? coef * o.v1 + 0.5 * o.eta1 : coef * o.v2 + 0.5 * o.eta2;
    };
    const auto rhs = [&](const energy::OrderSample& o) {
      return which == Check::E1 ? o.rhs.e1 : o.rhs.e2;
    };
    out.tolerance = S.empty() ? 0.0 : opt.rel_tol * std::abs(phi(S.front().order[k]));
    for (std::size_t j = 0; j + 1 < S.size(); ++j) {
      const auto& a = S[j].order[k];
      const auto& b = S[j + 1].order[k];
      const double dt = S[j + 1].t - S[j].t;
      if (!(dt > 0.0)) continue;
      const double excess = (phi(b) - phi(a)) / dt +
                            interval_mean(S, j, [&](const auto& o) { return diss(o[k]); }) -
                            interval_mean(S, j, [&](const auto& o) { return rhs(o[k]); });
      if (phi(b) > phi(a)) out.increased = true;
      if (excess > out.violation) {
        out.violation = excess;
        out.time = S[j].t;
      }
    }
    out.pass = out.violation <= out.tolerance;
    if (!out.pass) out.reason = "discrete inequality violated";
    if (coef < 0.0) {
      out.pass = false;
      if (!out.reason.empty()) out.reason += "; ";
      out.reason += "negative damping coefficient b - tau c^2";
      if (out.increased) out.reason += "; functional grows";
    }
    return out;
  }

  if (which == Check::W) {
    double C = 0.0;
    out.tolerance = S.empty() ? 0.0 : opt.rel_tol * S.front().order[k].W;
    for (std::size_t j = 0; j + 1 < S.size(); ++j) {
      const auto& a = S[j].order[k];
      const auto& b = S[j + 1].order[k];
      const double dt = S[j + 1].t - S[j].t;
      if (!(dt > 0.0)) continue;
      const double lhs =
          0.5 * (b.W - a.W) / dt + 0.5 * interval_mean(S, j, [&](const auto& o) { return o[k].W; });
      const double rhs = interval_mean(S, j, [&](const auto& o) {
        return o[k].pv2 + o[k].v2 + o[k].eta2g + o[k].rhs.w;
      });
      if (lhs <= out.tolerance) continue;
      if (rhs <= 0.0) {
        C = kInf;
        out.time = S[j].t;
        break;
      }
      if (lhs / rhs > C) {
        C = lhs / rhs;
        out.time = S[j].t;
      }
    }
    out.constant = C;
    out.pass = std::isfinite(C);
    if (!out.pass) out.reason = "left side positive with vanishing right side";
    return out;
  }

  // Lyapunov: grid search for the weights maximising the decay margin theta
  // in dL/dt + theta D_L <= C * rhs.
  std::vector<energy::LyapunovWeights> cands;
  if (opt.fit_weights) {
    for (double L1 : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0})
      for (double L2 : {0.25, 0.5, 1.0, 2.0, 4.0})
        for (double eps : {0.01, 0.03, 0.1, 0.3}) cands.push_back({L1, L2, eps});
  } else {
    cands.push_back(opt.weights);
  }
  double best = -kInf;
  for (const auto& w : cands) {
    const double th = lyapunov_margin(rep, k, w);
    if (th > best) {
      best = th;
      out.weights = w;
    }
  }
  if (best == kInf) best = 0.0;  // no interval with dissipation (zero trajectory)
  out.constant = best;
  out.pass = best > 0.0 || (best == 0.0 && S.size() <= 1) ||
             (best == 0.0 && S.front().order[k].scriptE == 0.0);
  if (!out.pass) {
    out.violation = -best;
    out.reason = "no admissible weights give decay";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generator and resolvent

StateVector apply_generator(const StateVector& s, const SystemParams& params) {
  if (s.mode() == MemoryMode::closure)
    throw std::invalid_argument("generator needs a resolved history");
  const StateVector r = resolve_jump(s);
  const double tau = params.tau;
  const bool memory = r.mode() == MemoryMode::dafermos;
  const double cg2 = memory ? params.cg2() : params.c2;
  StateVector out = zeros_like(r);
  out.psi = r.v;
  out.v = r.w;
  Field inner = cg2 * r.psi;
  inner.axpy(params.b, r.v);
  if (memory) inner += r.dafermos()->memory_integral();
  Field w = laplacian(inner);
  w -= r.w;
  w.axpy(-(params.b - tau * cg2), r.v);
  w *= 1.0 / tau;
  out.w = std::move(w);
  if (memory) {
    const auto& z = r.dafermos()->smooth();
    auto& o = out.dafermos()->smooth();
    const double inv = 1.0 / r.dafermos()->ds();
    o[0].fill(0.0);
    for (std::size_t j = 1; j < z.size(); ++j) {
      Field e = r.v;
      e.axpy(-inv, z[j]);
      e.axpy(inv, z[j - 1]);
      o[j] = std::move(e);
    }
  }
  return out;
}

GeneratorReport generator_dissipativity(const SystemParams& params, const Grid& grid,
                                        const HistoryConfig& hist, int m, int samples,
                                        std::uint64_t seed) {
  params.validate(false);
  const auto quad = make_quadrature(params.kernel, hist);
  std::mt19937_64 rng(seed);
  GeneratorReport rep;
  rep.seed = seed;
  rep.worst_ratio = -kInf;
  for (int i = 0; i < samples; ++i) {
    StateVector s = random_domain_state(grid, quad, rng);
    if (i % 4 == 3) {
      s.psi.fill(0.0);
      s.v.fill(0.0);
      s.w.fill(0.0);
    }
    const double n2 = energy::problem_inner(s, s, params, m);
    const double val = energy::problem_inner(apply_generator(s, params), s, params, m);
    const double ratio = n2 > 0.0 ? val / n2 : 0.0;
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_value = val;
    }
    ++rep.samples;
  }
  if (rep.samples == 0) rep.worst_ratio = 0.0;
  return rep;
}

MemoryKernel concave_kernel(double mass_scale, double s_max, int points) {
  const double A = mass_scale / std::sqrt(std::numbers::pi / 2.0);
  std::vector<double> s(points), g(points);
  for (int i = 0; i < points; ++i) {
    s[i] = s_max * i / (points - 1);
    g[i] = A * std::exp(-0.5 * s[i] * s[i]);
  }
  return MemoryKernel::tabulated(std::move(s), std::move(g));
}

ResolventCoefficients resolvent_coefficients(const SystemParams& params,
                                             const HistoryQuadrature& quad) {
  ResolventCoefficients c;
  const double cg2 = params.cg2();
  const auto& W = quad.weights(Weight::g);
  const double ds = quad.ds();
  double a = 0.0, sum = 0.0;
  for (std::size_t j = 1; j < W.size(); ++j) {
    a = (a + ds) / (1.0 + ds);
    sum += W[j] * a;
  }
  c.nu = params.b + cg2 + sum;
  const auto f = [&](double s) { return params.kernel.g(s) * (1.0 - std::exp(-s)); };
  c.nu_continuous =
      params.b + cg2 +
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, quad.s_max(), 15, 1e-12);
  c.sigma = 1.0 + params.tau + (params.b - params.tau * cg2);
  return c;
}

Field solve_elliptic(double nu, double sigma, const Field& q) {
  if (!(sigma > 0.0) || !(nu >= 0.0)) throw std::invalid_argument("elliptic problem is not coercive");
  const Grid& g = q.grid();
  Spectrum qh = forward(q);
  const auto& xi2 = g.xi_squared();
  for (std::size_t i = 0; i < qh.size(); ++i) qh[i] /= nu * xi2[i] + sigma;
  return inverse(g, qh);
}

StateVector resolvent_solve(const SystemParams& params, const StateVector& F) {
  const StateVector Fr = resolve_jump(F);
  const HistoryField& hp = require_history(Fr, "resolvent solve");
  const HistoryQuadrature& quad = hp.quadrature();
  const auto coef = resolvent_coefficients(params, quad);
  if (!(coef.sigma > 0.0)) throw std::logic_error("sigma must be positive for admissible parameters");
  const double cg2 = params.cg2();
  const double tau = params.tau;
  const double ds = quad.ds();
  const auto& W = quad.weights(Weight::g);
  const Grid& grid = F.grid();
  const auto& p = hp.smooth();

  // eta_j = a_j v + pi_j from the backward-difference transport with eta_0 = 0
  std::vector<double> a(p.size(), 0.0);
  std::vector<Field> pi(p.size(), Field(grid));
  Field mem(grid);
  for (std::size_t j = 1; j < p.size(); ++j) {
    a[j] = (a[j - 1] + ds) / (1.0 + ds);
    pi[j] = pi[j - 1];
    pi[j].axpy(ds, p[j]);
    pi[j] *= 1.0 / (1.0 + ds);
    mem.axpy(W[j], pi[j]);
  }
  Field q = laplacian(cg2 * Fr.psi + mem);
  q.axpy(1.0 + tau, Fr.v);
  q.axpy(tau, Fr.w);
  const Field v = solve_elliptic(coef.nu, coef.sigma, q);

  StateVector out = zeros_like(Fr);
  out.v = v;
  out.psi = v + Fr.psi;
  out.w = v - Fr.v;
  auto& z = out.dafermos()->smooth();
  z[0].fill(0.0);
  for (std::size_t j = 1; j < z.size(); ++j) {
    z[j] = pi[j];
    z[j].axpy(a[j], v);
  }
  return out;
}

double resolvent_residual(const SystemParams& params, const StateVector& psi, const StateVector& F,
                          int m) {
  const StateVector R = difference(difference(psi, apply_generator(psi, params)), resolve_jump(F));
  const double nf = energy::standard_norm(F, params, m);
  const double nr = energy::standard_norm(R, params, m);
  return nf > 0.0 ? nr / nf : nr;
}

// ---------------------------------------------------------------------------
// Picard

namespace {

struct LinearRun {
  std::vector<Field> nonlinear;      // F(Phi(t_i)) for every step
  std::vector<StateVector> strided;  // states at t = i * stride * dt and at T
};

LinearRun run_linear(const SystemParams& params, const StateVector& initial, const RhsConfig& cfg,
                     long K, double dt, int stride, const std::vector<Field>* forcing) {
  Source src;
  if (forcing) {
    src = [forcing, dt, K](double t) {
      const auto& F = *forcing;
      const long deg = std::min<long>(3, K);
      long i0 = static_cast<long>(std::floor(t / dt)) - 1;
      i0 = std::clamp<long>(i0, 0, K - deg);
      Field out(F[0].grid());
      for (long a = i0; a <= i0 + deg; ++a) {
        double L = 1.0;
        for (long b = i0; b <= i0 + deg; ++b)
          if (b != a) L *= (t - b * dt) / ((a - b) * dt);
        out.axpy(L, F[a]);
      }
      return out;
    };
  }
  LinearRun run;
  StateVector y = initial;
  const auto record = [&](long i, const StateVector& s) {
    run.nonlinear.push_back(nonlinearity(s, params.k));
    if (i % stride == 0 || i == K) run.strided.push_back(s);
  };
  record(0, y);
  for (long i = 1; i <= K; ++i) {
    y = step(y, params, cfg, dt, (i - 1) * dt, forcing ? &src : nullptr);
    record(i, y);
  }
  return run;
}

}  // namespace

PicardResult picard_solve(const SystemParams& params, const StateVector& initial,
                          const PicardOptions& opt) {
  if (initial.mode() == MemoryMode::closure)
    throw std::invalid_argument("Picard iteration needs a resolved history");
  params.validate(initial.mode() == MemoryMode::none);
  if (!(opt.dt > 0.0) || !(opt.T > 0.0)) throw std::invalid_argument("T and dt must be positive");
  const long K = std::lround(opt.T / opt.dt);
  const RhsConfig cfg{initial.mode(), false, false, opt.transport};
  PicardResult res;
  LinearRun prev = run_linear(params, initial, cfg, K, opt.dt, opt.norm_stride, nullptr);
  for (int n = 1; n <= opt.max_iter; ++n) {
    LinearRun next = run_linear(params, initial, cfg, K, opt.dt, opt.norm_stride, &prev.nonlinear);
    double diff = 0.0;
    for (std::size_t i = 0; i < next.strided.size(); ++i)
      diff = std::max(diff, energy::standard_norm(difference(next.strided[i], prev.strided[i]),
                                                  params, opt.m));
    res.differences.push_back(diff);
    res.iterations = n;
    const std::size_t d = res.differences.size();
    if (d >= 2 && res.differences[d - 2] > 0.0) res.q = diff / res.differences[d - 2];
    prev = std::move(next);
    if (!std::isfinite(diff)) {
      res.message = "iterates are not finite";
      break;
    }
    if (diff <= opt.tol) {
      res.converged = true;
      res.message = "converged";
      break;
    }
    if (d >= 3 && res.q >= 1.0 && res.differences[d - 2] >= res.differences[d - 3]) {
      res.message = "no contraction (q >= 1)";
      break;
    }
  }
  if (!res.converged && res.message.empty()) res.message = "iteration limit reached";
  res.final_state = prev.strided.back();
  for (std::size_t i = 0; i < prev.strided.size(); ++i)
    res.times.push_back(std::min<double>(static_cast<double>(i) * opt.norm_stride, K) * opt.dt);
  res.trajectory = std::move(prev.strided);
  return res;
}

// ---------------------------------------------------------------------------
// Scalar utilities

StraussResult strauss_bound(double C1, double C2, double kappa) {
  if (!(kappa > 1.0)) throw std::invalid_argument("Strauss exponent must exceed 1");
  if (!(C1 > 0.0) || !(C2 > 0.0)) throw std::invalid_argument("Strauss constants must be positive");
  StraussResult r;
  const double e = 1.0 / (kappa - 1.0);
  r.lhs = C1 * std::pow(C2, e);
  r.threshold = (1.0 - 1.0 / kappa) * std::pow(kappa, -e);
  r.feasible = r.lhs < r.threshold;
  r.bound = C1 / (1.0 - 1.0 / kappa);
  return r;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 4) throw std::invalid_argument("series too short");
  const std::size_t start = t.size() / 2;
  const std::size_t n = t.size() - start;
  double sx = 0, sy = 0;
  for (std::size_t i = start; i < t.size(); ++i) {
    if (!(y[i] > 0.0)) throw std::invalid_argument("non-positive value in the fitted tail");
    sx += t[i];
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = start; i < t.size(); ++i) {
    const double dx = t[i] - mx, dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw std::invalid_argument("degenerate time samples");
  const double slope = sxy / sxx;
  DecayFit f;
  f.rate = -slope;
  f.intercept = my - slope * mx;
  const double ssres = std::max(0.0, syy - slope * sxy);
  f.r2 = syy > 0.0 ? 1.0 - ssres / syy : 1.0;
  return f;
}

// ---------------------------------------------------------------------------
// Commutators and equivalence

std::vector<Field> commutator(const Field& f, const Field& g, int kappa) {
  if (kappa < 1 || kappa > 2) throw std::invalid_argument("commutator order must be 1 or 2");
  auto out = partials_tensor(hadamard(f, g), kappa);
  const auto dg = partials_tensor(g, kappa);
  for (std::size_t a = 0; a < out.size(); ++a) out[a] -= hadamard(f, dg[a]);
  return out;
}

CommutatorReport commutator_probe(const Grid& grid, int kappa, int samples, std::uint64_t seed,
                                  int kmax) {
  std::mt19937_64 rng(seed);
  CommutatorReport r;
  for (int i = 0; i < samples; ++i) {
    const Field f = random_field(grid, rng, kmax);
    const Field g = random_field(grid, rng, kmax);
    const double Df = l2_norm(partials_tensor(f, kappa));
    const double Dg = l2_norm(partials_tensor(g, kappa));
    const double fi = max_norm(f), gi = max_norm(g);
    const double prod = fi * Dg + gi * Df;
    if (prod > 0.0)
      r.product_ratio =
          std::max(r.product_ratio, l2_norm(partials_tensor(hadamard(f, g), kappa)) / prod);
    const double lower = kappa == 1 ? l2_norm(g) : l2_norm(gradient(g));
    const double comm = max_norm(gradient(f)) * lower + gi * Df;
    if (comm > 0.0) r.commutator_ratio = std::max(r.commutator_ratio, l2_norm(commutator(f, g, kappa)) / comm);
    ++r.samples;
  }
  return r;
}

EquivalenceReport norm_equivalence(const SystemParams& params, const Grid& grid,
                                   const HistoryConfig& hist, int m, int samples,
                                   std::uint64_t seed) {
  params.validate(false);
  const auto quad = make_quadrature(params.kernel, hist);
  std::mt19937_64 rng(seed);
  EquivalenceReport r;
  r.C1 = kInf;
  for (int i = 0; i < samples; ++i) {
    const StateVector s = random_domain_state(grid, quad, rng);
    const double ratio = energy::problem_norm(s, params, m) / energy::standard_norm(s, params, m);
    r.C1 = std::min(r.C1, ratio);
    r.C2 = std::max(r.C2, ratio);
    ++r.samples;
  }
  if (r.samples == 0) r.C1 = 0.0;
  return r;
}

double lyapunov_positivity_threshold(const SystemParams& params, const Grid& grid,
                                     const HistoryConfig& hist, int kappa, double L2, double eps,
                                     const std::vector<double>& candidates, int samples,
                                     std::uint64_t seed) {
  params.validate(false);
  const auto quad = make_quadrature(params.kernel, hist);
  std::mt19937_64 rng(seed);
  std::vector<energy::OrderSample> vals;
  for (int i = 0; i < samples; ++i) {
    const StateVector s = random_domain_state(grid, quad, rng);
    vals.push_back(energy::measure(s, params, kappa, false, 0.0).order[kappa]);
  }
  std::vector<double> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  for (double L1 : sorted) {
    const energy::LyapunovWeights w{L1, L2, eps};
    bool ok = true;
    for (const auto& o : vals)
      if (energy::lyapunov_value(o, params.tau, w) < 0.0) {
        ok = false;
        break;
      }
    if (ok) return L1;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Convergence

namespace {

Field run_manufactured(const SystemParams& params, const ManufacturedSolution& ms, double T,
                       double dt, MemoryMode mode, bool nonlinear, const HistoryConfig& hist) {
  HistoryConfig h = hist;
  h.mode = mode;
  StateVector y = init_state(params, ms.psi(0.0), ms.psi_t(0.0), ms.psi_tt(0.0), h);
  const RhsConfig cfg{mode, nonlinear, false, Transport::upwind};
  const Source src = [&](double t) { return manufactured_residual(ms, params, t, nonlinear); };
  const long K = std::lround(T / dt);
  for (long i = 0; i < K; ++i) y = step(y, params, cfg, dt, i * dt, &src);
  return y.psi;
}

}  // namespace

std::vector<ConvergenceRow> temporal_convergence(const SystemParams& params, const Field& X,
                                                 double T, const std::vector<double>& dts,
                                                 MemoryMode mode, bool nonlinear,
                                                 const HistoryConfig& hist) {
  const ManufacturedSolution ms{X, 1.0, 0.0};
  const Field exact = ms.psi(T);
  const double scale = l2_norm(exact);
  std::vector<ConvergenceRow> rows;
  for (double dt : dts) {
    const Field psi = run_manufactured(params, ms, T, dt, mode, nonlinear, hist);
    ConvergenceRow r;
    r.h = dt;
    r.error = l2_norm(psi - exact) / (scale > 0.0 ? scale : 1.0);
    if (!rows.empty() && r.error > 0.0) r.ratio = rows.back().error / r.error;
    rows.push_back(r);
  }
  return rows;
}

std::vector<ConvergenceRow> spatial_convergence(
    const SystemParams& params, const std::function<double(const std::array<double, 3>&)>& X,
    int dim, double length, const std::vector<int>& ns, int n_ref, double T, double dt,
    MemoryMode mode, bool nonlinear) {
  const Grid fine(dim, n_ref, length);
  const ManufacturedSolution ms_ref{Field::from_function(fine, X), 1.0, 0.0};
  std::vector<ConvergenceRow> rows;
  for (int n : ns) {
    if (n_ref % n != 0) throw std::invalid_argument("reference resolution must be a multiple");
    const Grid g(dim, n, length);
    const int r = n_ref / n;
    std::vector<std::size_t> map(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::size_t idx = 0;
      for (int a = 0; a < dim; ++a)
        idx = idx * static_cast<std::size_t>(n_ref) + static_cast<std::size_t>(g.index(i, a) * r);
      map[i] = idx;
    }
    const auto restrict_to = [&](const Field& f) {
      Field out(g);
      for (std::size_t i = 0; i < g.size(); ++i) out[i] = f[map[i]];
      return out;
    };
    // Source from the resolved grid, so the coarse run sees the continuous
    // residual rather than its own discrete one.
    const ManufacturedSolution ms{Field::from_function(g, X), 1.0, 0.0};
    HistoryConfig h;
    h.mode = mode;
    StateVector y = init_state(params, ms.psi(0.0), ms.psi_t(0.0), ms.psi_tt(0.0), h);
    const RhsConfig cfg{mode, nonlinear, false, Transport::upwind};
    const Source src = [&](double t) {
      return restrict_to(manufactured_residual(ms_ref, params, t, nonlinear));
    };
    const long K = std::lround(T / dt);
    for (long i = 0; i < K; ++i) y = step(y, params, cfg, dt, i * dt, &src);
    const Field exact = ms.psi(T);
    const double scale = max_norm(exact);
    ConvergenceRow row;
    row.h = n;
    row.error = max_norm(y.psi - exact) / (scale > 0.0 ? scale : 1.0);
    if (!rows.empty() && row.error > 0.0) row.ratio = rows.back().error / row.error;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Global boundedness

GlobalBoundReport global_bound_experiment(const SystemParams& params, const Field& psi0,
                                          const Field& psi1, const Field& psi2, double energy,
                                          const GlobalBoundOptions& opt) {
  if (energy < 0.0) throw std::invalid_argument("data energy must be nonnegative");
  GlobalBoundReport rep;
  HistoryConfig hist = opt.hist;
  const auto quad = hist.mode == MemoryMode::dafermos ? make_quadrature(params.kernel, hist) : nullptr;
  const StateVector unit = init_state(params, psi0, psi1, psi2, hist.mode, quad);
  double e_unit = 0.0;
  if (hist.mode == MemoryMode::closure)
    throw std::invalid_argument("boundedness experiment needs a resolved history");
  {
    const auto s = energy::measure(unit, params, opt.p, false, 0.0);
    for (const auto& o : s.order) e_unit += o.scriptE;
  }
  rep.scale = (energy > 0.0 && e_unit > 0.0) ? std::sqrt(energy / e_unit) : 0.0;
  StateVector y0 =
      init_state(params, rep.scale * psi0, rep.scale * psi1, rep.scale * psi2, hist.mode, quad);

  energy::Recorder rec(params, opt.p, false);
  const RhsConfig cfg{hist.mode, opt.nonlinear, false, opt.transport};
  const auto res = simulate(y0, params, cfg, opt.T, opt.dt, rec.observer(), opt.stride, nullptr,
                            opt.blowup_factor);
  const auto tn = energy::trajectory_norms(rec.report(), opt.p);
  rep.t = tn.t;
  for (std::size_t i = 0; i < tn.t.size(); ++i)
    rep.norm.push_back(std::sqrt(tn.E[i]) + std::sqrt(tn.D[i]));
  for (std::size_t i = 0; i < rep.t.size(); ++i)
    if (rep.t[i] >= 1.0 - 1e-12) {
      rep.norm_at_1 = rep.norm[i];
      break;
    }
  for (double v : rep.norm) rep.max_norm = std::max(rep.max_norm, v);

  if (res.blew_up) {
    rep.verdict = "growth";
    rep.reason = res.reason;
  } else if (rep.max_norm <= 2.0 * rep.norm_at_1 || rep.max_norm == 0.0) {
    rep.verdict = "bounded";
  } else {
    rep.verdict = "growth";
    rep.reason = "norm exceeded twice its value at t = 1";
  }

  // Bootstrap y <= a + b y^{3/2} with a = y(0).
  rep.boot_a = rep.norm.empty() ? 0.0 : rep.norm.front();
  for (double v : rep.norm)
    if (v > 0.0) rep.boot_b = std::max(rep.boot_b, (v - rep.boot_a) / std::pow(v, 1.5));
  if (rep.boot_a > 0.0) {
    if (rep.boot_b > 0.0) {
      rep.strauss = strauss_bound(rep.boot_a, rep.boot_b, 1.5);
    } else {
      rep.strauss.feasible = true;
      rep.strauss.bound = 3.0 * rep.boot_a;
    }
    rep.within_strauss = rep.strauss.feasible && rep.max_norm < rep.strauss.bound;
  } else {
    rep.within_strauss = rep.max_norm == 0.0;
  }
  return rep;
}

SweepReport epsilon_sweep(const SystemParams& params, const Field& psi0, const Field& psi1,
                          const Field& psi2, const std::vector<double>& energies,
                          const GlobalBoundOptions& opt, int bisection_steps) {
  SweepReport rep;
  std::vector<double> sorted = energies;
  std::sort(sorted.begin(), sorted.end());
  double last_bounded = -1.0, first_growth = -1.0;
  for (double e : sorted) {
    const auto r = global_bound_experiment(params, psi0, psi1, psi2, e, opt);
    rep.points.push_back({e, r.verdict});
    if (r.verdict == "growth") {
      if (first_growth < 0.0) first_growth = e;
    } else {
      if (first_growth >= 0.0) rep.monotone = false;
      last_bounded = e;
    }
  }
  if (first_growth > 0.0 && last_bounded > 0.0 && last_bounded < first_growth) {
    double lo = last_bounded, hi = first_growth;
    for (int i = 0; i < bisection_steps; ++i) {
      const double mid = std::sqrt(lo * hi);
      const auto r = global_bound_experiment(params, psi0, psi1, psi2, mid, opt);
      (r.verdict == "growth" ? hi : lo) = mid;
    }
    rep.threshold = std::sqrt(lo * hi);
  } else if (first_growth > 0.0) {
    rep.threshold = first_growth;
  }
  return rep;
}

}  // namespace jmgt::analysis
