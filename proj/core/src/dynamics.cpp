#include "jmgt/dynamics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <optional>

namespace jmgt {

std::string to_string(Transport t) {
  return t == Transport::upwind ? "upwind" : "characteristic";
}

namespace {

double effective_cg2(const StateVector& s, const SystemParams& p) {
  return s.mode() == MemoryMode::none ? p.c2 : p.cg2();
}

void check_finite(const Field& f, double t) {
  if (!f.finite()) throw BlowUpError("non-finite value in state", t);
}

// Third component of the derivative: (-w + Lap(cg2 psi + b v + M) + N + S) / tau.
Field w_rate(const Field& psi, const Field& v, const Field& w, const Field* M, double cg2,
             const SystemParams& p, const Field* N, const Field* S) {
  Field L = cg2 * psi;
  L.axpy(p.b, v);
  if (M) L += *M;
  Field out = laplacian(L);
  out -= w;
  if (N) out += *N;
  if (S) out += *S;
  out *= 1.0 / p.tau;
  return out;
}

Field nonlinear_term(const Field& psi, const Field& v, const Field& w, double k, bool dealias_on) {
  const Field vv = dealias_on ? dealias(v) : v;
  const Field ww = dealias_on ? dealias(w) : w;
  const Field pp = dealias_on ? dealias(psi) : psi;
  Field out = hadamard(vv, ww);
  out *= k;
  const auto gp = gradient(pp);
  const auto gv = gradient(vv);
  for (std::size_t a = 0; a < gp.size(); ++a) out += hadamard(gp[a], gv[a]);
  out *= 2.0;
  return dealias_on ? dealias(out) : out;
}

}  // namespace

Field memory_integral(const StateVector& state, const SystemParams& params) {
  (void)params;
  if (const auto* h = state.dafermos()) return h->memory_integral();
  if (const auto* c = state.closure()) {
    if (!params.kernel.is_exponential())
      throw std::invalid_argument("closure mode requires an exponential kernel");
    return c->M;
  }
  return Field(state.grid());
}

Field memory_term(const StateVector& state, const SystemParams& params) {
  return laplacian(memory_integral(state, params));
}

Field nonlinearity(const StateVector& state, double k, bool dealias_on) {
  return nonlinear_term(state.psi, state.v, state.w, k, dealias_on);
}

std::vector<Field> nonlinearity_kappa(const StateVector& s, double k, int kappa) {
  if (kappa < 0 || kappa > 2) throw std::invalid_argument("nonlinearity_kappa supports kappa <= 2");
  const Grid& g = s.grid();
  const int n = g.dim();
  if (kappa == 0) return {nonlinearity(s, k)};

  const auto dpsi = gradient(s.psi);
  const auto dv = gradient(s.v);
  const auto dw = gradient(s.w);
  const auto Hpsi = partials_tensor(s.psi, 2);
  const auto Hv = partials_tensor(s.v, 2);
  std::vector<Field> out;

  if (kappa == 1) {
    for (int i = 0; i < n; ++i) {
      // [d_i, v] w = (d_i v) w
      Field f = hadamard(dv[i], s.w);
      f += hadamard(s.v, dw[i]);
      f *= k;
      for (int j = 0; j < n; ++j) {
        // [d_i, grad psi] . grad v and grad psi . grad(d_i v)
        f += hadamard(Hpsi[i * n + j], dv[j]);
        f += hadamard(dpsi[j], Hv[j * n + i]);
      }
      f *= 2.0;
      out.push_back(std::move(f));
    }
    return out;
  }

  const auto Hw = partials_tensor(s.w, 2);
  // Third partials d_i d_l d_j as gradients of the Hessian entries.
  std::vector<std::vector<Field>> Tpsi, Tv;
  for (int il = 0; il < n * n; ++il) {
    Tpsi.push_back(gradient(Hpsi[il]));
    Tv.push_back(gradient(Hv[il]));
  }
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      // [d_i d_l, v] w
      Field f = hadamard(Hv[i * n + l], s.w);
      f += hadamard(dv[i], dw[l]);
      f += hadamard(dv[l], dw[i]);
      f += hadamard(s.v, Hw[i * n + l]);
      f *= k;
      for (int j = 0; j < n; ++j) {
        // [d_i d_l, grad psi] . grad v
        f += hadamard(Tpsi[i * n + l][j], dv[j]);
        f += hadamard(Hpsi[i * n + j], Hv[l * n + j]);
        f += hadamard(Hpsi[l * n + j], Hv[i * n + j]);
        // grad psi . grad(d_i d_l v)
        f += hadamard(dpsi[j], Tv[i * n + l][j]);
      }
      f *= 2.0;
      out.push_back(std::move(f));
    }
  }
  return out;
}

StateVector rhs(const StateVector& state, const SystemParams& params, const RhsConfig& config,
                const Field* source) {
  StateVector d = zeros_like(state);
  const double cg2 = effective_cg2(state, params);
  d.psi = state.v;
  d.v = state.w;

  std::optional<Field> M;
  if (state.mode() != MemoryMode::none) M = memory_integral(state, params);
  std::optional<Field> N;
  if (config.nonlinear) N = nonlinear_term(state.psi, state.v, state.w, params.k, config.dealias);
  d.w = w_rate(state.psi, state.v, state.w, M ? &*M : nullptr, cg2, params, N ? &*N : nullptr,
               source);

  if (auto* dh = d.dafermos()) {
    const auto& h = *state.dafermos();
    const auto& z = h.smooth();
    auto& dz = dh->smooth();
    const double inv = 1.0 / h.ds();
    const std::size_t size = state.grid().size();
    for (std::size_t j = 1; j < z.size(); ++j) {
      double* out = dz[j].data();
      const double* zj = z[j].data();
      const double* zm = z[j - 1].data();
      const double* v = state.v.data();
      for (std::size_t i = 0; i < size; ++i) out[i] = v[i] - (zj[i] - zm[i]) * inv;
    }
    dh->set_front(1.0);
  } else if (auto* dc = d.closure()) {
    const double tau_r = params.kernel.relaxation_time();
    dc->M = params.mass() * state.v;
    dc->M.axpy(-1.0 / tau_r, state.closure()->M);
  }
  check_finite(d.w, 0.0);
  return d;
}

namespace detail {

std::vector<double> gregory_weights(std::size_t points, double h) {
  std::vector<double> w(points, h);
  if (points == 0) return w;
  if (points == 1) return {0.0};
  if (points < 6) {
    // Trapezoid on short pieces.
    w.front() = w.back() = 0.5 * h;
    return w;
  }
  const double ends[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  for (int i = 0; i < 3; ++i) {
    w[i] = ends[i] * h;
    w[points - 1 - i] = ends[i] * h;
  }
  return w;
}

StateVector rk4(const StateVector& y, const SystemParams& params, const RhsConfig& config,
                double dt, double t, const Source* source) {
  const auto eval = [&](const StateVector& s, double time) {
    if (source) {
      const Field S = (*source)(time);
      return rhs(s, params, config, &S);
    }
    return rhs(s, params, config, nullptr);
  };
  const StateVector k1 = eval(y, t);
  StateVector tmp = y;
  axpy(tmp, 0.5 * dt, k1);
  const StateVector k2 = eval(tmp, t + 0.5 * dt);
  tmp = y;
  axpy(tmp, 0.5 * dt, k2);
  const StateVector k3 = eval(tmp, t + 0.5 * dt);
  tmp = y;
  axpy(tmp, dt, k3);
  const StateVector k4 = eval(tmp, t + dt);
  StateVector out = y;
  axpy(out, dt / 6.0, k1);
  axpy(out, dt / 3.0, k2);
  axpy(out, dt / 3.0, k3);
  axpy(out, dt / 6.0, k4);
  return out;
}

// Classical RK4 for an upwind-transported history, one sweep over the s-grid
// per stage. Matches rk4() with rhs() step for step.
StateVector rk4_upwind(const StateVector& y, const SystemParams& params, const RhsConfig& config,
                       double dt, double t, const Source* source) {
  const HistoryField& hy = *y.dafermos();
  const HistoryQuadrature& quad = hy.quadrature();
  const auto& W = quad.weights(Weight::g);
  const auto& zy = hy.smooth();
  const std::size_t nodes = zy.size();
  const std::size_t size = y.grid().size();
  const double inv = 1.0 / hy.ds();
  const double cg2 = params.cg2();

  constexpr std::size_t size_hint = 256;
  thread_local std::vector<double> scratch;
  scratch.assign(nodes * size, 0.0);

  StateVector out = y;
  auto& zo = out.dafermos()->smooth();
  Field psi = y.psi, v = y.v, w = y.w;
  Field M = hy.memory_integral();

  const double c_out[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
  const double a_next[3] = {0.5, 0.5, 1.0};
  const double c_time[4] = {0.0, 0.5, 0.5, 1.0};
  for (int stage = 0; stage < 4; ++stage) {
    const double time = t + c_time[stage] * dt;
    std::optional<Field> N;
    if (config.nonlinear) N = nonlinear_term(psi, v, w, params.k, config.dealias);
    std::optional<Field> S;
    if (source) S = (*source)(time);
    const Field kw = w_rate(psi, v, w, &M, cg2, params, N ? &*N : nullptr, S ? &*S : nullptr);
    check_finite(kw, 0.0);

    const double co = c_out[stage] * dt;
    out.psi.axpy(co, v);
    out.v.axpy(co, w);
    out.w.axpy(co, kw);
    const bool last = stage == 3;
    const double an = last ? 0.0 : a_next[stage] * dt;

    // History sweep from the far end so node j - 1 is still the stage value.
    const double* vs = v.data();
    Field Mn(y.grid());
    double* mn = Mn.data();
    for (std::size_t j = nodes - 1; j >= 1; --j) {
      const double* zj = stage == 0 ? zy[j].data() : &scratch[j * size];
      const double* zm = stage == 0 ? zy[j - 1].data() : &scratch[(j - 1) * size];
      double* __restrict oj = zo[j].data();
      if (last) {
        for (std::size_t i = 0; i < size; ++i) oj[i] += co * (vs[i] - (zj[i] - zm[i]) * inv);
        continue;
      }
      // Node j of the scratch is overwritten only after its last read.
      double kj[size_hint];
      for (std::size_t i0 = 0; i0 < size; i0 += size_hint) {
        const std::size_t n = std::min(size_hint, size - i0);
        for (std::size_t i = 0; i < n; ++i)
          kj[i] = vs[i0 + i] - (zj[i0 + i] - zm[i0 + i]) * inv;
        const double* __restrict yj = zy[j].data() + i0;
        double* __restrict nj = &scratch[j * size + i0];
        double* __restrict o = oj + i0;
        double* __restrict m = mn + i0;
        const double wj = W[j];
        for (std::size_t i = 0; i < n; ++i) {
          o[i] += co * kj[i];
          const double zn = yj[i] + an * kj[i];
          nj[i] = zn;
          m[i] += wj * zn;
        }
      }
    }
    if (last) break;
    if (stage == 0)
      for (std::size_t i = 0; i < size; ++i) scratch[i] = zy[0].data()[i];
    if (hy.has_jump()) Mn.axpy(quad.tail(Weight::g, hy.front() + an), hy.jump());
    M = std::move(Mn);

    Field psi_n = y.psi, v_n = y.v, w_n = y.w;
    psi_n.axpy(an, v);
    v_n.axpy(an, w);
    w_n.axpy(an, kw);
    psi = std::move(psi_n);
    v = std::move(v_n);
    w = std::move(w_n);
  }
  out.dafermos()->set_front(hy.front() + dt);
  return out;
}

}  // namespace detail

namespace {

struct StageQuadrature {
  std::vector<double> q;  // node weights including g at the shifted nodes
  double sum = 0.0;       // total weight seen by a constant increment
  double jump = 0.0;      // weight of the jump field
};

StageQuadrature stage_quadrature(const HistoryField& h, double c, double dt) {
  const HistoryQuadrature& quad = h.quadrature();
  const MemoryKernel& kernel = quad.kernel();
  const std::size_t N = static_cast<std::size_t>(quad.intervals());
  const double ds = quad.ds();
  StageQuadrature sq;
  sq.q.assign(N + 1, 0.0);
  const long kink = std::lround(h.front() / ds);
  const auto add_piece = [&](std::size_t lo, std::size_t hi) {
    if (hi <= lo) return;
    const auto w = detail::gregory_weights(hi - lo + 1, ds);
    for (std::size_t j = lo; j <= hi; ++j) sq.q[j] += w[j - lo];
  };
  if (kink > 0 && static_cast<std::size_t>(kink) < N) {
    add_piece(0, static_cast<std::size_t>(kink));
    add_piece(static_cast<std::size_t>(kink), N);
  } else {
    add_piece(0, N);
  }
  for (std::size_t j = 0; j <= N; ++j) {
    sq.q[j] *= kernel.g(quad.s(j) + c * dt);
    sq.sum += sq.q[j];
  }
  // Sliver [0, c dt] between the inflow boundary and the first node.
  if (c > 0.0) sq.sum += 0.5 * c * dt * kernel.g(c * dt);
  if (h.has_jump()) sq.jump = quad.tail(Weight::g, h.front() + c * dt);
  return sq;
}

StateVector step_characteristic(const StateVector& y, const SystemParams& params,
                                const RhsConfig& config, double dt, double t,
                                const Source* source) {
  const HistoryField& h = *y.dafermos();
  if (std::abs(dt - h.ds()) > 1e-9 * h.ds())
    throw std::invalid_argument("characteristic transport requires dt equal to the s-spacing");
  const double cg2 = params.cg2();
  const Grid& grid = y.grid();

  std::array<Field, 3> base{Field(grid), Field(grid), Field(grid)};
  std::array<StageQuadrature, 3> sq;
  const double cs[3] = {0.0, 0.5, 1.0};
  for (int c = 0; c < 3; ++c) {
    sq[c] = stage_quadrature(h, cs[c], dt);
    const auto& z = h.smooth();
    for (std::size_t j = 1; j < z.size(); ++j) base[c].axpy(sq[c].q[j], z[j]);
    if (h.has_jump()) base[c].axpy(sq[c].jump, h.jump());
  }

  struct Triple {
    Field psi, v, w;
  };
  const auto eval = [&](const Triple& s, int c, double time) {
    Field M = base[c];
    Field inc = s.psi;
    inc -= y.psi;
    M.axpy(sq[c].sum, inc);
    std::optional<Field> N;
    if (config.nonlinear) N = nonlinear_term(s.psi, s.v, s.w, params.k, config.dealias);
    std::optional<Field> S;
    if (source) S = (*source)(time);
    Triple d{s.v, s.w,
             w_rate(s.psi, s.v, s.w, &M, cg2, params, N ? &*N : nullptr, S ? &*S : nullptr)};
    check_finite(d.w, time);
    return d;
  };
  const auto combine = [](const Triple& a, double f, const Triple& d) {
    Triple out = a;
    out.psi.axpy(f, d.psi);
    out.v.axpy(f, d.v);
    out.w.axpy(f, d.w);
    return out;
  };

  const Triple y0{y.psi, y.v, y.w};
  const Triple k1 = eval(y0, 0, t);
  const Triple k2 = eval(combine(y0, 0.5 * dt, k1), 1, t + 0.5 * dt);
  const Triple k3 = eval(combine(y0, 0.5 * dt, k2), 1, t + 0.5 * dt);
  const Triple k4 = eval(combine(y0, dt, k3), 2, t + dt);
  Triple y1 = combine(y0, dt / 6.0, k1);
  y1 = combine(y1, dt / 3.0, k2);
  y1 = combine(y1, dt / 3.0, k3);
  y1 = combine(y1, dt / 6.0, k4);

  StateVector out = y;
  Field inc = y1.psi;
  inc -= y.psi;
  out.psi = std::move(y1.psi);
  out.v = std::move(y1.v);
  out.w = std::move(y1.w);
  HistoryField& ho = *out.dafermos();
  auto& z = ho.smooth();
  std::rotate(z.rbegin(), z.rbegin() + 1, z.rend());
  z.front().fill(0.0);
  for (std::size_t j = 1; j < z.size(); ++j) z[j] += inc;
  ho.set_front(h.front() + dt);
  return out;
}

}  // namespace

StateVector step(const StateVector& state, const SystemParams& params, const RhsConfig& config,
                 double dt, double t, const Source* source) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (config.memory_mode != state.mode())
    throw std::invalid_argument("state history does not match the configured memory mode");
  if (const auto* h = state.dafermos()) {
    if (config.transport == Transport::characteristic)
      return step_characteristic(state, params, config, dt, t, source);
    if (dt > h->ds() * (1.0 + 1e-12))
      throw std::invalid_argument("upwind history transport requires dt <= ds");
  }
  StateVector out = state.dafermos() ? detail::rk4_upwind(state, params, config, dt, t, source)
                                     : detail::rk4(state, params, config, dt, t, source);
  check_finite(out.psi, t + dt);
  check_finite(out.v, t + dt);
  check_finite(out.w, t + dt);
  return out;
}

double energy_proxy(const StateVector& s) {
  const double a = homogeneous_norm(s.psi, 1.0);
  const double b = l2_norm(s.v);
  const double c = homogeneous_norm(s.v, 1.0);
  const double d = l2_norm(s.w);
  return a * a + b * b + c * c + d * d;
}

SimulationResult simulate(const StateVector& initial, const SystemParams& params,
                          const RhsConfig& config, double T, double dt, const Observer& observer,
                          int stride, const Source* source, double blowup_factor) {
  if (!(T >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
  if (stride < 1) stride = 1;
  SimulationResult r{initial, 0.0, 0, false, 0.0, {}};
  const long nsteps = std::lround(T / dt);
  if (observer) observer(0.0, initial);
  const double proxy0 = energy_proxy(initial);
  StateVector y = initial;
  for (long n = 1; n <= nsteps; ++n) {
    const double t0 = static_cast<double>(n - 1) * dt;
    const double t1 = static_cast<double>(n) * dt;
    try {
      y = step(y, params, config, dt, t0, source);
    } catch (const BlowUpError& e) {
      r.blew_up = true;
      r.blowup_time = t1;
      r.reason = e.what();
      break;
    } catch (const std::domain_error& e) {
      r.blew_up = true;
      r.blowup_time = t1;
      r.reason = e.what();
      break;
    }
    r.steps = n;
    if (n % stride == 0 || n == nsteps) {
      const double proxy = energy_proxy(y);
      if (proxy0 > 0.0 && proxy > blowup_factor * proxy0) {
        r.blew_up = true;
        r.blowup_time = t1;
        r.reason = "energy exceeded blow-up threshold";
        r.final_state = y;
        r.t_end = t1;
        break;
      }
      if (observer) observer(t1, y);
    }
    r.final_state = y;
    r.t_end = t1;
  }
  return r;
}

// ---------------------------------------------------------------------------

std::array<double, 4> ManufacturedSolution::theta(double t) const {
  const double c = std::cos(omega * t + phase), s = std::sin(omega * t + phase);
  return {c, -omega * s, -omega * omega * c, omega * omega * omega * s};
}

Field ManufacturedSolution::psi(double t) const { return theta(t)[0] * X; }
Field ManufacturedSolution::psi_t(double t) const { return theta(t)[1] * X; }
Field ManufacturedSolution::psi_tt(double t) const { return theta(t)[2] * X; }

double ManufacturedSolution::memory_convolution(const MemoryKernel& kernel, double t) const {
  if (kernel.memoryless() || t <= 0.0) return 0.0;
  if (kernel.is_exponential()) {
    const double A = kernel.relaxation_parameter() * kernel.speed_squared();
    const double a = 1.0 / kernel.relaxation_time();
    const double ph = omega * t + phase;
    return A *
           (a * std::cos(ph) + omega * std::sin(ph) -
            std::exp(-a * t) * (a * std::cos(phase) + omega * std::sin(phase))) /
           (a * a + omega * omega);
  }
  const auto f = [&](double s) { return kernel.g(s) * std::cos(omega * (t - s) + phase); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, t, 20, 1e-13);
}

Field manufactured_residual(const ManufacturedSolution& ms, const SystemParams& params, double t,
                            bool nonlinear) {
  const auto th = ms.theta(t);
  const Field lapX = laplacian(ms.X);
  Field S = (params.tau * th[3] + th[2]) * ms.X;
  S.axpy(-(params.c2 * th[0] + params.b * th[1]), lapX);
  S.axpy(ms.memory_convolution(params.kernel, t), lapX);
  if (nonlinear) {
    // (k psi_t^2 + |grad psi|^2)_t = 2k X^2 theta' theta'' + 2 |grad X|^2 theta theta'
    Field X2 = hadamard(ms.X, ms.X);
    Field G2(ms.X.grid());
    for (const auto& gx : gradient(ms.X)) G2 += hadamard(gx, gx);
    S.axpy(-2.0 * params.k * th[1] * th[2], X2);
    S.axpy(-2.0 * th[0] * th[1], G2);
  }
  return S;
}

}  // namespace jmgt
