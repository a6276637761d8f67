#include "jmgt/state.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace jmgt {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::subcritical:
      return "subcritical";
    case Regime::critical:
      return "critical";
    case Regime::supercritical:
      return "supercritical";
  }
  return "unknown";
}

std::string to_string(MemoryMode m) {
  switch (m) {
    case MemoryMode::none:
      return "none";
    case MemoryMode::dafermos:
      return "dafermos";
    case MemoryMode::closure:
      return "closure";
  }
  return "unknown";
}

void SystemParams::validate(bool allow_memoryless) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("params.tau must be positive");
  if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("params.b must be positive");
  if (!(c2 > 0.0) || !std::isfinite(c2)) throw std::invalid_argument("params.c2 must be positive");
  if (!std::isfinite(k)) throw std::invalid_argument("params.k must be finite");
  if (kernel.memoryless()) {
    if (!allow_memoryless)
      throw std::invalid_argument("kernel: memoryless kernel only allowed in memoryless mode");
    return;
  }
  if (kernel.is_exponential() && kernel.speed_squared() != c2)
    throw std::invalid_argument("kernel.c2 must equal params.c2");
  if (!(kernel.mass() > 0.0)) throw std::invalid_argument("kernel: mass must be positive");
  if (!(cg2() > 0.0))
    throw std::invalid_argument("kernel: mass must be below c2 (need m * tau_r < 1)");
}

Regime classify_regime(const SystemParams& p) {
  const double d = p.delta();
  if (std::abs(d) <= 1e-12) return Regime::critical;
  return d > 0.0 ? Regime::subcritical : Regime::supercritical;
}

// ---------------------------------------------------------------------------

StateVector::StateVector(const Grid& grid) : psi(grid), v(grid), w(grid) {}

MemoryMode StateVector::mode() const {
  if (dafermos()) return MemoryMode::dafermos;
  if (closure()) return MemoryMode::closure;
  return MemoryMode::none;
}

bool StateVector::finite() const {
  if (!psi.finite() || !v.finite() || !w.finite()) return false;
  if (const auto* h = dafermos()) {
    for (const auto& z : h->smooth())
      if (!z.finite()) return false;
  }
  if (const auto* c = closure()) return c->M.finite();
  return true;
}

void axpy(StateVector& y, double a, const StateVector& x) {
  y.psi.axpy(a, x.psi);
  y.v.axpy(a, x.v);
  y.w.axpy(a, x.w);
  if (auto* hy = y.dafermos()) {
    const auto* hx = x.dafermos();
    if (!hx) throw std::invalid_argument("axpy: history representations differ");
    auto& zy = hy->smooth();
    const auto& zx = hx->smooth();
    for (std::size_t j = 0; j < zy.size(); ++j) zy[j].axpy(a, zx[j]);
    hy->set_front(hy->front() + a * hx->front());
  } else if (auto* cy = y.closure()) {
    const auto* cx = x.closure();
    if (!cx) throw std::invalid_argument("axpy: history representations differ");
    cy->M.axpy(a, cx->M);
  }
}

void scale(StateVector& y, double a) {
  y.psi *= a;
  y.v *= a;
  y.w *= a;
  if (auto* h = y.dafermos()) {
    for (auto& z : h->smooth()) z *= a;
    if (h->has_jump()) {
      Field j = h->jump();
      j *= a;
      h->set_jump(std::move(j), h->front());
    }
  } else if (auto* c = y.closure()) {
    c->M *= a;
  }
}

StateVector zeros_like(const StateVector& x) {
  StateVector out(x.grid());
  if (const auto* h = x.dafermos()) {
    HistoryField z(x.grid(), h->quadrature_ptr());
    out.history = std::move(z);
  } else if (x.closure()) {
    out.history = ClosureMoment{Field(x.grid())};
  }
  return out;
}

std::shared_ptr<const HistoryQuadrature> make_quadrature(const MemoryKernel& kernel,
                                                         const HistoryConfig& cfg) {
  return std::make_shared<const HistoryQuadrature>(kernel, cfg.intervals, cfg.s_max);
}

StateVector init_state(const SystemParams& params, const Field& psi0, const Field& psi1,
                       const Field& psi2, const HistoryConfig& cfg) {
  std::shared_ptr<const HistoryQuadrature> quad;
  if (cfg.mode == MemoryMode::dafermos) quad = make_quadrature(params.kernel, cfg);
  return init_state(params, psi0, psi1, psi2, cfg.mode, quad);
}

StateVector init_state(const SystemParams& params, const Field& psi0, const Field& psi1,
                       const Field& psi2, MemoryMode mode,
                       std::shared_ptr<const HistoryQuadrature> quad) {
  require_same_grid(psi0, psi1);
  require_same_grid(psi0, psi2);
  params.validate(mode == MemoryMode::none);
  StateVector s(psi0.grid());
  s.psi = psi0;
  s.v = psi1;
  s.w = psi2;
  switch (mode) {
    case MemoryMode::none:
      break;
    case MemoryMode::dafermos: {
      if (!quad) throw std::invalid_argument("dafermos mode needs a history quadrature");
      HistoryField h(psi0.grid(), std::move(quad));
      // eta(s_0) = 0 and eta(s_j) = psi_0 beyond: all of it is the jump.
      h.set_jump(psi0, 0.0);
      s.history = std::move(h);
      break;
    }
    case MemoryMode::closure: {
      if (!params.kernel.is_exponential())
        throw std::invalid_argument("closure mode requires an exponential kernel");
      s.history = ClosureMoment{params.mass() * psi0};
      break;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Checkpoint layout (all little-endian):
//   char[8]  "JMGTCKP1"
//   int32    dim, n
//   float64  L[3]
//   int32    memory mode (0 none, 1 dafermos, 2 closure)
//   int32    N_s (0 unless dafermos)
//   float64  S_max
//   float64  tau, b, c2, k
//   int32    kernel kind (0 none, 1 exponential, 2 tabulated)
//   float64  m, kernel c2, tau_r
//   float64  time
//   int32    has_jump
//   float64  jump front
//   float64  psi[size], v[size], w[size]
//   float64  eta[(N_s + 1) * size]   node-major (dafermos), or M[size] (closure)
//   float64  jump[size]              only when has_jump

namespace {

template <typename T>
void put(std::ostream& os, T value) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw std::runtime_error("checkpoint truncated");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void put_field(std::ostream& os, const Field& f) {
  for (std::size_t i = 0; i < f.size(); ++i) put<double>(os, f[i]);
}

Field get_field(std::istream& is, const Grid& g) {
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = get<double>(is);
  return f;
}

}  // namespace

void write_checkpoint(const std::string& path, const StateVector& state, const SystemParams& params,
                      double time) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  const Grid& g = state.grid();
  os.write("JMGTCKP1", 8);
  put<std::int32_t>(os, g.dim());
  put<std::int32_t>(os, g.n());
  for (int a = 0; a < 3; ++a) put<double>(os, a < g.dim() ? g.length(a) : 0.0);
  const auto* h = state.dafermos();
  put<std::int32_t>(os, static_cast<std::int32_t>(state.mode()));
  put<std::int32_t>(os, h ? h->quadrature().intervals() : 0);
  put<double>(os, h ? h->quadrature().s_max() : 0.0);
  put<double>(os, params.tau);
  put<double>(os, params.b);
  put<double>(os, params.c2);
  put<double>(os, params.k);
  const MemoryKernel& kern = params.kernel;
  put<std::int32_t>(os, static_cast<std::int32_t>(kern.kind()));
  put<double>(os, kern.relaxation_parameter());
  put<double>(os, kern.speed_squared());
  put<double>(os, kern.relaxation_time());
  put<double>(os, time);
  put<std::int32_t>(os, (h && h->has_jump()) ? 1 : 0);
  put<double>(os, h ? h->front() : 0.0);
  put_field(os, state.psi);
  put_field(os, state.v);
  put_field(os, state.w);
  if (h) {
    for (std::size_t j = 0; j < h->nodes(); ++j) put_field(os, h->eta(j));
    if (h->has_jump()) put_field(os, h->jump());
  } else if (const auto* c = state.closure()) {
    put_field(os, c->M);
  }
  if (!os) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint read_checkpoint(const std::string& path, const MemoryKernel* kernel) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, "JMGTCKP1", 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const int dim = get<std::int32_t>(is);
  const int n = get<std::int32_t>(is);
  std::array<double, 3> L{};
  for (auto& x : L) x = get<double>(is);
  for (int a = dim; a < 3; ++a) L[a] = L[0];
  Grid grid(dim, n, L);
  const auto mode = static_cast<MemoryMode>(get<std::int32_t>(is));
  const int ns = get<std::int32_t>(is);
  const double s_max = get<double>(is);
  SystemParams p;
  p.tau = get<double>(is);
  p.b = get<double>(is);
  p.c2 = get<double>(is);
  p.k = get<double>(is);
  const auto kind = static_cast<KernelKind>(get<std::int32_t>(is));
  const double m = get<double>(is), kc2 = get<double>(is), tau_r = get<double>(is);
  switch (kind) {
    case KernelKind::none:
      p.kernel = MemoryKernel::none();
      break;
    case KernelKind::exponential:
      p.kernel = MemoryKernel::exponential(m, kc2, tau_r);
      break;
    case KernelKind::tabulated:
      if (!kernel) throw std::runtime_error("checkpoint uses a tabulated kernel; supply it");
      p.kernel = *kernel;
      break;
  }
  const double time = get<double>(is);
  const bool has_jump = get<std::int32_t>(is) != 0;
  const double front = get<double>(is);

  Checkpoint ck{time, p, StateVector(grid)};
  ck.state.psi = get_field(is, grid);
  ck.state.v = get_field(is, grid);
  ck.state.w = get_field(is, grid);
  if (mode == MemoryMode::dafermos) {
    HistoryConfig cfg{MemoryMode::dafermos, ns, s_max};
    HistoryField h(grid, make_quadrature(p.kernel, cfg));
    std::vector<Field> etas;
    for (int j = 0; j <= ns; ++j) etas.push_back(get_field(is, grid));
    if (has_jump) h.set_jump(get_field(is, grid), front);
    for (int j = 0; j <= ns; ++j) h.set_eta(static_cast<std::size_t>(j), etas[j]);
    ck.state.history = std::move(h);
  } else if (mode == MemoryMode::closure) {
    ck.state.history = ClosureMoment{get_field(is, grid)};
  }
  return ck;
}

}  // namespace jmgt
