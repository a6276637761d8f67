#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#ifndef JMGT_VERSION
#define JMGT_VERSION "0.0.0"
#endif

namespace jmgt::cli {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Strict view of one mapping: every key must be listed.
class Section {
 public:
  Section(const YAML::Node& node, std::string prefix, std::set<std::string> allowed)
      : node_(node), prefix_(std::move(prefix)) {
    if (!node_ || node_.IsNull()) return;
    if (!node_.IsMap()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected a mapping");
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) throw ConfigError(join(prefix_, key), "unknown key");
    }
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  template <class T>
  void get(const std::string& key, T& out) const {
    if (!has(key)) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(join(prefix_, key), std::string("expected ") + type_name<T>());
    }
  }

  Section sub(const std::string& key, std::set<std::string> allowed) const {
    return Section(has(key) ? node_[key] : YAML::Node(), join(prefix_, key), std::move(allowed));
  }

  std::string field(const std::string& key) const { return join(prefix_, key); }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a list";
  }

  YAML::Node node_;
  std::string prefix_;
};

void read_profile(const Section& parent, const std::string& key, ProfileSpec& p) {
  const Section s = parent.sub(key, {"profile", "amplitude", "wavenumber", "width", "center", "path"});
  s.get("profile", p.profile);
  s.get("amplitude", p.amplitude);
  s.get("wavenumber", p.wavenumber);
  s.get("width", p.width);
  s.get("center", p.center);
  s.get("path", p.path);
}

MemoryMode parse_mode(const std::string& s, const std::string& field) {
  if (s == "none") return MemoryMode::none;
  if (s == "dafermos") return MemoryMode::dafermos;
  if (s == "closure") return MemoryMode::closure;
  throw ConfigError(field, "expected none, dafermos or closure");
}

Transport parse_transport(const std::string& s, const std::string& field) {
  if (s == "upwind") return Transport::upwind;
  if (s == "characteristic") return Transport::characteristic;
  throw ConfigError(field, "expected upwind or characteristic");
}

void set_path(YAML::Node node, const std::vector<std::string>& parts, std::size_t i,
              const YAML::Node& value) {
  if (i + 1 == parts.size()) {
    node[parts[i]] = value;
    return;
  }
  if (!node[parts[i]] || !node[parts[i]].IsMap()) node[parts[i]] = YAML::Node(YAML::NodeType::Map);
  set_path(node[parts[i]], parts, i + 1, value);
}

void apply_override(YAML::Node& root, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(text, "override must be key=value");
  const std::string key = text.substr(0, eq);
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError(key, "empty path component");
    parts.push_back(part);
  }
  YAML::Node value;
  try {
    value = YAML::Load(text.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError(key, std::string("unparsable value: ") + e.what());
  }
  if (!value || value.IsNull()) throw ConfigError(key, "missing value");
  set_path(root, parts, 0, value);
}

RunConfig from_node(const YAML::Node& root) {
  RunConfig c;
  const Section top(root, "",
                    {"seed", "grid", "params", "kernel", "history", "initial", "run", "verify",
                     "scan", "convergence", "picard", "resolvent"});
  top.get("seed", c.seed);

  const Section grid = top.sub("grid", {"dim", "n", "length"});
  grid.get("dim", c.dim);
  grid.get("n", c.n);
  grid.get("length", c.length);

  const Section params = top.sub("params", {"tau", "b", "c2", "k"});
  params.get("tau", c.tau);
  params.get("b", c.b);
  params.get("c2", c.c2);
  params.get("k", c.k);

  const Section kernel = top.sub("kernel", {"type", "m", "tau_r", "path"});
  kernel.get("type", c.kernel.type);
  kernel.get("m", c.kernel.m);
  kernel.get("tau_r", c.kernel.tau_r);
  kernel.get("path", c.kernel.path);

  const Section hist = top.sub("history", {"mode", "intervals", "s_max", "transport"});
  std::string mode = to_string(c.history.mode), transport = to_string(c.transport);
  hist.get("mode", mode);
  hist.get("intervals", c.history.intervals);
  hist.get("s_max", c.history.s_max);
  hist.get("transport", transport);
  c.history.mode = parse_mode(mode, hist.field("mode"));
  c.transport = parse_transport(transport, hist.field("transport"));

  const Section init = top.sub("initial", {"psi0", "psi1", "psi2"});
  read_profile(init, "psi0", c.psi0);
  read_profile(init, "psi1", c.psi1);
  read_profile(init, "psi2", c.psi2);

  const Section run = top.sub("run", {"T", "dt", "stride", "nonlinear", "dealias", "p"});
  run.get("T", c.T);
  run.get("dt", c.dt);
  run.get("stride", c.stride);
  run.get("nonlinear", c.nonlinear);
  run.get("dealias", c.dealias);
  run.get("p", c.p);

  const Section verify = top.sub("verify", {"rel_tol"});
  verify.get("rel_tol", c.rel_tol);

  const Section scan = top.sub("scan", {"b_ratios", "masses", "T", "dt", "stride", "jobs"});
  scan.get("b_ratios", c.scan.b_ratios);
  scan.get("masses", c.scan.masses);
  scan.get("T", c.scan.T);
  scan.get("dt", c.scan.dt);
  scan.get("stride", c.scan.stride);
  scan.get("jobs", c.scan.jobs);

  const Section conv = top.sub("convergence", {"dts", "ns", "n_ref", "T", "dt", "T_time", "mode"});
  conv.get("dts", c.convergence.dts);
  conv.get("ns", c.convergence.ns);
  conv.get("n_ref", c.convergence.n_ref);
  conv.get("T", c.convergence.T);
  conv.get("dt", c.convergence.dt);
  conv.get("T_time", c.convergence.T_time);
  std::string conv_mode = to_string(c.convergence.mode);
  conv.get("mode", conv_mode);
  c.convergence.mode = parse_mode(conv_mode, conv.field("mode"));

  const Section pic = top.sub("picard", {"T", "dt", "tol", "max_iter", "m"});
  pic.get("T", c.picard.T);
  pic.get("dt", c.picard.dt);
  pic.get("tol", c.picard.tol);
  pic.get("max_iter", c.picard.max_iter);
  pic.get("m", c.picard.m);

  const Section res = top.sub("resolvent", {"samples", "m"});
  res.get("samples", c.resolvent.samples);
  res.get("m", c.resolvent.m);
  return c;
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void validate_profile(const ProfileSpec& p, const std::string& field, int dim) {
  require(p.profile == "zero" || p.profile == "mode" || p.profile == "gaussian" ||
              p.profile == "file",
          field + ".profile", "expected zero, mode, gaussian or file");
  require(std::isfinite(p.amplitude), field + ".amplitude", "must be finite");
  if (p.profile == "gaussian") {
    require(p.width > 0.0, field + ".width", "must be positive");
    require(p.center.empty() || static_cast<int>(p.center.size()) == dim, field + ".center",
            "needs one coordinate per axis");
  }
  if (p.profile == "file") require(!p.path.empty(), field + ".path", "required for file profiles");
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string list(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) out += num(v[i]);
    else out += std::to_string(v[i]);
  }
  return out + "]";
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<root>", std::string("malformed YAML: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);
  RunConfig cfg = from_node(root);
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

void validate(const RunConfig& c) {
  require(c.dim >= 1 && c.dim <= 3, "grid.dim", "must be 1, 2 or 3");
  const auto pow2 = [](int n) { return n >= 8 && (n & (n - 1)) == 0; };
  require(pow2(c.n), "grid.n", "must be a power of two, at least 8");
  require(c.length > 0.0 && std::isfinite(c.length), "grid.length", "must be positive");
  require(c.kernel.type == "none" || c.kernel.type == "exponential" || c.kernel.type == "file",
          "kernel.type", "expected none, exponential or file");
  if (c.kernel.type == "file") require(!c.kernel.path.empty(), "kernel.path", "required for file kernels");
  if (c.kernel.type == "exponential") {
    require(c.kernel.m > 0.0, "kernel.m", "must be positive");
    require(c.kernel.tau_r > 0.0, "kernel.tau_r", "must be positive");
  }
  const bool memoryless = c.kernel.type == "none";
  require(memoryless == (c.history.mode == MemoryMode::none), "history.mode",
          "must be none exactly when kernel.type is none");
  require(c.history.mode != MemoryMode::closure || c.kernel.type == "exponential", "history.mode",
          "closure requires an exponential kernel");
  require(c.history.intervals >= 2, "history.intervals", "must be at least 2");
  require(c.history.s_max > 0.0, "history.s_max", "must be positive");

  require(c.T >= 0.0 && std::isfinite(c.T), "run.T", "must be nonnegative");
  require(c.dt > 0.0, "run.dt", "must be positive");
  require(c.stride >= 1, "run.stride", "must be at least 1");
  require(c.p >= 0 && c.p <= 2, "run.p", "must be 0, 1 or 2");
  if (c.history.mode == MemoryMode::dafermos) {
    const double ds = c.history.s_max / c.history.intervals;
    if (c.transport == Transport::characteristic)
      require(std::abs(c.dt - ds) <= 1e-9 * ds, "run.dt",
              "characteristic transport needs dt = s_max / intervals");
    else
      require(c.dt <= ds * (1.0 + 1e-12), "run.dt", "upwind transport needs dt <= s_max / intervals");
  } else {
    require(c.transport == Transport::upwind, "history.transport",
            "characteristic transport needs a dafermos history");
  }
  require(c.rel_tol > 0.0, "verify.rel_tol", "must be positive");
  validate_profile(c.psi0, "initial.psi0", c.dim);
  validate_profile(c.psi1, "initial.psi1", c.dim);
  validate_profile(c.psi2, "initial.psi2", c.dim);

  require(!c.scan.b_ratios.empty(), "scan.b_ratios", "must not be empty");
  for (double r : c.scan.b_ratios) require(r > 0.0, "scan.b_ratios", "entries must be positive");
  require(!c.scan.masses.empty(), "scan.masses", "must not be empty");
  for (double m : c.scan.masses)
    require(m >= 0.0 && m < c.c2, "scan.masses", "entries must lie in [0, c2)");
  require(c.scan.T > 0.0, "scan.T", "must be positive");
  require(c.scan.dt > 0.0, "scan.dt", "must be positive");
  require(c.scan.dt <= c.history.s_max / c.history.intervals * (1.0 + 1e-12), "scan.dt",
          "upwind transport needs dt <= s_max / intervals");
  require(c.scan.stride >= 1, "scan.stride", "must be at least 1");
  require(c.scan.jobs >= 0, "scan.jobs", "must be nonnegative");

  require(!c.convergence.dts.empty(), "convergence.dts", "must not be empty");
  for (double d : c.convergence.dts) require(d > 0.0, "convergence.dts", "entries must be positive");
  require(pow2(c.convergence.n_ref), "convergence.n_ref", "must be a power of two, at least 8");
  for (int n : c.convergence.ns)
    require(pow2(n) && c.convergence.n_ref % n == 0, "convergence.ns",
            "entries must be powers of two dividing convergence.n_ref");
  require(c.convergence.T > 0.0, "convergence.T", "must be positive");
  require(c.convergence.dt > 0.0, "convergence.dt", "must be positive");
  require(c.convergence.T_time > 0.0, "convergence.T_time", "must be positive");
  require(c.convergence.mode != MemoryMode::none, "convergence.mode", "must be dafermos or closure");

  require(c.picard.T > 0.0, "picard.T", "must be positive");
  require(c.picard.dt > 0.0, "picard.dt", "must be positive");
  require(c.picard.tol > 0.0, "picard.tol", "must be positive");
  require(c.picard.max_iter >= 1, "picard.max_iter", "must be at least 1");
  require(c.picard.m >= 1, "picard.m", "must be at least 1");
  require(c.resolvent.samples >= 1, "resolvent.samples", "must be at least 1");
  require(c.resolvent.m >= 1, "resolvent.m", "must be at least 1");

  if (c.kernel.type != "file") {
    try {
      system_params(c).validate(memoryless);
    } catch (const std::invalid_argument& e) {
      const std::string what = e.what();
      throw ConfigError(what.substr(0, what.find_first_of(" :")), what);
    }
  }
}

SystemParams system_params(const RunConfig& c) {
  SystemParams p;
  p.tau = c.tau;
  p.b = c.b;
  p.c2 = c.c2;
  p.k = c.k;
  if (c.kernel.type == "none") {
    p.kernel = MemoryKernel::none();
  } else if (c.kernel.type == "exponential") {
    p.kernel = MemoryKernel::exponential(c.kernel.m, c.c2, c.kernel.tau_r);
  } else {
    if (!std::ifstream(c.kernel.path)) throw IoError("cannot read kernel table " + c.kernel.path);
    try {
      p.kernel = load_kernel_csv(c.kernel.path);
    } catch (const std::exception& e) {
      throw ConfigError("kernel.path", e.what());
    }
  }
  return p;
}

Grid make_grid(const RunConfig& c) { return Grid(c.dim, c.n, c.length); }

Field make_profile(const Grid& grid, const ProfileSpec& p, const std::string& field) {
  if (p.profile == "zero") return Field(grid);
  if (p.profile == "mode") {
    const double kx = 2.0 * M_PI * p.wavenumber / grid.length(0);
    return Field::from_function(grid, [&](const std::array<double, 3>& x) {
      return p.amplitude * std::cos(kx * x[0]);
    });
  }
  if (p.profile == "gaussian") {
    std::array<double, 3> c{};
    for (int a = 0; a < grid.dim(); ++a)
      c[a] = p.center.empty() ? 0.5 * grid.length(a) : p.center[a];
    return Field::from_function(grid, [&](const std::array<double, 3>& x) {
      double r2 = 0.0;
      for (int a = 0; a < grid.dim(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
      return p.amplitude * std::exp(-0.5 * r2 / (p.width * p.width));
    });
  }
  std::ifstream in(p.path);
  if (!in) throw IoError("cannot read profile " + p.path);
  std::vector<double> values;
  for (double v; in >> v;) values.push_back(v);
  if (!in.eof()) throw ConfigError(field + ".path", "non-numeric entry in " + p.path);
  if (values.size() != grid.size())
    throw ConfigError(field + ".path", "expected " + std::to_string(grid.size()) + " values, found " +
                                           std::to_string(values.size()));
  return Field(grid, std::move(values));
}

std::string canonical(const RunConfig& c) {
  std::ostringstream o;
  const auto profile = [&](const std::string& name, const ProfileSpec& p) {
    o << name << ".profile = " << p.profile << "\n"
      << name << ".amplitude = " << num(p.amplitude) << "\n"
      << name << ".wavenumber = " << num(p.wavenumber) << "\n"
      << name << ".width = " << num(p.width) << "\n"
      << name << ".center = " << list(p.center) << "\n"
      << name << ".path = " << p.path << "\n";
  };
  o << "seed = " << c.seed << "\n"
    << "grid.dim = " << c.dim << "\n"
    << "grid.n = " << c.n << "\n"
    << "grid.length = " << num(c.length) << "\n"
    << "params.tau = " << num(c.tau) << "\n"
    << "params.b = " << num(c.b) << "\n"
    << "params.c2 = " << num(c.c2) << "\n"
    << "params.k = " << num(c.k) << "\n"
    << "kernel.type = " << c.kernel.type << "\n"
    << "kernel.m = " << num(c.kernel.m) << "\n"
    << "kernel.tau_r = " << num(c.kernel.tau_r) << "\n"
    << "kernel.path = " << c.kernel.path << "\n"
    << "history.mode = " << to_string(c.history.mode) << "\n"
    << "history.intervals = " << c.history.intervals << "\n"
    << "history.s_max = " << num(c.history.s_max) << "\n"
    << "history.transport = " << to_string(c.transport) << "\n";
  profile("initial.psi0", c.psi0);
  profile("initial.psi1", c.psi1);
  profile("initial.psi2", c.psi2);
  o << "run.T = " << num(c.T) << "\n"
    << "run.dt = " << num(c.dt) << "\n"
    << "run.stride = " << c.stride << "\n"
    << "run.nonlinear = " << c.nonlinear << "\n"
    << "run.dealias = " << c.dealias << "\n"
    << "run.p = " << c.p << "\n"
    << "verify.rel_tol = " << num(c.rel_tol) << "\n"
    << "scan.b_ratios = " << list(c.scan.b_ratios) << "\n"
    << "scan.masses = " << list(c.scan.masses) << "\n"
    << "scan.T = " << num(c.scan.T) << "\n"
    << "scan.dt = " << num(c.scan.dt) << "\n"
    << "scan.stride = " << c.scan.stride << "\n"
    << "convergence.dts = " << list(c.convergence.dts) << "\n"
    << "convergence.ns = " << list(c.convergence.ns) << "\n"
    << "convergence.n_ref = " << c.convergence.n_ref << "\n"
    << "convergence.T = " << num(c.convergence.T) << "\n"
    << "convergence.dt = " << num(c.convergence.dt) << "\n"
    << "convergence.T_time = " << num(c.convergence.T_time) << "\n"
    << "convergence.mode = " << to_string(c.convergence.mode) << "\n"
    << "picard.T = " << num(c.picard.T) << "\n"
    << "picard.dt = " << num(c.picard.dt) << "\n"
    << "picard.tol = " << num(c.picard.tol) << "\n"
    << "picard.max_iter = " << c.picard.max_iter << "\n"
    << "picard.m = " << c.picard.m << "\n"
    << "resolvent.samples = " << c.resolvent.samples << "\n"
    << "resolvent.m = " << c.resolvent.m << "\n";
  return o.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical(cfg))));
  return buf;
}

std::string artifact_version() { return JMGT_VERSION; }

}  // namespace jmgt::cli
