#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jmgt/dynamics.hpp"
#include "jmgt/state.hpp"

namespace jmgt::cli {

// Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error("config field '" + field + "': " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProfileSpec {
  std::string profile = "zero";  // zero | mode | gaussian | file
  double amplitude = 0.0;
  double wavenumber = 1.0;  // mode: cycles over the box along the first axis
  double width = 1.0;       // gaussian standard deviation
  std::vector<double> center;  // gaussian; empty means the box centre
  std::string path;            // file: one value per node, row-major
};

struct KernelSpec {
  std::string type = "exponential";  // none | exponential | file
  double m = 0.2;
  double tau_r = 1.0;
  std::string path;
};

struct ScanSpec {
  std::vector<double> b_ratios{0.5, 1.0, 1.5};  // b / (tau c^2)
  std::vector<double> masses{0.2};
  double T = 20.0;
  double dt = 1e-2;
  int stride = 5;
  int jobs = 0;  // 0: hardware concurrency
};

struct ConvergenceSpec {
  std::vector<double> dts{0.1, 0.05, 0.025, 0.0125};
  std::vector<int> ns{8, 16, 32, 64};
  int n_ref = 128;
  double T = 1.0;   // spatial study horizon
  double dt = 2.5e-3;
  double T_time = 2.0;  // temporal study horizon
  // The s-grid error of a Dafermos history floors the temporal study, so the
  // closure is the default.
  MemoryMode mode = MemoryMode::closure;
};

struct PicardSpec {
  double T = 0.25;
  double dt = 1e-3;
  double tol = 1e-10;
  int max_iter = 30;
  int m = 2;
};

struct ResolventSpec {
  int samples = 100;
  int m = 2;
};

struct RunConfig {
  std::uint64_t seed = 1;
  int dim = 1;
  int n = 128;
  double length = 62.83185307179586;  // 20 pi
  double tau = 1.0, b = 1.5, c2 = 1.0, k = 1.0;
  KernelSpec kernel;
  HistoryConfig history;
  Transport transport = Transport::upwind;
  ProfileSpec psi0{"mode", 1.0, 10.0, 1.0, {}, {}};
  ProfileSpec psi1, psi2;
  double T = 20.0;
  double dt = 1e-3;
  int stride = 50;
  bool nonlinear = false;
  bool dealias = false;
  int p = 1;
  double rel_tol = 1e-6;
  ScanSpec scan;
  ConvergenceSpec convergence;
  PicardSpec picard;
  ResolventSpec resolvent;
};

// Parses YAML text; overrides are "dotted.key=value" with a YAML value.
// Unknown keys and ill-typed values throw ConfigError naming the field.
RunConfig parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Throws ConfigError; also checks admissibility of the parameters.
void validate(const RunConfig& cfg);

SystemParams system_params(const RunConfig& cfg);
Grid make_grid(const RunConfig& cfg);
Field make_profile(const Grid& grid, const ProfileSpec& spec, const std::string& field);

// One "key = value" line per field, values printed round-trip exact.
std::string canonical(const RunConfig& cfg);
// FNV-1a (64 bit) of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::uint64_t fnv1a(const std::string& text);

std::string artifact_version();

}  // namespace jmgt::cli
