#pragma once

#include <string>

#include "config.hpp"
#include "json.hpp"

namespace jmgt::cli {

struct RunContext {
  RunConfig cfg;
  std::string out_dir = "out";
  bool quiet = false;
};

// Each writes its artifacts into out_dir and returns the exit status.
int run_simulate(const RunContext& ctx);
int run_verify(const RunContext& ctx);
int run_resolvent(const RunContext& ctx);
int run_picard(const RunContext& ctx);
int run_scan(const RunContext& ctx);
int run_convergence(const RunContext& ctx);

// c_g^2, regime and kernel assumption results for the configured system.
nlohmann::json admissibility(const RunConfig& cfg);

// "decay", "conservative" or "growth" for a sampled E1 series.
std::string classify_series(const std::vector<double>& t, const std::vector<double>& e,
                            double rel_tol, double* rate = nullptr, double* r2 = nullptr);

}  // namespace jmgt::cli
