#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jmgt/dynamics.hpp"
#include "jmgt/state.hpp"

namespace jmgt::energy {

// All derivative norms use the |xi| multiplier: ||grad^k f|| is
// (sum |xi|^(2k) |f^|^2)^(1/2), and ||Lap grad^k f|| = ||grad^(k+2) f||.
class Snapshot {
 public:
  Snapshot(const StateVector& state, const SystemParams& params);

  const Grid& grid() const { return grid_; }
  const SystemParams& params() const { return params_; }
  double cg2() const { return cg2_; }
  bool has_history() const { return hist_.has_value(); }

  Spectrum psi, v, w;
  // a x + b y
  Spectrum combo(const Spectrum& x, double a, const Spectrum& y, double b) const;
  double inner(const Spectrum& a, const Spectrum& b, double kappa) const;
  double norm2(const Spectrum& a, double kappa) const { return inner(a, a, kappa); }
  // int weight ||grad^kappa eta||^2 ds (0 without history)
  double history_norm2(Weight w, double kappa) const;
  // int weight <grad^kappa eta(s), grad^kappa f> ds
  double history_cross(const Spectrum& f, Weight w, double kappa) const;
  const HistorySpectra* history() const { return hist_ ? &*hist_ : nullptr; }

 private:
  Grid grid_;
  SystemParams params_;
  double cg2_;
  std::optional<HistorySpectra> hist_;
};

double problem_inner(const StateVector& a, const StateVector& b, const SystemParams& params, int m);
double problem_norm(const StateVector& s, const SystemParams& params, int m);
double standard_norm(const StateVector& s, const SystemParams& params, int m);

double E1(const Snapshot& s, int kappa);
double E2(const Snapshot& s, int kappa);
double E1(const StateVector& s, const SystemParams& p, int kappa);
double E2(const StateVector& s, const SystemParams& p, int kappa);

struct CrossValues {
  double F1 = 0.0;
  double F2 = 0.0;
};
CrossValues cross_functionals(const Snapshot& s, int kappa);
CrossValues cross_functionals(const StateVector& s, const SystemParams& p, int kappa);

struct LyapunovWeights {
  double L1 = 10.0;
  double L2 = 1.0;
  double eps = 0.1;
};
double lyapunov(const Snapshot& s, int kappa, const LyapunovWeights& wts);
double lyapunov(const StateVector& s, const SystemParams& p, int kappa, const LyapunovWeights& wts);

struct ScriptValues {
  double E = 0.0;
  double D = 0.0;
};
ScriptValues script_functionals(const Snapshot& s, int kappa);
ScriptValues script_functionals(const StateVector& s, const SystemParams& p, int kappa);
// The four-term energy equivalent to E1 (and its kappa + 2 analogue for E2).
double script_E1(const Snapshot& s, int kappa);
double script_E2(const Snapshot& s, int kappa);

// Instantaneous quantity inside the sup defining Lambda.
double lambda_instant(const StateVector& s);

// Right-hand side pairings F_0(phi) = (F^(k), phi) and F_1(phi) =
// (grad F^(k), grad phi) with phi a kappa-th derivative tensor.
struct NonlinearPairings {
  double e1 = 0.0;     // |F_0(D(v + tau w))|
  double e2 = 0.0;     // |F_1(D(v + tau w))|
  double w = 0.0;      // |F_0(D w)|
  double lyap = 0.0;   // sum of the five pairings in the Lyapunov estimate
};
NonlinearPairings nonlinear_pairings(const StateVector& s, const SystemParams& p, int kappa);

struct OrderSample {
  double E1 = 0, E2 = 0, F1 = 0, F2 = 0, W = 0;  // W = ||grad^k w||^2
  double scriptE = 0, scriptD = 0, scriptE2 = 0;
  double v1 = 0;      // ||grad^(k+1) v||^2
  double eta1 = 0;    // ||grad^(k+1) eta||^2_{-g'}
  double v2 = 0;      // ||grad^(k+2) v||^2
  double eta2 = 0;    // ||grad^(k+2) eta||^2_{-g'}
  double eta2g = 0;   // ||grad^(k+2) eta||^2_{g}
  double pv2 = 0;     // ||grad^(k+2)(psi + tau v)||^2
  NonlinearPairings rhs;
};

struct Sample {
  double t = 0.0;
  std::vector<OrderSample> order;  // kappa = 0..p
  double lambda = 0.0;             // instantaneous
  double l2_psi = 0, l2_v = 0, l2_w = 0;
};

struct Violation {
  std::string functional;
  double t = 0.0;
  double magnitude = 0.0;
};

struct EnergyReport {
  int p = 1;
  bool nonlinear = false;
  SystemParams params;
  std::vector<Sample> samples;
  std::vector<Violation> violations;
};

Sample measure(const StateVector& s, const SystemParams& params, int p, bool nonlinear, double t);

// Observer that appends a sample per call.
class Recorder {
 public:
  Recorder(const SystemParams& params, int p, bool nonlinear);
  void operator()(double t, const StateVector& s);
  Observer observer();
  const EnergyReport& report() const { return report_; }
  EnergyReport& report() { return report_; }

 private:
  EnergyReport report_;
};

struct TrajectoryNorms {
  std::vector<double> t;
  std::vector<double> E;  // running sup of sum_{k<=p} scriptE
  std::vector<double> D;  // time integral of sum_{k<=p} scriptD
};
TrajectoryNorms trajectory_norms(const EnergyReport& report, int p);
double lambda_sup(const EnergyReport& report, double t);
double lyapunov_value(const OrderSample& o, double tau, const LyapunovWeights& wts);

}  // namespace jmgt::energy
