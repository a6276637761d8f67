#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jmgt/dynamics.hpp"
#include "jmgt/energy.hpp"
#include "jmgt/state.hpp"

namespace jmgt::analysis {

// ---------------------------------------------------------------------------
// Random data

struct RandomStateOptions {
  int kmax = 3;           // integer wave numbers per axis in [-kmax, kmax]
  int history_profiles = 3;
  double amplitude = 1.0;
};

// Band-limited random field built from integer wave numbers on the box; the
// draws do not depend on the resolution, so the same seed gives the same
// continuous function on every grid.
Field random_field(const Grid& grid, std::mt19937_64& rng, int kmax, double amplitude = 1.0);

// Random state in the discrete domain: eta vanishes at s = 0, no jump.
StateVector random_domain_state(const Grid& grid, std::shared_ptr<const HistoryQuadrature> quad,
                                std::mt19937_64& rng, const RandomStateOptions& opt = {});

// Folds the jump into the node values and drops it.
StateVector resolve_jump(const StateVector& s);
// a - b over every component. Histories with the same jump and front are
// subtracted on the smooth part; otherwise node values are compared.
StateVector difference(const StateVector& a, const StateVector& b);

// ---------------------------------------------------------------------------
// Dissipation checks on recorded trajectories

enum class Check { E1, E2, W, Lyapunov };
std::string to_string(Check c);

struct DissipationOptions {
  int kappa = 0;
  double rel_tol = 1e-6;  // tolerance = rel_tol * initial functional value
  bool fit_weights = true;
  energy::LyapunovWeights weights{};
};

struct DissipationVerdict {
  Check check = Check::E1;
  double violation = 0.0;   // max positive excess of the discrete inequality
  double time = 0.0;        // start of the worst interval
  double tolerance = 0.0;
  bool pass = true;
  double coefficient = 0.0;    // b - tau c^2 for E1 / E2
  double constant = 0.0;       // fitted constant (W) or decay margin theta (Lyapunov)
  energy::LyapunovWeights weights{};
  bool increased = false;      // functional grew somewhere along the run
  std::string reason;
};

DissipationVerdict verify_dissipation(const energy::EnergyReport& report, Check which,
                                      const DissipationOptions& opt = {});

// ---------------------------------------------------------------------------
// Generator, resolvent

// A_B applied to a state with resolved history; node 0 of the output
// history is kept at zero.
StateVector apply_generator(const StateVector& s, const SystemParams& params);

struct GeneratorReport {
  double worst_ratio = 0.0;  // max (A_B Psi, Psi) / |||Psi|||^2
  double worst_value = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
};
// Every fourth sample carries only a history component.
GeneratorReport generator_dissipativity(const SystemParams& params, const Grid& grid,
                                        const HistoryConfig& hist, int m, int samples,
                                        std::uint64_t seed);

// Gaussian-shaped tabulated kernel, concave near s = 0.
MemoryKernel concave_kernel(double mass_scale = 0.2, double s_max = 30.0, int points = 3001);

struct ResolventCoefficients {
  double nu = 0.0;             // discrete
  double nu_continuous = 0.0;  // b + cg2 + int g (1 - e^{-s}) ds
  double sigma = 0.0;
};
ResolventCoefficients resolvent_coefficients(const SystemParams& params,
                                             const HistoryQuadrature& quad);

// Solves -nu Lap v + sigma v = q spectrally.
Field solve_elliptic(double nu, double sigma, const Field& q);

// Solves Psi - A_B Psi = F for the discrete operator.
StateVector resolvent_solve(const SystemParams& params, const StateVector& F);
// ||Psi - A_B Psi - F|| / ||F|| in the standard norm of order m.
double resolvent_residual(const SystemParams& params, const StateVector& psi,
                          const StateVector& F, int m);

// ---------------------------------------------------------------------------
// Picard iteration for the mild solution

struct PicardOptions {
  double T = 0.25;
  double dt = 1e-3;
  double tol = 1e-10;
  int max_iter = 30;
  int m = 2;
  int norm_stride = 10;
  Transport transport = Transport::upwind;
};

struct PicardResult {
  int iterations = 0;
  std::vector<double> differences;  // sup_t ||Phi_{n+1} - Phi_n||
  double q = 0.0;
  bool converged = false;
  std::string message;
  std::optional<StateVector> final_state;
  std::vector<double> times;          // t of the stored fixed-point states
  std::vector<StateVector> trajectory;
};

PicardResult picard_solve(const SystemParams& params, const StateVector& initial,
                          const PicardOptions& opt);

// ---------------------------------------------------------------------------
// Scalar utilities

struct StraussResult {
  bool feasible = false;
  double lhs = 0.0;        // C1 C2^{1/(kappa-1)}
  double threshold = 0.0;  // (1 - 1/kappa) kappa^{-1/(kappa-1)}
  double bound = 0.0;      // C1 / (1 - 1/kappa)
};
StraussResult strauss_bound(double C1, double C2, double kappa);

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};
// Least-squares slope of log y over the second half of the series.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Commutators and norm equivalence

// [d^alpha, f] g = d^alpha(f g) - f d^alpha g over ordered multi-indices.
std::vector<Field> commutator(const Field& f, const Field& g, int kappa);

struct CommutatorReport {
  double product_ratio = 0.0;     // max ||D(fg)|| / (|f|_inf ||Dg|| + |g|_inf ||Df||)
  double commutator_ratio = 0.0;  // max ||[D, f]g|| / (|grad f|_inf ||D' g|| + |g|_inf ||Df||)
  int samples = 0;
};
CommutatorReport commutator_probe(const Grid& grid, int kappa, int samples, std::uint64_t seed,
                                  int kmax = 4);

struct EquivalenceReport {
  double C1 = 0.0;  // min problem / standard
  double C2 = 0.0;  // max
  int samples = 0;
};
EquivalenceReport norm_equivalence(const SystemParams& params, const Grid& grid,
                                   const HistoryConfig& hist, int m, int samples,
                                   std::uint64_t seed);

// Smallest L1 on the candidate list with a nonnegative Lyapunov functional
// on every sampled state (0 if none qualifies).
double lyapunov_positivity_threshold(const SystemParams& params, const Grid& grid,
                                     const HistoryConfig& hist, int kappa, double L2, double eps,
                                     const std::vector<double>& candidates, int samples,
                                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceRow {
  double h = 0.0;  // dt, or the number of points
  double error = 0.0;
  double ratio = 0.0;  // previous error / this error
};

// psi_ex = X cos(t) forced by the manufactured residual; relative L2 error of
// psi at T for each dt.
std::vector<ConvergenceRow> temporal_convergence(const SystemParams& params, const Field& X,
                                                 double T, const std::vector<double>& dts,
                                                 MemoryMode mode, bool nonlinear,
                                                 const HistoryConfig& hist = {});
// Same forced problem on grids of n points, with the source assembled on an
// n_ref grid and sampled at the coarse nodes; relative max-norm error of psi
// at T against X cos(T).
std::vector<ConvergenceRow> spatial_convergence(
    const SystemParams& params, const std::function<double(const std::array<double, 3>&)>& X,
    int dim, double length, const std::vector<int>& ns, int n_ref, double T, double dt,
    MemoryMode mode, bool nonlinear);

// ---------------------------------------------------------------------------
// Global boundedness

struct GlobalBoundOptions {
  double T = 50.0;
  double dt = 1e-2;
  int stride = 10;
  int p = 1;
  bool nonlinear = true;
  Transport transport = Transport::upwind;
  HistoryConfig hist{};
  double blowup_factor = 1e6;
};

struct GlobalBoundReport {
  std::string verdict;  // bounded or growth
  double scale = 0.0;   // multiplier applied to the profile
  std::vector<double> t;
  std::vector<double> norm;  // sqrt(sup sum E) + sqrt(int sum D)
  double norm_at_1 = 0.0;
  double max_norm = 0.0;
  double boot_a = 0.0, boot_b = 0.0;
  StraussResult strauss;
  bool within_strauss = false;
  std::string reason;
};

// Scales the profile (psi0, psi1, psi2) so that sum_{k<=p} scriptE^(k)(0)
// equals energy, then runs to T.
GlobalBoundReport global_bound_experiment(const SystemParams& params, const Field& psi0,
                                          const Field& psi1, const Field& psi2, double energy,
                                          const GlobalBoundOptions& opt);

struct SweepPoint {
  double energy = 0.0;
  std::string verdict;
};
struct SweepReport {
  std::vector<SweepPoint> points;
  bool monotone = true;
  double threshold = 0.0;  // bisected bounded/growth energy (0 if no growth)
};
SweepReport epsilon_sweep(const SystemParams& params, const Field& psi0, const Field& psi1,
                          const Field& psi2, const std::vector<double>& energies,
                          const GlobalBoundOptions& opt, int bisection_steps = 4);

}  // namespace jmgt::analysis
