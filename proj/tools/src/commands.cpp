#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <thread>

#include "jmgt/analysis.hpp"
#include "jmgt/energy.hpp"
#include "output.hpp"

namespace jmgt::cli {

namespace an = jmgt::analysis;
using nlohmann::json;

namespace {

std::string path_in(const RunContext& ctx, const std::string& name) {
  return (std::filesystem::path(ctx.out_dir) / name).string();
}

void note(const RunContext& ctx, const std::string& msg) {
  if (!ctx.quiet) std::fprintf(stderr, "jmgt: %s\n", msg.c_str());
}

struct Setup {
  Grid grid;
  SystemParams params;
  StateVector initial;
  RhsConfig rhs;
};

Setup setup(const RunConfig& cfg) {
  const Grid grid = make_grid(cfg);
  SystemParams params = system_params(cfg);
  try {
    params.validate(cfg.history.mode == MemoryMode::none);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("kernel", e.what());
  }
  const Field psi0 = make_profile(grid, cfg.psi0, "initial.psi0");
  const Field psi1 = make_profile(grid, cfg.psi1, "initial.psi1");
  const Field psi2 = make_profile(grid, cfg.psi2, "initial.psi2");
  StateVector y0 = init_state(params, psi0, psi1, psi2, cfg.history);
  const RhsConfig rhs{cfg.history.mode, cfg.nonlinear, cfg.dealias, cfg.transport};
  return {grid, params, std::move(y0), rhs};
}

struct Trajectory {
  energy::EnergyReport report;
  SimulationResult result;
};

Trajectory run_trajectory(const RunContext& ctx, const Setup& s) {
  const RunConfig& cfg = ctx.cfg;
  note(ctx, "running to T = " + format_number(cfg.T) + " with dt = " + format_number(cfg.dt));
  energy::Recorder rec(s.params, cfg.p, cfg.nonlinear);
  SimulationResult res = simulate(s.initial, s.params, s.rhs, cfg.T, cfg.dt, rec.observer(), cfg.stride);
  return {rec.report(), std::move(res)};
}

std::vector<double> series(const energy::EnergyReport& rep, std::vector<double>* t) {
  std::vector<double> e;
  for (const auto& smp : rep.samples) {
    if (t) t->push_back(smp.t);
    e.push_back(smp.order[0].E1);
  }
  return e;
}

json verdict_json(const an::DissipationVerdict& v, int kappa) {
  return json{{"check", an::to_string(v.check)},
              {"kappa", kappa},
              {"pass", v.pass},
              {"violation", v.violation},
              {"time", v.time},
              {"tolerance", v.tolerance},
              {"coefficient", v.coefficient},
              {"constant", v.constant},
              {"increased", v.increased},
              {"weights", {{"L1", v.weights.L1}, {"L2", v.weights.L2}, {"eps", v.weights.eps}}},
              {"reason", v.reason}};
}

}  // namespace

json admissibility(const RunConfig& cfg) {
  const SystemParams p = system_params(cfg);
  json out{{"tau", p.tau},
           {"b", p.b},
           {"c2", p.c2},
           {"delta", p.delta()},
           {"regime", to_string(classify_regime(p))},
           {"kernel", p.kernel.describe()},
           {"mass", p.mass()},
           {"cg2", p.kernel.memoryless() ? p.c2 : p.cg2()}};
  if (!p.kernel.memoryless()) {
    const auto rep = check_assumptions(p.kernel, p.c2,
                                       uniform_s_grid(cfg.history.s_max, cfg.history.intervals), 1e-10);
    const auto a = [](const AssumptionResult& r) {
      return json{{"pass", r.pass}, {"worst", r.worst}, {"at", r.at}};
    };
    out["assumptions"] = {{"regularity", a(rep.regularity)},
                          {"positivity", a(rep.positivity)},
                          {"decay", a(rep.decay)},
                          {"convexity", a(rep.convexity)},
                          {"all_pass", rep.all_pass()}};
  }
  return out;
}

std::string classify_series(const std::vector<double>& t, const std::vector<double>& e,
                            double rel_tol, double* rate, double* r2) {
  if (rate) *rate = 0.0;
  if (r2) *r2 = 0.0;
  if (e.empty() || !(e.front() > 0.0)) return "conservative";
  const double tol = rel_tol * e.front();
  bool nonincreasing = true;
  for (std::size_t i = 1; i < e.size(); ++i)
    if (!(e[i] <= e[i - 1] + tol)) nonincreasing = false;
  an::DecayFit fit;
  bool fitted = false;
  try {
    fit = an::fit_decay(t, e);
    fitted = true;
  } catch (const std::invalid_argument&) {
  }
  if (fitted) {
    if (rate) *rate = fit.rate;
    if (r2) *r2 = fit.r2;
  }
  if (!nonincreasing) return "growth";
  // A positive rate must also show up as a visible drop over the run.
  if (fitted && fit.rate > 0.0 && fit.r2 > 0.9 && e.back() < (1.0 - 1e-3) * e.front()) return "decay";
  return "conservative";
}

int run_simulate(const RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::string hash = config_hash(cfg);
  const Setup s = setup(cfg);
  ensure_directory(ctx.out_dir);
  const Trajectory tr = run_trajectory(ctx, s);

  std::vector<std::string> cols{"t"};
  for (int k = 0; k <= cfg.p; ++k)
    for (const char* name : {"E1", "E2", "F1", "F2", "scriptE", "scriptD"})
      cols.push_back(std::string(name) + "_" + std::to_string(k));
  for (const char* name : {"lambda", "l2_psi", "l2_v", "l2_w"}) cols.push_back(name);
  CsvWriter csv(path_in(ctx, "simulate.csv"), hash, cols);
  for (const auto& smp : tr.report.samples) {
    csv.add(smp.t);
    for (const auto& o : smp.order) csv.add(o.E1).add(o.E2).add(o.F1).add(o.F2).add(o.scriptE).add(o.scriptD);
    csv.add(smp.lambda).add(smp.l2_psi).add(smp.l2_v).add(smp.l2_w);
    csv.end_row();
  }
  csv.close();

  // Same rule as the boundedness experiment: growth on blow-up or when the
  // trajectory norm exceeds twice its value at t = min(1, T).
  std::string verdict = "bounded", reason;
  const auto tn = energy::trajectory_norms(tr.report, cfg.p);
  double ref = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < tn.t.size(); ++i) {
    const double v = std::sqrt(tn.E[i]) + std::sqrt(tn.D[i]);
    if (tn.t[i] <= std::min(1.0, cfg.T) + 1e-12) ref = v;
    peak = std::max(peak, v);
  }
  if (tr.result.blew_up) {
    verdict = "growth";
    reason = tr.result.reason;
  } else if (peak > 2.0 * ref && peak > 0.0) {
    verdict = "growth";
    reason = "norm exceeded twice its value at t = 1";
  }
  std::vector<double> t;
  const auto e = series(tr.report, &t);
  double rate = 0.0, r2 = 0.0;
  const std::string trend = classify_series(t, e, cfg.rel_tol, &rate, &r2);

  json body{{"command", "simulate"},
            {"admissibility", admissibility(cfg)},
            {"verdict", verdict},
            {"reason", reason},
            {"blew_up", tr.result.blew_up},
            {"blowup_time", tr.result.blowup_time},
            {"t_end", tr.result.t_end},
            {"steps", tr.result.steps},
            {"samples", tr.report.samples.size()},
            {"E1_trend", trend},
            {"decay_rate", rate},
            {"decay_r2", r2},
            {"E1_initial", e.empty() ? 0.0 : e.front()},
            {"E1_final", e.empty() ? 0.0 : e.back()}};
  write_json(path_in(ctx, "simulate.json"), hash, body);
  note(ctx, "verdict " + verdict);
  return 0;
}

int run_verify(const RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::string hash = config_hash(cfg);
  const Setup s = setup(cfg);
  ensure_directory(ctx.out_dir);
  const Trajectory tr = run_trajectory(ctx, s);
  json checks = json::array();
  bool all = true;
  for (int k = 0; k <= cfg.p; ++k) {
    for (an::Check c : {an::Check::E1, an::Check::E2, an::Check::W, an::Check::Lyapunov}) {
      an::DissipationOptions opt;
      opt.kappa = k;
      opt.rel_tol = cfg.rel_tol;
      const auto v = an::verify_dissipation(tr.report, c, opt);
      all = all && v.pass;
      checks.push_back(verdict_json(v, k));
    }
  }
  json body{{"command", "verify"},
            {"admissibility", admissibility(cfg)},
            {"blew_up", tr.result.blew_up},
            {"t_end", tr.result.t_end},
            {"checks", checks},
            {"all_pass", all}};
  write_json(path_in(ctx, "verify.json"), hash, body);
  note(ctx, all ? "all dissipation checks pass" : "some dissipation checks fail");
  return 0;
}

int run_resolvent(const RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (cfg.history.mode != MemoryMode::dafermos)
    throw ConfigError("history.mode", "resolvent needs a dafermos history");
  const std::string hash = config_hash(cfg);
  const Setup s = setup(cfg);
  ensure_directory(ctx.out_dir);
  const auto quad = make_quadrature(s.params.kernel, cfg.history);
  const auto coef = an::resolvent_coefficients(s.params, *quad);
  std::mt19937_64 rng(cfg.seed);
  double worst = 0.0, sum = 0.0;
  for (int i = 0; i < cfg.resolvent.samples; ++i) {
    const StateVector F = an::random_domain_state(s.grid, quad, rng);
    const double r = an::resolvent_residual(s.params, an::resolvent_solve(s.params, F), F, cfg.resolvent.m);
    worst = std::max(worst, r);
    sum += r;
  }
  json body{{"command", "resolvent"},
            {"admissibility", admissibility(cfg)},
            {"nu", coef.nu},
            {"nu_continuous", coef.nu_continuous},
            {"sigma", coef.sigma},
            {"samples", cfg.resolvent.samples},
            {"seed", cfg.seed},
            {"max_relative_residual", worst},
            {"mean_relative_residual", sum / cfg.resolvent.samples}};
  write_json(path_in(ctx, "resolvent.json"), hash, body);
  note(ctx, "max relative residual " + format_number(worst));
  return 0;
}

int run_picard(const RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (cfg.history.mode == MemoryMode::closure)
    throw ConfigError("history.mode", "Picard iteration needs a dafermos or memoryless history");
  const std::string hash = config_hash(cfg);
  const Setup s = setup(cfg);
  ensure_directory(ctx.out_dir);
  an::PicardOptions opt;
  opt.T = cfg.picard.T;
  opt.dt = cfg.picard.dt;
  opt.tol = cfg.picard.tol;
  opt.max_iter = cfg.picard.max_iter;
  opt.m = cfg.picard.m;
  opt.transport = cfg.transport;
  const auto res = an::picard_solve(s.params, s.initial, opt);

  RhsConfig direct_cfg = s.rhs;
  direct_cfg.nonlinear = true;
  const auto direct = simulate(s.initial, s.params, direct_cfg, opt.T, opt.dt, nullptr, 1);
  double gap = std::nan("");
  if (!direct.blew_up && res.final_state) {
    const double scale = energy::standard_norm(direct.final_state, s.params, opt.m);
    const double d =
        energy::standard_norm(an::difference(*res.final_state, direct.final_state), s.params, opt.m);
    gap = scale > 0.0 ? d / scale : d;
  }
  json body{{"command", "picard"},
            {"admissibility", admissibility(cfg)},
            {"iterations", res.iterations},
            {"differences", res.differences},
            {"q", res.q},
            {"converged", res.converged},
            {"message", res.message},
            {"relative_gap_to_direct", gap}};
  write_json(path_in(ctx, "picard.json"), hash, body);
  note(ctx, res.message);
  return 0;
}

int run_scan(const RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::string hash = config_hash(cfg);
  const Grid grid = make_grid(cfg);
  const Field psi0 = make_profile(grid, cfg.psi0, "initial.psi0");
  const Field psi1 = make_profile(grid, cfg.psi1, "initial.psi1");
  const Field psi2 = make_profile(grid, cfg.psi2, "initial.psi2");
  ensure_directory(ctx.out_dir);

  struct Point {
    double ratio = 0.0, mass = 0.0;
    std::string regime, verdict, error;
    double rate = 0.0, r2 = 0.0;
  };
  std::vector<Point> points;
  for (double r : cfg.scan.b_ratios)
    for (double m : cfg.scan.masses) points.push_back({r, m, "", "", "", 0.0, 0.0});
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    return a.ratio != b.ratio ? a.ratio < b.ratio : a.mass < b.mass;
  });

  const auto job = [&](Point& pt) {
    SystemParams p;
    p.tau = cfg.tau;
    p.c2 = cfg.c2;
    p.k = cfg.k;
    p.b = pt.ratio * cfg.tau * cfg.c2;
    HistoryConfig h = cfg.history;
    if (pt.mass > 0.0) {
      p.kernel = MemoryKernel::exponential(pt.mass / (cfg.c2 * cfg.kernel.tau_r), cfg.c2, cfg.kernel.tau_r);
      if (h.mode == MemoryMode::none) h.mode = MemoryMode::dafermos;
    } else {
      p.kernel = MemoryKernel::none();
      h.mode = MemoryMode::none;
    }
    pt.regime = to_string(classify_regime(p));
    const StateVector y0 = init_state(p, psi0, psi1, psi2, h);
    energy::Recorder rec(p, 0, false);
    const RhsConfig rc{h.mode, false, false, Transport::upwind};
    const auto res = simulate(y0, p, rc, cfg.scan.T, cfg.scan.dt, rec.observer(), cfg.scan.stride);
    if (res.blew_up) {
      pt.verdict = "growth";
      pt.rate = -INFINITY;
      return;
    }
    std::vector<double> t;
    const auto e = series(rec.report(), &t);
    pt.verdict = classify_series(t, e, cfg.rel_tol, &pt.rate, &pt.r2);
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t jobs = std::min<std::size_t>(points.size(), cfg.scan.jobs > 0 ? cfg.scan.jobs : hw);
  note(ctx, "scanning " + std::to_string(points.size()) + " points on " + std::to_string(jobs) + " threads");
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        job(points[i]);
      } catch (const std::exception& e) {
        points[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& pt : points)
    if (!pt.error.empty()) throw std::runtime_error("scan point failed: " + pt.error);

  CsvWriter csv(path_in(ctx, "scan.csv"), hash, {"b_ratio", "mass", "regime", "rate", "r2", "verdict"});
  for (const auto& pt : points) {
    csv.add(pt.ratio).add(pt.mass).add(pt.regime).add(pt.rate).add(pt.r2).add(pt.verdict);
    csv.end_row();
  }
  csv.close();
  return 0;
}

int run_convergence(const RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (cfg.psi0.profile == "file")
    throw ConfigError("initial.psi0.profile", "convergence needs an analytic profile");
  if (cfg.kernel.type == "none")
    throw ConfigError("kernel.type", "convergence study needs a memory kernel");
  if (cfg.convergence.mode == MemoryMode::closure && cfg.kernel.type != "exponential")
    throw ConfigError("convergence.mode", "closure requires an exponential kernel");
  const std::string hash = config_hash(cfg);
  const Setup s = setup(cfg);
  ensure_directory(ctx.out_dir);

  const Field X = make_profile(s.grid, cfg.psi0, "initial.psi0");
  note(ctx, "temporal study");
  const auto trows = an::temporal_convergence(s.params, X, cfg.convergence.T_time, cfg.convergence.dts,
                                              cfg.convergence.mode, cfg.nonlinear, cfg.history);
  CsvWriter tcsv(path_in(ctx, "convergence_dt.csv"), hash, {"dt", "error", "ratio", "order"});
  for (const auto& r : trows) {
    tcsv.add(r.h).add(r.error).add(r.ratio).add(r.ratio > 0.0 ? std::log2(r.ratio) : 0.0);
    tcsv.end_row();
  }
  tcsv.close();

  // The profile evaluated at arbitrary points.
  const ProfileSpec spec = cfg.psi0;
  const double kx = 2.0 * M_PI * spec.wavenumber / cfg.length;
  const double L = cfg.length;
  const int dim = cfg.dim;
  const auto Xf = [spec, kx, L, dim](const std::array<double, 3>& x) {
    if (spec.profile == "mode") return spec.amplitude * std::cos(kx * x[0]);
    if (spec.profile == "gaussian") {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double c = spec.center.empty() ? 0.5 * L : spec.center[a];
        r2 += (x[a] - c) * (x[a] - c);
      }
      return spec.amplitude * std::exp(-0.5 * r2 / (spec.width * spec.width));
    }
    return 0.0;
  };
  note(ctx, "spatial study");
  const auto srows = an::spatial_convergence(s.params, Xf, cfg.dim, cfg.length, cfg.convergence.ns,
                                             cfg.convergence.n_ref, cfg.convergence.T,
                                             cfg.convergence.dt, cfg.convergence.mode, cfg.nonlinear);
  CsvWriter scsv(path_in(ctx, "convergence_n.csv"), hash, {"n", "error", "ratio"});
  for (const auto& r : srows) {
    scsv.add(static_cast<long>(r.h)).add(r.error).add(r.ratio);
    scsv.end_row();
  }
  scsv.close();
  return 0;
}

}  // namespace jmgt::cli
