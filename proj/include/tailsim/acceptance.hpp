#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tailsim/metrics.hpp"
#include "tailsim/sim_engine.hpp"
#include "tailsim/sweep.hpp"

namespace tailsim {

struct CriterionResult {
  std::string id;
  bool pass = false;
  std::string detail;
  double elapsed_ms = 0.0;
};

namespace acceptance_detail {

inline bool records_identical(const RunResult& a, const RunResult& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& ra = a.records[i];
    const auto& rb = b.records[i];
    if (ra.t != rb.t || ra.clock != rb.clock || ra.loss != rb.loss ||
        ra.grad_norm_sq != rb.grad_norm_sq || ra.min_grad_norm_sq != rb.min_grad_norm_sq ||
        ra.delays != rb.delays) {
      return false;
    }
  }
  return true;
}

inline RunConfig zero_async_config() {
  // N = M = 8, fixed equal runtimes: no asynchrony is possible.
  RunConfig cfg;
  const int d = 20;
  ModelVector h(d);
  for (int i = 0; i < d; ++i) h[static_cast<std::size_t>(i)] = 0.5 + 1.5 * i / (d - 1);
  cfg.problem = Problem::quadratic_diag(h, ModelVector(d, 0.0));
  cfg.noise = NoiseSpec{NoiseKind::Gaussian, 1.5, 1.0, d};
  cfg.mode = Mode::ServerCentric;
  cfg.num_clients = 8;
  cfg.buffer = 8;
  cfg.local_steps = 2;
  cfg.rounds = 100;
  cfg.policy = PolicyKind::Clip2;
  cfg.schedules = resolve_preset({PresetName::Clip2Vanilla, 1.5, 100});
  cfg.client_groups = {{RuntimeClass::Custom, 8, 1.0, 1.0}};
  cfg.master_seed = 7;
  cfg.x0 = ModelVector(d, 1.0);
  return cfg;
}

inline std::string fmt(double v) { return format_double(v); }

// The dyadic-rational synchronous run whose whole trajectory is exact in
// binary floating point; the expected CSV below is hand-computed.
inline RunConfig golden_csv_config() {
  RunConfig cfg;
  cfg.problem = Problem::quadratic_diag({2.0, 4.0}, {1.0, 0.0});
  cfg.noise = NoiseSpec{NoiseKind::Zero, 1.5, 1.0, 2};
  cfg.mode = Mode::Synchronous;
  cfg.num_clients = 2;
  cfg.buffer = 2;
  cfg.local_steps = 1;
  cfg.rounds = 3;
  cfg.policy = PolicyKind::SgdClip;
  cfg.schedules.eta_outer = PowerSchedule::constant(1.0);
  cfg.schedules.eta_local = PowerSchedule::constant(0.125);
  cfg.schedules.u_local = PowerSchedule::infinite();
  cfg.schedules.u_outer = PowerSchedule::infinite();
  cfg.client_groups = {{RuntimeClass::Custom, 2, 1.0, 1.0}};
  cfg.master_seed = 0;
  cfg.x0 = {2.0, 1.0};
  return cfg;
}

constexpr const char* kGoldenCsv =
    "t,clock,loss,grad_norm_sq,min_grad_norm_sq,delays\n"
    "1,1,1.0625,6.25,6.25,1;1\n"
    "2,2,0.44140625,2.265625,2.265625,1;1\n"
    "3,3,0.209228515625,0.9619140625,0.9619140625,1;1\n";

}  // namespace acceptance_detail

/// A1: server-centric and synchronous trajectories coincide bit-exactly
/// when every client has the same fixed runtime and M = N.
inline CriterionResult criterion_a1() {
  using namespace acceptance_detail;
  RunConfig sync_cfg = zero_async_config();
  sync_cfg.mode = Mode::Synchronous;
  RunConfig sc_cfg = zero_async_config();
  const RunResult a = run_simulation(sync_cfg);
  const RunResult b = run_simulation(sc_cfg);
  const bool pass = records_identical(a, b);
  return {"A1", pass,
          pass ? "server-centric == synchronous bit-exact over T=100 rounds"
               : "trajectories differ",
          0.0};
}

/// A2: with M = 1 the server- and client-centric schedules are identical.
inline CriterionResult criterion_a2() {
  using namespace acceptance_detail;
  RunConfig sc;
  const int d = 10;
  sc.problem = Problem::quadratic_diag(ModelVector(d, 1.0), ModelVector(d, 0.0));
  sc.noise = NoiseSpec{NoiseKind::ParetoSymmetric, 1.5, 1.0, d};
  sc.mode = Mode::ServerCentric;
  sc.num_clients = 10;
  sc.buffer = 1;
  sc.local_steps = 3;
  sc.rounds = 200;
  sc.policy = PolicyKind::Clip2;
  sc.schedules = resolve_preset({PresetName::Clip2Vanilla, 1.5, 200});
  sc.client_groups = {{RuntimeClass::Small, 4},
                      {RuntimeClass::Medium, 3},
                      {RuntimeClass::LargeMild, 2},
                      {RuntimeClass::LargeSevere, 1}};
  sc.master_seed = 11;
  sc.history_capacity = 1024;
  sc.x0 = ModelVector(d, 1.0);
  RunConfig cc = sc;
  cc.mode = Mode::ClientCentric;
  const RunResult a = run_simulation(sc);
  const RunResult b = run_simulation(cc);
  const bool pass = records_identical(a, b);
  return {"A2", pass,
          pass ? "M=1 server-centric == client-centric bit-exact (T=200, N=10 mixed)"
               : "M=1 trajectories differ",
          0.0};
}

/// A3: with every consumed delay equal to one, SD variants reduce to their
/// vanilla counterparts bit-exactly.
inline CriterionResult criterion_a3() {
  using namespace acceptance_detail;
  bool pass = true;
  std::string detail;
  const std::pair<PolicyKind, PolicyKind> pairs[] = {
      {PolicyKind::SgdClip, PolicyKind::SgdClipSD},
      {PolicyKind::Clip2, PolicyKind::Clip2SD},
  };
  for (const auto& [vanilla, sd] : pairs) {
    RunConfig a_cfg = zero_async_config();
    a_cfg.policy = vanilla;
    RunConfig b_cfg = zero_async_config();
    b_cfg.policy = sd;
    const bool same = records_identical(run_simulation(a_cfg), run_simulation(b_cfg));
    pass = pass && same;
    if (!detail.empty()) detail += "; ";
    detail += std::string(vanilla == PolicyKind::SgdClip ? "SgdClipSD==SgdClip"
                                                         : "Clip2SD==Clip2") +
              (same ? " ok" : " FAILED");
  }
  return {"A3", pass, detail, 0.0};
}

/// A4: with zero staleness the delay-compensation correction vanishes and
/// Clip2DC equals Clip2 bit-exactly.
inline CriterionResult criterion_a4() {
  using namespace acceptance_detail;
  RunConfig dc_cfg = zero_async_config();
  dc_cfg.mode = Mode::Synchronous;
  dc_cfg.policy = PolicyKind::Clip2DC;
  dc_cfg.track_hessian = true;
  RunConfig c2_cfg = zero_async_config();
  c2_cfg.mode = Mode::Synchronous;
  c2_cfg.policy = PolicyKind::Clip2;
  c2_cfg.track_hessian = true;
  const bool pass = records_identical(run_simulation(dc_cfg), run_simulation(c2_cfg));
  return {"A4", pass,
          pass ? "synchronous Clip2DC == Clip2 bit-exact" : "DC changed a zero-staleness run",
          0.0};
}

/// A5: on a diagonal quadratic with the exact Hessian injected, delay
/// compensation recovers the fresh gradient to 1e-12 at staleness 3.
inline CriterionResult criterion_a5() {
  const ModelVector h{0.5, 0.8, 1.0, 1.5, 2.0};
  const ModelVector x_star{0.1, -0.2, 0.3, 0.0, -0.5};
  const Problem problem = Problem::quadratic_diag(h, x_star);
  const NoiseSpec zero_noise{NoiseKind::Zero, 1.5, 1.0, 5};
  const double eta_local = 0.05;

  AggregationPolicy policy;
  policy.kind = PolicyKind::Clip2DC;
  policy.eta_outer = PowerSchedule::constant(1.0);
  policy.u_outer = PowerSchedule::infinite();
  ServerState server(ModelVector(5, 1.0), policy, 64);

  LocalRunParams params;
  params.steps = 1;
  params.eta_local = PowerSchedule::constant(eta_local);
  params.u_local = PowerSchedule::infinite();
  params.track_hessian = true;

  double worst = 0.0;
  long max_p = 0;
  RngStream rng(1);
  for (long round = 1; round <= 12; ++round) {
    const long base = std::max(0L, server.round() - 2);  // p = 3 once warmed up
    params.base_round = base;
    const int client = static_cast<int>(round % 2);
    ClientUpdate u = run_local(problem, zero_noise, server.model_at(base), client, params, rng);
    u.hessian_approx = ModelVector(5);
    for (std::size_t i = 0; i < 5; ++i) (*u.hessian_approx)[i] = eta_local * h[i];

    const ModelVector corrected = server.dc_correct({u}, server.compute_delta({u}));
    const ModelVector fresh = problem.clean_grad(server.model());
    for (std::size_t i = 0; i < 5; ++i) {
      worst = std::max(worst, std::abs(corrected[i] + eta_local * fresh[i]));
    }
    max_p = std::max(max_p, server.round() + 1 - base);
    server.aggregate({u});
  }
  const bool pass = worst < 1e-12 && max_p == 3;
  return {"A5", pass,
          "max |corrected + eta*grad F(x_{t-1})| = " + acceptance_detail::fmt(worst) +
              " at staleness " + std::to_string(max_p),
          0.0};
}

/// A6: under heavy-tailed noise and severe stragglers, Clip2 beats plain
/// (unclipped) asynchronous SGD on final loss in >= 16 of 20 seeds, and
/// plain SGD shows at least one divergence-scale excursion.
inline CriterionResult criterion_a6() {
  const int d = 10;
  auto base_cfg = [&](PolicyKind policy) {
    RunConfig cfg;
    cfg.problem = Problem::quadratic_diag(ModelVector(d, 1.0), ModelVector(d, 0.0));
    cfg.noise = NoiseSpec{NoiseKind::ParetoSymmetric, 1.5, 1.0, d};
    cfg.mode = Mode::ClientCentric;
    cfg.num_clients = 10;
    cfg.buffer = 4;
    cfg.local_steps = 5;
    cfg.rounds = 500;
    cfg.policy = policy;
    cfg.client_groups = {{RuntimeClass::LargeSevere, 10}};
    cfg.x0 = ModelVector(d, 1.0);
    cfg.history_capacity = 256;
    if (policy == PolicyKind::Clip2) {
      cfg.schedules = resolve_preset({PresetName::Clip2Vanilla, 1.5, 500});
    } else {
      // plain asynchronous SGD: no clipping anywhere, constant rates
      cfg.schedules.eta_outer = PowerSchedule::constant(1.0);
      cfg.schedules.eta_local = PowerSchedule::constant(0.1);
      cfg.schedules.u_local = PowerSchedule::infinite();
      cfg.schedules.u_outer = PowerSchedule::infinite();
    }
    return cfg;
  };

  const double start_dist = std::sqrt(static_cast<double>(d));  // ||x0 - x*||
  int clip_wins = 0;
  int excursion_seeds = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RunConfig clip_cfg = base_cfg(PolicyKind::Clip2);
    clip_cfg.master_seed = seed;
    RunConfig plain_cfg = base_cfg(PolicyKind::SgdClip);
    plain_cfg.master_seed = seed;
    const RunResult clip_run = run_simulation(clip_cfg);
    const RunResult plain_run = run_simulation(plain_cfg);
    const double clip_loss = clip_run.records.back().loss;
    const double plain_loss = plain_run.records.back().loss;
    if (clip_loss < plain_loss || (std::isnan(plain_loss) && !std::isnan(clip_loss))) {
      ++clip_wins;
    }
    if (!(plain_run.max_model_norm <= 10.0 * start_dist)) ++excursion_seeds;
  }
  const bool pass = clip_wins >= 16 && excursion_seeds >= 1;
  return {"A6", pass,
          "Clip2 beat plain async SGD in " + std::to_string(clip_wins) +
              "/20 seeds (need >= 16); divergence-scale excursions (||x|| > 10 ||x0-x*||) in " +
              std::to_string(excursion_seeds) + "/20 plain-SGD seeds (need >= 1)",
          0.0};
}

/// A7: empirical rate-slope sanity for asynchronous SGDClip at alpha = 1.5:
/// the fitted log-log slope of min ||grad F||^2 over geometric horizons must
/// be negative and at most -0.05 (theory reference: -(alpha-1)/(2 alpha)).
inline CriterionResult criterion_a7() {
  const int d = 10;
  const std::vector<long> horizons{256, 512, 1024, 2048, 4096};
  std::vector<std::pair<long, double>> points;
  for (long horizon : horizons) {
    std::vector<double> per_seed;
    for (std::uint64_t seed = 101; seed <= 110; ++seed) {
      RunConfig cfg;
      cfg.problem = Problem::quadratic_diag(ModelVector(d, 1.0), ModelVector(d, 0.0));
      cfg.noise = NoiseSpec{NoiseKind::ParetoSymmetric, 1.5, 1.0, d};
      cfg.mode = Mode::ServerCentric;
      cfg.num_clients = 8;
      cfg.buffer = 4;
      cfg.local_steps = 2;
      cfg.rounds = horizon;
      cfg.policy = PolicyKind::SgdClip;
      cfg.schedules = resolve_preset({PresetName::SGDClipVanilla, 1.5, horizon});
      cfg.client_groups = {{RuntimeClass::Small, 8}};
      cfg.master_seed = seed;
      cfg.x0 = ModelVector(d, 2.0);
      per_seed.push_back(run_simulation(cfg).records.back().min_grad_norm_sq);
    }
    points.emplace_back(horizon, sweep_detail::median(per_seed));
  }
  const double slope = rate_slope(points);
  const double reference = -(1.5 - 1.0) / (2.0 * 1.5);
  const bool pass = slope < 0.0 && slope <= -0.05;
  std::string detail = "fitted slope " + acceptance_detail::fmt(slope) +
                       " (pass: negative and <= -0.05); theoretical upper-bound slope " +
                       acceptance_detail::fmt(reference) + "; medians:";
  for (const auto& [h, v] : points) {
    detail += " T=" + std::to_string(h) + ":" + acceptance_detail::fmt(v);
  }
  return {"A7", pass, detail, 0.0};
}

/// A8: staleness-aware downplaying keeps every point of the 4x4 learning
/// rate cross finite under an extreme 10%/90% small/severe split, while
/// vanilla SGDClip destroys at least one grid point. With one hundred
/// clients at M=1 every consumed update is at least ~14 rounds stale, so
/// full-weight stale contributions flood the model at the aggressive
/// corner; the 1/p rescale suppresses exactly that flood.
inline CriterionResult criterion_a8() {
  const int d = 10;
  const double x0_offset = 0.0025;  // calibrated by the pre-build pilot
  const std::vector<double> lr_grid{0.1, 0.01, 0.001, 0.0001};
  auto make_cfg = [&](PolicyKind policy, double server_lr, double client_lr) {
    RunConfig cfg;
    ModelVector h(d);
    for (int i = 0; i < d; ++i) h[static_cast<std::size_t>(i)] = 0.5 + 1.5 * i / (d - 1);
    cfg.problem = Problem::quadratic_diag(h, ModelVector(d, 0.0));
    cfg.noise = NoiseSpec{NoiseKind::ParetoSymmetric, 1.5, 1.0, d};
    cfg.mode = Mode::ClientCentric;
    cfg.num_clients = 100;
    cfg.buffer = 1;
    cfg.local_steps = 5;
    cfg.rounds = 1000;
    cfg.policy = policy;
    cfg.schedules.eta_outer = PowerSchedule::constant(server_lr);
    cfg.schedules.eta_local = PowerSchedule::constant(client_lr);
    cfg.schedules.u_local = PowerSchedule::constant(1.5);
    cfg.schedules.u_outer = PowerSchedule::infinite();
    cfg.client_groups = {{RuntimeClass::Small, 10}, {RuntimeClass::LargeSevere, 90}};
    cfg.master_seed = 5;
    cfg.history_capacity = 4096;
    cfg.x0 = ModelVector(d, x0_offset);
    return cfg;
  };

  const double initial_loss =
      make_cfg(PolicyKind::SgdClip, 0.1, 0.1).problem.eval_loss(ModelVector(d, x0_offset));
  const double blowup = 1e3 * initial_loss;

  auto peak_loss = [](const RunResult& r) {
    double peak = 0.0;
    for (const auto& rec : r.records) peak = std::max(peak, rec.loss);
    return peak;
  };

  int sd_controlled = 0;
  int vanilla_blowups = 0;
  double sd_worst = 0.0;
  double vanilla_worst = 0.0;
  for (double slr : lr_grid) {
    for (double clr : lr_grid) {
      try {
        const RunResult r = run_simulation(make_cfg(PolicyKind::SgdClipSD, slr, clr));
        const double peak = peak_loss(r);
        sd_worst = std::max(sd_worst, peak);
        if (std::isfinite(r.records.back().loss) && peak <= blowup) ++sd_controlled;
      } catch (const std::exception&) {
        // counts as not controlled
      }

      bool vanilla_bad = false;
      try {
        const RunResult r = run_simulation(make_cfg(PolicyKind::SgdClip, slr, clr));
        const double peak = peak_loss(r);
        vanilla_worst = std::max(vanilla_worst, peak);
        vanilla_bad = !std::isfinite(r.records.back().loss) || peak > blowup;
      } catch (const std::exception&) {
        vanilla_bad = true;
      }
      if (vanilla_bad) ++vanilla_blowups;
    }
  }
  const bool pass = sd_controlled == 16 && vanilla_blowups >= 1;
  return {"A8", pass,
          "SD finite and below 1000x initial on " + std::to_string(sd_controlled) +
              "/16 grid points (worst " + acceptance_detail::fmt(sd_worst / initial_loss) +
              "x initial); vanilla exceeded 1000x initial on " +
              std::to_string(vanilla_blowups) + " point(s), worst " +
              acceptance_detail::fmt(vanilla_worst / initial_loss) + "x initial",
          0.0};
}

/// A9: the total simulated clock strictly increases with the buffer size M
/// and stays below the synchronous clock at equal T.
inline CriterionResult criterion_a9() {
  const int d = 10;
  auto make_cfg = [&](Mode mode, int m) {
    RunConfig cfg;
    cfg.problem = Problem::quadratic_diag(ModelVector(d, 1.0), ModelVector(d, 0.0));
    cfg.noise = NoiseSpec{NoiseKind::ParetoSymmetric, 1.5, 1.0, d};
    cfg.mode = mode;
    cfg.num_clients = 40;
    cfg.buffer = m;
    cfg.local_steps = 5;
    cfg.rounds = 100;
    cfg.policy = PolicyKind::Clip2;
    cfg.schedules = resolve_preset({PresetName::Clip2Vanilla, 1.5, 100});
    cfg.client_groups = {{RuntimeClass::Small, 17},
                         {RuntimeClass::Medium, 12},
                         {RuntimeClass::LargeMild, 11}};
    cfg.master_seed = 21;
    cfg.history_capacity = 8192;
    cfg.x0 = ModelVector(d, 1.0);
    return cfg;
  };

  std::vector<double> clocks;
  for (int m : {1, 10, 20, 30}) {
    clocks.push_back(run_simulation(make_cfg(Mode::ServerCentric, m)).total_sim_time);
  }
  const double sync_clock = run_simulation(make_cfg(Mode::Synchronous, 40)).total_sim_time;

  bool increasing = true;
  for (std::size_t i = 1; i < clocks.size(); ++i) increasing = increasing && clocks[i] > clocks[i - 1];
  bool below_sync = true;
  for (double c : clocks) below_sync = below_sync && c < sync_clock;

  std::string detail = "clocks M={1,10,20,30}:";
  for (double c : clocks) detail += " " + acceptance_detail::fmt(c);
  detail += "; sync: " + acceptance_detail::fmt(sync_clock);
  return {"A9", increasing && below_sync, detail, 0.0};
}

/// A10: consolidated module invariants under randomized property testing.
inline CriterionResult criterion_a10(const std::string& golden_csv_path) {
  using namespace acceptance_detail;
  std::vector<std::string> failures;

  // clip algebra on 10^5 random vectors
  {
    RngStream rng(2718);
    for (int trial = 0; trial < 100000 && failures.size() < 3; ++trial) {
      const int d = 1 + static_cast<int>(rng.uniform() * 5);
      ModelVector g(static_cast<std::size_t>(d));
      for (auto& v : g) v = std::tan(rng.uniform(-1.5, 1.5));
      const double u1 = rng.uniform(0.0, 2.0);
      const double u2 = u1 + rng.uniform(0.0, 2.0);
      const ModelVector c1 = clip(u1, g);
      if (l2_norm(c1) > l2_norm(g) * (1.0 + 1e-12)) failures.push_back("clip expansive");
      if (linf_norm(c1) > u1 * (1.0 + 1e-12)) failures.push_back("clip exceeds threshold");
      if (clip(u1, c1) != c1) failures.push_back("clip not idempotent");
      const ModelVector c2 = clip(u2, g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::abs(c1[i]) > std::abs(c2[i])) failures.push_back("clip not monotone");
      }
    }
  }

  // local step and Hessian-approximator bounds on 10^4 random runs
  {
    const Problem p = Problem::quadratic_diag({1.0, 2.0}, {0.0, 0.0});
    const NoiseSpec noise{NoiseKind::ParetoSymmetric, 1.5, 1.0, 2};
    RngStream outer(3141);
    for (int trial = 0; trial < 10000 && failures.size() < 3; ++trial) {
      LocalRunParams params;
      params.base_round = 1 + static_cast<long>(outer.uniform() * 50);
      params.steps = 1 + static_cast<int>(outer.uniform() * 5);
      params.eta_local = PowerSchedule::constant(outer.uniform(0.01, 0.4));
      params.u_local = PowerSchedule::constant(outer.uniform(0.0, 2.0));
      params.track_hessian = true;
      RngStream rng(static_cast<std::uint64_t>(trial) + 999);
      ModelVector x0{outer.uniform(-2.0, 2.0), outer.uniform(-2.0, 2.0)};
      const ClientUpdate u = run_local(p, noise, x0, 0, params, rng);
      const double eta = params.eta_local.base;
      const double thr = params.u_local.base;
      // relative tolerance plus an absolute allowance for iterate rounding
      if (linf_norm(u.delta) > params.steps * eta * thr * (1.0 + 1e-12) + 1e-13) {
        failures.push_back("local step bound violated");
      }
      for (double a : *u.hessian_approx) {
        if (a < 0.0 || a > params.steps * eta * eta * thr * thr * (1.0 + 1e-12) + 1e-13) {
          failures.push_back("hessian approximator bound violated");
        }
      }
    }
  }

  // end-to-end determinism, staleness floor, queue conservation
  for (Mode mode : {Mode::ServerCentric, Mode::ClientCentric}) {
    RunConfig cfg = zero_async_config();
    cfg.mode = mode;
    cfg.num_clients = 9;
    cfg.buffer = 3;
    cfg.rounds = 60;
    cfg.policy = PolicyKind::Clip2SD;
    cfg.noise.kind = NoiseKind::ParetoSymmetric;
    cfg.client_groups = {{RuntimeClass::Small, 3},
                         {RuntimeClass::Medium, 3},
                         {RuntimeClass::LargeSevere, 3}};
    cfg.history_capacity = 2048;
    const RunResult a = run_simulation(cfg);
    const RunResult b = run_simulation(cfg);
    if (!records_identical(a, b)) failures.push_back("re-run not bit-identical");
    if (a.total_dispatched != a.total_consumed + a.queued_at_end + a.in_flight_at_end) {
      failures.push_back("work not conserved");
    }
    double prev_clock = 0.0;
    double running_min = std::numeric_limits<double>::infinity();
    for (const auto& rec : a.records) {
      for (long p : rec.delays) {
        if (p < 1) failures.push_back("staleness below 1");
      }
      if (rec.clock <= prev_clock) failures.push_back("clock not strictly increasing");
      prev_clock = rec.clock;
      running_min = std::min(running_min, rec.grad_norm_sq);
      if (rec.min_grad_norm_sq != running_min) failures.push_back("running min wrong");
    }
  }

  // noise symmetry and the heavy-tail moment signature (calibrated seeds)
  {
    NoiseSpec spec{NoiseKind::ParetoSymmetric, 1.5, 1.0, 1};
    RngStream rng(5);
    int positive = 0;
    for (int i = 0; i < 100000; ++i) {
      if (sample_noise(spec, rng)[0] > 0.0) ++positive;
    }
    const double frac = positive / 100000.0;
    if (frac < 0.49 || frac > 0.51) failures.push_back("pareto sign asymmetry");

    auto moment = [&spec](std::uint64_t seed, int n, double expo) {
      RngStream r(seed);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += std::pow(std::abs(sample_noise(spec, r)[0]), expo);
      return acc / n;
    };
    double lo_min = 1e300, lo_max = 0.0, hi_min = 1e300, hi_max = 0.0;
    for (std::uint64_t seed = 400; seed < 405; ++seed) {
      const double ml = moment(seed, 10000, 1.4);
      const double mh = moment(seed, 10000, 2.0);
      lo_min = std::min(lo_min, ml);
      lo_max = std::max(lo_max, ml);
      hi_min = std::min(hi_min, mh);
      hi_max = std::max(hi_max, mh);
    }
    if ((lo_max - lo_min) / lo_min >= 0.25) failures.push_back("sub-alpha moment unstable");
    if ((hi_max - hi_min) / hi_min <= 0.50) failures.push_back("second moment too stable");
  }

  // analytic gradients against central finite differences
  {
    const Problem problems[] = {
        Problem::quadratic_diag({0.5, 1.0, 2.5}, {0.2, -0.4, 1.0}),
        Problem::logistic_synthetic(5, 40, 7),
        Problem::nonconvex_wells({1.0, 0.7}, {0.5, -0.25}),
    };
    RngStream rng(31);
    for (const Problem& p : problems) {
      for (int trial = 0; trial < 100; ++trial) {
        ModelVector x(static_cast<std::size_t>(p.dim()));
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        const ModelVector g = p.clean_grad(x);
        ModelVector fd(x.size());
        ModelVector xp = x, xm = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
          xp[i] = x[i] + 1e-5;
          xm[i] = x[i] - 1e-5;
          fd[i] = (p.eval_loss(xp) - p.eval_loss(xm)) / 2e-5;
          xp[i] = x[i];
          xm[i] = x[i];
        }
        if (l2_norm(sub(fd, g)) > 1e-6 * (1.0 + l2_norm(g))) {
          failures.push_back("finite-difference gradient mismatch");
          break;
        }
      }
    }
  }

  // strong convexity certificate on the quadratic kind
  {
    const Problem p = Problem::quadratic_diag({0.7, 2.0}, {0.3, -1.0});
    const double mu = p.strong_convexity();
    RngStream rng(45);
    for (int trial = 0; trial < 1000; ++trial) {
      ModelVector x{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
      ModelVector y{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
      const ModelVector dvec = sub(y, x);
      const double lhs = p.eval_loss(y);
      const double rhs = p.eval_loss(x) + dot(p.clean_grad(x), dvec) + 0.5 * mu * l2_norm_sq(dvec);
      if (lhs < rhs - 1e-12 * (1.0 + std::abs(lhs))) {
        failures.push_back("strong convexity certificate violated");
        break;
      }
    }
  }

  // preset rate identities
  {
    const TheoreticalRates r = theoretical_rates({PresetName::SGDClipVanilla, 1.5, 1000});
    if (r.convergence_exponent != 0.5 / 3.0 || r.delay_tolerance_exponent != 1.0 / 3.0) {
      failures.push_back("preset rate constants drifted");
    }
  }

  // golden CSV
  {
    const RunResult r = run_simulation(golden_csv_config());
    const std::string csv = records_to_csv(r.records);
    std::string expected = kGoldenCsv;
    if (!golden_csv_path.empty()) {
      std::ifstream f(golden_csv_path, std::ios::binary);
      if (!f) {
        failures.push_back("golden file missing: " + golden_csv_path);
      } else {
        std::stringstream ss;
        ss << f.rdbuf();
        expected = ss.str();
      }
    }
    if (csv != expected) failures.push_back("golden CSV mismatch");
  }

  std::string detail;
  if (failures.empty()) {
    detail = "clip algebra (1e5 cases), local bounds (1e4 runs), determinism, conservation, "
             "noise signature, gradient/convexity certificates, rate constants, golden CSV "
             "all hold";
  } else {
    for (const auto& f : failures) {
      if (!detail.empty()) detail += "; ";
      detail += f;
    }
  }
  return {"A10", failures.empty(), detail, 0.0};
}

/// Runs every acceptance criterion, timing each one.
inline std::vector<CriterionResult> run_acceptance(const std::string& golden_csv_path = "") {
  using clock = std::chrono::steady_clock;
  std::vector<CriterionResult> results;
  // A criterion that throws is reported as a failure, never a crash.
  auto timed = [&](const char* id, auto&& fn) {
    const auto start = clock::now();
    CriterionResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.id = id;
      r.pass = false;
      r.detail = std::string("errored: ") + e.what();
    }
    r.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    results.push_back(std::move(r));
  };
  timed("A1", [] { return criterion_a1(); });
  timed("A2", [] { return criterion_a2(); });
  timed("A3", [] { return criterion_a3(); });
  timed("A4", [] { return criterion_a4(); });
  timed("A5", [] { return criterion_a5(); });
  timed("A6", [] { return criterion_a6(); });
  timed("A7", [] { return criterion_a7(); });
  timed("A8", [] { return criterion_a8(); });
  timed("A9", [] { return criterion_a9(); });
  timed("A10", [&] { return criterion_a10(golden_csv_path); });
  return results;
}

inline bool print_acceptance_report(const std::vector<CriterionResult>& results) {
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("%-4s %s  [%7.0f ms]  %s\n", r.id.c_str(), r.pass ? "PASS" : "FAIL",
                r.elapsed_ms, r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  std::printf("acceptance: %s\n", all_pass ? "ALL CRITERIA PASS" : "FAILURES PRESENT");
  return all_pass;
}

}  // namespace tailsim
