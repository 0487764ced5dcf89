#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "tailsim/aggregator.hpp"
#include "tailsim/clip.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/local_worker.hpp"
#include "tailsim/metrics.hpp"
#include "tailsim/noise.hpp"
#include "tailsim/problems.hpp"
#include "tailsim/rng.hpp"

namespace tailsim {

enum class Mode { Synchronous, ServerCentric, ClientCentric };

enum class RuntimeClass { Small, Medium, LargeMild, LargeSevere, Custom };

/// Straggler class: each dispatch draws a fresh runtime uniformly from the
/// class range. Small [1,2], Medium [3,5], LargeMild [5,8], LargeSevere [20,40].
struct RuntimeGroup {
  RuntimeClass cls = RuntimeClass::Small;
  int count = 1;
  double lo = 1.0;  // used by Custom only
  double hi = 1.0;

  std::pair<double, double> range() const {
    switch (cls) {
      case RuntimeClass::Small: return {1.0, 2.0};
      case RuntimeClass::Medium: return {3.0, 5.0};
      case RuntimeClass::LargeMild: return {5.0, 8.0};
      case RuntimeClass::LargeSevere: return {20.0, 40.0};
      case RuntimeClass::Custom: return {lo, hi};
    }
    return {1.0, 1.0};
  }
};

/// Full experiment description.
struct RunConfig {
  Problem problem = Problem::quadratic_diag({1.0}, {0.0});
  NoiseSpec noise;
  Mode mode = Mode::Synchronous;
  int num_clients = 1;  // N
  int buffer = 1;       // M
  int local_steps = 1;  // K
  long rounds = 1;      // T
  ResolvedSchedules schedules;
  PolicyKind policy = PolicyKind::SgdClip;
  ClipMode clip_mode = ClipMode::Coordinatewise;
  bool track_hessian = false;
  std::vector<RuntimeGroup> client_groups = {{RuntimeClass::Small, 1}};
  std::uint64_t master_seed = 0;
  long history_capacity = 0;  // 0 = auto: 4x worst-case runtime ratio
  ModelVector x0;

  void validate() const {
    if (num_clients < 1) throw ConfigError("config: N must be >= 1");
    if (buffer < 1 || buffer > num_clients) {
      throw ConfigError("config: buffer must satisfy 1 <= M <= N (M=" + std::to_string(buffer) +
                        ", N=" + std::to_string(num_clients) + ")");
    }
    if (local_steps < 1) throw ConfigError("config: K must be >= 1");
    if (rounds < 1) throw ConfigError("config: T must be >= 1");
    noise.validate();
    if (noise.dim != problem.dim()) throw ConfigError("config: noise dim != problem dim");
    if (static_cast<int>(x0.size()) != problem.dim()) {
      throw ConfigError("config: x0 dim != problem dim");
    }
    int total = 0;
    for (const auto& g : client_groups) {
      if (g.count < 0) throw ConfigError("config: client group counts must be >= 0");
      auto [lo, hi] = g.range();
      if (!(lo > 0.0) || hi < lo) throw ConfigError("config: runtime range must be positive");
      total += g.count;
    }
    if (total != num_clients) {
      throw ConfigError("config: client class counts sum to " + std::to_string(total) +
                        ", expected N=" + std::to_string(num_clients));
    }
  }

  long resolved_history_capacity() const {
    if (history_capacity > 0) return history_capacity;
    double max_hi = 0.0;
    double min_lo = std::numeric_limits<double>::infinity();
    for (const auto& g : client_groups) {
      if (g.count == 0) continue;
      auto [lo, hi] = g.range();
      max_hi = std::max(max_hi, hi);
      min_lo = std::min(min_lo, lo);
    }
    const double ratio = (min_lo > 0.0 && max_hi > 0.0) ? max_hi / min_lo : 1.0;
    return std::max(4L, static_cast<long>(std::ceil(4.0 * ratio)));
  }
};

struct RunResult {
  std::vector<MetricsRecord> records;
  double total_sim_time = 0.0;
  double max_model_norm = 0.0;  // max over rounds (including x0) of ||x_t||
  long total_dispatched = 0;
  long total_consumed = 0;
  long queued_at_end = 0;
  long in_flight_at_end = 0;
};

namespace detail {

struct FinishEvent {
  double time = 0.0;
  int client = 0;
  long dispatch_seq = 0;
  ClientUpdate update;
};

// Min-heap order on (time, client, dispatch sequence); required for
// bit-exact reproducibility when finish times tie.
struct FinishEventLater {
  bool operator()(const FinishEvent& a, const FinishEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.client != b.client) return a.client > b.client;
    return a.dispatch_seq > b.dispatch_seq;
  }
};

class SimEngine {
 public:
  explicit SimEngine(const RunConfig& cfg)
      : cfg_(cfg),
        streams_(cfg.master_seed),
        server_(cfg.x0, AggregationPolicy{cfg.policy, cfg.schedules.eta_outer,
                                          cfg.schedules.u_outer, cfg.clip_mode},
                cfg.resolved_history_capacity()),
        dispatch_count_(static_cast<std::size_t>(cfg.num_clients), 0),
        busy_(static_cast<std::size_t>(cfg.num_clients), false) {
    runtime_lo_.reserve(static_cast<std::size_t>(cfg.num_clients));
    runtime_hi_.reserve(static_cast<std::size_t>(cfg.num_clients));
    for (const auto& g : cfg.client_groups) {
      auto [lo, hi] = g.range();
      for (int i = 0; i < g.count; ++i) {
        runtime_lo_.push_back(lo);
        runtime_hi_.push_back(hi);
      }
    }
    result_.max_model_norm = l2_norm(cfg.x0);
  }

  RunResult run() {
    if (cfg_.mode == Mode::Synchronous) {
      run_synchronous();
    } else {
      run_asynchronous();
    }
    result_.total_sim_time = result_.records.empty() ? 0.0 : result_.records.back().clock;
    result_.queued_at_end = static_cast<long>(arrivals_.size());
    result_.in_flight_at_end =
        static_cast<long>(std::count(busy_.begin(), busy_.end(), true));
    return std::move(result_);
  }

 private:
  void run_synchronous() {
    // Each round every client runs from the current model; the server waits
    // for all of them (M := N, p = 1); round time advances by the slowest.
    double clock = 0.0;
    for (long t = 1; t <= cfg_.rounds; ++t) {
      for (int c = 0; c < cfg_.num_clients; ++c) dispatch(c, clock);
      while (!events_.empty()) {
        FinishEvent e = pop_event();
        clock = e.time;
        busy_[static_cast<std::size_t>(e.client)] = false;
        arrivals_.push_back(std::move(e.update));
      }
      consume_and_aggregate(cfg_.num_clients);
    }
  }

  void run_asynchronous() {
    for (int c = 0; c < cfg_.num_clients; ++c) dispatch(c, 0.0);
    while (server_.round() < cfg_.rounds && !events_.empty()) {
      FinishEvent e = pop_event();
      const double clock = e.time;
      const int finished = e.client;
      busy_[static_cast<std::size_t>(finished)] = false;
      arrivals_.push_back(std::move(e.update));

      bool aggregated = false;
      while (static_cast<int>(arrivals_.size()) >= cfg_.buffer && server_.round() < cfg_.rounds) {
        consume_and_aggregate(cfg_.buffer);
        aggregated = true;
      }

      if (cfg_.mode == Mode::ClientCentric) {
        // The finisher pulls the latest model immediately; its queued update
        // (if not yet consumed) keeps its original base round.
        if (server_.round() < cfg_.rounds) dispatch(finished, clock);
      } else if (aggregated && server_.round() < cfg_.rounds) {
        // Server-centric broadcast: every idle client restarts from x_t.
        for (int c = 0; c < cfg_.num_clients; ++c) {
          if (!busy_[static_cast<std::size_t>(c)]) dispatch(c, clock);
        }
      }
    }
  }

  void dispatch(int client, double now) {
    const auto ci = static_cast<std::size_t>(client);
    if (busy_[ci]) throw std::logic_error("sim engine: client already has a job in flight");
    const long seq = dispatch_count_[ci];
    RngStream runtime_rng = streams_.runtime_stream(client, seq);
    const double runtime = runtime_rng.uniform(runtime_lo_[ci], runtime_hi_[ci]);
    RngStream noise_rng = streams_.noise_stream(client, seq);

    LocalRunParams params;
    params.base_round = server_.round();
    params.steps = cfg_.local_steps;
    params.eta_local = cfg_.schedules.eta_local;
    params.u_local = cfg_.schedules.u_local;
    params.track_hessian = cfg_.track_hessian;
    params.clip_mode = cfg_.clip_mode;

    ClientUpdate update = run_local(cfg_.problem, cfg_.noise, server_.model(), client, params,
                                    noise_rng);
    update.sim_finish_time = now + runtime;
    events_.push(FinishEvent{now + runtime, client, seq, std::move(update)});
    dispatch_count_[ci] = seq + 1;
    busy_[ci] = true;
    ++result_.total_dispatched;
  }

  FinishEvent pop_event() {
    FinishEvent e = events_.top();
    events_.pop();
    return e;
  }

  void consume_and_aggregate(int batch_size) {
    std::vector<ClientUpdate> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) {
      batch.push_back(std::move(arrivals_.front()));
      arrivals_.pop_front();
    }
    const std::vector<long> delays = server_.delays_of(batch);
    server_.aggregate(batch);
    result_.total_consumed += batch_size;

    MetricsRecord rec;
    rec.t = server_.round();
    rec.clock = batch.back().sim_finish_time;
    rec.loss = cfg_.problem.eval_loss(server_.model());
    rec.grad_norm_sq = l2_norm_sq(cfg_.problem.clean_grad(server_.model()));
    min_gns_ = std::min(min_gns_, rec.grad_norm_sq);
    rec.min_grad_norm_sq = min_gns_;
    rec.delays = delays;
    result_.records.push_back(std::move(rec));
    result_.max_model_norm = std::max(result_.max_model_norm, l2_norm(server_.model()));
  }

  const RunConfig& cfg_;
  StreamFactory streams_;
  ServerState server_;
  std::vector<double> runtime_lo_, runtime_hi_;
  std::vector<long> dispatch_count_;
  std::vector<bool> busy_;
  std::priority_queue<FinishEvent, std::vector<FinishEvent>, FinishEventLater> events_;
  std::deque<ClientUpdate> arrivals_;
  RunResult result_;
  double min_gns_ = std::numeric_limits<double>::infinity();
};

}  // namespace detail

/// Executes T aggregations of the configured system and returns the full
/// trajectory. Deterministic: (config, seed) fully determines the result.
inline RunResult run_simulation(const RunConfig& cfg) {
  cfg.validate();
  detail::SimEngine engine(cfg);
  return engine.run();
}

}  // namespace tailsim
