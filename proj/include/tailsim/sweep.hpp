#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tailsim/config.hpp"
#include "tailsim/metrics.hpp"
#include "tailsim/sim_engine.hpp"

namespace tailsim {

/// Grid description: a base run config plus value lists for the swept axes.
/// Empty axes are left at the base value. Seeds are not a grid axis; every
/// point runs all seeds and is ranked by its median min grad-norm-squared.
struct SweepSpec {
  Json base;
  std::vector<double> server_lr;  // schedules.eta_outer.base
  std::vector<double> client_lr;  // schedules.eta_local.base
  std::vector<double> server_u;   // schedules.u_outer.base
  std::vector<double> client_u;   // schedules.u_local.base
  std::vector<int> buffer;        // M
  std::vector<std::uint64_t> seeds;

  std::size_t num_points() const {
    auto dim = [](std::size_t n) { return n == 0 ? std::size_t{1} : n; };
    return dim(server_lr.size()) * dim(client_lr.size()) * dim(server_u.size()) *
           dim(client_u.size()) * dim(buffer.size());
  }
  std::size_t num_seeds() const { return seeds.empty() ? 1 : seeds.size(); }
};

inline SweepSpec parse_sweep_spec(const Json& j) {
  SweepSpec spec;
  try {
    spec.base = j.at("base");
    if (j.contains("axes")) {
      const Json& a = j.at("axes");
      if (a.contains("server_lr")) spec.server_lr = a.at("server_lr").get<std::vector<double>>();
      if (a.contains("client_lr")) spec.client_lr = a.at("client_lr").get<std::vector<double>>();
      if (a.contains("server_u")) spec.server_u = a.at("server_u").get<std::vector<double>>();
      if (a.contains("client_u")) spec.client_u = a.at("client_u").get<std::vector<double>>();
      if (a.contains("buffer")) spec.buffer = a.at("buffer").get<std::vector<int>>();
      if (a.contains("seeds")) spec.seeds = a.at("seeds").get<std::vector<std::uint64_t>>();
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("sweep spec: ") + e.what());
  }
  parse_run_config(spec.base);  // every grid point must start from a valid config
  return spec;
}

struct SweepPointOutcome {
  std::size_t index = 0;
  Json params;
  std::string dir;
  bool ok = false;
  std::string error;
  double median_min_gns = 0.0;
  std::vector<double> per_seed_min_gns;
};

namespace sweep_detail {

struct GridPoint {
  std::optional<double> server_lr, client_lr, server_u, client_u;
  std::optional<int> buffer;
};

inline std::vector<GridPoint> enumerate(const SweepSpec& spec) {
  std::vector<GridPoint> points{GridPoint{}};
  auto expand = [&points](const auto& axis, auto field) {
    if (axis.empty()) return;
    std::vector<GridPoint> next;
    next.reserve(points.size() * axis.size());
    for (const auto& p : points) {
      for (const auto& v : axis) {
        GridPoint q = p;
        q.*field = v;
        next.push_back(q);
      }
    }
    points = std::move(next);
  };
  expand(spec.server_lr, &GridPoint::server_lr);
  expand(spec.client_lr, &GridPoint::client_lr);
  expand(spec.server_u, &GridPoint::server_u);
  expand(spec.client_u, &GridPoint::client_u);
  expand(spec.buffer, &GridPoint::buffer);
  return points;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace sweep_detail

/// Runs the full grid; every point is isolated in its own directory and the
/// outcome is independent of the worker-pool parallelism.
inline std::vector<SweepPointOutcome> run_sweep(const SweepSpec& spec,
                                                const std::filesystem::path& out_dir,
                                                int parallelism) {
  const auto points = sweep_detail::enumerate(spec);
  const auto seeds = spec.seeds.empty() ? std::vector<std::uint64_t>{0} : spec.seeds;
  std::vector<SweepPointOutcome> outcomes(points.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      const auto& gp = points[i];
      SweepPointOutcome& out = outcomes[i];
      out.index = i;

      Json doc = spec.base;
      Json params = Json::object();
      auto set_base = [&doc](const char* sched, double v) {
        doc["schedules"][sched]["base"] = v;
      };
      if (gp.server_lr) { set_base("eta_outer", *gp.server_lr); params["server_lr"] = *gp.server_lr; }
      if (gp.client_lr) { set_base("eta_local", *gp.client_lr); params["client_lr"] = *gp.client_lr; }
      if (gp.server_u) { set_base("u_outer", *gp.server_u); params["server_u"] = *gp.server_u; }
      if (gp.client_u) { set_base("u_local", *gp.client_u); params["client_u"] = *gp.client_u; }
      if (gp.buffer) { doc["buffer"] = *gp.buffer; params["buffer"] = *gp.buffer; }
      out.params = params;

      char name[32];
      std::snprintf(name, sizeof(name), "point_%04zu", i);
      const auto point_dir = out_dir / name;
      out.dir = name;
      try {
        std::vector<double> per_seed;
        Json point_json;
        point_json["params"] = params;
        Json seeds_json = Json::object();
        for (std::uint64_t seed : seeds) {
          Json run_doc = doc;
          run_doc["seed"] = seed;
          const RunConfig cfg = parse_run_config(run_doc);
          const RunResult r = run_simulation(cfg);
          const double min_gns =
              r.records.empty() ? 0.0 : r.records.back().min_grad_norm_sq;
          per_seed.push_back(min_gns);
          const auto seed_dir = point_dir / ("seed_" + std::to_string(seed));
          write_run(r.records, serialize_run_config(cfg), r.total_sim_time, seed_dir);
          Json sj;
          sj["min_grad_norm_sq"] = min_gns;
          sj["final_loss"] = r.records.empty() ? 0.0 : r.records.back().loss;
          sj["total_sim_time"] = r.total_sim_time;
          seeds_json[std::to_string(seed)] = sj;
        }
        out.per_seed_min_gns = per_seed;
        out.median_min_gns = sweep_detail::median(per_seed);
        out.ok = true;
        point_json["seeds"] = seeds_json;
        point_json["median_min_grad_norm_sq"] = out.median_min_gns;
        std::filesystem::create_directories(point_dir);
        write_text_file(point_dir / "point.json", point_json.dump(2) + "\n");
      } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
        std::error_code ec;
        std::filesystem::create_directories(point_dir, ec);
        Json err;
        err["params"] = params;
        err["error"] = out.error;
        if (!ec) write_text_file(point_dir / "point.json", err.dump(2) + "\n");
      }
    }
  };

  const int workers = std::max(1, parallelism);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return outcomes;
}

/// Ranks outcomes (successes ascending by median metric, failures last) and
/// writes <out>/index.json.
inline Json write_sweep_index(std::vector<SweepPointOutcome> outcomes,
                              const std::filesystem::path& out_dir) {
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const SweepPointOutcome& a, const SweepPointOutcome& b) {
                     if (a.ok != b.ok) return a.ok;
                     if (a.ok && a.median_min_gns != b.median_min_gns) {
                       return a.median_min_gns < b.median_min_gns;
                     }
                     return a.index < b.index;
                   });
  Json index;
  index["total_points"] = outcomes.size();
  Json pts = Json::array();
  long rank = 1;
  for (const auto& o : outcomes) {
    Json pj;
    pj["rank"] = o.ok ? Json(rank++) : Json(nullptr);
    pj["point"] = o.dir;
    pj["params"] = o.params;
    if (o.ok) {
      pj["median_min_grad_norm_sq"] = o.median_min_gns;
      pj["per_seed_min_grad_norm_sq"] = o.per_seed_min_gns;
    } else {
      pj["error"] = o.error;
    }
    pts.push_back(pj);
  }
  index["points"] = pts;
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "index.json", index.dump(2) + "\n");
  return index;
}

}  // namespace tailsim
