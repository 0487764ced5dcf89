// Command-line entry point: run single experiments, sweep hyperparameter
// grids, or run the acceptance suite.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI/CLI.hpp>

#include "tailsim/acceptance.hpp"
#include "tailsim/config.hpp"
#include "tailsim/metrics.hpp"
#include "tailsim/sim_engine.hpp"
#include "tailsim/sweep.hpp"

namespace {

std::filesystem::path default_out_root() {
  if (const char* env = std::getenv("TAILSIM_OUT_ROOT")) return env;
  return "tailsim_out";
}

const char* mode_label(tailsim::Mode m) {
  switch (m) {
    case tailsim::Mode::Synchronous: return "synchronous";
    case tailsim::Mode::ServerCentric: return "server_centric";
    case tailsim::Mode::ClientCentric: return "client_centric";
  }
  return "?";
}

const char* policy_label(tailsim::PolicyKind p) {
  switch (p) {
    case tailsim::PolicyKind::SgdClip: return "sgdclip";
    case tailsim::PolicyKind::Clip2: return "clip2";
    case tailsim::PolicyKind::SgdClipSD: return "sgdclip_sd";
    case tailsim::PolicyKind::Clip2SD: return "clip2_sd";
    case tailsim::PolicyKind::Clip2DC: return "clip2_dc";
  }
  return "?";
}

int cmd_run(const std::string& config_path, std::string out_dir,
            const std::vector<std::string>& overrides, long seed_flag) {
  tailsim::Json doc = tailsim::load_json_file(config_path);
  for (const auto& o : overrides) tailsim::apply_override(doc, o);
  if (seed_flag >= 0) doc["seed"] = static_cast<std::uint64_t>(seed_flag);
  const tailsim::RunConfig cfg = tailsim::parse_run_config(doc);
  const tailsim::RunResult result = tailsim::run_simulation(cfg);

  if (out_dir.empty()) {
    out_dir = (default_out_root() / std::filesystem::path(config_path).stem()).string();
  }
  tailsim::write_run(result.records, tailsim::serialize_run_config(cfg), result.total_sim_time,
                     out_dir);

  const double min_gns =
      result.records.empty() ? 0.0 : result.records.back().min_grad_norm_sq;
  std::cout << "mode=" << mode_label(cfg.mode) << " policy=" << policy_label(cfg.policy)
            << " T=" << cfg.rounds << " min_gns=" << tailsim::format_double(min_gns)
            << " sim_time=" << tailsim::format_double(result.total_sim_time) << "\n";
  std::cout << "wrote " << out_dir << "/metrics.csv and summary.json\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, std::string out_dir,
              const std::vector<std::string>& overrides, int parallelism) {
  tailsim::Json doc = tailsim::load_json_file(config_path);
  for (const auto& o : overrides) tailsim::apply_override(doc, o);
  const tailsim::SweepSpec spec = tailsim::parse_sweep_spec(doc);

  if (out_dir.empty()) {
    out_dir = (default_out_root() /
               (std::filesystem::path(config_path).stem().string() + "_sweep")).string();
  }
  std::cout << "sweep: " << spec.num_points() << " grid points x " << spec.num_seeds()
            << " seeds = " << spec.num_points() * spec.num_seeds() << " runs\n";

  const auto outcomes = tailsim::run_sweep(spec, out_dir, parallelism);
  const tailsim::Json index = tailsim::write_sweep_index(outcomes, out_dir);

  std::size_t failures = 0;
  for (const auto& o : outcomes) {
    if (!o.ok) ++failures;
  }
  for (const auto& p : index.at("points")) {
    if (!p.at("rank").is_null()) {
      std::cout << "best point: " << p.at("point").get<std::string>() << " params "
                << p.at("params").dump()
                << " median_min_gns=" << p.at("median_min_grad_norm_sq").get<double>() << "\n";
      break;
    }
  }
  std::cout << "index written to " << out_dir << "/index.json";
  if (failures > 0) std::cout << " (" << failures << " point(s) failed; see index)";
  std::cout << "\n";
  return failures == outcomes.size() && !outcomes.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asynchronous heavy-tailed optimization simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, golden_dir;
  std::vector<std::string> overrides;
  long seed_flag = -1;
  int parallelism = 1;

  CLI::App* run = app.add_subcommand("run", "execute one experiment and write metrics");
  run->add_option("--config", config_path, "run configuration (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed_flag, "override the master seed");
  run->add_option("--set", overrides, "override a config field, key.path=value")
      ->take_all();

  CLI::App* sweep = app.add_subcommand("sweep", "run a hyperparameter grid");
  sweep->add_option("--config", config_path, "sweep specification (JSON)")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--parallel", parallelism, "worker pool size")->check(CLI::PositiveNumber);
  sweep->add_option("--set", overrides, "override a field of the base config, key.path=value")
      ->take_all();

  CLI::App* accept = app.add_subcommand("accept", "run the acceptance suite");
  accept->add_option("--golden-dir", golden_dir, "directory holding golden files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, out_dir, overrides, seed_flag);
    }
    if (sweep->parsed()) {
      std::vector<std::string> sweep_overrides;
      for (const auto& o : overrides) {
        sweep_overrides.push_back("base." + o);
      }
      return cmd_sweep(config_path, out_dir, sweep_overrides, parallelism);
    }
    if (accept->parsed()) {
      std::string golden_csv;
      if (!golden_dir.empty()) golden_csv = golden_dir + "/sync_quadratic_expected.csv";
      const auto results = tailsim::run_acceptance(golden_csv);
      return tailsim::print_acceptance_report(results) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
