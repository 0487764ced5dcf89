#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailsim/errors.hpp"

namespace tailsim {

/// Per-round measurements taken on the server's model after aggregation.
/// grad_norm_sq uses the clean gradient (an oracle evaluation outside the
/// algorithm's sample budget).
struct MetricsRecord {
  long t = 0;
  double clock = 0.0;
  double loss = 0.0;
  double grad_norm_sq = 0.0;
  double min_grad_norm_sq = 0.0;     // running minimum up to t
  std::vector<long> delays;          // p of every update consumed this round
};

/// Shortest round-trip decimal form; deterministic for a deterministic run.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// OLS slope of log(value) against log(T) over (horizon, value) pairs.
inline double rate_slope(std::span<const std::pair<long, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("rate_slope: need at least 2 horizons");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [horizon, value] : points) {
    if (!(value > 0.0)) throw std::invalid_argument("rate_slope: values must be positive");
    if (horizon < 1) throw std::invalid_argument("rate_slope: horizons must be >= 1");
    const double x = std::log(static_cast<double>(horizon));
    const double y = std::log(value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Counts every consumed delay p across all rounds.
inline std::map<long, long> delay_histogram(std::span<const MetricsRecord> records) {
  std::map<long, long> hist;
  for (const auto& r : records) {
    for (long p : r.delays) ++hist[p];
  }
  return hist;
}

inline std::string records_to_csv(std::span<const MetricsRecord> records) {
  std::string out = "t,clock,loss,grad_norm_sq,min_grad_norm_sq,delays\n";
  for (const auto& r : records) {
    out += std::to_string(r.t);
    out += ',';
    out += format_double(r.clock);
    out += ',';
    out += format_double(r.loss);
    out += ',';
    out += format_double(r.grad_norm_sq);
    out += ',';
    out += format_double(r.min_grad_norm_sq);
    out += ',';
    for (std::size_t i = 0; i < r.delays.size(); ++i) {
      if (i > 0) out += ';';
      out += std::to_string(r.delays[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

/// Emits <dir>/metrics.csv and <dir>/summary.json for one run.
/// config_echo is the full configuration as parsed; field order is stable.
inline void write_run(std::span<const MetricsRecord> records, const nlohmann::ordered_json& config_echo,
                      double total_sim_time, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  write_text_file(dir / "metrics.csv", records_to_csv(records));

  nlohmann::ordered_json summary;
  summary["config"] = config_echo;
  summary["rounds"] = records.size();
  summary["total_sim_time"] = total_sim_time;
  if (!records.empty()) {
    summary["final_loss"] = records.back().loss;
    summary["final_grad_norm_sq"] = records.back().grad_norm_sq;
    summary["min_grad_norm_sq"] = records.back().min_grad_norm_sq;
  }
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [p, count] : delay_histogram(records)) hist[std::to_string(p)] = count;
  summary["delay_histogram"] = hist;
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace tailsim
