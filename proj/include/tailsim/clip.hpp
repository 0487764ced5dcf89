#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tailsim/errors.hpp"
#include "tailsim/vec.hpp"

namespace tailsim {

constexpr double kInfThreshold = std::numeric_limits<double>::infinity();

/// Coordinate-wise magnitude clamp: out_i = sign(g_i) * min(|g_i|, u).
/// u = +inf makes this the identity; u = 0 yields the zero vector.
inline ModelVector clip(double u, const ModelVector& g) {
  if (u < 0.0 || std::isnan(u)) throw std::invalid_argument("clip: threshold must be >= 0");
  ModelVector out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = std::copysign(std::min(std::abs(g[i]), u), g[i]);
  }
  return out;
}

/// L2-ball projection variant: rescales g onto the ball of radius u.
inline ModelVector clip_l2(double u, const ModelVector& g) {
  if (u < 0.0 || std::isnan(u)) throw std::invalid_argument("clip_l2: threshold must be >= 0");
  const double n = l2_norm(g);
  if (n <= u) return g;
  ModelVector out(g.size());
  const double f = u / n;
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f * g[i];
  return out;
}

enum class ClipMode { Coordinatewise, L2Ball };

inline ModelVector apply_clip(ClipMode mode, double u, const ModelVector& g) {
  return mode == ClipMode::Coordinatewise ? clip(u, g) : clip_l2(u, g);
}

/// Power-law schedule value(t) = max(base * t^exponent, floor), 1-indexed
/// in the global round as in "t = 1, ..., T".
struct PowerSchedule {
  double base = 1.0;
  double exponent = 0.0;
  double floor = 0.0;

  double value(long t) const {
    if (t < 1) throw std::invalid_argument("PowerSchedule: round index must be >= 1");
    return std::max(base * std::pow(static_cast<double>(t), exponent), floor);
  }

  bool unbounded() const { return std::isinf(base) || std::isinf(floor); }

  static PowerSchedule constant(double c) { return {c, 0.0, 0.0}; }
  static PowerSchedule infinite() { return {kInfThreshold, 0.0, 0.0}; }
};

inline double schedule_value(const PowerSchedule& s, long t) { return s.value(t); }

enum class PresetName {
  SGDClipVanilla,
  Clip2Vanilla,
  Clip2VanillaAlt,
  SDSGDClip,
  SDClip2,
  DCClip2,
  Constant,
};

/// Named schedule assignment: resolves to concrete exponents for the outer
/// learning rate (omega), local learning rate (nu), local threshold (zeta)
/// and outer threshold (zeta-tilde). Bases default to 1 and are meant to be
/// overridden from the run configuration.
struct SchedulePreset {
  PresetName name = PresetName::Constant;
  double alpha = 1.5;
  long horizon_T = 1;

  void validate() const {
    if (name != PresetName::Constant && (alpha <= 1.0 || alpha >= 2.0)) {
      throw ConfigError("schedule preset: alpha must lie in (1, 2), got " + std::to_string(alpha));
    }
    if (horizon_T < 1) throw ConfigError("schedule preset: horizon_T must be >= 1");
  }
};

struct ResolvedSchedules {
  PowerSchedule eta_outer;  // eta_t
  PowerSchedule eta_local;  // eta_ell^t
  PowerSchedule u_local;    // u_t
  PowerSchedule u_outer;    // u-tilde_t; +inf when the server does not clip
};

inline ResolvedSchedules resolve_preset(const SchedulePreset& p) {
  p.validate();
  const double a = p.alpha;
  ResolvedSchedules r;
  switch (p.name) {
    case PresetName::SGDClipVanilla:
    case PresetName::SDSGDClip:
      r.eta_outer = {1.0, -1.0 / (2.0 * a), 0.0};
      r.eta_local = {1.0, -0.5, 0.0};
      r.u_local = {1.0, 1.0 / (2.0 * a), 0.0};
      r.u_outer = PowerSchedule::infinite();
      break;
    case PresetName::Clip2Vanilla:
    case PresetName::SDClip2:
    case PresetName::DCClip2:
      r.eta_outer = {1.0, -0.5, 0.0};
      r.eta_local = {1.0, -a / (4.0 * a - 2.0), 0.0};
      r.u_local = {1.0, 1.0 / (4.0 * a - 2.0), 0.0};
      r.u_outer = {1.0, 0.0, 0.0};
      break;
    case PresetName::Clip2VanillaAlt:
      r.eta_outer = {1.0, -0.75 + 1.0 / (4.0 * a), 0.0};
      r.eta_local = {1.0, -1.0 / (2.0 * a), 0.0};
      r.u_local = {1.0, 1.0 / (4.0 * a), 0.0};
      r.u_outer = {1.0, 0.0, 0.0};
      break;
    case PresetName::Constant:
      r.eta_outer = PowerSchedule::constant(1.0);
      r.eta_local = PowerSchedule::constant(1.0);
      r.u_local = PowerSchedule::constant(1.0);
      r.u_outer = PowerSchedule::infinite();
      break;
  }
  return r;
}

/// Closed-form rate claims attached to a preset: min-gradient-norm-squared
/// decays like T^-convergence_exponent provided the maximum delay grows no
/// faster than T^delay_tolerance_exponent.
struct TheoreticalRates {
  double convergence_exponent = 0.0;
  double delay_tolerance_exponent = 0.0;
};

inline TheoreticalRates theoretical_rates(const SchedulePreset& p) {
  p.validate();
  const double a = p.alpha;
  switch (p.name) {
    case PresetName::SGDClipVanilla:
    case PresetName::SDSGDClip:
      return {(a - 1.0) / (2.0 * a), 1.0 / (2.0 * a)};
    case PresetName::Clip2Vanilla:
    case PresetName::DCClip2:
      return {(a - 1.0) / (4.0 * a - 2.0), a / (4.0 * a - 2.0)};
    case PresetName::Clip2VanillaAlt:
      return {(a - 1.0) / (4.0 * a), 0.5};
    case PresetName::SDClip2:
      return {std::min(3.0 * (a - 1.0) / 8.0, (a - 1.0) / (4.0 * a)), 0.25 + 1.0 / (4.0 * a)};
    case PresetName::Constant:
      return {0.0, 0.0};
  }
  return {};
}

}  // namespace tailsim
