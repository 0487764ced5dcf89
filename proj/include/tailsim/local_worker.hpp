#pragma once

#include <optional>
#include <string>

#include "tailsim/clip.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/problems.hpp"
#include "tailsim/rng.hpp"
#include "tailsim/vec.hpp"

namespace tailsim {

/// One client's returned payload.
struct ClientUpdate {
  int client_id = 0;
  long base_round = 0;  // global round of the model the client started from
  ModelVector delta;    // x_{i,K} - x_{i,0}
  std::optional<ModelVector> hessian_approx;  // sum of squared clipped steps, >= 0
  double sim_finish_time = 0.0;
};

struct LocalRunParams {
  long base_round = 0;
  int steps = 1;  // K
  PowerSchedule eta_local;
  PowerSchedule u_local;
  bool track_hessian = false;
  ClipMode clip_mode = ClipMode::Coordinatewise;
};

/// Runs K clipped steps from x0. The local rate and threshold are frozen at
/// the base round for the whole inner loop; noise is drawn fresh per step.
inline ClientUpdate run_local(const Problem& problem, const NoiseSpec& noise, const ModelVector& x0,
                              int client_id, const LocalRunParams& params, RngStream& rng) {
  if (params.steps < 1) throw std::invalid_argument("run_local: K must be >= 1");
  if (params.base_round < 0) throw std::invalid_argument("run_local: base round must be >= 0");
  // Schedules are 1-indexed; the initial dispatch starts from round 0.
  const long rate_round = std::max(params.base_round, 1L);
  const double eta = params.eta_local.value(rate_round);
  const double u = params.u_local.value(rate_round);

  ModelVector x = x0;
  ModelVector hess;
  if (params.track_hessian) hess.assign(x0.size(), 0.0);

  for (int k = 1; k <= params.steps; ++k) {
    const StochasticGradientSample s = problem.stochastic_grad(x, noise, rng);
    if (!all_finite(s.grad)) {
      throw NumericError(client_id, k,
                         "run_local: non-finite gradient at client " + std::to_string(client_id) +
                             ", local step " + std::to_string(k));
    }
    const ModelVector g = apply_clip(params.clip_mode, u, s.grad);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= eta * g[i];
    if (params.track_hessian) {
      for (std::size_t i = 0; i < x.size(); ++i) hess[i] += eta * eta * g[i] * g[i];
    }
  }

  ClientUpdate out;
  out.client_id = client_id;
  out.base_round = params.base_round;
  out.delta = sub(x, x0);
  if (!all_finite(out.delta)) {
    throw NumericError(client_id, params.steps, "run_local: non-finite model delta");
  }
  if (params.track_hessian) out.hessian_approx = std::move(hess);
  return out;
}

}  // namespace tailsim
