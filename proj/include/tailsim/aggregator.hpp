#pragma once

#include <map>
#include <string>
#include <vector>

#include "tailsim/clip.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/local_worker.hpp"
#include "tailsim/vec.hpp"

namespace tailsim {

enum class PolicyKind { SgdClip, Clip2, SgdClipSD, Clip2SD, Clip2DC };

inline bool policy_is_sd(PolicyKind k) {
  return k == PolicyKind::SgdClipSD || k == PolicyKind::Clip2SD;
}
inline bool policy_clips_outer(PolicyKind k) {
  return k == PolicyKind::Clip2 || k == PolicyKind::Clip2SD || k == PolicyKind::Clip2DC;
}

struct AggregationPolicy {
  PolicyKind kind = PolicyKind::SgdClip;
  PowerSchedule eta_outer = PowerSchedule::constant(1.0);
  PowerSchedule u_outer = PowerSchedule::infinite();
  ClipMode clip_mode = ClipMode::Coordinatewise;
};

/// Global model with round counter, aggregation policy and a bounded ring of
/// past models keyed by round. The ring must always cover every round an
/// in-flight update may reference; eviction past that point is a hard error
/// at consumption time rather than a silent drop.
class ServerState {
 public:
  ServerState(ModelVector x0, AggregationPolicy policy, long history_capacity)
      : x_(std::move(x0)), policy_(std::move(policy)), capacity_(history_capacity) {
    if (capacity_ < 1) throw ConfigError("ServerState: history capacity must be >= 1");
    history_[0] = x_;
  }

  const ModelVector& model() const { return x_; }
  long round() const { return t_; }
  const AggregationPolicy& policy() const { return policy_; }
  long history_capacity() const { return capacity_; }

  const ModelVector& model_at(long round) const {
    auto it = history_.find(round);
    if (it == history_.end()) {
      throw StalenessOverflowError(round, "staleness overflow: global model of round " +
                                              std::to_string(round) +
                                              " was evicted from the history ring");
    }
    return it->second;
  }

  /// Staleness of each update w.r.t. the round about to be produced:
  /// p_i = (t+1) - base_round_i, always >= 1.
  std::vector<long> delays_of(const std::vector<ClientUpdate>& updates) const {
    std::vector<long> p;
    p.reserve(updates.size());
    for (const auto& u : updates) p.push_back(t_ + 1 - u.base_round);
    return p;
  }

  /// Mean of deltas; SD kinds rescale each delta by 1/p before averaging.
  ModelVector compute_delta(const std::vector<ClientUpdate>& updates) const {
    require_updates(updates);
    const bool sd = policy_is_sd(policy_.kind);
    ModelVector acc(x_.size(), 0.0);
    for (const auto& u : updates) {
      const double w = sd ? 1.0 / static_cast<double>(t_ + 1 - u.base_round) : 1.0;
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += u.delta[i] * w;
    }
    const double inv_m = 1.0 / static_cast<double>(updates.size());
    for (auto& v : acc) v *= inv_m;
    return acc;
  }

  /// Delay-compensated pseudo-gradient:
  /// delta - (1/M) sum_i A_i (.) (x_current - x_{base_round_i}).
  ModelVector dc_correct(const std::vector<ClientUpdate>& updates, ModelVector delta) const {
    require_updates(updates);
    if (policy_.kind != PolicyKind::Clip2DC) {
      throw PolicyViolationError("dc_correct: policy is not Clip2DC");
    }
    ModelVector corr(x_.size(), 0.0);
    for (const auto& u : updates) {
      if (!u.hessian_approx) {
        throw PolicyViolationError(
            "policy violation: Clip2DC requires updates to carry hessian_approx (client " +
            std::to_string(u.client_id) + " did not)");
      }
      const ModelVector& base = model_at(u.base_round);
      const ModelVector& a = *u.hessian_approx;
      for (std::size_t i = 0; i < corr.size(); ++i) corr[i] += a[i] * (x_[i] - base[i]);
    }
    const double inv_m = 1.0 / static_cast<double>(updates.size());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= inv_m * corr[i];
    return delta;
  }

  /// One server round: consumes the update batch and advances t by one.
  void aggregate(const std::vector<ClientUpdate>& updates) {
    ModelVector step = compute_delta(updates);
    if (policy_.kind == PolicyKind::Clip2DC) step = dc_correct(updates, std::move(step));
    const long t_next = t_ + 1;
    if (policy_clips_outer(policy_.kind)) {
      step = apply_clip(policy_.clip_mode, policy_.u_outer.value(t_next), step);
    }
    const double eta = policy_.eta_outer.value(t_next);
    for (std::size_t i = 0; i < x_.size(); ++i) x_[i] += eta * step[i];
    t_ = t_next;
    history_[t_] = x_;
    history_.erase(history_.begin(), history_.lower_bound(t_ - capacity_ + 1));
  }

 private:
  void require_updates(const std::vector<ClientUpdate>& updates) const {
    if (updates.empty()) throw std::invalid_argument("aggregate: empty update batch");
    for (const auto& u : updates) {
      if (u.delta.size() != x_.size()) {
        throw std::invalid_argument("aggregate: update dimension mismatch");
      }
      model_at(u.base_round);  // staleness-overflow check
    }
  }

  ModelVector x_;
  long t_ = 0;
  AggregationPolicy policy_;
  long capacity_;
  std::map<long, ModelVector> history_;
};

}  // namespace tailsim
