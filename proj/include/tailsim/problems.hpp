#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tailsim/errors.hpp"
#include "tailsim/noise.hpp"
#include "tailsim/rng.hpp"
#include "tailsim/vec.hpp"

namespace tailsim {

enum class ProblemKind { QuadraticDiag, LogisticSynthetic, NonconvexSmoothTest };

/// One stochastic gradient draw: grad = clean_grad + noise, coordinate-wise.
struct StochasticGradientSample {
  ModelVector grad;
  ModelVector clean_grad;
  ModelVector noise;
};

/// Differentiable synthetic objective with known analytic gradients.
/// Immutable after construction; all operations are read-only.
class Problem {
 public:
  /// F(x) = 1/2 sum_i h_i (x_i - x*_i)^2, h_i > 0.
  static Problem quadratic_diag(ModelVector h, ModelVector x_star) {
    if (h.size() != x_star.size()) throw ConfigError("quadratic_diag: h and x* dims differ");
    if (h.empty()) throw ConfigError("quadratic_diag: dim must be >= 1");
    for (double v : h) {
      if (v <= 0.0) throw ConfigError("quadratic_diag: curvature entries must be > 0");
    }
    Problem p;
    p.kind_ = ProblemKind::QuadraticDiag;
    p.h_ = std::move(h);
    p.x_star_ = std::move(x_star);
    return p;
  }

  /// Mean logistic loss over a planted synthetic dataset regenerated from
  /// (dim, num_samples, data_seed); the data itself is never stored on disk.
  static Problem logistic_synthetic(int dim, int num_samples, std::uint64_t data_seed) {
    if (dim < 1 || num_samples < 1) throw ConfigError("logistic_synthetic: bad dimensions");
    Problem p;
    p.kind_ = ProblemKind::LogisticSynthetic;
    p.data_seed_ = data_seed;
    RngStream rng(splitmix64(data_seed ^ 0x9d2c5680ULL));
    ModelVector planted(static_cast<std::size_t>(dim));
    for (auto& v : planted) v = rng.gaussian();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
    p.features_.resize(static_cast<std::size_t>(num_samples));
    p.labels_.resize(static_cast<std::size_t>(num_samples));
    for (int j = 0; j < num_samples; ++j) {
      ModelVector a(static_cast<std::size_t>(dim));
      for (auto& v : a) v = rng.gaussian() * inv_sqrt_d;
      const double margin = dot(a, planted);
      p.labels_[static_cast<std::size_t>(j)] = margin >= 0.0 ? 1.0 : -1.0;
      p.features_[static_cast<std::size_t>(j)] = std::move(a);
    }
    p.x_star_.assign(static_cast<std::size_t>(dim), 0.0);  // reference point only
    return p;
  }

  /// F(x) = sum_i c_i tanh^2(x_i - m_i): smooth, nonconvex, globally
  /// bounded gradient.
  static Problem nonconvex_wells(ModelVector well_scale, ModelVector centers) {
    if (well_scale.size() != centers.size()) throw ConfigError("nonconvex_wells: dims differ");
    if (well_scale.empty()) throw ConfigError("nonconvex_wells: dim must be >= 1");
    for (double v : well_scale) {
      if (v <= 0.0) throw ConfigError("nonconvex_wells: well scales must be > 0");
    }
    Problem p;
    p.kind_ = ProblemKind::NonconvexSmoothTest;
    p.h_ = std::move(well_scale);
    p.x_star_ = std::move(centers);
    return p;
  }

  ProblemKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(x_star_.size()); }

  /// Known optimum (quadratic, wells) or the zero reference point (logistic).
  const ModelVector& reference_point() const { return x_star_; }

  double eval_loss(const ModelVector& x) const {
    check_dim(x);
    switch (kind_) {
      case ProblemKind::QuadraticDiag: {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double d = x[i] - x_star_[i];
          s += h_[i] * d * d;
        }
        return 0.5 * s;
      }
      case ProblemKind::LogisticSynthetic: {
        double s = 0.0;
        for (std::size_t j = 0; j < features_.size(); ++j) {
          const double z = -labels_[j] * dot(features_[j], x);
          // log(1 + e^z), stable for large |z|
          s += z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        }
        return s / static_cast<double>(features_.size());
      }
      case ProblemKind::NonconvexSmoothTest: {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double t = std::tanh(x[i] - x_star_[i]);
          s += h_[i] * t * t;
        }
        return s;
      }
    }
    return 0.0;
  }

  ModelVector clean_grad(const ModelVector& x) const {
    check_dim(x);
    ModelVector g(x.size(), 0.0);
    switch (kind_) {
      case ProblemKind::QuadraticDiag:
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = h_[i] * (x[i] - x_star_[i]);
        break;
      case ProblemKind::LogisticSynthetic: {
        for (std::size_t j = 0; j < features_.size(); ++j) {
          const double z = -labels_[j] * dot(features_[j], x);
          const double sig = 1.0 / (1.0 + std::exp(-z));  // sigma(z)
          const double coef = -labels_[j] * sig;
          for (std::size_t i = 0; i < x.size(); ++i) g[i] += coef * features_[j][i];
        }
        const double inv_n = 1.0 / static_cast<double>(features_.size());
        for (auto& v : g) v *= inv_n;
        break;
      }
      case ProblemKind::NonconvexSmoothTest:
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double t = std::tanh(x[i] - x_star_[i]);
          g[i] = h_[i] * 2.0 * t * (1.0 - t * t);
        }
        break;
    }
    return g;
  }

  StochasticGradientSample stochastic_grad(const ModelVector& x, const NoiseSpec& spec,
                                           RngStream& rng) const {
    check_dim(x);
    if (spec.dim != dim()) throw std::invalid_argument("stochastic_grad: noise dim mismatch");
    StochasticGradientSample s;
    s.clean_grad = clean_grad(x);
    s.noise = sample_noise(spec, rng);
    s.grad = axpy(s.clean_grad, 1.0, s.noise);
    return s;
  }

  /// Smoothness constant L (an upper bound for the logistic kind).
  double smoothness() const {
    switch (kind_) {
      case ProblemKind::QuadraticDiag:
        return *std::max_element(h_.begin(), h_.end());
      case ProblemKind::LogisticSynthetic: {
        double s = 0.0;
        for (const auto& a : features_) s += l2_norm_sq(a);
        return 0.25 * s / static_cast<double>(features_.size());
      }
      case ProblemKind::NonconvexSmoothTest:
        return 2.0 * *std::max_element(h_.begin(), h_.end());
    }
    return 0.0;
  }

  /// Strong-convexity modulus mu; zero for the non-strongly-convex kinds.
  double strong_convexity() const {
    if (kind_ == ProblemKind::QuadraticDiag) return *std::min_element(h_.begin(), h_.end());
    return 0.0;
  }

  /// A valid bound G on ||grad F|| over the ball of the given radius around
  /// the reference point: min(L*radius, global gradient bound).
  double grad_bound(double radius) const {
    if (radius < 0.0) throw std::invalid_argument("grad_bound: radius must be >= 0");
    double global = std::numeric_limits<double>::infinity();
    switch (kind_) {
      case ProblemKind::QuadraticDiag:
        break;  // unbounded gradient; only the ball bound applies
      case ProblemKind::LogisticSynthetic: {
        double s = 0.0;
        for (const auto& a : features_) s += l2_norm(a);
        global = s / static_cast<double>(features_.size());
        break;
      }
      case ProblemKind::NonconvexSmoothTest: {
        // max_z |d/dz tanh^2(z)| = 4*sqrt(3)/9, attained at tanh^2 = 1/3
        const double per_coord = 4.0 * std::sqrt(3.0) / 9.0;
        double s = 0.0;
        for (double c : h_) s += (c * per_coord) * (c * per_coord);
        global = std::sqrt(s);
        break;
      }
    }
    return std::min(smoothness() * radius, global);
  }

  /// Diagonal curvature (quadratic kind only); used by the delay
  /// compensation oracle checks.
  const ModelVector& curvature_diag() const {
    if (kind_ != ProblemKind::QuadraticDiag) {
      throw std::logic_error("curvature_diag: only defined for QuadraticDiag");
    }
    return h_;
  }

  const ModelVector& well_scales() const {
    if (kind_ != ProblemKind::NonconvexSmoothTest) {
      throw std::logic_error("well_scales: only defined for NonconvexSmoothTest");
    }
    return h_;
  }

  std::uint64_t data_seed() const { return data_seed_; }
  int num_samples() const { return static_cast<int>(features_.size()); }

 private:
  void check_dim(const ModelVector& x) const {
    if (static_cast<int>(x.size()) != dim()) {
      throw std::invalid_argument("problem: model vector dimension mismatch");
    }
  }

  ProblemKind kind_ = ProblemKind::QuadraticDiag;
  ModelVector h_;       // curvatures (quadratic) or well scales (nonconvex)
  ModelVector x_star_;  // optimum / well centers / zero reference
  std::vector<ModelVector> features_;
  std::vector<double> labels_;
  std::uint64_t data_seed_ = 0;
};

}  // namespace tailsim
