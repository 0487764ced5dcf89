#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "tailsim/errors.hpp"
#include "tailsim/rng.hpp"
#include "tailsim/vec.hpp"

namespace tailsim {

enum class NoiseKind { ParetoSymmetric, StudentT, Gaussian, Zero };

inline bool is_heavy_tailed(NoiseKind k) {
  return k == NoiseKind::ParetoSymmetric || k == NoiseKind::StudentT;
}

/// Description of the stochastic gradient noise. For the heavy-tailed kinds
/// the alpha-th absolute moment is finite while the variance is not.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::Zero;
  double tail_index = 1.5;  // alpha, meaningful for heavy kinds, in (1, 2)
  double scale = 1.0;       // E|xi_i| per coordinate for Pareto/StudentT; std-dev for Gaussian
  int dim = 1;

  void validate() const {
    if (dim < 1) throw ConfigError("noise: dim must be >= 1");
    if (kind == NoiseKind::Zero) return;
    if (scale <= 0.0) throw ConfigError("noise: scale must be > 0");
    if (is_heavy_tailed(kind) && (tail_index <= 1.0 || tail_index >= 2.0)) {
      throw ConfigError("noise: tail_index must lie in (1, 2) for heavy-tailed kinds, got " +
                        std::to_string(tail_index));
    }
  }
};

namespace detail {

// Tail exponent sits slightly above the requested alpha so the alpha-th
// moment is finite with margin.
inline double pareto_exponent(double tail_index) { return tail_index + 0.05; }

// Pareto minimum such that E|xi| = scale: E|X| = a*xm/(a-1).
inline double pareto_minimum(double tail_index, double scale) {
  const double a = pareto_exponent(tail_index);
  return scale * (a - 1.0) / a;
}

inline double sample_pareto_magnitude(double tail_index, double scale, RngStream& rng) {
  const double a = pareto_exponent(tail_index);
  const double xm = pareto_minimum(tail_index, scale);
  const double u = rng.uniform();  // in [0,1), so 1-u in (0,1]
  return xm / std::pow(1.0 - u, 1.0 / a);
}

// Mean absolute value of a standard Student-t with nu > 1 degrees of freedom:
// 2*sqrt(nu)*Gamma((nu+1)/2) / ((nu-1)*sqrt(pi)*Gamma(nu/2)).
inline double student_t_mean_abs(double nu) {
  const double lg = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0);
  return 2.0 * std::sqrt(nu) * std::exp(lg) / ((nu - 1.0) * std::sqrt(std::numbers::pi));
}

// Bailey's polar method for the Student-t distribution.
inline double sample_student_t(double nu, RngStream& rng) {
  for (;;) {
    const double u = 2.0 * rng.uniform() - 1.0;
    const double v = 2.0 * rng.uniform() - 1.0;
    const double w = u * u + v * v;
    if (w > 0.0 && w <= 1.0) {
      return u * std::sqrt(nu * (std::pow(w, -2.0 / nu) - 1.0) / w);
    }
  }
}

}  // namespace detail

/// Draws one noise vector; each coordinate independent.
inline ModelVector sample_noise(const NoiseSpec& spec, RngStream& rng) {
  spec.validate();
  ModelVector out(static_cast<std::size_t>(spec.dim), 0.0);
  switch (spec.kind) {
    case NoiseKind::Zero:
      break;
    case NoiseKind::Gaussian:
      for (auto& v : out) v = spec.scale * rng.gaussian();
      break;
    case NoiseKind::ParetoSymmetric:
      for (auto& v : out) {
        const double mag = detail::sample_pareto_magnitude(spec.tail_index, spec.scale, rng);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        v = sign * mag;
      }
      break;
    case NoiseKind::StudentT: {
      const double nu = detail::pareto_exponent(spec.tail_index);
      const double unit = spec.scale / detail::student_t_mean_abs(nu);
      for (auto& v : out) v = unit * detail::sample_student_t(nu, rng);
      break;
    }
  }
  return out;
}

/// (1/n) * sum_i ||xi_i||^alpha over a sample list.
inline double empirical_alpha_moment(std::span<const ModelVector> samples, double alpha) {
  if (samples.empty()) throw std::invalid_argument("empirical_alpha_moment: empty sample list");
  if (alpha <= 0.0) throw std::invalid_argument("empirical_alpha_moment: alpha must be > 0");
  double acc = 0.0;
  for (const auto& s : samples) acc += std::pow(l2_norm(s), alpha);
  return acc / static_cast<double>(samples.size());
}

}  // namespace tailsim
