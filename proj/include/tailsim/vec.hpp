#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace tailsim {

/// Dense parameter vector; the unit of all optimizer state.
using ModelVector = std::vector<double>;

inline double dot(const ModelVector& a, const ModelVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm_sq(const ModelVector& a) { return dot(a, a); }

inline double l2_norm(const ModelVector& a) { return std::sqrt(l2_norm_sq(a)); }

inline double linf_norm(const ModelVector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// a + s*b
inline ModelVector axpy(const ModelVector& a, double s, const ModelVector& b) {
  ModelVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
  return out;
}

inline ModelVector sub(const ModelVector& a, const ModelVector& b) {
  ModelVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline ModelVector hadamard(const ModelVector& a, const ModelVector& b) {
  ModelVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline bool all_finite(const ModelVector& a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace tailsim
