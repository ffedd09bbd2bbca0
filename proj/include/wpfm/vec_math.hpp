#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wpfm/errors.hpp"

namespace wpfm {

using Vec = std::vector<double>;

inline void check_same_dim(std::span<const double> a, std::span<const double> b,
                           const char* where) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(where) + ": dimensions " +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b, "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) {
  return std::sqrt(dot(a, a));
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_dim(x, y, "axpy");
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec scaled(std::span<const double> a, double alpha) {
  Vec out(a.begin(), a.end());
  for (double& v : out) v *= alpha;
  return out;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b, "add");
  Vec out(a.begin(), a.end());
  for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b, "sub");
  Vec out(a.begin(), a.end());
  for (size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  return out;
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// Angle in [0, pi] between unit vectors. Uses the chord form near 0 and the
// reflected chord form near pi; both are well conditioned where arccos is not.
inline double unit_angle(std::span<const double> u, std::span<const double> v) {
  check_same_dim(u, v, "unit_angle");
  double d = dot(u, v);
  if (d >= 0.0) {
    double chord = norm2(sub(u, v));
    return 2.0 * std::asin(std::fmin(1.0, 0.5 * chord));
  }
  double chord = norm2(add(u, v));
  const double pi = 3.14159265358979323846;
  return pi - 2.0 * std::asin(std::fmin(1.0, 0.5 * chord));
}

}  // namespace wpfm
