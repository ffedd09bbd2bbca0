#pragma once

#include <string>
#include <vector>

#include "wpfm/geodesics.hpp"

namespace wpfm {

struct SpeedProfile {
  std::vector<double> t;
  std::vector<double> omega;   // angular speed of the direction curve
  std::vector<double> radius;
  double omega_mean = 0.0;
  double omega_cv = 0.0;  // stddev / mean; 0 for purely radial paths
};

// Angular speed along the path from arc distances between sampled
// directions: central arcs in the interior, one-sided at the ends. n_grid
// uniform samples on [0, 1], n_grid >= 3.
SpeedProfile angular_speed_profile(const GeodesicPath& path, int n_grid);

struct TruncationOptions {
  double t0 = 0.3;           // expansion point along the path
  int oracle_substeps = 10000;
  int bvp_grid = 1024;       // boundary-value grid for non-constant warps
};

struct TruncationReport {
  std::vector<double> dt;
  std::vector<double> error;  // direction error of one exponential step
  // |warp'(r)/warp(r) * r_dot| * ||angular velocity|| at t0: the predicted
  // quadratic coefficient of the step error.
  double coefficient = 0.0;
  double slope = 0.0;  // log-log fit over errors above the noise floor
  size_t n_fit = 0;
};

// One-step truncation error of the exponential update against the true
// geodesic flow: for each dt, steps once from the path state at t0 and
// measures the angle to a reference solution (closed form for constant
// warps, high-resolution in-plane integration otherwise). dt values must be
// positive, strictly decreasing, with t0 + dt[0] <= 1.
TruncationReport truncation_study(const WarpFunction& warp,
                                  const PolarPoint& p0, const PolarPoint& p1,
                                  std::span<const double> dt_values,
                                  const TruncationOptions& opts = {});

struct GroupStats {
  std::string label;
  size_t count = 0;
  double mean = 0.0, stddev = 0.0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Distribution of row norms for one named group of feature vectors.
GroupStats radial_stats(const std::string& label, const std::vector<Vec>& rows);

}  // namespace wpfm
