#pragma once

#include <string>

#include "wpfm/vec_math.hpp"

namespace wpfm {

// Points with norm at or below this cannot be decomposed into radius and
// direction.
inline constexpr double kEpsNorm = 1e-8;

// Angular steps below this leave the direction unchanged in exp_map.
inline constexpr double kEpsAngle = 1e-12;

// Endpoint directions within this of pi radians apart are rejected as
// antipodal.
inline constexpr double kEpsAntipodal = 1e-6;

// Below this separation angle, interpolation falls back from the arc form to
// normalized linear blending.
inline constexpr double kEpsSmallAngle = 1e-7;

// Warp profile of the product metric dr^2 + warp(r)^2 dtheta^2.
class WarpFunction {
 public:
  enum class Kind { Euclidean, Hyperbolic, Constant };

  static WarpFunction euclidean() { return WarpFunction(Kind::Euclidean, 0.0); }
  static WarpFunction hyperbolic() {
    return WarpFunction(Kind::Hyperbolic, 0.0);
  }
  static WarpFunction constant(double c);

  // Accepts "euclidean", "hyperbolic", or "constant:<c>".
  static WarpFunction parse(const std::string& text);

  double value(double r) const;
  double derivative(double r) const;

  // Radii below this are outside the supported domain for this warp.
  double min_radius() const;

  Kind kind() const { return kind_; }
  double constant_value() const { return c_; }
  std::string name() const;

 private:
  WarpFunction(Kind kind, double c) : kind_(kind), c_(c) {}
  Kind kind_;
  double c_;
};

// Radius-direction split of an ambient point x = r * theta, with theta unit
// length.
struct PolarPoint {
  double r = 1.0;
  Vec theta;
};

// Tangent vector in radial-angular coordinates at some base point. v_ang is
// an ambient vector orthogonal to the base direction.
struct TangentVector {
  double v_rad = 0.0;
  Vec v_ang;
};

// Splits x into radius and unit direction. Throws DegenerateInput when
// ||x|| <= kEpsNorm.
PolarPoint polar_decompose(std::span<const double> x);

// Reassembles the ambient point r * theta.
Vec assemble(const PolarPoint& p);

// Splits an ambient vector v at base point p into the radial component
// <v, theta> and the angular component (v - v_rad * theta) / r.
TangentVector project_to_tangent(std::span<const double> v,
                                 const PolarPoint& p);

// Inverse of project_to_tangent: v_rad * theta + r * v_ang.
Vec tangent_to_ambient(const TangentVector& tv, const PolarPoint& p);

// One step of the manifold exponential map: the radius moves linearly and the
// direction rotates along the great circle of v_ang by ||v_ang|| * dt radians.
// The returned direction is explicitly renormalized. Throws RadialUnderflow
// if the radial update reaches kEpsNorm or below.
PolarPoint exp_map(const PolarPoint& p, const TangentVector& tv, double dt);

// Coefficient -2 * warp'(r) / warp(r) * r_dot of the angular velocity in the
// geodesic coupling term. Zero for constant warps.
double angular_coupling_coefficient(const WarpFunction& warp, double r,
                                    double r_dot);

}  // namespace wpfm
