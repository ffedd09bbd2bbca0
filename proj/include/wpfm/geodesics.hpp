#pragma once

#include <memory>
#include <utility>

#include "wpfm/manifold.hpp"

namespace wpfm {

enum class GeodesicKind { DualGeodesic, EuclideanChord, NumericalWarp };

// In-plane coordinates of a numerically solved path at one time: radius,
// swept angle from the first endpoint, and their time derivatives.
struct PlaneState {
  double r = 0.0;
  double r_dot = 0.0;
  double angle = 0.0;
  double angle_rate = 0.0;
};

namespace detail {
struct NumericDense;
}

// A path between two polar points, evaluable anywhere on [0, 1]. Closed-form
// kinds (DualGeodesic, EuclideanChord) are exact; NumericalWarp interpolates
// a solved boundary value problem. Immutable after construction.
class GeodesicPath {
 public:
  GeodesicKind kind() const { return kind_; }
  const PolarPoint& endpoint0() const { return p0_; }
  const PolarPoint& endpoint1() const { return p1_; }

  // Separation angle between the endpoint directions.
  double alpha() const { return alpha_; }

  PolarPoint evaluate(double t) const;
  TangentVector velocity(double t) const;

  // NumericalWarp only; WrongKind otherwise.
  PlaneState plane_state(double t) const;
  std::pair<Vec, Vec> plane_basis() const;
  const WarpFunction& warp() const;

 private:
  friend GeodesicPath dual_geodesic(const PolarPoint&, const PolarPoint&);
  friend GeodesicPath euclidean_chord(const PolarPoint&, const PolarPoint&,
                                      bool);
  friend GeodesicPath general_warp_geodesic(const PolarPoint&,
                                            const PolarPoint&,
                                            const WarpFunction&, int);
  GeodesicPath() = default;

  GeodesicKind kind_ = GeodesicKind::DualGeodesic;
  PolarPoint p0_, p1_;
  double alpha_ = 0.0;
  // EuclideanChord working endpoints (unit or original radius).
  Vec chord_x0_, chord_x1_;
  std::shared_ptr<const detail::NumericDense> dense_;
};

// Product path: linear radius, great-circle arc for the direction, each at
// constant rate. Throws AntipodalEndpoints when the directions are within
// kEpsAntipodal of opposite.
GeodesicPath dual_geodesic(const PolarPoint& p0, const PolarPoint& p1);

// Velocity of a dual geodesic; WrongKind for any other path kind. The
// angular part has constant norm alpha.
TangentVector dual_geodesic_velocity(const GeodesicPath& path, double t);

// Ambient straight line between the endpoints (radii replaced by 1 unless
// normalize_endpoints is false), reported in polar coordinates.
GeodesicPath euclidean_chord(const PolarPoint& p0, const PolarPoint& p1,
                             bool normalize_endpoints = true);

// True geodesic of the warped metric dr^2 + warp(r)^2 dtheta^2, solved by
// single shooting on the in-plane orbit equation with RK4 on n_grid steps
// and a secant update of the initial radial slope. Dense output is quintic
// Hermite in time, with node second derivatives taken from the geodesic
// equations. Throws NoConvergence after 50 secant iterations without meeting
// the 1e-8 endpoint tolerance.
GeodesicPath general_warp_geodesic(const PolarPoint& p0, const PolarPoint& p1,
                                   const WarpFunction& warp, int n_grid);

// Velocity of the ambient curve t -> assemble(path.evaluate(t)); equals
// tangent_to_ambient(path.velocity(t), path.evaluate(t)).
Vec ambient_path_velocity(const GeodesicPath& path, double t);

}  // namespace wpfm
