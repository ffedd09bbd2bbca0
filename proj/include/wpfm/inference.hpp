#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "wpfm/geodesics.hpp"
#include "wpfm/velocity_net.hpp"

namespace wpfm {

enum class Integrator { ExpMap, AmbientEuler };

struct TransportOptions {
  int n_steps = 10;
  double cfg_scale = 5.0;
  Integrator integrator = Integrator::ExpMap;
  // Network clock convention; must match how the checkpoint was trained.
  double shift_s = 0.1;
  bool shift_targets = true;
  bool record_trajectory = false;
};

// v(x,t|null) + w * (v(x,t|c) - v(x,t|null)). A null condition costs one
// forward pass; a real condition costs two.
Vec guided_velocity(const VelocityField& net, std::span<const double> x,
                    double t, const Condition& c, double w);

// Any ambient velocity field sampled at (x, t).
using VelocityFn = std::function<Vec(std::span<const double>, double)>;

struct TransportResult {
  Vec x_final;
  std::vector<PolarPoint> trajectory;  // n_steps + 1 entries when recorded
};

// Integrates dx/dt = field(x, t) from t = 0 to 1 in n_steps uniform steps.
// ExpMap projects each sample to the tangent split and steps with the
// manifold exponential (direction renormalized every step); AmbientEuler
// steps in ambient coordinates and re-decomposes. A radius collapse raises
// RadialUnderflow, a non-finite field sample NonFiniteState.
TransportResult transport_field(const VelocityFn& field,
                                std::span<const double> x_start, int n_steps,
                                Integrator integrator,
                                bool record_trajectory = false);

// Network-backed transport with classifier-free guidance. The network clock
// for step k at path time t_k = k / n_steps follows opts.shift_targets.
TransportResult transport(const VelocityField& net,
                          std::span<const double> x_start, const Condition& c,
                          const TransportOptions& opts);

// Transports x_test and returns the label of the prototype with the largest
// cosine similarity to the final direction; ties resolve to the lowest
// label.
int classify_by_transport(const VelocityField& net,
                          std::span<const double> x_test,
                          const std::vector<std::pair<int, Vec>>& prototypes,
                          const Condition& c, const TransportOptions& opts);

// Label of the prototype nearest to x itself (identity transport baseline).
int classify_identity(std::span<const double> x,
                      const std::vector<std::pair<int, Vec>>& prototypes);

// Oracle field that reproduces a closed-form path: at any x it returns the
// ambient velocity of the path at time t.
VelocityFn make_path_field(const GeodesicPath& path);

}  // namespace wpfm
