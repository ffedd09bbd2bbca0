#pragma once

#include <cstdint>

#include "wpfm/data.hpp"
#include "wpfm/geodesics.hpp"
#include "wpfm/rng.hpp"
#include "wpfm/velocity_net.hpp"

namespace wpfm {

struct TrainConfig {
  WarpFunction warp = WarpFunction::constant(25.0);
  GeodesicKind geodesic_kind = GeodesicKind::DualGeodesic;
  bool normalize_chord = true;
  double shift_s = 0.1;
  // When true, the shift reweights where along the path samples land and the
  // network clock equals path time; when false, the path is sampled at the
  // raw draw and only the network clock is shifted.
  bool shift_targets = true;
  double p_drop = 0.1;  // per-sample probability of training unconditionally
  int batch_size = 8;
  int epochs = 200;
  AdamWConfig adamw;
  uint64_t seed = 0;
};

// t' = s * t / (1 + (s - 1) * t). Fixes 0 and 1, strictly increasing on
// [0, 1] for s > 0, and composes with s -> 1/s to the identity.
double time_shift(double t, double s);

struct TrainingTarget {
  Vec x_t;           // ambient point fed to the network
  PolarPoint p_t;    // its polar form (loss base point)
  TangentVector v_t; // path velocity the network should match
  double t_net;      // network clock value
};

// Builds the regression target for one uniform draw t_raw in [0, 1].
TrainingTarget make_training_target(const GeodesicPath& path, double t_raw,
                                    double shift_s, bool shift_targets);

struct LossResult {
  double loss = 0.0;
  double radial = 0.0;   // (v_rad - target_rad)^2
  double angular = 0.0;  // warp(r)^2 ||v_ang - target_ang||^2
  Vec grad_v;            // d(loss)/d(ambient prediction)
};

// Metric-weighted regression loss of an ambient prediction against a target
// tangent vector at base point p. The prediction is projected to the tangent
// split first, so gradients flow through the projection.
LossResult metric_loss(std::span<const double> ambient_pred,
                       const TangentVector& target, const WarpFunction& warp,
                       const PolarPoint& p);

struct EpochStats {
  double loss = 0.0;
  double radial = 0.0;
  double angular = 0.0;
};

// One pass over the dataset: shuffle, batch, average gradients per batch,
// one optimizer step per batch. Per sample, the draw order is fixed: path
// time first, then the condition-drop coin. Throws NonFiniteLoss before
// stepping if a batch loss is not finite.
EpochStats train_epoch(VelocityField& net, AdamW& opt,
                       const PairedDataset& data, const TrainConfig& config,
                       Rng& rng);

}  // namespace wpfm
