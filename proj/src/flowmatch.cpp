#include "wpfm/flowmatch.hpp"

#include <cmath>
#include <numeric>

#include "wpfm/errors.hpp"

namespace wpfm {

double time_shift(double t, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DegenerateInput("time_shift: s must be finite and > 0");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DegenerateInput("time_shift: t must lie in [0, 1]");
  }
  // Clamp rounding overshoot so composition with s -> 1/s stays in domain.
  return std::fmin(1.0, std::fmax(0.0, s * t / (1.0 + (s - 1.0) * t)));
}

TrainingTarget make_training_target(const GeodesicPath& path, double t_raw,
                                    double shift_s, bool shift_targets) {
  double shifted = time_shift(t_raw, shift_s);
  double t_path = shift_targets ? shifted : t_raw;
  TrainingTarget target;
  target.t_net = shifted;
  target.p_t = path.evaluate(t_path);
  target.v_t = path.velocity(t_path);
  target.x_t = assemble(target.p_t);
  return target;
}

LossResult metric_loss(std::span<const double> ambient_pred,
                       const TangentVector& target, const WarpFunction& warp,
                       const PolarPoint& p) {
  TangentVector pred = project_to_tangent(ambient_pred, p);
  check_same_dim(pred.v_ang, target.v_ang, "metric_loss");

  double w = warp.value(p.r);
  double w2 = w * w;
  double e_rad = pred.v_rad - target.v_rad;
  Vec e_ang = sub(pred.v_ang, target.v_ang);

  LossResult out;
  out.radial = e_rad * e_rad;
  out.angular = w2 * dot(e_ang, e_ang);
  out.loss = out.radial + out.angular;

  // d/dv of the radial term: 2 e_rad * theta. d/dv of the angular term:
  // (2 w^2 / r) * (I - theta theta^T) e_ang, from v_ang = (v - <v,theta>
  // theta) / r.
  out.grad_v = scaled(p.theta, 2.0 * e_rad);
  double proj = dot(e_ang, p.theta);
  Vec e_perp = e_ang;
  axpy(-proj, p.theta, e_perp);
  axpy(2.0 * w2 / p.r, e_perp, out.grad_v);
  return out;
}

EpochStats train_epoch(VelocityField& net, AdamW& opt,
                       const PairedDataset& data, const TrainConfig& config,
                       Rng& rng) {
  if (data.pairs.empty()) throw EmptyGroup("train_epoch: dataset is empty");
  if (config.batch_size < 1) {
    throw DegenerateInput("train_epoch: batch_size must be >= 1");
  }
  if (!(config.p_drop >= 0.0 && config.p_drop <= 1.0)) {
    throw DegenerateInput("train_epoch: p_drop must lie in [0, 1]");
  }
  if (config.geodesic_kind == GeodesicKind::NumericalWarp) {
    throw WrongKind("train_epoch: targets need a closed-form path kind");
  }

  std::vector<size_t> order(data.pairs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  rng.shuffle(order);

  EpochStats stats;
  size_t n = order.size();
  size_t done = 0;
  VelocityField::ForwardCache cache;
  while (done < n) {
    size_t bsz = std::min(static_cast<size_t>(config.batch_size), n - done);
    GradBuffer grad = net.zero_grad();
    double batch_loss = 0.0;
    for (size_t b = 0; b < bsz; ++b) {
      const LabeledPair& pair = data.pairs[order[done + b]];
      PolarPoint p0 = polar_decompose(pair.x0);
      PolarPoint p1 = polar_decompose(pair.x1);
      GeodesicPath path =
          config.geodesic_kind == GeodesicKind::EuclideanChord
              ? euclidean_chord(p0, p1, config.normalize_chord)
              : dual_geodesic(p0, p1);

      double t_raw = rng.uniform01();
      bool drop = rng.uniform01() < config.p_drop;

      TrainingTarget target = make_training_target(
          path, t_raw, config.shift_s, config.shift_targets);
      Condition c = drop ? Condition{} : pair.condition;
      Vec v = net.forward_cached(target.x_t, target.t_net, c, cache);
      LossResult lr = metric_loss(v, target.v_t, config.warp, target.p_t);

      batch_loss += lr.loss;
      stats.loss += lr.loss;
      stats.radial += lr.radial;
      stats.angular += lr.angular;

      Vec scaled_grad = scaled(lr.grad_v, 1.0 / static_cast<double>(bsz));
      net.backward(cache, scaled_grad, grad);
    }
    if (!std::isfinite(batch_loss)) {
      throw NonFiniteLoss("train_epoch: batch loss is not finite");
    }
    opt.step(net, grad);
    done += bsz;
  }

  double inv = 1.0 / static_cast<double>(n);
  stats.loss *= inv;
  stats.radial *= inv;
  stats.angular *= inv;
  return stats;
}

}  // namespace wpfm
