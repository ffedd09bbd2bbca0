#include <doctest.h>

#include <cmath>

#include "wpfm/errors.hpp"
#include "wpfm/flowmatch.hpp"

using namespace wpfm;

namespace {

PolarPoint make_point(double r, Vec theta) {
  double n = norm2(theta);
  for (double& c : theta) c /= n;
  PolarPoint p;
  p.r = r;
  p.theta = std::move(theta);
  return p;
}

PairedDataset tiny_dataset(uint64_t seed) {
  SyntheticTaskSpec spec;
  spec.d = 4;
  spec.c_dim = 4;
  spec.n_classes = 2;
  spec.shots_per_class = 8;
  spec.seed = seed;
  return generate_task(spec);
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.epochs = 1;
  cfg.adamw.lr = 1e-3;
  return cfg;
}

NetConfig tiny_net_config() {
  NetConfig cfg;
  cfg.d = 4;
  cfg.c_dim = 4;
  cfg.t_embed_dim = 8;
  cfg.c_embed_dim = 8;
  cfg.hidden = {32, 32};
  return cfg;
}

}  // namespace

TEST_CASE("time shift fixes the endpoints and hits the known midpoint value") {
  CHECK(time_shift(0.0, 0.1) == 0.0);
  CHECK(time_shift(1.0, 0.1) == doctest::Approx(1.0).epsilon(1e-15));
  // s = 0.1 at t = 0.5: 0.05 / 0.55 = 1/11.
  CHECK(time_shift(0.5, 0.1) ==
        doctest::Approx(0.09090909090909091).epsilon(1e-12));
  CHECK(time_shift(0.3, 1.0) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("time shift is strictly increasing and inverts via 1/s") {
  for (double s : {0.1, 0.5, 2.0, 10.0}) {
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
      double t = i / 100.0;
      double y = time_shift(t, s);
      CHECK(y > prev);
      prev = y;
      CHECK(time_shift(y, 1.0 / s) == doctest::Approx(t).epsilon(1e-12));
    }
  }
}

TEST_CASE("time shift validates its domain") {
  CHECK_THROWS_AS(time_shift(-0.1, 0.5), DegenerateInput);
  CHECK_THROWS_AS(time_shift(1.1, 0.5), DegenerateInput);
  CHECK_THROWS_AS(time_shift(0.5, 0.0), DegenerateInput);
  CHECK_THROWS_AS(time_shift(0.5, -1.0), DegenerateInput);
}

TEST_CASE("training target with shifted sampling") {
  PolarPoint p0 = make_point(1.0, {1.0, 0.0});
  PolarPoint p1 = make_point(2.0, {0.0, 1.0});
  GeodesicPath path = dual_geodesic(p0, p1);
  double u = 0.5, s = 0.1;
  double tau = time_shift(u, s);

  TrainingTarget shifted = make_training_target(path, u, s, true);
  PolarPoint expect = path.evaluate(tau);
  CHECK(shifted.t_net == doctest::Approx(tau).epsilon(1e-15));
  CHECK(shifted.p_t.r == doctest::Approx(expect.r).epsilon(1e-14));
  CHECK(unit_angle(shifted.p_t.theta, expect.theta) < 1e-12);
  TangentVector v = path.velocity(tau);
  CHECK(shifted.v_t.v_rad == doctest::Approx(v.v_rad).epsilon(1e-14));
  CHECK(norm2(sub(shifted.v_t.v_ang, v.v_ang)) < 1e-12);

  TrainingTarget raw = make_training_target(path, u, s, false);
  PolarPoint expect_raw = path.evaluate(u);
  CHECK(raw.t_net == doctest::Approx(tau).epsilon(1e-15));
  CHECK(raw.p_t.r == doctest::Approx(expect_raw.r).epsilon(1e-14));
  CHECK(unit_angle(raw.p_t.theta, expect_raw.theta) < 1e-12);

  // The ambient point is the assembled polar point.
  Vec amb = assemble(shifted.p_t);
  CHECK(norm2(sub(amb, shifted.x_t)) < 1e-12);
}

TEST_CASE("metric loss vanishes on an exact prediction") {
  PolarPoint p = make_point(2.0, {0.6, 0.8});
  TangentVector target;
  target.v_rad = 0.7;
  target.v_ang = {-0.8 * 1.3, 0.6 * 1.3};
  Vec pred = tangent_to_ambient(target, p);
  LossResult res = metric_loss(pred, target, WarpFunction::constant(25.0), p);
  CHECK(res.loss < 1e-20);
  CHECK(norm2(res.grad_v) < 1e-9);
}

TEST_CASE("metric loss matches a hand-worked example") {
  PolarPoint p = make_point(2.0, {1.0, 0.0});
  TangentVector target;
  target.v_rad = 1.0;
  target.v_ang = {0.0, 0.5};
  Vec pred{2.0, 3.0};  // splits into v_rad = 2, v_ang = (0, 1.5)
  LossResult res = metric_loss(pred, target, WarpFunction::euclidean(), p);
  // Radial error 1, angular error (0, 1) with weight w(2)^2 = 4.
  CHECK(res.radial == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(res.angular == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(res.loss == doctest::Approx(5.0).epsilon(1e-14));
  // Gradient: 2 e_rad theta + (2 w^2 / r)(e_ang - <e_ang, theta> theta).
  CHECK(res.grad_v[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(res.grad_v[1] == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("metric loss gradient matches finite differences") {
  Rng rng(19);
  const double h = 1e-6;
  WarpFunction warp = WarpFunction::constant(5.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vec x(5);
    for (double& c : x) c = rng.normal();
    PolarPoint p = polar_decompose(x);
    TangentVector target;
    target.v_rad = rng.normal();
    Vec raw(5);
    for (double& c : raw) c = rng.normal();
    target.v_ang = project_to_tangent(raw, p).v_ang;
    Vec pred(5);
    for (double& c : pred) c = rng.normal();

    LossResult res = metric_loss(pred, target, warp, p);
    for (size_t i = 0; i < pred.size(); ++i) {
      Vec pp = pred, pm = pred;
      pp[i] += h;
      pm[i] -= h;
      double fd = (metric_loss(pp, target, warp, p).loss -
                   metric_loss(pm, target, warp, p).loss) /
                  (2.0 * h);
      CHECK(res.grad_v[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("an epoch of training lowers the loss on a tiny task") {
  PairedDataset data = tiny_dataset(44);
  TrainConfig tcfg = tiny_train_config();
  tcfg.warp = WarpFunction::constant(25.0);
  VelocityField net(tiny_net_config(), 7);
  AdamW opt(net.param_count(), tcfg.adamw);
  Rng rng(8);
  double first = 0.0, last = 0.0;
  for (int epoch = 0; epoch < 30; ++epoch) {
    EpochStats stats = train_epoch(net, opt, data, tcfg, rng);
    if (epoch == 0) first = stats.loss;
    last = stats.loss;
    CHECK(std::isfinite(stats.loss));
    CHECK(stats.loss >= 0.0);
    CHECK(stats.loss ==
          doctest::Approx(stats.radial + stats.angular).epsilon(1e-9));
  }
  CHECK(last < first);
}

TEST_CASE("training is deterministic given seeds") {
  PairedDataset data = tiny_dataset(45);
  TrainConfig tcfg = tiny_train_config();
  VelocityField n1(tiny_net_config(), 3), n2(tiny_net_config(), 3);
  AdamW o1(n1.param_count(), tcfg.adamw), o2(n2.param_count(), tcfg.adamw);
  Rng r1(5), r2(5);
  for (int epoch = 0; epoch < 5; ++epoch) {
    EpochStats s1 = train_epoch(n1, o1, data, tcfg, r1);
    EpochStats s2 = train_epoch(n2, o2, data, tcfg, r2);
    CHECK(s1.loss == s2.loss);
  }
  CHECK(n1.params_flat() == n2.params_flat());
}

TEST_CASE("chord-target training runs and uses normalized endpoints") {
  PairedDataset data = tiny_dataset(46);
  TrainConfig tcfg = tiny_train_config();
  tcfg.geodesic_kind = GeodesicKind::EuclideanChord;
  tcfg.normalize_chord = true;
  VelocityField net(tiny_net_config(), 4);
  AdamW opt(net.param_count(), tcfg.adamw);
  Rng rng(6);
  EpochStats stats = train_epoch(net, opt, data, tcfg, rng);
  CHECK(std::isfinite(stats.loss));
}

TEST_CASE("train_epoch validates its configuration") {
  PairedDataset data = tiny_dataset(47);
  TrainConfig tcfg = tiny_train_config();
  VelocityField net(tiny_net_config(), 5);
  AdamW opt(net.param_count(), tcfg.adamw);
  Rng rng(7);

  TrainConfig bad = tcfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_epoch(net, opt, data, bad, rng), DegenerateInput);
  bad = tcfg;
  bad.p_drop = 1.5;
  CHECK_THROWS_AS(train_epoch(net, opt, data, bad, rng), DegenerateInput);
  bad = tcfg;
  bad.geodesic_kind = GeodesicKind::NumericalWarp;
  CHECK_THROWS_AS(train_epoch(net, opt, data, bad, rng), WrongKind);

  PairedDataset empty;
  empty.d = 4;
  empty.c_dim = 4;
  CHECK_THROWS_AS(train_epoch(net, opt, empty, tcfg, rng), EmptyGroup);
}

TEST_CASE("train_epoch flags non-finite losses before stepping") {
  PairedDataset data = tiny_dataset(48);
  TrainConfig tcfg = tiny_train_config();
  VelocityField net(tiny_net_config(), 6);
  Vec p = net.params_flat();
  for (double& c : p) c = 1e200;
  net.set_params_flat(p);
  AdamW opt(net.param_count(), tcfg.adamw);
  Rng rng(8);
  CHECK_THROWS_AS(train_epoch(net, opt, data, tcfg, rng), NonFiniteLoss);
}
