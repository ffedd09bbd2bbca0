#include "wpfm/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "wpfm/errors.hpp"
#include "wpfm/flowmatch.hpp"
#include "wpfm/io_util.hpp"
#include "wpfm/rng.hpp"

namespace wpfm {

namespace {

using json = nlohmann::json;

// Seed stream tags for the run-level consumers (data tags live in data.cpp).
constexpr uint64_t kTagNetInit = 10;
constexpr uint64_t kTagTrainStream = 11;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Exit-code policy: configuration, format, and filesystem problems are usage
// errors (2); everything else from the library is a numerical failure (3).
int guarded(const char* what, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s: %s\n", what, e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "%s: %s\n", what, e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "%s: %s\n", what, e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", what, e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", what, e.what());
    return 3;
  }
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const RunConfig& config, double wall_ms) {
  json m;
  m["command"] = command;
  m["config"] = json::parse(run_config_to_json(config));
  m["config_hash"] = config_hash(config);
  m["wall_ms"] = wall_ms;
  write_file_atomic(join(out_dir, "manifest.json"), m.dump(2) + "\n");
}

}  // namespace

RunConfig resolve_config(RunConfig config, const CliOverrides& overrides) {
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.warp) {
    try {
      config.train.warp = WarpFunction::parse(*overrides.warp);
    } catch (const FormatError& err) {
      throw ConfigError(err.what());
    }
  }
  if (overrides.geodesic) {
    config.train.geodesic_kind = parse_training_geodesic(*overrides.geodesic);
  }
  if (overrides.n_steps) {
    if (*overrides.n_steps < 1) throw ConfigError("n-steps must be >= 1");
    config.eval.n_steps = *overrides.n_steps;
  }
  if (overrides.cfg_scale) config.eval.cfg_scale = *overrides.cfg_scale;
  if (overrides.integrator) {
    config.eval.integrator = parse_integrator(*overrides.integrator);
  }
  config.train.seed = config.seed;
  config.task.seed = config.seed;
  config.net.d = config.task.d;
  config.net.c_dim = config.task.c_dim;
  return config;
}

TrainRun run_training(const RunConfig& config) {
  PairedDataset data = generate_task(config.task);
  VelocityField net(config.net, derive_seed(config.seed, kTagNetInit));
  AdamW opt(net.param_count(), config.train.adamw);
  Rng rng(derive_seed(config.seed, kTagTrainStream));

  TrainRun run{config, std::move(net), {}, {}, 0};
  run.epochs.reserve(static_cast<size_t>(config.train.epochs));
  for (int e = 0; e < config.train.epochs; ++e) {
    double start = now_ms();
    EpochStats stats = train_epoch(run.net, opt, data, config.train, rng);
    run.epoch_wall_ms.push_back(now_ms() - start);
    run.epochs.push_back(stats);
  }
  run.step_count = opt.step_count();
  return run;
}

EvalReport run_eval(const VelocityField& net, const SyntheticTaskSpec& task,
                    const TransportOptions& opts) {
  PairedDataset holdout = generate_holdout(task);
  if (holdout.pairs.empty()) throw EmptyGroup("run_eval: empty holdout");

  EvalReport report;
  double angle_sum = 0.0;
  for (const LabeledPair& pair : holdout.pairs) {
    TransportResult tr = transport(net, pair.x0, pair.condition, opts);
    int pred = classify_identity(tr.x_final, holdout.prototypes);
    int ident = classify_identity(pair.x0, holdout.prototypes);

    PolarPoint pf = polar_decompose(tr.x_final);
    PolarPoint proto =
        polar_decompose(holdout.prototypes[static_cast<size_t>(pair.label)].second);
    double angle = unit_angle(pf.theta, proto.theta);

    report.labels.push_back(pair.label);
    report.predictions.push_back(pred);
    report.identity_predictions.push_back(ident);
    report.angle_to_prototype.push_back(angle);
    angle_sum += angle;
    if (pred == pair.label) ++report.n_correct;
    if (ident == pair.label) ++report.identity_correct;
    ++report.n_total;
  }
  report.accuracy =
      static_cast<double>(report.n_correct) / report.n_total;
  report.identity_accuracy =
      static_cast<double>(report.identity_correct) / report.n_total;
  report.mean_angle_to_prototype = angle_sum / report.n_total;

  // Probe the guidance identity at the first holdout sample.
  const LabeledPair& probe = holdout.pairs.front();
  double t_probe = 0.3;
  Vec v0 = guided_velocity(net, probe.x0, t_probe, probe.condition, 0.0);
  Vec v1 = guided_velocity(net, probe.x0, t_probe, probe.condition, 1.0);
  Vec vw = guided_velocity(net, probe.x0, t_probe, probe.condition,
                           opts.cfg_scale);
  double resid = 0.0;
  for (size_t i = 0; i < vw.size(); ++i) {
    double expect = v0[i] + opts.cfg_scale * (v1[i] - v0[i]);
    resid = std::fmax(resid, std::fabs(vw[i] - expect));
  }
  report.cfg_affine_residual = resid;
  return report;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const CliOverrides& overrides) {
  return guarded("train", [&] {
    double start = now_ms();
    RunConfig config = resolve_config(load_run_config(config_path), overrides);
    ensure_dir(out_dir);

    TrainRun run = run_training(config);

    std::string csv = "epoch,loss,radial_loss,angular_loss,wall_ms\n";
    for (size_t e = 0; e < run.epochs.size(); ++e) {
      csv += std::to_string(e) + ',' + fmt_g17(run.epochs[e].loss) + ',' +
             fmt_g17(run.epochs[e].radial) + ',' +
             fmt_g17(run.epochs[e].angular) + ',' +
             fmt_g17(run.epoch_wall_ms[e]) + '\n';
    }
    write_file_atomic(join(out_dir, "loss.csv"), csv);

    CheckpointMeta meta;
    meta.step_count = run.step_count;
    meta.config_hash = config_hash(config);
    meta.shift_s = config.train.shift_s;
    meta.shift_targets = config.train.shift_targets;
    meta.warp = config.train.warp.name();
    save_checkpoint(join(out_dir, "checkpoint.bin"), run.net, meta);

    json metrics;
    metrics["epochs"] = run.epochs.size();
    metrics["step_count"] = run.step_count;
    metrics["param_count"] = run.net.param_count();
    metrics["final_loss"] = run.epochs.back().loss;
    metrics["final_radial_loss"] = run.epochs.back().radial;
    metrics["final_angular_loss"] = run.epochs.back().angular;
    metrics["config_hash"] = meta.config_hash;
    write_file_atomic(join(out_dir, "metrics.json"), metrics.dump(2) + "\n");

    write_manifest(out_dir, "train", config, now_ms() - start);
    std::printf("train: %d epochs, final loss %.6g, wrote %s\n",
                config.train.epochs, run.epochs.back().loss,
                join(out_dir, "checkpoint.bin").c_str());
  });
}

int cmd_eval(const std::string& config_path,
             const std::string& checkpoint_path, const std::string& out_dir,
             const CliOverrides& overrides) {
  return guarded("eval", [&] {
    double start = now_ms();
    RunConfig config = resolve_config(load_run_config(config_path), overrides);
    ensure_dir(out_dir);

    CheckpointMeta meta;
    VelocityField net = load_checkpoint(checkpoint_path, &meta);
    if (net.config().d != config.task.d ||
        net.config().c_dim != config.task.c_dim) {
      throw FormatError("eval: checkpoint architecture (d=" +
                        std::to_string(net.config().d) +
                        ", c_dim=" + std::to_string(net.config().c_dim) +
                        ") does not fit the task (d=" +
                        std::to_string(config.task.d) +
                        ", c_dim=" + std::to_string(config.task.c_dim) + ")");
    }
    bool hash_match = meta.config_hash == config_hash(config);

    TransportOptions opts;
    opts.n_steps = config.eval.n_steps;
    opts.cfg_scale = config.eval.cfg_scale;
    opts.integrator = config.eval.integrator;
    opts.shift_s = meta.shift_s;          // trained clock convention wins
    opts.shift_targets = meta.shift_targets;

    EvalReport report = run_eval(net, config.task, opts);

    std::string csv = "index,label,predicted,identity_predicted,angle_to_prototype\n";
    for (size_t i = 0; i < report.labels.size(); ++i) {
      csv += std::to_string(i) + ',' + std::to_string(report.labels[i]) + ',' +
             std::to_string(report.predictions[i]) + ',' +
             std::to_string(report.identity_predictions[i]) + ',' +
             fmt_g17(report.angle_to_prototype[i]) + '\n';
    }
    write_file_atomic(join(out_dir, "eval.csv"), csv);

    json ej;
    ej["n_total"] = report.n_total;
    ej["n_correct"] = report.n_correct;
    ej["accuracy"] = report.accuracy;
    ej["identity_correct"] = report.identity_correct;
    ej["identity_accuracy"] = report.identity_accuracy;
    ej["mean_angle_to_prototype"] = report.mean_angle_to_prototype;
    ej["cfg_affine_residual"] = report.cfg_affine_residual;
    ej["n_steps"] = opts.n_steps;
    ej["cfg_scale"] = opts.cfg_scale;
    ej["integrator"] = integrator_name(opts.integrator);
    ej["config_hash"] = config_hash(config);
    ej["checkpoint_config_match"] = hash_match;
    write_file_atomic(join(out_dir, "eval.json"), ej.dump(2) + "\n");

    write_manifest(out_dir, "eval", config, now_ms() - start);
    std::printf("eval: accuracy %.4f (identity %.4f) over %d samples\n",
                report.accuracy, report.identity_accuracy, report.n_total);
  });
}

namespace {

// theta0 = e0, theta1 rotated by alpha in the (e0, e1) plane.
std::pair<PolarPoint, PolarPoint> canonical_endpoints(int d, double alpha,
                                                      double r0, double r1) {
  if (d < 2) throw ConfigError("study: d must be >= 2");
  PolarPoint p0, p1;
  p0.r = r0;
  p0.theta.assign(static_cast<size_t>(d), 0.0);
  p0.theta[0] = 1.0;
  p1.r = r1;
  p1.theta.assign(static_cast<size_t>(d), 0.0);
  p1.theta[0] = std::cos(alpha);
  p1.theta[1] = std::sin(alpha);
  return {p0, p1};
}

}  // namespace

int cmd_study_speed(const SpeedStudyArgs& args, const std::string& out_dir) {
  return guarded("study speed", [&] {
    if (args.geodesic != "dual" && args.geodesic != "chord") {
      throw ConfigError("study speed: geodesic must be 'dual' or 'chord'");
    }
    ensure_dir(out_dir);
    auto [p0, p1] = canonical_endpoints(args.d, args.alpha, args.r0, args.r1);
    GeodesicPath path =
        args.geodesic == "dual"
            ? dual_geodesic(p0, p1)
            : euclidean_chord(p0, p1, args.normalize_chord);
    SpeedProfile prof = angular_speed_profile(path, args.n_grid);

    std::string csv = "t,omega,radius\n";
    for (size_t i = 0; i < prof.t.size(); ++i) {
      csv += fmt_g17(prof.t[i]) + ',' + fmt_g17(prof.omega[i]) + ',' +
             fmt_g17(prof.radius[i]) + '\n';
    }
    write_file_atomic(join(out_dir, "speed.csv"), csv);

    size_t argmax_w = 0, argmin_r = 0;
    for (size_t i = 0; i < prof.t.size(); ++i) {
      if (prof.omega[i] > prof.omega[argmax_w]) argmax_w = i;
      if (prof.radius[i] < prof.radius[argmin_r]) argmin_r = i;
    }
    size_t mid = prof.t.size() / 2;
    json sj;
    sj["geodesic"] = args.geodesic;
    sj["alpha"] = args.alpha;
    sj["n_grid"] = args.n_grid;
    sj["omega_mean"] = prof.omega_mean;
    sj["omega_cv"] = prof.omega_cv;
    sj["omega_start"] = prof.omega.front();
    sj["omega_mid"] = prof.omega[mid];
    sj["mid_over_start"] = prof.omega.front() > 0.0
                               ? prof.omega[mid] / prof.omega.front()
                               : 0.0;
    sj["argmax_omega_t"] = prof.t[argmax_w];
    sj["argmin_radius_t"] = prof.t[argmin_r];
    write_file_atomic(join(out_dir, "speed.json"), sj.dump(2) + "\n");
    std::printf("study speed: omega_cv %.3g, mid/start %.4f\n", prof.omega_cv,
                sj["mid_over_start"].get<double>());
  });
}

int cmd_study_truncation(const TruncationStudyArgs& args,
                         const std::string& out_dir) {
  return guarded("study truncation", [&] {
    ensure_dir(out_dir);
    WarpFunction warp = WarpFunction::parse(args.warp);
    auto [p0, p1] = canonical_endpoints(args.d, args.alpha, args.r0, args.r1);
    TruncationOptions opts;
    opts.t0 = args.t0;
    opts.oracle_substeps = args.oracle_substeps;
    opts.bvp_grid = args.bvp_grid;
    TruncationReport report =
        truncation_study(warp, p0, p1, args.dts, opts);

    std::string csv = "dt,error\n";
    for (size_t i = 0; i < report.dt.size(); ++i) {
      csv += fmt_g17(report.dt[i]) + ',' + fmt_g17(report.error[i]) + '\n';
    }
    write_file_atomic(join(out_dir, "truncation.csv"), csv);

    json tj;
    tj["warp"] = warp.name();
    tj["t0"] = opts.t0;
    tj["alpha"] = args.alpha;
    tj["r0"] = args.r0;
    tj["r1"] = args.r1;
    tj["coefficient"] = report.coefficient;
    tj["n_fit"] = report.n_fit;
    if (std::isfinite(report.slope)) {
      tj["slope"] = report.slope;
    } else {
      tj["slope"] = nullptr;  // every error sat below the noise floor
    }
    write_file_atomic(join(out_dir, "truncation.json"), tj.dump(2) + "\n");
    if (std::isfinite(report.slope)) {
      std::printf("study truncation: warp %s, slope %.4f over %zu points\n",
                  warp.name().c_str(), report.slope, report.n_fit);
    } else {
      std::printf(
          "study truncation: warp %s, all errors below noise floor\n",
          warp.name().c_str());
    }
  });
}

int cmd_study_radial(
    const std::vector<std::pair<std::string, std::string>>& groups,
    const std::string& out_dir) {
  return guarded("study radial", [&] {
    if (groups.empty()) throw ConfigError("study radial: no groups given");
    ensure_dir(out_dir);
    std::string csv = "group,count,mean,stddev,min,q1,median,q3,max\n";
    json rows = json::array();
    for (const auto& [label, path] : groups) {
      GroupStats gs = radial_stats(label, load_features(path));
      csv += gs.label + ',' + std::to_string(gs.count) + ',' +
             fmt_g17(gs.mean) + ',' + fmt_g17(gs.stddev) + ',' +
             fmt_g17(gs.min) + ',' + fmt_g17(gs.q1) + ',' +
             fmt_g17(gs.median) + ',' + fmt_g17(gs.q3) + ',' +
             fmt_g17(gs.max) + '\n';
      rows.push_back({{"group", gs.label},
                      {"count", gs.count},
                      {"mean", gs.mean},
                      {"stddev", gs.stddev},
                      {"min", gs.min},
                      {"q1", gs.q1},
                      {"median", gs.median},
                      {"q3", gs.q3},
                      {"max", gs.max}});
    }
    write_file_atomic(join(out_dir, "radial.csv"), csv);
    write_file_atomic(join(out_dir, "radial.json"), rows.dump(2) + "\n");
    std::printf("study radial: %zu groups\n", groups.size());
  });
}

int cmd_gen_data(const std::string& config_path, const std::string& out_dir,
                 const CliOverrides& overrides) {
  return guarded("gen-data", [&] {
    double start = now_ms();
    RunConfig config = resolve_config(load_run_config(config_path), overrides);
    ensure_dir(out_dir);

    auto dump_split = [&](const PairedDataset& set, const std::string& stem) {
      std::vector<Vec> x0, x1, cond;
      std::string labels = "label\n";
      for (const LabeledPair& p : set.pairs) {
        x0.push_back(p.x0);
        x1.push_back(p.x1);
        cond.push_back(p.condition.value());
        labels += std::to_string(p.label) + '\n';
      }
      save_features(join(out_dir, stem + "_x0.wpfmfeat"), x0);
      save_features(join(out_dir, stem + "_x1.wpfmfeat"), x1);
      save_features(join(out_dir, stem + "_conditions.wpfmfeat"), cond);
      write_file_atomic(join(out_dir, stem + "_labels.csv"), labels);
    };

    PairedDataset train = generate_task(config.task);
    dump_split(train, "train");
    if (config.task.holdout_per_class > 0) {
      dump_split(generate_holdout(config.task), "holdout");
    }

    std::vector<Vec> protos;
    std::string plabels = "label\n";
    for (const auto& [label, proto] : train.prototypes) {
      protos.push_back(proto);
      plabels += std::to_string(label) + '\n';
    }
    save_features(join(out_dir, "prototypes.wpfmfeat"), protos);
    write_file_atomic(join(out_dir, "prototype_labels.csv"), plabels);

    write_manifest(out_dir, "gen-data", config, now_ms() - start);
    std::printf("gen-data: %zu train pairs, %d prototypes -> %s\n",
                train.pairs.size(), config.task.n_classes, out_dir.c_str());
  });
}

}  // namespace wpfm
