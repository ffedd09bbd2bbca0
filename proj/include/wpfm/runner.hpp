#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wpfm/analysis.hpp"
#include "wpfm/checkpoint.hpp"
#include "wpfm/config.hpp"
#include "wpfm/inference.hpp"

namespace wpfm {

struct CliOverrides {
  std::optional<uint64_t> seed;
  std::optional<int> n_steps;
  std::optional<double> cfg_scale;
  std::optional<std::string> integrator;
  std::optional<std::string> warp;
  std::optional<std::string> geodesic;
};

// Applies overrides and re-resolves derived fields (stream seeds, net dims).
RunConfig resolve_config(RunConfig config, const CliOverrides& overrides);

struct TrainRun {
  RunConfig config;
  VelocityField net;
  std::vector<EpochStats> epochs;
  std::vector<double> epoch_wall_ms;
  uint64_t step_count = 0;
};

// Full deterministic training pipeline: synthesize the task, initialize the
// network from a derived seed, run the configured number of epochs.
TrainRun run_training(const RunConfig& config);

struct EvalReport {
  int n_total = 0;
  int n_correct = 0;
  int identity_correct = 0;
  double accuracy = 0.0;
  double identity_accuracy = 0.0;
  double mean_angle_to_prototype = 0.0;
  // max-norm residual of v(w) - (v(0) + w * (v(1) - v(0))) at a probe state
  double cfg_affine_residual = 0.0;
  std::vector<int> labels;
  std::vector<int> predictions;
  std::vector<int> identity_predictions;
  std::vector<double> angle_to_prototype;
};

// Transports every holdout sample with its own condition and scores it
// against the class prototypes.
EvalReport run_eval(const VelocityField& net, const SyntheticTaskSpec& task,
                    const TransportOptions& opts);

// CLI pipelines. Return a process exit code: 0 success, 2 configuration or
// usage failure, 3 numerical failure.
int cmd_train(const std::string& config_path, const std::string& out_dir,
              const CliOverrides& overrides);

int cmd_eval(const std::string& config_path,
             const std::string& checkpoint_path, const std::string& out_dir,
             const CliOverrides& overrides);

struct SpeedStudyArgs {
  std::string geodesic = "chord";  // "dual" or "chord"
  bool normalize_chord = true;
  int d = 2;
  double alpha = 1.5707963267948966;  // pi/2
  double r0 = 1.0;
  double r1 = 1.0;
  int n_grid = 2001;
};
int cmd_study_speed(const SpeedStudyArgs& args, const std::string& out_dir);

struct TruncationStudyArgs {
  std::string warp = "euclidean";
  int d = 3;
  double alpha = 1.0;
  double r0 = 1.5;
  double r1 = 0.5;
  double t0 = 0.3;
  std::vector<double> dts = {1e-1, 3.1622776601683794e-2, 1e-2,
                             3.1622776601683795e-3, 1e-3};
  int oracle_substeps = 10000;
  int bvp_grid = 1024;
};
int cmd_study_truncation(const TruncationStudyArgs& args,
                         const std::string& out_dir);

// groups: (label, feature file path)
int cmd_study_radial(
    const std::vector<std::pair<std::string, std::string>>& groups,
    const std::string& out_dir);

int cmd_gen_data(const std::string& config_path, const std::string& out_dir,
                 const CliOverrides& overrides);

}  // namespace wpfm
