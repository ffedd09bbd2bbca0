#pragma once

#include <string>

#include "wpfm/data.hpp"
#include "wpfm/flowmatch.hpp"
#include "wpfm/inference.hpp"

namespace wpfm {

struct EvalSettings {
  int n_steps = 10;
  double cfg_scale = 5.0;
  Integrator integrator = Integrator::ExpMap;
};

// One run's full configuration. A single top-level seed drives data
// generation, network init, and the training stream through derived
// substreams.
struct RunConfig {
  uint64_t seed = 0;
  TrainConfig train;       // train.seed mirrors the top-level seed
  NetConfig net;           // net.d / net.c_dim mirror the task
  SyntheticTaskSpec task;  // task.seed mirrors the top-level seed
  EvalSettings eval;
};

RunConfig default_run_config();

// Strict parse: every key must be known and well typed; missing keys take
// defaults. Throws ConfigError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Canonical resolved form (all fields explicit, sorted keys).
std::string run_config_to_json(const RunConfig& config);

// SHA-1 of the canonical form; stored in checkpoints to pair them with the
// config that produced them.
std::string config_hash(const RunConfig& config);

Integrator parse_integrator(const std::string& text);
std::string integrator_name(Integrator integrator);
GeodesicKind parse_training_geodesic(const std::string& text);
std::string training_geodesic_name(GeodesicKind kind);

}  // namespace wpfm
