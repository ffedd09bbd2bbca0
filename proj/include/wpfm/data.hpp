#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wpfm/velocity_net.hpp"

namespace wpfm {

// Synthetic few-shot transport task: class means on the sphere, source
// points drawn around them with log-normal radii, targets at the class
// prototype (mean direction pushed to the target radius).
struct SyntheticTaskSpec {
  int d = 16;
  int n_classes = 2;
  double kappa_src = 4.0;
  double r_src_log_mean = std::log(20.0);
  double r_src_log_std = 0.05;
  double r_tgt = 25.0;
  int shots_per_class = 16;
  int holdout_per_class = 64;
  double min_sep = 0.5;  // minimum pairwise angle between class means
  int c_dim = 16;
  uint64_t seed = 0;
};

struct LabeledPair {
  Vec x0;
  Vec x1;
  int label = 0;
  Condition condition;
};

struct PairedDataset {
  int d = 0;
  int c_dim = 0;
  std::vector<LabeledPair> pairs;
  // label -> ambient prototype; every pair's x1 equals the prototype of its
  // label.
  std::vector<std::pair<int, Vec>> prototypes;
};

// Training shots. Deterministic in spec.seed; the mean, condition, train and
// holdout streams are derived independently so the two generators share class
// structure.
PairedDataset generate_task(const SyntheticTaskSpec& spec);

// Held-out samples from the same class means, prototypes, and conditions.
PairedDataset generate_holdout(const SyntheticTaskSpec& spec);

// Binary feature matrix: magic "WPFMFEAT", u32 version, u32 d, u64 rows,
// then row-major float32 little-endian. Writes are atomic (temp + rename).
void save_features(const std::string& path, const std::vector<Vec>& rows);

// Text form: first line "d=<int>", then one comma-separated row per line.
void save_features_csv(const std::string& path, const std::vector<Vec>& rows);

// Reads either format, sniffed by the leading magic bytes.
std::vector<Vec> load_features(const std::string& path);

}  // namespace wpfm
