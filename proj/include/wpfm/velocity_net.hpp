#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wpfm/vec_math.hpp"

namespace wpfm {

// Conditioning input: either absent (the learned null token is used) or a
// vector of length c_dim.
using Condition = std::optional<Vec>;

struct NetConfig {
  int d = 16;
  int c_dim = 16;
  int t_embed_dim = 32;  // even; sin/cos pairs on a geometric frequency ladder
  int c_embed_dim = 32;
  std::vector<int> hidden = {256, 256};
};

// One named parameter tensor. rows x cols for matrices, cols = 0 for vectors.
struct ParamBlock {
  std::string name;
  int rows = 0;
  int cols = 0;
  double* data = nullptr;
  size_t size = 0;
};

struct GradBuffer {
  Vec flat;
};

// MLP velocity field v(x, t, c) with SiLU hidden activations and a linear,
// zero-initialized output layer. Input is the concatenation of x, sinusoidal
// time features, and an embedded condition (learned token when c is absent).
// Forward and backward are hand written; backward consumes a cache recorded
// by forward_cached and rejects caches older than the last parameter update.
class VelocityField {
 public:
  VelocityField(const NetConfig& config, uint64_t seed);

  const NetConfig& config() const { return config_; }
  uint64_t version() const { return version_; }
  size_t param_count() const { return param_count_; }

  struct ForwardCache {
    uint64_t version = 0;
    bool valid = false;
    bool null_condition = false;
    Vec c_raw;
    Vec input;
    std::vector<Vec> pre;  // pre-activation per layer
    std::vector<Vec> act;  // post-activation per layer (last = output)
  };

  Vec forward(std::span<const double> x, double t, const Condition& c) const;
  Vec forward_cached(std::span<const double> x, double t, const Condition& c,
                     ForwardCache& cache) const;

  // d(loss)/d(parameters) given d(loss)/d(output). Accumulates into grad,
  // which must be zero-filled or hold a partial batch sum of matching size.
  void backward(const ForwardCache& cache, std::span<const double> grad_out,
                GradBuffer& grad) const;

  GradBuffer zero_grad() const { return GradBuffer{Vec(param_count_, 0.0)}; }

  // Mutable views in declaration order: per layer W then b, then the
  // condition projection W_c, b_c, then the null token. Checkpoint and
  // optimizer order.
  std::vector<ParamBlock> param_blocks();

  struct BlockShape {
    std::string name;
    int rows = 0, cols = 0;
    size_t size = 0;
  };
  std::vector<BlockShape> block_shapes() const;

  Vec params_flat() const;
  void set_params_flat(std::span<const double> flat);
  void bump_version() { ++version_; }

 private:
  struct Linear {
    int in = 0, out = 0;
    Vec W;  // row-major out x in
    Vec b;
  };

  Vec build_input(std::span<const double> x, double t, const Condition& c,
                  bool* null_condition, Vec* c_raw) const;

  NetConfig config_;
  std::vector<Linear> layers_;  // hidden layers plus final linear
  Linear cond_proj_;            // c_embed_dim x c_dim
  Vec null_token_;
  std::vector<double> freqs_;
  uint64_t version_ = 0;
  size_t param_count_ = 0;
};

struct AdamWConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Decoupled weight decay variant: the decay term multiplies the parameter
// directly and is not part of the moment estimates.
class AdamW {
 public:
  AdamW(size_t param_count, const AdamWConfig& config);

  void step(VelocityField& net, const GradBuffer& grad);
  uint64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }

 private:
  AdamWConfig config_;
  Vec m_, v_;
  uint64_t step_ = 0;
};

}  // namespace wpfm
