#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "wpfm/vec_math.hpp"

namespace wpfm {

// Deterministic random source. All distributions are implemented by hand on
// top of the raw mt19937_64 stream, so output is bit-identical across
// standard libraries and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) by rejection.
  uint64_t uniform_index(uint64_t n);

  // Standard normal via Box-Muller. No caching: two uniforms per draw.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze, with the power boost for
  // shape < 1.
  double gamma(double shape);

  double beta(double a, double b);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// Stream derivation: mixes a tag into a base seed so independent consumers
// (class means, train draws, holdout draws) get decorrelated streams.
uint64_t derive_seed(uint64_t base, uint64_t tag);

// Uniform direction on the unit sphere in R^d.
Vec sample_uniform_sphere(Rng& rng, int d);

// von Mises-Fisher draw about mean_dir (unit length) with concentration
// kappa >= 0, by the Wood rejection scheme on the cosine coordinate.
Vec sample_vmf(Rng& rng, std::span<const double> mean_dir, double kappa);

}  // namespace wpfm
