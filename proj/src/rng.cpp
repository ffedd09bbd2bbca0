#include "wpfm/rng.hpp"

#include <cmath>

#include "wpfm/errors.hpp"

namespace wpfm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

uint64_t Rng::uniform_index(uint64_t n) {
  if (n == 0) throw DegenerateInput("uniform_index: n must be positive");
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  double u1;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double Rng::gamma(double shape) {
  if (shape <= 0.0) throw DegenerateInput("gamma: shape must be positive");
  if (shape < 1.0) {
    double u;
    do {
      u = uniform01();
    } while (u <= 0.0);
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

double Rng::beta(double a, double b) {
  double x = gamma(a);
  double y = gamma(b);
  return x / (x + y);
}

uint64_t derive_seed(uint64_t base, uint64_t tag) {
  // splitmix64 finalizer over the combined value
  uint64_t z = base + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Vec sample_uniform_sphere(Rng& rng, int d) {
  if (d < 2) throw DegenerateInput("sample_uniform_sphere: d must be >= 2");
  Vec v(static_cast<size_t>(d));
  for (;;) {
    for (double& x : v) x = rng.normal();
    double n = norm2(v);
    if (n > 1e-12) {
      for (double& x : v) x /= n;
      return v;
    }
  }
}

Vec sample_vmf(Rng& rng, std::span<const double> mean_dir, double kappa) {
  int d = static_cast<int>(mean_dir.size());
  if (d < 2) throw DegenerateInput("sample_vmf: dimension must be >= 2");
  if (kappa < 0.0) throw DegenerateInput("sample_vmf: kappa must be >= 0");
  if (std::fabs(norm2(mean_dir) - 1.0) > 1e-6) {
    throw DegenerateInput("sample_vmf: mean direction is not unit length");
  }
  if (kappa == 0.0) return sample_uniform_sphere(rng, d);

  double dim = static_cast<double>(d - 1);
  double b = dim / (std::sqrt(4.0 * kappa * kappa + dim * dim) + 2.0 * kappa);
  double x0 = (1.0 - b) / (1.0 + b);
  double c = kappa * x0 + dim * std::log(1.0 - x0 * x0);

  double w;
  for (;;) {
    double z = rng.beta(0.5 * dim, 0.5 * dim);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    double u;
    do {
      u = rng.uniform01();
    } while (u <= 0.0);
    if (kappa * w + dim * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }

  // Tangent direction orthogonal to the mean, then lift by the sampled cosine.
  Vec tang;
  double tn = 0.0;
  do {
    tang = sample_uniform_sphere(rng, d);
    double proj = dot(tang, mean_dir);
    axpy(-proj, mean_dir, tang);
    tn = norm2(tang);
  } while (tn < 1e-12);
  for (double& x : tang) x /= tn;

  double s = std::sqrt(std::fmax(0.0, 1.0 - w * w));
  Vec out(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    out[static_cast<size_t>(i)] =
        w * mean_dir[static_cast<size_t>(i)] + s * tang[static_cast<size_t>(i)];
  }
  double n = norm2(out);
  for (double& x : out) x /= n;
  return out;
}

}  // namespace wpfm
