#include <doctest.h>

#include <cmath>

#include "wpfm/errors.hpp"
#include "wpfm/rng.hpp"

using namespace wpfm;

namespace {

// Modified Bessel function of the first kind by its power series, with terms
// accumulated recursively so large arguments never overflow.
double bessel_i(double nu, double x) {
  double term = std::pow(x / 2.0, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  for (int m = 0; m < 600; ++m) {
    term *= (x / 2.0) * (x / 2.0) / ((m + 1.0) * (m + nu + 1.0));
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

// Expected mean resultant length of a von Mises-Fisher distribution on the
// unit sphere in R^d.
double vmf_mean_resultant(int d, double kappa) {
  return bessel_i(d / 2.0, kappa) / bessel_i(d / 2.0 - 1.0, kappa);
}

}  // namespace

TEST_CASE("bessel series matches the closed form in three dimensions") {
  // For d = 3 the mean resultant length reduces to coth(k) - 1/k.
  for (double k : {0.5, 1.0, 4.0, 10.0, 100.0}) {
    double closed = 1.0 / std::tanh(k) - 1.0 / k;
    CHECK(vmf_mean_resultant(3, k) == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("same seed reproduces the stream, different seeds diverge") {
  Rng a(123), b(123), c(124);
  bool all_same = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    double ua = a.uniform01(), ub = b.uniform01(), uc = c.uniform01();
    all_same = all_same && ua == ub;
    any_diff = any_diff || ua != uc;
  }
  CHECK(all_same);
  CHECK(any_diff);

  Rng d(55), e(55);
  for (int i = 0; i < 100; ++i) {
    CHECK(d.normal() == e.normal());
    CHECK(d.gamma(2.5) == e.gamma(2.5));
  }
}

TEST_CASE("derive_seed separates stream tags") {
  uint64_t base = 42;
  CHECK(derive_seed(base, 1) != derive_seed(base, 2));
  CHECK(derive_seed(base, 1) != derive_seed(base + 1, 1));
  CHECK(derive_seed(base, 3) == derive_seed(base, 3));
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
  Rng rng(9);
  for (int i = 0; i < 100000; ++i) {
    double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("uniform_index covers the range uniformly") {
  Rng rng(10);
  const size_t n = 7;
  std::vector<int> counts(n, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    size_t k = rng.uniform_index(n);
    REQUIRE(k < n);
    counts[k]++;
  }
  for (int c : counts) {
    CHECK(std::fabs(c - draws / double(n)) < 5.0 * std::sqrt(draws / double(n)));
  }
}

TEST_CASE("normal moments") {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(std::fabs(var - 1.0) < 0.015);
}

TEST_CASE("gamma moments across shape regimes") {
  Rng rng(12);
  const int n = 200000;
  for (double shape : {0.5, 1.0, 3.5}) {
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = rng.gamma(shape);
      REQUIRE(x >= 0.0);
      sum += x;
      sum2 += x * x;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    // Both mean and variance of Gamma(shape, 1) equal the shape.
    double se_mean = std::sqrt(shape / n);
    CAPTURE(shape);
    CHECK(std::fabs(mean - shape) < 6.0 * se_mean);
    CHECK(std::fabs(var - shape) < 0.15 * (1.0 + shape));
  }
}

TEST_CASE("beta moments") {
  Rng rng(13);
  const int n = 200000;
  double a = 2.0, b = 2.0;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = rng.beta(a, b);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    sum += x;
    sum2 += x * x;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean - 0.5) < 0.005);
  CHECK(std::fabs(var - 0.05) < 0.003);
}

TEST_CASE("shuffle is a permutation and is deterministic") {
  Rng a(77), b(77);
  std::vector<int> xs(100), ys(100);
  for (int i = 0; i < 100; ++i) xs[i] = ys[i] = i;
  a.shuffle(xs);
  b.shuffle(ys);
  CHECK(xs == ys);
  std::vector<int> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) CHECK(sorted[i] == i);
  CHECK(xs != sorted);  // astronomically unlikely to be identity
}

TEST_CASE("uniform sphere samples are unit and centered") {
  Rng rng(14);
  const int n = 20000;
  const size_t d = 3;
  Vec mean(d, 0.0);
  for (int i = 0; i < n; ++i) {
    Vec x = sample_uniform_sphere(rng, d);
    REQUIRE(std::fabs(norm2(x) - 1.0) < 1e-12);
    for (size_t k = 0; k < d; ++k) mean[k] += x[k] / n;
  }
  CHECK(norm2(mean) < 0.03);
}

TEST_CASE("vMF mean resultant length matches the Bessel ratio") {
  const int n = 100000;
  int case_id = 0;
  for (int d : {3, 8}) {
    for (double kappa : {1.0, 10.0, 100.0}) {
      Rng rng(1000 + case_id++);
      Vec mu = sample_uniform_sphere(rng, static_cast<size_t>(d));
      Vec sum(static_cast<size_t>(d), 0.0);
      for (int i = 0; i < n; ++i) {
        Vec x = sample_vmf(rng, mu, kappa);
        REQUIRE(std::fabs(norm2(x) - 1.0) < 1e-12);
        for (int k = 0; k < d; ++k) sum[k] += x[k];
      }
      double rbar = norm2(sum) / n;
      double expect = vmf_mean_resultant(d, kappa);
      CAPTURE(d);
      CAPTURE(kappa);
      CHECK(std::fabs(rbar - expect) < 0.02);
      // The resultant should point along mu.
      Vec dir = scaled(sum, 1.0 / norm2(sum));
      CHECK(unit_angle(dir, mu) < 0.1);
    }
  }
}

TEST_CASE("vMF with zero concentration reduces to the uniform sphere") {
  Rng rng(15);
  Vec mu{0.0, 0.0, 1.0};
  const int n = 20000;
  Vec sum(3, 0.0);
  for (int i = 0; i < n; ++i) {
    Vec x = sample_vmf(rng, mu, 0.0);
    for (int k = 0; k < 3; ++k) sum[k] += x[k] / n;
  }
  CHECK(norm2(sum) < 0.03);
}

TEST_CASE("vMF validates its inputs") {
  Rng rng(16);
  Vec mu{2.0, 0.0};
  CHECK_THROWS_AS(sample_vmf(rng, mu, 1.0), DegenerateInput);
  Vec mu1{1.0, 0.0};
  CHECK_THROWS_AS(sample_vmf(rng, mu1, -1.0), DegenerateInput);
}
