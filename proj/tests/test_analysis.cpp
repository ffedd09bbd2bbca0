#include <doctest.h>

#include <cmath>

#include "wpfm/analysis.hpp"
#include "wpfm/errors.hpp"

using namespace wpfm;

namespace {

constexpr double kPi = 3.14159265358979323846;

PolarPoint make_point(double r, Vec theta) {
  double n = norm2(theta);
  for (double& c : theta) c /= n;
  PolarPoint p;
  p.r = r;
  p.theta = std::move(theta);
  return p;
}

}  // namespace

TEST_CASE("dual path has uniform angular speed") {
  PolarPoint p0 = make_point(1.0, {1.0, 0.0, 0.0});
  PolarPoint p1 = make_point(2.0, {0.0, 1.0, 0.5});
  GeodesicPath path = dual_geodesic(p0, p1);
  SpeedProfile prof = angular_speed_profile(path, 1001);
  CHECK(prof.omega_mean == doctest::Approx(path.alpha()).epsilon(1e-10));
  CHECK(prof.omega_cv < 1e-12);
}

TEST_CASE("right-angle chord doubles its angular speed at the midpoint") {
  PolarPoint p0 = make_point(1.0, {1.0, 0.0});
  PolarPoint p1 = make_point(1.0, {0.0, 1.0});
  GeodesicPath path = euclidean_chord(p0, p1, true);
  SpeedProfile prof = angular_speed_profile(path, 2001);

  REQUIRE(prof.omega.size() == 2001);
  CHECK(prof.omega.front() == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(prof.omega[1000] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(prof.omega[1000] / prof.omega.front() ==
        doctest::Approx(2.0).epsilon(0.01));
  // Peak speed coincides with the closest approach to the origin.
  size_t argmax = 0, argmin_r = 0;
  for (size_t i = 0; i < prof.omega.size(); ++i) {
    if (prof.omega[i] > prof.omega[argmax]) argmax = i;
    if (prof.radius[i] < prof.radius[argmin_r]) argmin_r = i;
  }
  CHECK(argmax == argmin_r);
  CHECK(prof.radius[argmin_r] ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-9));
  // Speed is visibly non-uniform.
  CHECK(prof.omega_cv > 0.1);
}

TEST_CASE("purely radial paths report zero angular variation") {
  PolarPoint p0 = make_point(1.0, {0.0, 1.0});
  PolarPoint p1 = make_point(3.0, {0.0, 1.0});
  GeodesicPath path = dual_geodesic(p0, p1);
  SpeedProfile prof = angular_speed_profile(path, 101);
  CHECK(prof.omega_mean < 1e-12);
  CHECK(prof.omega_cv == 0.0);
}

TEST_CASE("angular_speed_profile validates the grid") {
  PolarPoint p0 = make_point(1.0, {1.0, 0.0});
  PolarPoint p1 = make_point(1.0, {0.0, 1.0});
  GeodesicPath path = dual_geodesic(p0, p1);
  CHECK_THROWS_AS(angular_speed_profile(path, 2), DegenerateInput);
}

TEST_CASE("truncation error shrinks quadratically for a varying warp") {
  PolarPoint p0 = make_point(1.5, {1.0, 0.0, 0.0});
  PolarPoint p1 = make_point(0.5, {std::cos(1.0), std::sin(1.0), 0.0});
  std::vector<double> dts{1e-1, std::pow(10.0, -1.5), 1e-2,
                          std::pow(10.0, -2.5), 1e-3};
  for (const char* name : {"euclidean", "hyperbolic"}) {
    WarpFunction warp = WarpFunction::parse(name);
    TruncationReport rep = truncation_study(warp, p0, p1, dts);
    CAPTURE(name);
    REQUIRE(rep.n_fit >= 4);
    CHECK(rep.slope > 1.9);
    CHECK(rep.slope < 2.1);
    CHECK(rep.coefficient > 0.0);
    for (size_t i = 1; i < rep.error.size(); ++i) {
      CHECK(rep.error[i] < rep.error[i - 1]);
    }
  }
}

TEST_CASE("constant warp kills the truncation error entirely") {
  PolarPoint p0 = make_point(1.5, {1.0, 0.0, 0.0});
  PolarPoint p1 = make_point(0.5, {std::cos(1.0), std::sin(1.0), 0.0});
  std::vector<double> dts{1e-1, 1e-2, 1e-3};
  TruncationReport rep = truncation_study(WarpFunction::constant(25.0), p0, p1, dts);
  CHECK(rep.coefficient == 0.0);
  for (double e : rep.error) CHECK(e < 1e-10);
}

TEST_CASE("radially symmetric state collapses the quadratic coefficient") {
  // Equal radii and expansion at the midpoint: the radial velocity vanishes
  // there, so the predicted coefficient drops to solver noise and the actual
  // one-step error falls by an order of magnitude.
  PolarPoint p0 = make_point(1.0, {1.0, 0.0, 0.0});
  PolarPoint p1 = make_point(1.0, {std::cos(1.0), std::sin(1.0), 0.0});
  std::vector<double> dts{1e-2};
  TruncationOptions opts;
  opts.t0 = 0.5;
  WarpFunction warp = WarpFunction::euclidean();
  TruncationReport sym = truncation_study(warp, p0, p1, dts, opts);

  PolarPoint q0 = make_point(1.5, {1.0, 0.0, 0.0});
  PolarPoint q1 = make_point(0.5, {std::cos(1.0), std::sin(1.0), 0.0});
  TruncationOptions asym_opts;
  asym_opts.t0 = 0.3;
  TruncationReport asym = truncation_study(warp, q0, q1, dts, asym_opts);

  CHECK(sym.coefficient < 1e-6);
  CHECK(asym.coefficient > 0.1);
  CHECK(sym.error[0] * 10.0 < asym.error[0]);
}

TEST_CASE("truncation_study validates the dt ladder") {
  PolarPoint p0 = make_point(1.0, {1.0, 0.0});
  PolarPoint p1 = make_point(1.0, {0.0, 1.0});
  WarpFunction warp = WarpFunction::euclidean();
  std::vector<double> increasing{1e-3, 1e-2};
  CHECK_THROWS_AS(truncation_study(warp, p0, p1, increasing), DegenerateInput);
  std::vector<double> with_zero{1e-2, 0.0};
  CHECK_THROWS_AS(truncation_study(warp, p0, p1, with_zero), DegenerateInput);
  std::vector<double> ok{1e-2, 1e-3};
  TruncationOptions bad;
  bad.t0 = 1.5;
  CHECK_THROWS_AS(truncation_study(warp, p0, p1, ok, bad), DegenerateInput);
  TruncationOptions crowd;
  crowd.t0 = 0.95;
  std::vector<double> wide{0.2, 0.1};
  CHECK_THROWS_AS(truncation_study(warp, p0, p1, wide, crowd), DegenerateInput);
}

TEST_CASE("radial stats summarize the norm distribution") {
  std::vector<Vec> rows;
  for (double r : {3.0, 1.0, 5.0, 2.0, 4.0}) {
    rows.push_back(Vec{r, 0.0});
  }
  GroupStats st = radial_stats("demo", rows);
  CHECK(st.label == "demo");
  CHECK(st.count == 5);
  CHECK(st.mean == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(st.stddev == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(st.min == doctest::Approx(1.0));
  CHECK(st.q1 == doctest::Approx(2.0));
  CHECK(st.median == doctest::Approx(3.0));
  CHECK(st.q3 == doctest::Approx(4.0));
  CHECK(st.max == doctest::Approx(5.0));

  // Interpolated quantiles on four values.
  std::vector<Vec> four;
  for (double r : {1.0, 2.0, 3.0, 4.0}) four.push_back(Vec{0.0, r});
  GroupStats st4 = radial_stats("four", four);
  CHECK(st4.q1 == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(st4.median == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(st4.q3 == doctest::Approx(3.25).epsilon(1e-15));

  CHECK_THROWS_AS(radial_stats("empty", {}), EmptyGroup);
}
