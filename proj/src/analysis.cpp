#include "wpfm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wpfm/errors.hpp"

namespace wpfm {

namespace {

// Linearly interpolated quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double pos = q * static_cast<double>(n - 1);
  size_t lo = static_cast<size_t>(pos);
  if (lo >= n - 1) return sorted[n - 1];
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

SpeedProfile angular_speed_profile(const GeodesicPath& path, int n_grid) {
  if (n_grid < 3) {
    throw DegenerateInput("angular_speed_profile: n_grid must be >= 3");
  }
  size_t n = static_cast<size_t>(n_grid);
  double h = 1.0 / static_cast<double>(n - 1);

  std::vector<Vec> dirs(n);
  SpeedProfile prof;
  prof.t.resize(n);
  prof.radius.resize(n);
  prof.omega.resize(n);
  for (size_t i = 0; i < n; ++i) {
    prof.t[i] = static_cast<double>(i) * h;
    PolarPoint p = path.evaluate(prof.t[i]);
    prof.radius[i] = p.r;
    dirs[i] = std::move(p.theta);
  }

  prof.omega[0] = unit_angle(dirs[0], dirs[1]) / h;
  prof.omega[n - 1] = unit_angle(dirs[n - 2], dirs[n - 1]) / h;
  for (size_t i = 1; i + 1 < n; ++i) {
    prof.omega[i] = unit_angle(dirs[i - 1], dirs[i + 1]) / (2.0 * h);
  }

  double mean = 0.0;
  for (double w : prof.omega) mean += w;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double w : prof.omega) var += (w - mean) * (w - mean);
  var /= static_cast<double>(n);
  prof.omega_mean = mean;
  prof.omega_cv = mean > 1e-300 ? std::sqrt(var) / mean : 0.0;
  return prof;
}

namespace {

struct PlaneIvpState {
  double r, rd, a, ad;
};

// Geodesic flow restricted to the plane of motion: r'' = w w' a'^2,
// a'' = -2 (w'/w) r' a'.
PlaneIvpState integrate_plane_geodesic(const WarpFunction& warp,
                                       PlaneIvpState y, double span,
                                       int substeps) {
  auto rhs = [&](const PlaneIvpState& s) {
    PlaneIvpState d;
    double w = warp.value(s.r);
    double wd = warp.derivative(s.r);
    d.r = s.rd;
    d.rd = w * wd * s.ad * s.ad;
    d.a = s.ad;
    d.ad = -2.0 * (wd / w) * s.rd * s.ad;
    return d;
  };
  double h = span / substeps;
  for (int i = 0; i < substeps; ++i) {
    PlaneIvpState k1 = rhs(y);
    PlaneIvpState y2{y.r + 0.5 * h * k1.r, y.rd + 0.5 * h * k1.rd,
                     y.a + 0.5 * h * k1.a, y.ad + 0.5 * h * k1.ad};
    PlaneIvpState k2 = rhs(y2);
    PlaneIvpState y3{y.r + 0.5 * h * k2.r, y.rd + 0.5 * h * k2.rd,
                     y.a + 0.5 * h * k2.a, y.ad + 0.5 * h * k2.ad};
    PlaneIvpState k3 = rhs(y3);
    PlaneIvpState y4{y.r + h * k3.r, y.rd + h * k3.rd, y.a + h * k3.a,
                     y.ad + h * k3.ad};
    PlaneIvpState k4 = rhs(y4);
    y.r += h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
    y.rd += h / 6.0 * (k1.rd + 2.0 * k2.rd + 2.0 * k3.rd + k4.rd);
    y.a += h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    y.ad += h / 6.0 * (k1.ad + 2.0 * k2.ad + 2.0 * k3.ad + k4.ad);
    if (!std::isfinite(y.r) || !std::isfinite(y.ad)) {
      throw NonFiniteState("truncation oracle: state diverged");
    }
  }
  return y;
}

}  // namespace

TruncationReport truncation_study(const WarpFunction& warp,
                                  const PolarPoint& p0, const PolarPoint& p1,
                                  std::span<const double> dt_values,
                                  const TruncationOptions& opts) {
  if (dt_values.empty()) {
    throw DegenerateInput("truncation_study: no dt values");
  }
  for (size_t i = 0; i < dt_values.size(); ++i) {
    if (!(dt_values[i] > 0.0)) {
      throw DegenerateInput("truncation_study: dt values must be positive");
    }
    if (i > 0 && !(dt_values[i] < dt_values[i - 1])) {
      throw DegenerateInput(
          "truncation_study: dt values must be strictly decreasing");
    }
  }
  if (!(opts.t0 > 0.0 && opts.t0 < 1.0)) {
    throw DegenerateInput("truncation_study: t0 must lie in (0, 1)");
  }
  if (opts.t0 + dt_values[0] > 1.0 + 1e-12) {
    throw DegenerateInput("truncation_study: t0 + max(dt) exceeds 1");
  }

  TruncationReport report;
  report.dt.assign(dt_values.begin(), dt_values.end());
  report.error.resize(dt_values.size());

  if (warp.kind() == WarpFunction::Kind::Constant) {
    GeodesicPath path = dual_geodesic(p0, p1);
    PolarPoint base = path.evaluate(opts.t0);
    TangentVector vel = path.velocity(opts.t0);
    report.coefficient = std::fabs(warp.derivative(base.r) /
                                   warp.value(base.r) * vel.v_rad) *
                         norm2(vel.v_ang);
    for (size_t i = 0; i < report.dt.size(); ++i) {
      PolarPoint stepped = exp_map(base, vel, report.dt[i]);
      PolarPoint truth = path.evaluate(opts.t0 + report.dt[i]);
      report.error[i] = unit_angle(stepped.theta, truth.theta);
    }
  } else {
    GeodesicPath path = general_warp_geodesic(p0, p1, warp, opts.bvp_grid);
    PolarPoint base = path.evaluate(opts.t0);
    TangentVector vel = path.velocity(opts.t0);
    PlaneState st = path.plane_state(opts.t0);
    auto [e1, e2] = path.plane_basis();
    report.coefficient =
        std::fabs(warp.derivative(st.r) / warp.value(st.r) * st.r_dot) *
        std::fabs(st.angle_rate);
    for (size_t i = 0; i < report.dt.size(); ++i) {
      PolarPoint stepped = exp_map(base, vel, report.dt[i]);
      PlaneIvpState y{st.r, st.r_dot, st.angle, st.angle_rate};
      PlaneIvpState end = integrate_plane_geodesic(warp, y, report.dt[i],
                                                   opts.oracle_substeps);
      Vec truth = scaled(e1, std::cos(end.a));
      axpy(std::sin(end.a), e2, truth);
      report.error[i] = unit_angle(stepped.theta, truth);
    }
  }

  // Log-log slope over points above the noise floor.
  const double floor = 10.0 * std::numeric_limits<double>::epsilon();
  std::vector<double> lx, ly;
  for (size_t i = 0; i < report.dt.size(); ++i) {
    if (report.error[i] > floor) {
      lx.push_back(std::log(report.dt[i]));
      ly.push_back(std::log(report.error[i]));
    }
  }
  report.n_fit = lx.size();
  if (lx.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    report.slope = sxy / sxx;
  } else {
    report.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

GroupStats radial_stats(const std::string& label,
                        const std::vector<Vec>& rows) {
  if (rows.empty()) {
    throw EmptyGroup("radial_stats: group '" + label + "' is empty");
  }
  std::vector<double> norms;
  norms.reserve(rows.size());
  for (const Vec& r : rows) norms.push_back(norm2(r));
  std::sort(norms.begin(), norms.end());

  GroupStats gs;
  gs.label = label;
  gs.count = norms.size();
  double mean = 0.0;
  for (double v : norms) mean += v;
  mean /= static_cast<double>(norms.size());
  double var = 0.0;
  for (double v : norms) var += (v - mean) * (v - mean);
  var /= static_cast<double>(norms.size());
  gs.mean = mean;
  gs.stddev = std::sqrt(var);
  gs.min = norms.front();
  gs.max = norms.back();
  gs.q1 = quantile_sorted(norms, 0.25);
  gs.median = quantile_sorted(norms, 0.5);
  gs.q3 = quantile_sorted(norms, 0.75);
  return gs;
}

}  // namespace wpfm
