#include "wpfm/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wpfm/errors.hpp"

namespace wpfm {

namespace detail {

struct NumericDense {
  WarpFunction warp = WarpFunction::euclidean();
  Vec e1, e2;
  bool radial = false;  // separation below kEpsSmallAngle: direction fixed
  // Node data over t in [0, 1]; nodes are nonuniform in t because the time
  // map is arclength divided by total length.
  std::vector<double> t, r, rd, rdd, a, ad, add;
};

namespace {

// Two-point quintic Hermite basis on [0, 1]; interpolates value, first and
// second derivative at both ends.
double quintic_value(double f0, double d0, double s0, double f1, double d1,
                     double s1, double h, double u) {
  double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
  double h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
  double h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
  double h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
  double h3 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
  double h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
  double h5 = 0.5 * (u3 - 2.0 * u4 + u5);
  return f0 * h0 + h * d0 * h1 + h * h * s0 * h2 + f1 * h3 + h * d1 * h4 +
         h * h * s1 * h5;
}

double quintic_deriv(double f0, double d0, double s0, double f1, double d1,
                     double s1, double h, double u) {
  double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
  double g0 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
  double g1 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
  double g2 = u - 4.5 * u2 + 6.0 * u3 - 2.5 * u4;
  double g3 = 30.0 * u2 - 60.0 * u3 + 30.0 * u4;
  double g4 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
  double g5 = 1.5 * u2 - 4.0 * u3 + 2.5 * u4;
  return (f0 * g0 + h * d0 * g1 + h * h * s0 * g2 + f1 * g3 + h * d1 * g4 +
          h * h * s1 * g5) /
         h;
}

size_t find_segment(const std::vector<double>& nodes, double t) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  size_t i = static_cast<size_t>(it - nodes.begin());
  if (i == 0) return 0;
  if (i >= nodes.size()) return nodes.size() - 2;
  return i - 1;
}

}  // namespace
}  // namespace detail

namespace {

void validate_endpoint(const PolarPoint& p, const char* where) {
  if (!(p.r > kEpsNorm) || !std::isfinite(p.r) || !all_finite(p.theta)) {
    throw DegenerateInput(std::string(where) + ": invalid endpoint radius");
  }
  double n = norm2(p.theta);
  if (std::fabs(n - 1.0) > 1e-6) {
    throw DegenerateInput(std::string(where) +
                          ": endpoint direction is not unit length");
  }
}

constexpr double kPi = 3.14159265358979323846;

double separation_or_throw(const PolarPoint& p0, const PolarPoint& p1,
                           const char* where) {
  check_same_dim(p0.theta, p1.theta, where);
  double alpha = unit_angle(p0.theta, p1.theta);
  if (alpha >= kPi - kEpsAntipodal) {
    throw AntipodalEndpoints(std::string(where) +
                             ": endpoint directions are antipodal");
  }
  return alpha;
}

// Direction interpolation by normalized linear blend, used below the small
// angle threshold where the arc form loses precision.
Vec nlerp_dir(const Vec& t0, const Vec& t1, double t) {
  Vec x = scaled(t0, 1.0 - t);
  axpy(t, t1, x);
  double n = norm2(x);
  for (double& v : x) v /= n;
  return x;
}

}  // namespace

PolarPoint GeodesicPath::evaluate(double t) const {
  PolarPoint out;
  switch (kind_) {
    case GeodesicKind::DualGeodesic: {
      out.r = (1.0 - t) * p0_.r + t * p1_.r;
      if (alpha_ >= kEpsSmallAngle) {
        double sa = std::sin(alpha_);
        out.theta = scaled(p0_.theta, std::sin((1.0 - t) * alpha_) / sa);
        axpy(std::sin(t * alpha_) / sa, p1_.theta, out.theta);
        double n = norm2(out.theta);
        for (double& v : out.theta) v /= n;
      } else {
        out.theta = nlerp_dir(p0_.theta, p1_.theta, t);
      }
      return out;
    }
    case GeodesicKind::EuclideanChord: {
      Vec x = scaled(chord_x0_, 1.0 - t);
      axpy(t, chord_x1_, x);
      return polar_decompose(x);
    }
    case GeodesicKind::NumericalWarp: {
      const auto& d = *dense_;
      if (d.radial) {
        out.r = (1.0 - t) * p0_.r + t * p1_.r;
        out.theta = p0_.theta;
        return out;
      }
      size_t i = detail::find_segment(d.t, t);
      double h = d.t[i + 1] - d.t[i];
      double u = (t - d.t[i]) / h;
      out.r = detail::quintic_value(d.r[i], d.rd[i], d.rdd[i], d.r[i + 1],
                                    d.rd[i + 1], d.rdd[i + 1], h, u);
      double a = detail::quintic_value(d.a[i], d.ad[i], d.add[i], d.a[i + 1],
                                       d.ad[i + 1], d.add[i + 1], h, u);
      out.theta = scaled(d.e1, std::cos(a));
      axpy(std::sin(a), d.e2, out.theta);
      return out;
    }
  }
  throw WrongKind("GeodesicPath::evaluate: unknown kind");
}

TangentVector GeodesicPath::velocity(double t) const {
  TangentVector tv;
  switch (kind_) {
    case GeodesicKind::DualGeodesic: {
      tv.v_rad = p1_.r - p0_.r;
      if (alpha_ >= kEpsSmallAngle) {
        double sa = std::sin(alpha_);
        tv.v_ang =
            scaled(p0_.theta, -alpha_ * std::cos((1.0 - t) * alpha_) / sa);
        axpy(alpha_ * std::cos(t * alpha_) / sa, p1_.theta, tv.v_ang);
      } else {
        Vec x = scaled(p0_.theta, 1.0 - t);
        axpy(t, p1_.theta, x);
        double n = norm2(x);
        Vec dir = scaled(x, 1.0 / n);
        tv.v_ang = sub(p1_.theta, p0_.theta);
        double proj = dot(tv.v_ang, dir);
        axpy(-proj, dir, tv.v_ang);
        for (double& v : tv.v_ang) v /= n;
      }
      return tv;
    }
    case GeodesicKind::EuclideanChord: {
      Vec dx = sub(chord_x1_, chord_x0_);
      return project_to_tangent(dx, evaluate(t));
    }
    case GeodesicKind::NumericalWarp: {
      const auto& d = *dense_;
      if (d.radial) {
        tv.v_rad = p1_.r - p0_.r;
        tv.v_ang.assign(p0_.theta.size(), 0.0);
        return tv;
      }
      size_t i = detail::find_segment(d.t, t);
      double h = d.t[i + 1] - d.t[i];
      double u = (t - d.t[i]) / h;
      tv.v_rad = detail::quintic_deriv(d.r[i], d.rd[i], d.rdd[i], d.r[i + 1],
                                       d.rd[i + 1], d.rdd[i + 1], h, u);
      double a = detail::quintic_value(d.a[i], d.ad[i], d.add[i], d.a[i + 1],
                                       d.ad[i + 1], d.add[i + 1], h, u);
      double ad = detail::quintic_deriv(d.a[i], d.ad[i], d.add[i], d.a[i + 1],
                                        d.ad[i + 1], d.add[i + 1], h, u);
      tv.v_ang = scaled(d.e1, -ad * std::sin(a));
      axpy(ad * std::cos(a), d.e2, tv.v_ang);
      return tv;
    }
  }
  throw WrongKind("GeodesicPath::velocity: unknown kind");
}

PlaneState GeodesicPath::plane_state(double t) const {
  if (kind_ != GeodesicKind::NumericalWarp) {
    throw WrongKind("plane_state: path is not a NumericalWarp geodesic");
  }
  const auto& d = *dense_;
  PlaneState st;
  if (d.radial) {
    st.r = (1.0 - t) * p0_.r + t * p1_.r;
    st.r_dot = p1_.r - p0_.r;
    return st;
  }
  size_t i = detail::find_segment(d.t, t);
  double h = d.t[i + 1] - d.t[i];
  double u = (t - d.t[i]) / h;
  st.r = detail::quintic_value(d.r[i], d.rd[i], d.rdd[i], d.r[i + 1],
                               d.rd[i + 1], d.rdd[i + 1], h, u);
  st.r_dot = detail::quintic_deriv(d.r[i], d.rd[i], d.rdd[i], d.r[i + 1],
                                   d.rd[i + 1], d.rdd[i + 1], h, u);
  st.angle = detail::quintic_value(d.a[i], d.ad[i], d.add[i], d.a[i + 1],
                                   d.ad[i + 1], d.add[i + 1], h, u);
  st.angle_rate = detail::quintic_deriv(d.a[i], d.ad[i], d.add[i], d.a[i + 1],
                                        d.ad[i + 1], d.add[i + 1], h, u);
  return st;
}

std::pair<Vec, Vec> GeodesicPath::plane_basis() const {
  if (kind_ != GeodesicKind::NumericalWarp) {
    throw WrongKind("plane_basis: path is not a NumericalWarp geodesic");
  }
  return {dense_->e1, dense_->e2};
}

const WarpFunction& GeodesicPath::warp() const {
  if (kind_ != GeodesicKind::NumericalWarp) {
    throw WrongKind("warp: path is not a NumericalWarp geodesic");
  }
  return dense_->warp;
}

GeodesicPath dual_geodesic(const PolarPoint& p0, const PolarPoint& p1) {
  validate_endpoint(p0, "dual_geodesic");
  validate_endpoint(p1, "dual_geodesic");
  GeodesicPath path;
  path.kind_ = GeodesicKind::DualGeodesic;
  path.alpha_ = separation_or_throw(p0, p1, "dual_geodesic");
  path.p0_ = p0;
  path.p1_ = p1;
  return path;
}

TangentVector dual_geodesic_velocity(const GeodesicPath& path, double t) {
  if (path.kind() != GeodesicKind::DualGeodesic) {
    throw WrongKind("dual_geodesic_velocity: path is not a DualGeodesic");
  }
  return path.velocity(t);
}

GeodesicPath euclidean_chord(const PolarPoint& p0, const PolarPoint& p1,
                             bool normalize_endpoints) {
  validate_endpoint(p0, "euclidean_chord");
  validate_endpoint(p1, "euclidean_chord");
  GeodesicPath path;
  path.kind_ = GeodesicKind::EuclideanChord;
  path.alpha_ = separation_or_throw(p0, p1, "euclidean_chord");
  path.p0_ = p0;
  path.p1_ = p1;
  if (normalize_endpoints) {
    path.chord_x0_ = p0.theta;
    path.chord_x1_ = p1.theta;
  } else {
    path.chord_x0_ = assemble(p0);
    path.chord_x1_ = assemble(p1);
  }
  return path;
}

namespace {

enum class OrbitStatus { Completed, CrashedLow, BlewUp };

struct OrbitSolution {
  OrbitStatus status = OrbitStatus::BlewUp;
  // Node arrays over the swept angle grid a_i = i * alpha / n.
  std::vector<double> u, up, s;
};

// Integrates the orbit equation u'' = w(u) w'(u) + 2 (w'(u)/w(u)) u'^2 over
// the swept angle, carrying arclength s with ds/da = sqrt(u'^2 + w(u)^2).
// Leaving the domain through the radius floor reports CrashedLow; exceeding
// the cap or losing finiteness reports BlewUp. The two outcomes steer the
// launch-angle bisection in opposite directions.
OrbitSolution integrate_orbit(const WarpFunction& warp, double r0,
                              double sigma, double alpha, int n,
                              double r_cap) {
  OrbitSolution sol;
  double floor_r = std::fmax(warp.min_radius(), kEpsNorm);
  sol.u.resize(static_cast<size_t>(n) + 1);
  sol.up.resize(static_cast<size_t>(n) + 1);
  sol.s.resize(static_cast<size_t>(n) + 1);
  sol.u[0] = r0;
  sol.up[0] = sigma;
  sol.s[0] = 0.0;

  struct State {
    double u, up, s;
  };
  auto classify = [&](const State& y) -> OrbitStatus {
    if (!(y.u > floor_r)) return OrbitStatus::CrashedLow;
    if (!(y.u < r_cap) || !std::isfinite(y.up)) return OrbitStatus::BlewUp;
    return OrbitStatus::Completed;
  };
  auto rhs = [&](const State& y, State& dy) -> bool {
    if (classify(y) != OrbitStatus::Completed) return false;
    double w = warp.value(y.u);
    double wd = warp.derivative(y.u);
    dy.u = y.up;
    dy.up = w * wd + 2.0 * (wd / w) * y.up * y.up;
    dy.s = std::sqrt(y.up * y.up + w * w);
    return true;
  };

  double h = alpha / n;
  State y{r0, sigma, 0.0};
  for (int i = 0; i < n; ++i) {
    State k1, k2, k3, k4, tmp;
    if (!rhs(y, k1)) {
      sol.status = classify(y);
      return sol;
    }
    tmp = {y.u + 0.5 * h * k1.u, y.up + 0.5 * h * k1.up, y.s + 0.5 * h * k1.s};
    if (!rhs(tmp, k2)) {
      sol.status = classify(tmp);
      return sol;
    }
    tmp = {y.u + 0.5 * h * k2.u, y.up + 0.5 * h * k2.up, y.s + 0.5 * h * k2.s};
    if (!rhs(tmp, k3)) {
      sol.status = classify(tmp);
      return sol;
    }
    tmp = {y.u + h * k3.u, y.up + h * k3.up, y.s + h * k3.s};
    if (!rhs(tmp, k4)) {
      sol.status = classify(tmp);
      return sol;
    }
    y.u += h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    y.up += h / 6.0 * (k1.up + 2.0 * k2.up + 2.0 * k3.up + k4.up);
    y.s += h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    if (classify(y) != OrbitStatus::Completed) {
      sol.status = classify(y);
      return sol;
    }
    size_t j = static_cast<size_t>(i) + 1;
    sol.u[j] = y.u;
    sol.up[j] = y.up;
    sol.s[j] = y.s;
  }
  sol.status = OrbitStatus::Completed;
  return sol;
}

}  // namespace

GeodesicPath general_warp_geodesic(const PolarPoint& p0, const PolarPoint& p1,
                                   const WarpFunction& warp, int n_grid) {
  validate_endpoint(p0, "general_warp_geodesic");
  validate_endpoint(p1, "general_warp_geodesic");
  if (n_grid < 4) {
    throw DegenerateInput("general_warp_geodesic: n_grid must be >= 4");
  }
  if (p0.r < warp.min_radius() || p1.r < warp.min_radius()) {
    throw RadialUnderflow(
        "general_warp_geodesic: endpoint radius below warp domain");
  }
  double alpha = separation_or_throw(p0, p1, "general_warp_geodesic");

  GeodesicPath path;
  path.kind_ = GeodesicKind::NumericalWarp;
  path.alpha_ = alpha;
  path.p0_ = p0;
  path.p1_ = p1;

  auto dense = std::make_shared<detail::NumericDense>();
  dense->warp = warp;
  dense->e1 = p0.theta;

  if (alpha < kEpsSmallAngle) {
    // Purely radial geodesic: r'' = 0, direction fixed.
    dense->radial = true;
    path.dense_ = std::move(dense);
    return path;
  }

  Vec e2 = p1.theta;
  double c = dot(e2, dense->e1);
  axpy(-c, dense->e1, e2);
  double n2 = norm2(e2);
  for (double& v : e2) v /= n2;
  dense->e2 = std::move(e2);

  // Shooting parameter is the launch angle psi in (0, pi) between the
  // initial tangent and the outward radial direction; the initial slope is
  // dr/da = w(r0) cot(psi). Compactifying the slope line keeps steep warps
  // (where the admissible slope window is far from the linear guess)
  // reachable. Endpoint radius is monotone-classified: an orbit that blows
  // up past the cap overshoots, one that crashes through the radius floor
  // undershoots, so bisection always holds a valid bracket.
  const double w0 = warp.value(p0.r);
  const double r_cap = 2.0 * (p0.r + p1.r) + 8.0 + 2.0 * alpha;
  const double tol = 1e-11 * (1.0 + std::fabs(p1.r));
  const double accept_tol = 1e-8 * (1.0 + std::fabs(p1.r));
  const int max_iters = 200;

  auto shoot = [&](double psi) -> OrbitSolution {
    double sigma = w0 * std::cos(psi) / std::sin(psi);
    return integrate_orbit(warp, p0.r, sigma, alpha, n_grid, r_cap);
  };

  double psi_lo = 1e-12;        // nearly outward: overshoots or blows up
  double psi_hi = kPi - 1e-12;  // nearly inward: crashes through the floor
  double psi_best = std::numeric_limits<double>::quiet_NaN();
  double f_best = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    double psi = 0.5 * (psi_lo + psi_hi);
    OrbitSolution s = shoot(psi);
    bool high;
    if (s.status == OrbitStatus::Completed) {
      double f = s.u.back() - p1.r;
      if (std::fabs(f) < f_best) {
        f_best = std::fabs(f);
        psi_best = psi;
      }
      if (std::fabs(f) < tol) break;
      high = f > 0.0;
    } else {
      high = s.status == OrbitStatus::BlewUp;
    }
    if (high) {
      psi_lo = psi;  // endpoint too far out: aim further inward
    } else {
      psi_hi = psi;
    }
    if (psi_hi - psi_lo < 1e-15) break;
  }
  if (!(f_best < accept_tol)) {
    throw NoConvergence(
        "general_warp_geodesic: endpoint residual " + std::to_string(f_best) +
        " above tolerance after launch-angle bisection");
  }

  OrbitSolution sol = shoot(psi_best);
  if (sol.status != OrbitStatus::Completed) {
    throw NoConvergence("general_warp_geodesic: accepted launch angle left "
                        "the radial domain");
  }

  size_t m = sol.u.size();
  double total = sol.s.back();
  dense->t.resize(m);
  dense->r.resize(m);
  dense->rd.resize(m);
  dense->rdd.resize(m);
  dense->a.resize(m);
  dense->ad.resize(m);
  dense->add.resize(m);
  for (size_t i = 0; i < m; ++i) {
    double ai = alpha * static_cast<double>(i) / n_grid;
    double w = warp.value(sol.u[i]);
    double wd = warp.derivative(sol.u[i]);
    double speed_a = std::sqrt(sol.up[i] * sol.up[i] + w * w);
    double a_rate = total / speed_a;
    dense->t[i] = sol.s[i] / total;
    dense->r[i] = sol.u[i];
    dense->rd[i] = sol.up[i] * a_rate;
    dense->rdd[i] = w * wd * a_rate * a_rate;
    dense->a[i] = ai;
    dense->ad[i] = a_rate;
    dense->add[i] = -2.0 * (wd / w) * dense->rd[i] * a_rate;
  }
  dense->t.front() = 0.0;
  dense->t.back() = 1.0;
  path.dense_ = std::move(dense);
  return path;
}

Vec ambient_path_velocity(const GeodesicPath& path, double t) {
  return tangent_to_ambient(path.velocity(t), path.evaluate(t));
}

}  // namespace wpfm
