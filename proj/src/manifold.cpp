#include "wpfm/manifold.hpp"

#include <cmath>
#include <cstdio>

#include "wpfm/errors.hpp"

namespace wpfm {

namespace {
// Hyperbolic warp values are near-degenerate as r -> 0 (value -> 0 while the
// derivative stays 1), so the domain is clipped away from the origin.
constexpr double kHyperbolicMinRadius = 1e-3;
}  // namespace

WarpFunction WarpFunction::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw DegenerateInput("WarpFunction::constant: c must be finite and > 0");
  }
  return WarpFunction(Kind::Constant, c);
}

WarpFunction WarpFunction::parse(const std::string& text) {
  if (text == "euclidean") return euclidean();
  if (text == "hyperbolic") return hyperbolic();
  const std::string prefix = "constant:";
  if (text.rfind(prefix, 0) == 0) {
    std::string num = text.substr(prefix.size());
    size_t used = 0;
    double c = 0.0;
    try {
      c = std::stod(num, &used);
    } catch (const std::exception&) {
      throw FormatError("WarpFunction::parse: bad constant in '" + text + "'");
    }
    if (used != num.size() || !std::isfinite(c) || !(c > 0.0)) {
      throw FormatError("WarpFunction::parse: bad constant in '" + text + "'");
    }
    return constant(c);
  }
  throw FormatError("WarpFunction::parse: unknown warp '" + text + "'");
}

double WarpFunction::value(double r) const {
  if (r < min_radius()) {
    throw RadialUnderflow("WarpFunction::value: r=" + std::to_string(r) +
                          " below domain minimum");
  }
  switch (kind_) {
    case Kind::Euclidean:
      return r;
    case Kind::Hyperbolic:
      return std::sinh(r);
    case Kind::Constant:
      return c_;
  }
  return 0.0;
}

double WarpFunction::derivative(double r) const {
  if (r < min_radius()) {
    throw RadialUnderflow("WarpFunction::derivative: r=" + std::to_string(r) +
                          " below domain minimum");
  }
  switch (kind_) {
    case Kind::Euclidean:
      return 1.0;
    case Kind::Hyperbolic:
      return std::cosh(r);
    case Kind::Constant:
      return 0.0;
  }
  return 0.0;
}

double WarpFunction::min_radius() const {
  return kind_ == Kind::Hyperbolic ? kHyperbolicMinRadius : 0.0;
}

std::string WarpFunction::name() const {
  switch (kind_) {
    case Kind::Euclidean:
      return "euclidean";
    case Kind::Hyperbolic:
      return "hyperbolic";
    case Kind::Constant: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "constant:%.17g", c_);
      return buf;
    }
  }
  return "";
}

PolarPoint polar_decompose(std::span<const double> x) {
  double n = norm2(x);
  if (!(n > kEpsNorm)) {
    throw DegenerateInput("polar_decompose: norm " + std::to_string(n) +
                          " <= " + std::to_string(kEpsNorm));
  }
  PolarPoint p;
  p.r = n;
  p.theta.assign(x.begin(), x.end());
  for (double& v : p.theta) v /= n;
  return p;
}

Vec assemble(const PolarPoint& p) {
  return scaled(p.theta, p.r);
}

TangentVector project_to_tangent(std::span<const double> v,
                                 const PolarPoint& p) {
  check_same_dim(v, p.theta, "project_to_tangent");
  TangentVector tv;
  tv.v_rad = dot(v, p.theta);
  tv.v_ang.assign(v.begin(), v.end());
  axpy(-tv.v_rad, p.theta, tv.v_ang);
  for (double& x : tv.v_ang) x /= p.r;
  return tv;
}

Vec tangent_to_ambient(const TangentVector& tv, const PolarPoint& p) {
  check_same_dim(tv.v_ang, p.theta, "tangent_to_ambient");
  Vec out = scaled(p.theta, tv.v_rad);
  axpy(p.r, tv.v_ang, out);
  return out;
}

PolarPoint exp_map(const PolarPoint& p, const TangentVector& tv, double dt) {
  check_same_dim(tv.v_ang, p.theta, "exp_map");
  PolarPoint out;
  out.r = p.r + tv.v_rad * dt;
  if (!(out.r > kEpsNorm)) {
    throw RadialUnderflow("exp_map: radius " + std::to_string(out.r) +
                          " <= " + std::to_string(kEpsNorm));
  }
  double speed = norm2(tv.v_ang);
  double a = speed * dt;
  if (a < kEpsAngle) {
    out.theta = p.theta;
  } else {
    out.theta = scaled(p.theta, std::cos(a));
    axpy(std::sin(a) / speed, tv.v_ang, out.theta);
  }
  double n = norm2(out.theta);
  for (double& x : out.theta) x /= n;
  return out;
}

double angular_coupling_coefficient(const WarpFunction& warp, double r,
                                    double r_dot) {
  return -2.0 * (warp.derivative(r) / warp.value(r)) * r_dot;
}

}  // namespace wpfm
