#include "wpfm/inference.hpp"

#include <cmath>

#include "wpfm/errors.hpp"
#include "wpfm/flowmatch.hpp"

namespace wpfm {

Vec guided_velocity(const VelocityField& net, std::span<const double> x,
                    double t, const Condition& c, double w) {
  Vec v_null = net.forward(x, t, Condition{});
  if (!c.has_value()) return v_null;
  Vec v_cond = net.forward(x, t, c);
  Vec out = v_null;
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] += w * (v_cond[i] - v_null[i]);
  }
  return out;
}

TransportResult transport_field(const VelocityFn& field,
                                std::span<const double> x_start, int n_steps,
                                Integrator integrator,
                                bool record_trajectory) {
  if (n_steps < 1) throw DegenerateInput("transport: n_steps must be >= 1");
  PolarPoint p = polar_decompose(x_start);
  TransportResult result;
  if (record_trajectory) result.trajectory.push_back(p);

  double dt = 1.0 / n_steps;
  for (int k = 0; k < n_steps; ++k) {
    double t = static_cast<double>(k) / n_steps;
    Vec x = assemble(p);
    Vec v = field(x, t);
    if (!all_finite(v)) {
      throw NonFiniteState("transport: field value not finite at t=" +
                           std::to_string(t));
    }
    if (integrator == Integrator::ExpMap) {
      TangentVector tv = project_to_tangent(v, p);
      p = exp_map(p, tv, dt);
    } else {
      axpy(dt, v, x);
      try {
        p = polar_decompose(x);
      } catch (const DegenerateInput&) {
        throw RadialUnderflow("transport: ambient step collapsed the radius");
      }
    }
    if (record_trajectory) result.trajectory.push_back(p);
  }
  result.x_final = assemble(p);
  return result;
}

TransportResult transport(const VelocityField& net,
                          std::span<const double> x_start, const Condition& c,
                          const TransportOptions& opts) {
  VelocityFn field = [&](std::span<const double> x, double t) {
    double t_net = opts.shift_targets ? t : time_shift(t, opts.shift_s);
    return guided_velocity(net, x, t_net, c, opts.cfg_scale);
  };
  return transport_field(field, x_start, opts.n_steps, opts.integrator,
                         opts.record_trajectory);
}

int classify_by_transport(const VelocityField& net,
                          std::span<const double> x_test,
                          const std::vector<std::pair<int, Vec>>& prototypes,
                          const Condition& c, const TransportOptions& opts) {
  TransportResult r = transport(net, x_test, c, opts);
  return classify_identity(r.x_final, prototypes);
}

int classify_identity(std::span<const double> x,
                      const std::vector<std::pair<int, Vec>>& prototypes) {
  if (prototypes.empty()) throw EmptyGroup("classify: no prototypes");
  PolarPoint p = polar_decompose(x);
  int best_label = 0;
  double best_score = 0.0;
  bool first = true;
  for (const auto& [label, proto] : prototypes) {
    PolarPoint q = polar_decompose(proto);
    double score = dot(p.theta, q.theta);
    if (first || score > best_score ||
        (score == best_score && label < best_label)) {
      best_label = label;
      best_score = score;
      first = false;
    }
  }
  return best_label;
}

VelocityFn make_path_field(const GeodesicPath& path) {
  return [path](std::span<const double> x, double t) {
    (void)x;
    return ambient_path_velocity(path, t);
  };
}

}  // namespace wpfm
