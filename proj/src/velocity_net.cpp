#include "wpfm/velocity_net.hpp"

#include <algorithm>
#include <cmath>

#include "wpfm/errors.hpp"
#include "wpfm/rng.hpp"

namespace wpfm {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double silu(double x) { return x * sigmoid(x); }

double silu_deriv(double x) {
  double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

void validate_config(const NetConfig& c) {
  if (c.d < 1 || c.c_dim < 1 || c.c_embed_dim < 1) {
    throw DegenerateInput("NetConfig: d, c_dim, c_embed_dim must be >= 1");
  }
  if (c.t_embed_dim < 2 || c.t_embed_dim % 2 != 0) {
    throw DegenerateInput("NetConfig: t_embed_dim must be even and >= 2");
  }
  if (c.hidden.empty()) {
    throw DegenerateInput("NetConfig: at least one hidden layer required");
  }
  for (int h : c.hidden) {
    if (h < 1) throw DegenerateInput("NetConfig: hidden widths must be >= 1");
  }
}

}  // namespace

VelocityField::VelocityField(const NetConfig& config, uint64_t seed)
    : config_(config) {
  validate_config(config_);

  int half = config_.t_embed_dim / 2;
  freqs_.resize(static_cast<size_t>(half));
  for (int i = 0; i < half; ++i) {
    double e = half > 1 ? static_cast<double>(i) / (half - 1) : 0.0;
    freqs_[static_cast<size_t>(i)] = std::pow(1000.0, e);
  }

  int in_dim = config_.d + config_.t_embed_dim + config_.c_embed_dim;
  std::vector<int> widths;
  widths.push_back(in_dim);
  for (int h : config_.hidden) widths.push_back(h);
  widths.push_back(config_.d);

  Rng rng(seed);
  auto init_linear = [&](int in, int out, bool zero) {
    Linear lin;
    lin.in = in;
    lin.out = out;
    lin.W.assign(static_cast<size_t>(in) * out, 0.0);
    lin.b.assign(static_cast<size_t>(out), 0.0);
    if (!zero) {
      double bound = std::sqrt(6.0 / in);
      for (double& w : lin.W) w = rng.uniform(-bound, bound);
    }
    return lin;
  };

  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    bool is_last = (l + 2 == widths.size());
    layers_.push_back(init_linear(widths[l], widths[l + 1], is_last));
  }
  cond_proj_ = init_linear(config_.c_dim, config_.c_embed_dim, false);
  null_token_.assign(static_cast<size_t>(config_.c_embed_dim), 0.0);

  param_count_ = 0;
  for (const auto& lin : layers_) param_count_ += lin.W.size() + lin.b.size();
  param_count_ += cond_proj_.W.size() + cond_proj_.b.size();
  param_count_ += null_token_.size();
}

Vec VelocityField::build_input(std::span<const double> x, double t,
                               const Condition& c, bool* null_condition,
                               Vec* c_raw) const {
  if (static_cast<int>(x.size()) != config_.d) {
    throw DimensionMismatch("VelocityField: x has dimension " +
                            std::to_string(x.size()) + ", expected " +
                            std::to_string(config_.d));
  }
  if (!all_finite(x) || !std::isfinite(t)) {
    throw DegenerateInput("VelocityField: non-finite input");
  }

  Vec input;
  input.reserve(x.size() + static_cast<size_t>(config_.t_embed_dim) +
                static_cast<size_t>(config_.c_embed_dim));
  input.insert(input.end(), x.begin(), x.end());
  for (double f : freqs_) {
    input.push_back(std::sin(f * t));
    input.push_back(std::cos(f * t));
  }

  *null_condition = !c.has_value();
  if (c.has_value()) {
    const Vec& cv = *c;
    if (static_cast<int>(cv.size()) != config_.c_dim) {
      throw DimensionMismatch("VelocityField: condition has dimension " +
                              std::to_string(cv.size()) + ", expected " +
                              std::to_string(config_.c_dim));
    }
    if (!all_finite(cv)) {
      throw DegenerateInput("VelocityField: non-finite condition");
    }
    if (c_raw) *c_raw = cv;
    for (int i = 0; i < cond_proj_.out; ++i) {
      double s = cond_proj_.b[static_cast<size_t>(i)];
      const double* row = &cond_proj_.W[static_cast<size_t>(i) * cond_proj_.in];
      for (int j = 0; j < cond_proj_.in; ++j) s += row[j] * cv[static_cast<size_t>(j)];
      input.push_back(s);
    }
  } else {
    if (c_raw) c_raw->clear();
    input.insert(input.end(), null_token_.begin(), null_token_.end());
  }
  return input;
}

Vec VelocityField::forward(std::span<const double> x, double t,
                           const Condition& c) const {
  bool null_cond = false;
  Vec h = build_input(x, t, c, &null_cond, nullptr);
  for (size_t l = 0; l < layers_.size(); ++l) {
    const Linear& lin = layers_[l];
    Vec z(static_cast<size_t>(lin.out));
    for (int i = 0; i < lin.out; ++i) {
      double s = lin.b[static_cast<size_t>(i)];
      const double* row = &lin.W[static_cast<size_t>(i) * lin.in];
      for (int j = 0; j < lin.in; ++j) s += row[j] * h[static_cast<size_t>(j)];
      z[static_cast<size_t>(i)] = s;
    }
    if (l + 1 < layers_.size()) {
      for (double& v : z) v = silu(v);
    }
    h = std::move(z);
  }
  return h;
}

Vec VelocityField::forward_cached(std::span<const double> x, double t,
                                  const Condition& c,
                                  ForwardCache& cache) const {
  cache.version = version_;
  cache.valid = true;
  cache.pre.clear();
  cache.act.clear();
  cache.input = build_input(x, t, c, &cache.null_condition, &cache.c_raw);

  Vec h = cache.input;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const Linear& lin = layers_[l];
    Vec z(static_cast<size_t>(lin.out));
    for (int i = 0; i < lin.out; ++i) {
      double s = lin.b[static_cast<size_t>(i)];
      const double* row = &lin.W[static_cast<size_t>(i) * lin.in];
      for (int j = 0; j < lin.in; ++j) s += row[j] * h[static_cast<size_t>(j)];
      z[static_cast<size_t>(i)] = s;
    }
    cache.pre.push_back(z);
    if (l + 1 < layers_.size()) {
      for (double& v : z) v = silu(v);
    }
    cache.act.push_back(z);
    h = std::move(z);
  }
  return h;
}

void VelocityField::backward(const ForwardCache& cache,
                             std::span<const double> grad_out,
                             GradBuffer& grad) const {
  if (!cache.valid) {
    throw StaleCache("backward: cache was never filled by forward_cached");
  }
  if (cache.version != version_) {
    throw StaleCache("backward: parameters changed since the cached forward");
  }
  if (grad.flat.size() != param_count_) {
    throw DimensionMismatch("backward: grad buffer has wrong size");
  }
  if (grad_out.size() != static_cast<size_t>(config_.d)) {
    throw DimensionMismatch("backward: grad_out has wrong dimension");
  }

  // Flat offsets mirror param_blocks() declaration order.
  std::vector<size_t> w_off(layers_.size()), b_off(layers_.size());
  size_t off = 0;
  for (size_t l = 0; l < layers_.size(); ++l) {
    w_off[l] = off;
    off += layers_[l].W.size();
    b_off[l] = off;
    off += layers_[l].b.size();
  }
  size_t wc_off = off;
  off += cond_proj_.W.size();
  size_t bc_off = off;
  off += cond_proj_.b.size();
  size_t null_off = off;

  Vec g(grad_out.begin(), grad_out.end());
  for (size_t l = layers_.size(); l-- > 0;) {
    const Linear& lin = layers_[l];
    bool is_last = (l + 1 == layers_.size());
    Vec g_pre;
    if (is_last) {
      g_pre = g;
    } else {
      g_pre.resize(static_cast<size_t>(lin.out));
      for (int i = 0; i < lin.out; ++i) {
        g_pre[static_cast<size_t>(i)] =
            g[static_cast<size_t>(i)] *
            silu_deriv(cache.pre[l][static_cast<size_t>(i)]);
      }
    }
    const Vec& h_in = (l == 0) ? cache.input : cache.act[l - 1];
    double* gW = &grad.flat[w_off[l]];
    double* gb = &grad.flat[b_off[l]];
    for (int i = 0; i < lin.out; ++i) {
      double gp = g_pre[static_cast<size_t>(i)];
      double* gw_row = gW + static_cast<size_t>(i) * lin.in;
      for (int j = 0; j < lin.in; ++j) gw_row[j] += gp * h_in[static_cast<size_t>(j)];
      gb[i] += gp;
    }
    Vec g_in(static_cast<size_t>(lin.in), 0.0);
    for (int i = 0; i < lin.out; ++i) {
      double gp = g_pre[static_cast<size_t>(i)];
      const double* row = &lin.W[static_cast<size_t>(i) * lin.in];
      for (int j = 0; j < lin.in; ++j) g_in[static_cast<size_t>(j)] += gp * row[j];
    }
    g = std::move(g_in);
  }

  // g now spans the concatenated input; only the condition slice owns
  // parameters (time features are fixed functions of t).
  size_t c_start = static_cast<size_t>(config_.d + config_.t_embed_dim);
  if (cache.null_condition) {
    double* gn = &grad.flat[null_off];
    for (int i = 0; i < config_.c_embed_dim; ++i) {
      gn[i] += g[c_start + static_cast<size_t>(i)];
    }
  } else {
    double* gWc = &grad.flat[wc_off];
    double* gbc = &grad.flat[bc_off];
    for (int i = 0; i < cond_proj_.out; ++i) {
      double gp = g[c_start + static_cast<size_t>(i)];
      double* row = gWc + static_cast<size_t>(i) * cond_proj_.in;
      for (int j = 0; j < cond_proj_.in; ++j) {
        row[j] += gp * cache.c_raw[static_cast<size_t>(j)];
      }
      gbc[i] += gp;
    }
  }
}

std::vector<ParamBlock> VelocityField::param_blocks() {
  std::vector<ParamBlock> blocks;
  for (size_t l = 0; l < layers_.size(); ++l) {
    Linear& lin = layers_[l];
    std::string tag = std::to_string(l);
    blocks.push_back({"layer" + tag + ".W", lin.out, lin.in, lin.W.data(),
                      lin.W.size()});
    blocks.push_back({"layer" + tag + ".b", lin.out, 0, lin.b.data(),
                      lin.b.size()});
  }
  blocks.push_back({"cond_proj.W", cond_proj_.out, cond_proj_.in,
                    cond_proj_.W.data(), cond_proj_.W.size()});
  blocks.push_back({"cond_proj.b", cond_proj_.out, 0, cond_proj_.b.data(),
                    cond_proj_.b.size()});
  blocks.push_back({"null_token", static_cast<int>(null_token_.size()), 0,
                    null_token_.data(), null_token_.size()});
  return blocks;
}

std::vector<VelocityField::BlockShape> VelocityField::block_shapes() const {
  std::vector<BlockShape> shapes;
  auto& self = const_cast<VelocityField&>(*this);
  for (const ParamBlock& b : self.param_blocks()) {
    shapes.push_back({b.name, b.rows, b.cols, b.size});
  }
  return shapes;
}

Vec VelocityField::params_flat() const {
  Vec flat;
  flat.reserve(param_count_);
  auto& self = const_cast<VelocityField&>(*this);
  for (const ParamBlock& b : self.param_blocks()) {
    flat.insert(flat.end(), b.data, b.data + b.size);
  }
  return flat;
}

void VelocityField::set_params_flat(std::span<const double> flat) {
  if (flat.size() != param_count_) {
    throw DimensionMismatch("set_params_flat: expected " +
                            std::to_string(param_count_) + " values, got " +
                            std::to_string(flat.size()));
  }
  if (!all_finite(flat)) {
    throw DegenerateInput("set_params_flat: non-finite parameter");
  }
  size_t off = 0;
  for (ParamBlock& b : param_blocks()) {
    std::copy(flat.begin() + static_cast<long>(off),
              flat.begin() + static_cast<long>(off + b.size), b.data);
    off += b.size;
  }
  ++version_;
}

AdamW::AdamW(size_t param_count, const AdamWConfig& config)
    : config_(config), m_(param_count, 0.0), v_(param_count, 0.0) {}

void AdamW::step(VelocityField& net, const GradBuffer& grad) {
  if (grad.flat.size() != m_.size()) {
    throw DimensionMismatch("AdamW::step: grad size mismatch");
  }
  ++step_;
  double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  size_t off = 0;
  for (ParamBlock& b : net.param_blocks()) {
    for (size_t i = 0; i < b.size; ++i, ++off) {
      double g = grad.flat[off];
      m_[off] = config_.beta1 * m_[off] + (1.0 - config_.beta1) * g;
      v_[off] = config_.beta2 * v_[off] + (1.0 - config_.beta2) * g * g;
      double m_hat = m_[off] / bc1;
      double v_hat = v_[off] / bc2;
      b.data[i] -= config_.lr * (m_hat / (std::sqrt(v_hat) + config_.eps) +
                                 config_.weight_decay * b.data[i]);
    }
  }
  net.bump_version();
}

}  // namespace wpfm
