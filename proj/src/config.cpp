#include "wpfm/config.hpp"

#include <json.hpp>

#include "wpfm/errors.hpp"
#include "wpfm/io_util.hpp"
#include "wpfm/sha1.hpp"

namespace wpfm {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const char* section,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      bad(std::string("config: unknown key '") + it.key() + "' in " + section);
    }
  }
}

template <typename T>
void fetch(const json& obj, const char* section, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    bad(std::string("config: bad value for '") + key + "' in " + section);
  }
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

Integrator parse_integrator(const std::string& text) {
  if (text == "expmap") return Integrator::ExpMap;
  if (text == "ambient") return Integrator::AmbientEuler;
  bad("config: integrator must be 'expmap' or 'ambient', got '" + text + "'");
}

std::string integrator_name(Integrator integrator) {
  return integrator == Integrator::ExpMap ? "expmap" : "ambient";
}

GeodesicKind parse_training_geodesic(const std::string& text) {
  if (text == "dual") return GeodesicKind::DualGeodesic;
  if (text == "chord") return GeodesicKind::EuclideanChord;
  bad("config: geodesic must be 'dual' or 'chord', got '" + text + "'");
}

std::string training_geodesic_name(GeodesicKind kind) {
  switch (kind) {
    case GeodesicKind::DualGeodesic:
      return "dual";
    case GeodesicKind::EuclideanChord:
      return "chord";
    case GeodesicKind::NumericalWarp:
      break;
  }
  bad("config: geodesic kind has no config name");
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(std::string("config: parse failure: ") + e.what());
  }
  if (!root.is_object()) bad("config: top level must be an object");
  check_keys(root, "top level", {"seed", "train", "net", "task", "eval"});

  RunConfig cfg = default_run_config();
  fetch(root, "top level", "seed", cfg.seed);

  if (auto it = root.find("train"); it != root.end()) {
    const json& t = *it;
    if (!t.is_object()) bad("config: 'train' must be an object");
    check_keys(t, "train",
               {"warp", "geodesic", "normalize_chord", "shift_s",
                "shift_targets", "p_drop", "batch_size", "epochs", "lr",
                "weight_decay"});
    if (auto w = t.find("warp"); w != t.end()) {
      if (!w->is_string()) bad("config: 'warp' must be a string");
      try {
        cfg.train.warp = WarpFunction::parse(w->get<std::string>());
      } catch (const Error& e) {
        bad(std::string("config: ") + e.what());
      }
    }
    if (auto g = t.find("geodesic"); g != t.end()) {
      if (!g->is_string()) bad("config: 'geodesic' must be a string");
      cfg.train.geodesic_kind = parse_training_geodesic(g->get<std::string>());
    }
    fetch(t, "train", "normalize_chord", cfg.train.normalize_chord);
    fetch(t, "train", "shift_s", cfg.train.shift_s);
    fetch(t, "train", "shift_targets", cfg.train.shift_targets);
    fetch(t, "train", "p_drop", cfg.train.p_drop);
    fetch(t, "train", "batch_size", cfg.train.batch_size);
    fetch(t, "train", "epochs", cfg.train.epochs);
    fetch(t, "train", "lr", cfg.train.adamw.lr);
    fetch(t, "train", "weight_decay", cfg.train.adamw.weight_decay);
    if (!(cfg.train.shift_s > 0.0)) bad("config: shift_s must be > 0");
    if (!(cfg.train.p_drop >= 0.0 && cfg.train.p_drop <= 1.0)) {
      bad("config: p_drop must lie in [0, 1]");
    }
    if (cfg.train.batch_size < 1) bad("config: batch_size must be >= 1");
    if (cfg.train.epochs < 1) bad("config: epochs must be >= 1");
    if (!(cfg.train.adamw.lr > 0.0)) bad("config: lr must be > 0");
    if (!(cfg.train.adamw.weight_decay >= 0.0)) {
      bad("config: weight_decay must be >= 0");
    }
  }

  if (auto it = root.find("net"); it != root.end()) {
    const json& n = *it;
    if (!n.is_object()) bad("config: 'net' must be an object");
    check_keys(n, "net", {"hidden", "t_embed_dim", "c_embed_dim"});
    fetch(n, "net", "hidden", cfg.net.hidden);
    fetch(n, "net", "t_embed_dim", cfg.net.t_embed_dim);
    fetch(n, "net", "c_embed_dim", cfg.net.c_embed_dim);
    if (cfg.net.hidden.empty()) bad("config: hidden must be non-empty");
    for (int h : cfg.net.hidden) {
      if (h < 1) bad("config: hidden widths must be >= 1");
    }
    if (cfg.net.t_embed_dim < 2 || cfg.net.t_embed_dim % 2 != 0) {
      bad("config: t_embed_dim must be even and >= 2");
    }
    if (cfg.net.c_embed_dim < 1) bad("config: c_embed_dim must be >= 1");
  }

  if (auto it = root.find("task"); it != root.end()) {
    const json& t = *it;
    if (!t.is_object()) bad("config: 'task' must be an object");
    check_keys(t, "task",
               {"d", "n_classes", "kappa_src", "r_src_log_mean",
                "r_src_log_std", "r_tgt", "shots_per_class",
                "holdout_per_class", "min_sep", "c_dim"});
    fetch(t, "task", "d", cfg.task.d);
    fetch(t, "task", "n_classes", cfg.task.n_classes);
    fetch(t, "task", "kappa_src", cfg.task.kappa_src);
    fetch(t, "task", "r_src_log_mean", cfg.task.r_src_log_mean);
    fetch(t, "task", "r_src_log_std", cfg.task.r_src_log_std);
    fetch(t, "task", "r_tgt", cfg.task.r_tgt);
    fetch(t, "task", "shots_per_class", cfg.task.shots_per_class);
    fetch(t, "task", "holdout_per_class", cfg.task.holdout_per_class);
    fetch(t, "task", "min_sep", cfg.task.min_sep);
    fetch(t, "task", "c_dim", cfg.task.c_dim);
    if (cfg.task.d < 2) bad("config: task.d must be >= 2");
    if (cfg.task.n_classes < 1) bad("config: n_classes must be >= 1");
    if (cfg.task.c_dim < 1) bad("config: c_dim must be >= 1");
  }

  if (auto it = root.find("eval"); it != root.end()) {
    const json& e = *it;
    if (!e.is_object()) bad("config: 'eval' must be an object");
    check_keys(e, "eval", {"n_steps", "cfg_scale", "integrator"});
    fetch(e, "eval", "n_steps", cfg.eval.n_steps);
    fetch(e, "eval", "cfg_scale", cfg.eval.cfg_scale);
    if (auto g = e.find("integrator"); g != e.end()) {
      if (!g->is_string()) bad("config: 'integrator' must be a string");
      cfg.eval.integrator = parse_integrator(g->get<std::string>());
    }
    if (cfg.eval.n_steps < 1) bad("config: eval.n_steps must be >= 1");
  }

  cfg.train.seed = cfg.seed;
  cfg.task.seed = cfg.seed;
  cfg.net.d = cfg.task.d;
  cfg.net.c_dim = cfg.task.c_dim;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_file(path));
}

namespace {

json config_json(const RunConfig& config, bool include_eval) {
  json root;
  root["seed"] = config.seed;
  root["train"] = {
      {"warp", config.train.warp.name()},
      {"geodesic", training_geodesic_name(config.train.geodesic_kind)},
      {"normalize_chord", config.train.normalize_chord},
      {"shift_s", config.train.shift_s},
      {"shift_targets", config.train.shift_targets},
      {"p_drop", config.train.p_drop},
      {"batch_size", config.train.batch_size},
      {"epochs", config.train.epochs},
      {"lr", config.train.adamw.lr},
      {"weight_decay", config.train.adamw.weight_decay}};
  root["net"] = {{"hidden", config.net.hidden},
                 {"t_embed_dim", config.net.t_embed_dim},
                 {"c_embed_dim", config.net.c_embed_dim}};
  root["task"] = {{"d", config.task.d},
                  {"n_classes", config.task.n_classes},
                  {"kappa_src", config.task.kappa_src},
                  {"r_src_log_mean", config.task.r_src_log_mean},
                  {"r_src_log_std", config.task.r_src_log_std},
                  {"r_tgt", config.task.r_tgt},
                  {"shots_per_class", config.task.shots_per_class},
                  {"holdout_per_class", config.task.holdout_per_class},
                  {"min_sep", config.task.min_sep},
                  {"c_dim", config.task.c_dim}};
  if (include_eval) {
    root["eval"] = {{"n_steps", config.eval.n_steps},
                    {"cfg_scale", config.eval.cfg_scale},
                    {"integrator", integrator_name(config.eval.integrator)}};
  }
  return root;
}

}  // namespace

std::string run_config_to_json(const RunConfig& config) {
  return config_json(config, true).dump(2);
}

std::string config_hash(const RunConfig& config) {
  // Eval settings are inference-time knobs; the hash identifies what was
  // trained.
  return sha1_hex(config_json(config, false).dump(2));
}

}  // namespace wpfm
