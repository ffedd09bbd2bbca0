#include <doctest.h>

#include <filesystem>

#include "wpfm/checkpoint.hpp"
#include "wpfm/config.hpp"
#include "wpfm/errors.hpp"
#include "wpfm/io_util.hpp"
#include "wpfm/rng.hpp"
#include "wpfm/sha1.hpp"

using namespace wpfm;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const char* name) {
  fs::path dir = fs::temp_directory_path() / "wpfm_io_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

NetConfig small_config() {
  NetConfig cfg;
  cfg.d = 5;
  cfg.c_dim = 3;
  cfg.t_embed_dim = 6;
  cfg.c_embed_dim = 4;
  cfg.hidden = {8, 8};
  return cfg;
}

}  // namespace

TEST_CASE("sha1 known vectors") {
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  CHECK(sha1_hex("The quick brown fox jumps over the lazy dog") ==
        "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
  // One block boundary case: exactly 64 bytes.
  CHECK(sha1_hex(std::string(64, 'a')) ==
        "0098ba824b5c16427bd7a1122a5a442a25ec644d");
}

TEST_CASE("atomic file write and read round-trip") {
  fs::path dir = temp_dir("atomic");
  std::string path = (dir / "out.txt").string();
  write_file_atomic(path, "hello\nworld\n");
  CHECK(read_file(path) == "hello\nworld\n");
  write_file_atomic(path, "replaced");
  CHECK(read_file(path) == "replaced");
  // No stray temp files left behind.
  size_t entries = 0;
  for (auto& _ : fs::directory_iterator(dir)) {
    (void)_;
    ++entries;
  }
  CHECK(entries == 1);
  CHECK_THROWS_AS(read_file((dir / "absent.txt").string()), IoError);
  CHECK_THROWS_AS(write_file_atomic((dir / "no_dir" / "x.txt").string(), "v"),
                  IoError);
}

TEST_CASE("checkpoint round-trips parameters and metadata") {
  fs::path dir = temp_dir("ckpt");
  VelocityField net(small_config(), 77);
  Rng rng(78);
  Vec p = net.params_flat();
  for (double& v : p) v = rng.normal();
  net.set_params_flat(p);

  CheckpointMeta meta;
  meta.step_count = 1234;
  meta.config_hash = "feedbeef";
  meta.shift_s = 0.25;
  meta.shift_targets = false;
  meta.warp = "constant:25";

  std::string path = (dir / "model.bin").string();
  save_checkpoint(path, net, meta);

  CheckpointMeta got_meta;
  VelocityField loaded = load_checkpoint(path, &got_meta);
  CHECK(loaded.params_flat() == net.params_flat());
  CHECK(loaded.config().d == 5);
  CHECK(loaded.config().hidden == std::vector<int>{8, 8});
  CHECK(got_meta.step_count == 1234);
  CHECK(got_meta.config_hash == "feedbeef");
  CHECK(got_meta.shift_s == 0.25);
  CHECK(got_meta.shift_targets == false);
  CHECK(got_meta.warp == "constant:25");

  // Same outputs on the same inputs.
  Vec x(5, 0.3);
  CHECK(loaded.forward(x, 0.6, std::nullopt) ==
        net.forward(x, 0.6, std::nullopt));

  LoadedCheckpoint raw = read_checkpoint(path);
  CHECK(raw.params == net.params_flat());
  CHECK(raw.blocks.size() == net.block_shapes().size());
}

TEST_CASE("checkpoint rejects corrupt files") {
  fs::path dir = temp_dir("ckpt_bad");
  VelocityField net(small_config(), 79);
  CheckpointMeta meta;
  std::string path = (dir / "model.bin").string();
  save_checkpoint(path, net, meta);
  std::string content = read_file(path);

  std::string bad_magic = (dir / "magic.bin").string();
  std::string mutated = content;
  mutated[0] = 'X';
  write_file_atomic(bad_magic, mutated);
  CHECK_THROWS_AS(read_checkpoint(bad_magic), FormatError);

  std::string truncated = (dir / "trunc.bin").string();
  write_file_atomic(truncated, content.substr(0, content.size() - 5));
  CHECK_THROWS_AS(read_checkpoint(truncated), FormatError);

  std::string tiny = (dir / "tiny.bin").string();
  write_file_atomic(tiny, "WPFM");
  CHECK_THROWS_AS(read_checkpoint(tiny), FormatError);

  CHECK_THROWS_AS(read_checkpoint((dir / "absent.bin").string()), IoError);
}

TEST_CASE("default config parses from an empty object") {
  RunConfig cfg = parse_run_config("{}");
  CHECK(cfg.seed == 0);
  CHECK(cfg.train.epochs == 200);
  CHECK(cfg.train.warp.name() == "constant:25");
  CHECK(cfg.task.d == 16);
  CHECK(cfg.net.d == 16);
  CHECK(cfg.eval.n_steps == 10);
  CHECK(cfg.eval.cfg_scale == 5.0);
}

TEST_CASE("config fields parse and derive linked values") {
  std::string text = R"({
    "seed": 9,
    "train": {"warp": "hyperbolic", "epochs": 12, "geodesic": "chord",
              "shift_s": 0.2, "shift_targets": false, "p_drop": 0.25,
              "batch_size": 4, "lr": 0.001, "weight_decay": 0.05,
              "normalize_chord": false},
    "net": {"hidden": [32, 16], "t_embed_dim": 12, "c_embed_dim": 10},
    "task": {"d": 9, "c_dim": 7, "n_classes": 3, "kappa_src": 2.5,
             "r_tgt": 11.0, "shots_per_class": 6, "holdout_per_class": 5,
             "min_sep": 0.4, "r_src_log_mean": 2.0, "r_src_log_std": 0.1},
    "eval": {"n_steps": 25, "cfg_scale": 1.5, "integrator": "ambient"}
  })";
  RunConfig cfg = parse_run_config(text);
  CHECK(cfg.seed == 9);
  CHECK(cfg.train.warp.name() == "hyperbolic");
  CHECK(cfg.train.geodesic_kind == GeodesicKind::EuclideanChord);
  CHECK(cfg.train.normalize_chord == false);
  CHECK(cfg.train.shift_targets == false);
  CHECK(cfg.train.adamw.lr == 0.001);
  CHECK(cfg.train.adamw.weight_decay == 0.05);
  CHECK(cfg.net.hidden == std::vector<int>{32, 16});
  CHECK(cfg.net.d == 9);       // derived from the task
  CHECK(cfg.net.c_dim == 7);   // derived from the task
  CHECK(cfg.train.seed == 9);  // derived from the top-level seed
  CHECK(cfg.task.seed == 9);
  CHECK(cfg.eval.integrator == Integrator::AmbientEuler);
  CHECK(cfg.eval.n_steps == 25);
}

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"sead": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"train": {"warps": "euclidean"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"train": {"epochs": "many"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"train": {"epochs": -5}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"train": {"p_drop": 1.5}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"train": {"warp": "mystery"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"eval": {"integrator": "rk9"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"task": {"d": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"net": {"hidden": []}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"([1, 2])"), ConfigError);
}

TEST_CASE("canonical config form is stable under reparsing") {
  RunConfig cfg = parse_run_config(R"({"seed": 3, "train": {"epochs": 7}})");
  std::string canon = run_config_to_json(cfg);
  RunConfig back = parse_run_config(canon);
  CHECK(run_config_to_json(back) == canon);
  CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("config hash ignores evaluation settings") {
  RunConfig a = parse_run_config(R"({"seed": 5})");
  RunConfig b = parse_run_config(R"({"seed": 5, "eval": {"n_steps": 99}})");
  RunConfig c = parse_run_config(R"({"seed": 6})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  RunConfig d = parse_run_config(R"({"seed": 5, "train": {"epochs": 3}})");
  CHECK(config_hash(a) != config_hash(d));
}

TEST_CASE("name round-trips for enums") {
  CHECK(integrator_name(parse_integrator("expmap")) == "expmap");
  CHECK(integrator_name(parse_integrator("ambient")) == "ambient");
  CHECK_THROWS_AS(parse_integrator("verlet"), ConfigError);
  CHECK(training_geodesic_name(parse_training_geodesic("dual")) == "dual");
  CHECK(training_geodesic_name(parse_training_geodesic("chord")) == "chord");
  CHECK_THROWS_AS(parse_training_geodesic("warp"), ConfigError);
}

TEST_CASE("load_run_config reads from disk and reports missing files") {
  fs::path dir = temp_dir("config_load");
  std::string path = (dir / "run.json").string();
  write_file_atomic(path, R"({"seed": 11})");
  RunConfig cfg = load_run_config(path);
  CHECK(cfg.seed == 11);
  CHECK_THROWS_AS(load_run_config((dir / "absent.json").string()), IoError);
}
