#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wpfm/runner.hpp"

namespace {

wpfm::CliOverrides gather_overrides(CLI::App* cmd) {
  wpfm::CliOverrides ov;
  auto grab = [&](const char* name, auto& slot) {
    using T = typename std::decay_t<decltype(slot)>::value_type;
    CLI::Option* opt = cmd->get_option_no_throw(name);
    if (opt && opt->count() > 0) slot = opt->as<T>();
  };
  grab("--seed", ov.seed);
  grab("--n-steps", ov.n_steps);
  grab("--cfg-scale", ov.cfg_scale);
  grab("--integrator", ov.integrator);
  grab("--warp", ov.warp);
  grab("--geodesic", ov.geodesic);
  return ov;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-matching transport on radius-direction product spaces"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path;

  CLI::App* train = app.add_subcommand("train", "Train a velocity field");
  train->add_option("--config", config_path, "Run configuration JSON")
      ->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--seed", "Override the run seed");
  train->add_option("--warp", "Override the warp (euclidean|hyperbolic|constant:<c>)");
  train->add_option("--geodesic", "Override the target path kind (dual|chord)");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--config", config_path, "Run configuration JSON")
      ->required();
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")
      ->required();
  eval->add_option("--out", out_dir, "Output directory")->required();
  eval->add_option("--seed", "Override the run seed");
  eval->add_option("--n-steps", "Transport steps");
  eval->add_option("--cfg-scale", "Guidance weight");
  eval->add_option("--integrator", "expmap|ambient");

  CLI::App* study = app.add_subcommand("study", "Geometry analyses");
  study->require_subcommand(1);

  wpfm::SpeedStudyArgs speed_args;
  CLI::App* speed = study->add_subcommand(
      "speed", "Angular speed profile along a path");
  speed->add_option("--geodesic", speed_args.geodesic, "dual|chord");
  speed->add_flag("!--no-normalize", speed_args.normalize_chord,
                  "Keep original chord endpoint radii");
  speed->add_option("--d", speed_args.d, "Ambient dimension");
  speed->add_option("--alpha", speed_args.alpha, "Endpoint separation angle");
  speed->add_option("--r0", speed_args.r0, "Start radius");
  speed->add_option("--r1", speed_args.r1, "End radius");
  speed->add_option("--n-grid", speed_args.n_grid, "Grid resolution");
  speed->add_option("--out", out_dir, "Output directory")->required();

  wpfm::TruncationStudyArgs trunc_args;
  CLI::App* trunc = study->add_subcommand(
      "truncation", "One-step integration error vs step size");
  trunc->add_option("--warp", trunc_args.warp,
                    "euclidean|hyperbolic|constant:<c>");
  trunc->add_option("--d", trunc_args.d, "Ambient dimension");
  trunc->add_option("--alpha", trunc_args.alpha, "Endpoint separation angle");
  trunc->add_option("--r0", trunc_args.r0, "Start radius");
  trunc->add_option("--r1", trunc_args.r1, "End radius");
  trunc->add_option("--t0", trunc_args.t0, "Expansion point");
  trunc->add_option("--dts", trunc_args.dts, "Step sizes, decreasing")
      ->delimiter(',');
  trunc->add_option("--oracle-substeps", trunc_args.oracle_substeps,
                    "Reference integrator resolution");
  trunc->add_option("--bvp-grid", trunc_args.bvp_grid,
                    "Boundary value solver grid");
  trunc->add_option("--out", out_dir, "Output directory")->required();

  std::vector<std::string> group_args;
  CLI::App* radial = study->add_subcommand(
      "radial", "Radius distribution of feature groups");
  radial->add_option("--group", group_args,
                     "name=features-file (repeatable)")
      ->required();
  radial->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* gen = app.add_subcommand("gen-data", "Write the synthetic task");
  gen->add_option("--config", config_path, "Run configuration JSON")
      ->required();
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--seed", "Override the run seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (app.got_subcommand(train)) {
    return wpfm::cmd_train(config_path, out_dir, gather_overrides(train));
  }
  if (app.got_subcommand(eval)) {
    return wpfm::cmd_eval(config_path, checkpoint_path, out_dir,
                          gather_overrides(eval));
  }
  if (app.got_subcommand(gen)) {
    return wpfm::cmd_gen_data(config_path, out_dir, gather_overrides(gen));
  }
  if (app.got_subcommand(study)) {
    if (study->got_subcommand(speed)) {
      return wpfm::cmd_study_speed(speed_args, out_dir);
    }
    if (study->got_subcommand(trunc)) {
      return wpfm::cmd_study_truncation(trunc_args, out_dir);
    }
    if (study->got_subcommand(radial)) {
      std::vector<std::pair<std::string, std::string>> groups;
      for (const std::string& g : group_args) {
        size_t eq = g.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == g.size()) {
          std::fprintf(stderr,
                       "study radial: --group expects name=path, got '%s'\n",
                       g.c_str());
          return 2;
        }
        groups.emplace_back(g.substr(0, eq), g.substr(eq + 1));
      }
      return wpfm::cmd_study_radial(groups, out_dir);
    }
  }
  std::fprintf(stderr, "no subcommand selected\n");
  return 2;
}
