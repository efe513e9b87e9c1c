// hypersub: run the verification suites and simulators from the command line.
//
//   hypersub verify-identities --family heisenberg --n 2
//   hypersub converge --family sphere --n 1 --k 1 --eps 0.4,0.2,0.1,0.05,0.025
//   hypersub simulate --family ads --n 2 --k 1 --paths 10000 --horizon 1 --step 1e-3 --seed 42
//   hypersub radial-compare --config run.json --threads 4
//
// Flags override the config document; HYPERSUB_OUTPUT_DIR overrides the
// document's output_dir (and is itself overridden by --output-dir).

#include "hypersub/errors.hpp"
#include "hypersub/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> family;
  std::optional<int> n;
  std::optional<double> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::vector<double> eps;
  std::optional<int> samples;
  std::optional<int> grid_points;
  std::optional<std::uint64_t> paths;
  std::optional<double> horizon;
  std::optional<double> step;
  std::optional<double> r0;
  std::optional<double> delta;
  std::optional<double> guard;
  std::optional<unsigned> threads;
  std::vector<double> snapshots;
  bool fixed_angles = false;
};

void add_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config document");
  cmd->add_option("--family", o.family, "heisenberg | sphere | ads");
  cmd->add_option("--n", o.n, "half dimension of S");
  cmd->add_option("--k", o.k, "curvature parameter (sphere, ads)");
  cmd->add_option("--seed", o.seed, "64-bit master seed");
  cmd->add_option("--output-dir", o.output_dir, "artifact directory");
  cmd->add_option("--eps", o.eps, "eps schedule, comma separated")->delimiter(',');
  cmd->add_option("--samples", o.samples, "random points for pointwise identities");
  cmd->add_option("--grid-points", o.grid_points, "grid size for operator checks");
  cmd->add_option("--paths", o.paths, "Monte Carlo paths");
  cmd->add_option("--horizon", o.horizon, "final time T");
  cmd->add_option("--step", o.step, "Euler-Maruyama step h");
  cmd->add_option("--r0", o.r0, "start radius");
  cmd->add_option("--delta", o.delta, "hit threshold");
  cmd->add_option("--guard", o.guard, "guard radius");
  cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
  cmd->add_option("--snapshots", o.snapshots, "snapshot times, comma separated")->delimiter(',');
  cmd->add_flag("--fixed-angles", o.fixed_angles, "start every path at the same point");
}

hypersub::RunConfig build_config(const std::string& command, const Overrides& o) {
  using namespace hypersub;
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  cfg.command = parse_command(command);
  if (o.family) cfg.family = parse_family(*o.family);
  if (o.n) cfg.n = *o.n;
  if (o.k) cfg.k = *o.k;
  if (o.seed) cfg.seed = *o.seed;
  if (const char* env = std::getenv("HYPERSUB_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (!o.eps.empty()) cfg.eps = o.eps;
  if (o.samples) cfg.samples = *o.samples;
  if (o.grid_points) cfg.grid_points = *o.grid_points;
  if (o.paths) cfg.sim.paths = *o.paths;
  if (o.horizon) cfg.sim.horizon = *o.horizon;
  if (o.step) cfg.sim.step = *o.step;
  if (o.r0) cfg.sim.r0 = *o.r0;
  if (o.delta) cfg.sim.hit_threshold = *o.delta;
  if (o.guard) cfg.sim.guard_radius = *o.guard;
  if (o.threads) cfg.sim.threads = *o.threads;
  if (!o.snapshots.empty()) cfg.sim.snapshot_times = o.snapshots;
  if (o.fixed_angles) cfg.sim.randomize_angles = false;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-Laplacians and radial diffusions on model contact hypersurfaces"};
  app.require_subcommand(1);
  Overrides o;
  for (const char* name : {"verify-identities", "converge", "simulate", "radial-compare"}) add_options(app.add_subcommand(name), o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  hypersub::RunConfig cfg;
  try {
    cfg = build_config(app.get_subcommands().front()->get_name(), o);
  } catch (const hypersub::ArgumentError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }
  return hypersub::run(cfg, std::cout, std::cerr);
}
