#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "edgelo/errors.hpp"
#include "edgelo/eval.hpp"
#include "edgelo/map_tools.hpp"
#include "edgelo/pipeline.hpp"
#include "edgelo/synthetic.hpp"
#include "edgelo/trajectory.hpp"

using namespace edgelo;
using nlohmann::json;

namespace {

struct RunArgs {
  std::string config;
  std::string dataset;
  std::string world;
  std::vector<std::string> overrides;
  std::string poses, stats, velocities, map;
  bool deterministic = false;
};

int cmd_run(const RunArgs& a) {
  RunConfig cfg;
  if (!a.config.empty()) load_config_file(cfg, a.config);
  for (const auto& o : a.overrides) apply_override(cfg, o);
  if (!a.dataset.empty()) cfg.dataset = a.dataset;
  if (!a.poses.empty()) cfg.poses_out = a.poses;
  if (!a.stats.empty()) cfg.stats_out = a.stats;
  if (!a.velocities.empty()) cfg.velocities_out = a.velocities;
  if (!a.map.empty()) cfg.map_out = a.map;
  if (a.deterministic) cfg.deterministic = true;

  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  if (!a.world.empty()) {
    SyntheticWorld world = load_world(a.world);
    cfg.scan_period = world.period;
    const SyntheticSource source(std::move(world));
    result = run_sequence(cfg, source);
  } else {
    if (cfg.dataset.empty()) throw InvalidArgument("run: need --dataset, --world or a dataset key");
    result = run_sequence(cfg);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_outputs(cfg, result);

  std::size_t degenerate = 0;
  for (const auto& f : result.stats.frames) degenerate += f.degenerate ? 1 : 0;
  std::fprintf(stderr, "frames %zu  degenerate %zu  map cells %zu  points %zu  %.2f s\n",
               result.trajectory.size(), degenerate, result.stats.map_cells,
               result.stats.map_points, secs);
  return 0;
}

int cmd_eval_rel(const std::string& est, const std::string& gt, std::size_t step) {
  RelErrorOptions opts;
  opts.step = step;
  const auto e = read_kitti_poses(est);
  const auto g = read_kitti_poses(gt);
  const RelErrorReport rep = kitti_rel_errors(e, g, opts);
  json j;
  j["empty"] = rep.empty;
  j["segments"] = rep.segments;
  j["translational_percent"] = rep.translational_percent;
  j["rotational_deg_per_100m"] = rep.rotational_deg_per_100m;
  j["per_length"] = json::array();
  for (const auto& l : rep.per_length) {
    j["per_length"].push_back({{"length", l.length},
                               {"segments", l.segments},
                               {"translational_percent", l.translational_percent},
                               {"rotational_deg_per_100m", l.rotational_deg_per_100m}});
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_eval_ate(const std::string& est, const std::string& gt) {
  const auto e = read_kitti_poses(est);
  const auto g = read_kitti_poses(gt);
  json j;
  j["frames"] = e.size();
  j["ate_m"] = ate(e, g);
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct SynthArgs {
  std::string world;
  std::string preset = "corridor";
  std::uint64_t seed = 1;
  std::size_t sweeps = 240;
  double sigma = 0.02;
  double far_sigma = 0.06;
  double far_range = 20.0;
  std::string out;
  std::string save_world;
  bool csv = false;
  bool far_given = false;
};

int cmd_synth(const SynthArgs& a) {
  SyntheticWorld world;
  if (!a.world.empty()) {
    world = load_world(a.world);
  } else if (a.preset == "corridor") {
    world = make_corridor_world(a.seed, a.sweeps, a.sigma);
    if (a.far_given) world.noise = RangeNoise{a.sigma, a.far_sigma, a.far_range};
  } else if (a.preset == "field") {
    world = make_field_world(a.seed, a.sweeps, RangeNoise{a.sigma, a.far_sigma, a.far_range});
  } else {
    throw InvalidArgument("synth: unknown preset '" + a.preset + "'");
  }
  if (!a.save_world.empty()) save_world(a.save_world, world);
  if (!a.out.empty()) write_synthetic_dataset(world, a.out, a.csv);
  return 0;
}

int cmd_map_stats(const std::string& dump, double s_xy, double s_z) {
  MapConfig cfg;
  cfg.s_xy = s_xy;
  cfg.s_z = s_z;
  cfg.validate();
  const auto entries = read_map_dump(dump, cfg);
  GlobalMap map(cfg);
  std::vector<Point3> pts;
  pts.reserve(entries.size());
  for (const auto& [idx, p] : entries) pts.push_back(p);
  map.insert_unfiltered(pts);
  json j;
  j["cells"] = map.cell_count();
  j["points"] = map.point_count();
  if (!map.empty()) {
    const EntropyReport rep = map.table_entropy();
    j["buckets"] = rep.bucket_count;
    j["entropy_nats"] = rep.entropy;
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_bench_map(std::uint64_t seed, std::size_t sweeps, std::size_t points,
                  const std::string& csv) {
  EdgeStream spec;
  spec.sweeps = sweeps;
  spec.points_per_sweep = points;
  const auto batches = synthetic_edge_stream(seed, spec);
  const auto hashed = time_map_updates(batches, MapBackend::kHashedCells);
  const auto kd = time_map_updates(batches, MapBackend::kMonolithicKdTree);
  const DecileSummary h = decile_medians(hashed);
  const DecileSummary k = decile_medians(kd);
  json j;
  j["sweeps"] = sweeps;
  j["hashed"] = {{"first_decile_median_ms", h.first_median},
                 {"last_decile_median_ms", h.last_median},
                 {"ratio", h.ratio()}};
  j["monolithic_kdtree"] = {{"first_decile_median_ms", k.first_median},
                            {"last_decile_median_ms", k.last_median},
                            {"ratio", k.ratio()}};
  std::cout << j.dump(2) << '\n';
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw IoError("cannot create " + csv);
    out << "sweep,hashed_ms,kdtree_ms\n";
    for (std::size_t i = 0; i < hashed.size(); ++i) {
      out << i << ',' << hashed[i] << ',' << kd[i] << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgelo: edge-based LiDAR odometry and mapping"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Estimate poses for a dataset");
  run_cmd->add_option("-c,--config", run.config, "Config file (key = value lines)");
  run_cmd->add_option("-d,--dataset", run.dataset, "Dataset directory");
  run_cmd->add_option("-w,--world", run.world, "Synthetic world file instead of a dataset");
  run_cmd->add_option("-s,--set", run.overrides, "key=value override, repeatable");
  run_cmd->add_option("-o,--poses", run.poses, "Pose output (KITTI format)");
  run_cmd->add_option("--stats", run.stats, "Per-frame timing CSV");
  run_cmd->add_option("--velocities", run.velocities, "Velocity CSV");
  run_cmd->add_option("--map", run.map, "Map dump (plus .json stats sidecar)");
  run_cmd->add_flag("--deterministic", run.deterministic, "Run the stages inline on one thread");

  std::string est, gt;
  std::size_t step = 1;
  auto* rel_cmd = app.add_subcommand("eval-rel", "Segment-based relative errors");
  rel_cmd->add_option("estimate", est)->required();
  rel_cmd->add_option("ground_truth", gt)->required();
  rel_cmd->add_option("--step", step, "Stride between segment start frames");
  auto* ate_cmd = app.add_subcommand("eval-ate", "Absolute trajectory error after alignment");
  ate_cmd->add_option("estimate", est)->required();
  ate_cmd->add_option("ground_truth", gt)->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--world", synth.world, "World file to render");
  synth_cmd->add_option("--preset", synth.preset, "corridor or field")
      ->check(CLI::IsMember({"corridor", "field"}));
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--sweeps", synth.sweeps);
  synth_cmd->add_option("--sigma", synth.sigma, "Range noise (m)");
  synth_cmd->add_option("--far-sigma", synth.far_sigma, "Far-field range noise (m)");
  synth_cmd->add_option("--far-range", synth.far_range, "Range where far-field noise starts (m)");
  synth_cmd->add_option("--out", synth.out, "Dataset directory to write");
  synth_cmd->add_option("--save-world", synth.save_world, "Write the world file");
  synth_cmd->add_flag("--csv", synth.csv, "Write CSV sweeps with ring column");

  std::string dump;
  double s_xy = 25.0, s_z = 20.0;
  auto* stats_cmd = app.add_subcommand("map-stats", "Entropy report for a map dump");
  stats_cmd->add_option("dump", dump)->required();
  stats_cmd->add_option("--s-xy", s_xy);
  stats_cmd->add_option("--s-z", s_z);

  std::uint64_t bench_seed = 1;
  std::size_t bench_sweeps = 1000, bench_points = 150;
  std::string bench_csv;
  auto* bench_cmd = app.add_subcommand("bench-map", "Map update time: hashed cells vs k-d tree rebuild");
  bench_cmd->add_option("--seed", bench_seed);
  bench_cmd->add_option("--sweeps", bench_sweeps);
  bench_cmd->add_option("--points", bench_points, "Edge points per sweep");
  bench_cmd->add_option("--csv", bench_csv, "Per-update timings");

  CLI11_PARSE(app, argc, argv);
  synth.far_given = synth_cmd->count("--far-sigma") + synth_cmd->count("--far-range") > 0;

  try {
    if (*run_cmd) return cmd_run(run);
    if (*rel_cmd) return cmd_eval_rel(est, gt, step);
    if (*ate_cmd) return cmd_eval_ate(est, gt);
    if (*synth_cmd) return cmd_synth(synth);
    if (*stats_cmd) return cmd_map_stats(dump, s_xy, s_z);
    if (*bench_cmd) return cmd_bench_map(bench_seed, bench_sweeps, bench_points, bench_csv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "edgelo: %s\n", e.what());
    return 1;
  }
  return 0;
}
