// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "edgelo/eval.hpp"
#include "edgelo/map_tools.hpp"
#include "edgelo/odometry.hpp"
#include "edgelo/pipeline.hpp"
#include "edgelo/synthetic.hpp"
#include "odometry_scene.hpp"

using namespace edgelo;
namespace fs = std::filesystem;

namespace {

const fs::path kData = EDGELO_DATA_DIR;

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kFail;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::kSkip, std::move(d)}; }

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path fixture(int seed) { return kData / "worlds" / ("corridor_seed" + std::to_string(seed) + ".json"); }

RunConfig synthetic_config(const SyntheticWorld& w) {
  RunConfig cfg;
  load_config_file(cfg, kData / "synthetic.cfg");
  cfg.beams = w.beams.binning_model();
  cfg.scan_period = w.period;
  cfg.deterministic = true;
  return cfg;
}

std::vector<PoseSE3> relative_truth(const SyntheticWorld& w) {
  std::vector<PoseSE3> gt;
  gt.reserve(w.trajectory.size());
  const PoseSE3 first_inv = w.trajectory.front().inverse();
  for (const auto& p : w.trajectory) gt.push_back(first_inv * p);
  return gt;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome unit_examples() {
  const std::string list = EDGELO_TEST_BINARIES;
  std::size_t start = 0;
  int failed = 0, run = 0;
  while (start < list.size()) {
    const auto end = std::min(list.find(',', start), list.size());
    const std::string bin = list.substr(start, end - start);
    start = end + 1;
    if (bin.empty()) continue;
    ++run;
    const std::string cmd = "\"" + bin + "\" --gtest_brief=1 > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      ++failed;
      std::printf("    failing suite: %s\n", fs::path(bin).filename().c_str());
    }
  }
  const auto d = fmt("%d of %d unit suites green", run - failed, run);
  return failed == 0 && run > 0 ? pass(d) : fail(d);
}

Outcome corridor_accuracy() {
  bool ok = true;
  std::string d;
  for (int seed = 1; seed <= 5; ++seed) {
    const SyntheticWorld w = load_world(fixture(seed));
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = run_sequence(synthetic_config(w), SyntheticSource(w));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto gt = relative_truth(w);
    const auto est = r.trajectory.poses();
    const double e = ate(est, gt);
    const double drift = 100.0 * (est.back().translation() - gt.back().translation()).norm() /
                         path_distances(gt).back();
    const bool seed_ok = w.trajectory.size() >= 200 && w.noise.sigma == 0.02 && e <= 0.05 &&
                         drift <= 0.5 && secs <= 60.0;
    ok = ok && seed_ok;
    std::printf("    seed %d: %zu sweeps  ATE %.4f m  drift %.3f%%  %.1f s%s\n", seed,
                w.trajectory.size(), e, drift, secs, seed_ok ? "" : "  <-- out of bounds");
    if (seed == 5) d = fmt("last seed ATE %.4f m, drift %.3f%%", e, drift);
  }
  return ok ? pass("all 5 seeds within ATE 0.05 m, drift 0.5%, 60 s") : fail(d);
}

Outcome range_weighting() {
  int wins = 0;
  for (int seed = 1; seed <= 5; ++seed) {
    SyntheticWorld w = load_world(fixture(seed));
    w.trajectory.resize(200);
    w.noise = RangeNoise{0.02, 0.06, 10.0};
    const auto gt = relative_truth(w);
    double errs[2];
    for (int weighted = 0; weighted < 2; ++weighted) {
      RunConfig cfg = synthetic_config(w);
      cfg.optimizer.use_weighting = weighted == 1;
      errs[weighted] = ate(run_sequence(cfg, SyntheticSource(w)).trajectory.poses(), gt);
    }
    const bool win = errs[1] < errs[0];
    wins += win ? 1 : 0;
    std::printf("    seed %d: weighted %.5f m  unweighted %.5f m%s\n", seed, errs[1], errs[0],
                win ? "" : "  <-- not lower");
  }
  const auto d = fmt("weighted ATE lower on %d of 5 seeds", wins);
  return wins == 5 ? pass(d) : fail(d);
}

Outcome hash_entropy() {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto cells = loop_revisit_cells(seed);
    const double shifted = stream_entropy(cells, HashKind::kShiftXor).entropy;
    const double additive = stream_entropy(cells, HashKind::kAdditive).entropy;
    wins += shifted > additive ? 1 : 0;
    std::printf("    seed %llu: %zu insertions  cell_hash %.4f  additive %.4f nats\n",
                static_cast<unsigned long long>(seed), cells.size(), shifted, additive);
  }
  const auto d = fmt("cell_hash entropy higher on %d of 5 seeds", wins);
  return wins == 5 ? pass(d) : fail(d);
}

Outcome map_scaling() {
  const auto batches = synthetic_edge_stream(1, EdgeStream{});
  const DecileSummary hashed =
      decile_medians(time_map_updates(batches, MapBackend::kHashedCells));
  const DecileSummary kd =
      decile_medians(time_map_updates(batches, MapBackend::kMonolithicKdTree));
  const auto d = fmt("%zu sweeps: hashed ratio %.2f (<= 3), k-d ratio %.2f (>= 3)",
                     batches.size(), hashed.ratio(), kd.ratio());
  return batches.size() >= 1000 && hashed.ratio() <= 3.0 && kd.ratio() >= 3.0 ? pass(d) : fail(d);
}

Outcome solver() {
  const PoseSE3 truth = PoseSE3::from_angle_axis({0.05, -0.03, 0.4}, {1.0, -0.5, 0.2});
  const auto scene = edgelo::testing::corridor_line_scene(truth);
  const LocalMap local(scene.map_points, 0);
  const PoseEstimate fixed = optimize_pose(scene.edges, local, truth, OptimizerConfig{});
  const bool fixed_ok = !fixed.report.degenerate && fixed.report.final_cost < 1e-12;

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.05, 1.0);
  const auto vec = [&](double s) -> Eigen::Vector3d {
    return Eigen::Vector3d(u(rng), u(rng), u(rng)) * s;
  };
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Correspondence c;
    c.source = vec(30.0);
    c.n1 = vec(30.0);
    do {
      c.n2 = c.n1 + vec(1.0);
    } while ((c.n2 - c.n1).norm() < 0.05);
    c.weight = w(rng);
    const PoseSE3 pose = PoseSE3::from_angle_axis(vec(1.5), vec(20.0));
    const auto ja = residual_jacobian(c, pose);
    const auto jn = residual_jacobian_numeric(c, pose, 1e-6);
    const double rel = (ja - jn).norm() / ja.norm();
    worst = std::isfinite(rel) ? std::max(worst, rel) : INFINITY;
  }
  const bool jac_ok = worst <= 1e-5;

  bool monotone = fixed.report.monotone();
  OptimizerConfig cfg;
  cfg.outer_iterations = 6;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 prng(seed);
    const Eigen::Vector3d axis = Eigen::Vector3d(u(prng), u(prng), u(prng)).normalized();
    const Eigen::Vector3d dir = Eigen::Vector3d(u(prng), u(prng), u(prng)).normalized();
    const PoseSE3 guess = PoseSE3::from_angle_axis(axis * 2.0 * M_PI / 180.0, dir * 0.2) * truth;
    monotone = monotone && optimize_pose(scene.edges, local, guess, cfg).report.monotone();
  }
  const auto d = fmt("fixed-point cost %.2e, worst Jacobian rel. error %.2e, LM %s",
                     fixed.report.final_cost, worst, monotone ? "monotone" : "NOT monotone");
  return fixed_ok && jac_ok && monotone ? pass(d) : fail(d);
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "edgelo_acceptance";
  fs::create_directories(dir);
  SyntheticWorld w = load_world(fixture(1));
  w.trajectory.resize(60);
  const fs::path world = dir / "world.json";
  save_world(world, w);
  const auto run = [&](const std::string& name, bool deterministic) {
    const fs::path out = dir / name;
    std::string cmd = std::string("\"") + EDGELO_CLI + "\" run --world \"" + world.string() +
                      "\" -c \"" + (kData / "synthetic.cfg").string() + "\" -o \"" +
                      out.string() + "\"" + (deterministic ? " --deterministic" : "") +
                      " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0 ? slurp(out) : std::string();
  };
  const std::string d1 = run("det1.txt", true), d2 = run("det2.txt", true);
  const std::string p1 = run("pipe1.txt", false), p2 = run("pipe2.txt", false);
  if (d1.empty() || p1.empty()) return fail("CLI run produced no pose file");
  const auto a = read_kitti_poses(dir / "det1.txt");
  const auto b = read_kitti_poses(dir / "pipe1.txt");
  double diff = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    diff = std::max(diff, (a[i].matrix() - b[i].matrix()).cwiseAbs().maxCoeff());
  }
  fs::remove_all(dir);
  const bool ok = d1 == d2 && p1 == p2 && diff <= 1e-12;
  const auto d = fmt("deterministic %s, pipelined %s, max mode difference %.1e",
                     d1 == d2 ? "identical" : "DIFFER", p1 == p2 ? "identical" : "DIFFER", diff);
  return ok ? pass(d) : fail(d);
}

Outcome kitti_05() {
  const char* env = std::getenv("EDGELO_KITTI_05");
  if (env == nullptr || !fs::is_directory(env)) {
    return skip("set EDGELO_KITTI_05 to a sequence directory (velodyne/, poses.txt)");
  }
  const fs::path seq = env;
  const char* gt_env = std::getenv("EDGELO_KITTI_05_GT");
  const fs::path gt_path = gt_env != nullptr ? fs::path(gt_env) : seq / "poses.txt";
  if (!fs::exists(gt_path)) return skip("ground truth " + gt_path.string() + " not found");
  RunConfig cfg;
  cfg.dataset = seq;
  const RunResult r = run_sequence(cfg);
  const auto gt = read_kitti_poses(gt_path);
  const RelErrorReport rep = kitti_rel_errors(r.trajectory.poses(), gt);
  const auto d = fmt("translational error %.3f%% (bound %.3f%%)", rep.translational_percent,
                     2.0 * 0.834);
  return !rep.empty && rep.translational_percent <= 2.0 * 0.834 ? pass(d) : fail(d);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"unit examples and oracles", unit_examples},
      {"corridor accuracy", corridor_accuracy},
      {"range weighting under far noise", range_weighting},
      {"cell hash entropy", hash_entropy},
      {"map update scaling", map_scaling},
      {"solver correctness", solver},
      {"CLI determinism", cli_determinism},
      {"KITTI 05 relative error", kitti_05},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.kind == Outcome::kPass ? "PASS" : o.kind == Outcome::kFail ? "FAIL" : "SKIP";
    failures += o.kind == Outcome::kFail ? 1 : 0;
    std::printf("%s %zu %s: %s\n", tag, i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
