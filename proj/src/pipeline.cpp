#include "edgelo/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "bounded_queue.hpp"
#include "edgelo/errors.hpp"
#include "edgelo/map_tools.hpp"

namespace edgelo {

namespace fs = std::filesystem;

DirectorySource::DirectorySource(const fs::path& dir, double period) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  fs::path scan_dir = dir;
  if (fs::is_directory(dir / "velodyne")) {
    scan_dir = dir / "velodyne";
  } else if (fs::is_directory(dir / "csv")) {
    scan_dir = dir / "csv";
  }
  for (const auto& entry : fs::directory_iterator(scan_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".bin" || ext == ".csv") files_.push_back(entry.path());
  }
  std::sort(files_.begin(), files_.end());
  if (files_.empty()) throw IoError("no .bin or .csv sweeps in " + scan_dir.string());

  const fs::path times_file = dir / "times.txt";
  if (fs::exists(times_file)) {
    std::ifstream in(times_file);
    double t = 0.0;
    while (in >> t) times_.push_back(t);
    if (times_.size() < files_.size()) {
      throw FormatError(times_file.string() + " lists fewer timestamps than sweeps");
    }
  } else {
    for (std::size_t i = 0; i < files_.size(); ++i) {
      times_.push_back(static_cast<double>(i) * period);
    }
  }
}

RawFrame DirectorySource::load(std::size_t i) const {
  const fs::path& f = files_.at(i);
  RawFrame frame;
  frame.points = f.extension() == ".bin" ? read_kitti_bin(f) : read_csv_points(f);
  frame.timestamp = times_[i];
  return frame;
}

BootstrapBehavior bootstrap_policy(int i) {
  if (i < 0) throw InvalidArgument("bootstrap_policy: negative sweep index");
  if (i == 0) return BootstrapBehavior::kSeedOnly;
  if (i == 1) return BootstrapBehavior::kIdentityPrior;
  return BootstrapBehavior::kConstantVelocityPrior;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct FeatureMsg {
  int index = 0;
  double timestamp = 0.0;
  std::shared_ptr<const EdgeSet> edges;
  double t_feat_ms = 0.0;
};

struct PoseMsg {
  int index = 0;
  std::shared_ptr<const EdgeSet> edges;
  PoseSE3 pose;
};

struct LocalMsg {
  std::shared_ptr<const LocalMap> local;
  double t_map_ms = 0.0;
  double t_local_ms = 0.0;
};

FeatureMsg feature_stage(const RunConfig& cfg, const SweepSource& source, std::size_t i) {
  const RawFrame frame = source.load(i);
  const auto t0 = Clock::now();
  Sweep sweep = split_scans(frame.points, cfg.beams);
  sweep.index = static_cast<int>(i);
  sweep.timestamp = frame.timestamp;
  sweep = range_filter(sweep, cfg.r_min, cfg.r_max);
  auto edges = std::make_shared<const EdgeSet>(extract_edges(sweep, cfg.features));
  return {static_cast<int>(i), frame.timestamp, std::move(edges), ms_since(t0)};
}

/// Pose estimation state: the two previous poses feeding the motion prior.
class OdometryStage {
 public:
  explicit OdometryStage(const OptimizerConfig& cfg) : cfg_(cfg) {}

  PoseSE3 step(const FeatureMsg& msg, const LocalMap* local, FrameStats& stats) {
    const auto t0 = Clock::now();
    PoseSE3 pose;
    switch (bootstrap_policy(msg.index)) {
      case BootstrapBehavior::kSeedOnly:
        pose = PoseSE3::identity();
        break;
      case BootstrapBehavior::kIdentityPrior:
      case BootstrapBehavior::kConstantVelocityPrior: {
        const PoseSE3 prior = bootstrap_policy(msg.index) == BootstrapBehavior::kIdentityPrior
                                  ? prev_
                                  : constant_velocity_prior(prev_, prevprev_);
        const PoseEstimate est = optimize_pose(*msg.edges, *local, prior, cfg_);
        stats.degenerate = est.report.degenerate;
        stats.n_corr = est.report.correspondences.empty() ? 0 : est.report.correspondences.back();
        pose = est.report.degenerate ? prior : est.pose;
        break;
      }
    }
    prevprev_ = prev_;
    prev_ = pose;
    stats.t_opt_ms = ms_since(t0);
    return pose;
  }

 private:
  OptimizerConfig cfg_;
  PoseSE3 prev_;
  PoseSE3 prevprev_;
};

/// Owns the global map; turns (edges, pose) into the next local map.
class MappingStage {
 public:
  explicit MappingStage(const MapConfig& cfg) : map_(std::make_shared<GlobalMap>(cfg)) {}

  LocalMsg step(const PoseMsg& msg) {
    LocalMsg out;
    auto t0 = Clock::now();
    std::vector<Point3> world;
    world.reserve(msg.edges->edges.size());
    for (const auto& e : msg.edges->edges) world.push_back(msg.pose.apply(e.position));
    map_->update(world);
    out.t_map_ms = ms_since(t0);

    recent_.push_back(std::move(world));
    while (recent_.size() > map_->config().recent_sweeps) recent_.pop_front();

    t0 = Clock::now();
    const std::vector<std::vector<Point3>> recent(recent_.begin(), recent_.end());
    out.local = build_local_map(*map_, msg.pose, recent, msg.index);
    out.t_local_ms = ms_since(t0);
    return out;
  }

  std::shared_ptr<const GlobalMap> release() { return std::move(map_); }

 private:
  std::shared_ptr<GlobalMap> map_;
  std::deque<std::vector<Point3>> recent_;  // world-frame edges of the previous sweeps
};

struct Collector {
  Trajectory trajectory;
  RunStats stats;
};

void run_inline(const RunConfig& cfg, const SweepSource& source, Collector& out,
                std::shared_ptr<const GlobalMap>& map_out) {
  OdometryStage odom(cfg.optimizer);
  MappingStage mapping(cfg.map);
  std::shared_ptr<const LocalMap> local;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const FeatureMsg fm = feature_stage(cfg, source, i);
    FrameStats fs{fm.index};
    fs.t_feat_ms = fm.t_feat_ms;
    const PoseSE3 pose = odom.step(fm, local.get(), fs);
    const LocalMsg lm = mapping.step({fm.index, fm.edges, pose});
    local = lm.local;
    fs.t_map_ms = lm.t_map_ms;
    fs.t_local_ms = lm.t_local_ms;
    out.trajectory.push_back(fm.index, fm.timestamp, pose);
    out.stats.frames.push_back(fs);
  }
  map_out = mapping.release();
}

void run_pipelined(const RunConfig& cfg, const SweepSource& source, Collector& out,
                   std::shared_ptr<const GlobalMap>& map_out) {
  detail::BoundedQueue<FeatureMsg> features_q(1);
  detail::BoundedQueue<PoseMsg> poses_q(1);
  detail::BoundedQueue<LocalMsg> locals_q(1);
  std::mutex error_mutex;
  std::exception_ptr error;
  const auto fail = [&](std::exception_ptr e) {
    {
      std::lock_guard lock(error_mutex);
      if (!error) error = e;
    }
    features_q.close();
    poses_q.close();
    locals_q.close();
  };

  const std::size_t n = source.size();
  std::thread feature_thread([&] {
    try {
      for (std::size_t i = 0; i < n; ++i) {
        if (!features_q.push(feature_stage(cfg, source, i))) return;
      }
    } catch (...) {
      fail(std::current_exception());
    }
  });

  std::vector<LocalMsg> map_timings(n);
  std::thread mapping_thread([&] {
    try {
      MappingStage mapping(cfg.map);
      for (std::size_t i = 0; i < n; ++i) {
        auto msg = poses_q.pop();
        if (!msg) return;
        LocalMsg lm = mapping.step(*msg);
        map_timings[i] = {nullptr, lm.t_map_ms, lm.t_local_ms};
        // The last local map has no consumer.
        if (i + 1 < n && !locals_q.push(std::move(lm))) return;
      }
      map_out = mapping.release();
    } catch (...) {
      fail(std::current_exception());
    }
  });

  try {
    OdometryStage odom(cfg.optimizer);
    std::shared_ptr<const LocalMap> local;
    for (std::size_t i = 0; i < n; ++i) {
      auto fm = features_q.pop();
      if (!fm) break;
      if (i > 0) {
        auto lm = locals_q.pop();  // m_{i-1}; lock-step with the mapping stage
        if (!lm) break;
        local = lm->local;
      }
      FrameStats fs{fm->index};
      fs.t_feat_ms = fm->t_feat_ms;
      const PoseSE3 pose = odom.step(*fm, local.get(), fs);
      out.trajectory.push_back(fm->index, fm->timestamp, pose);
      out.stats.frames.push_back(fs);
      if (!poses_q.push({fm->index, fm->edges, pose})) break;
    }
  } catch (...) {
    fail(std::current_exception());
  }
  feature_thread.join();
  mapping_thread.join();
  if (error) std::rethrow_exception(error);
  for (std::size_t i = 0; i < out.stats.frames.size(); ++i) {
    out.stats.frames[i].t_map_ms = map_timings[i].t_map_ms;
    out.stats.frames[i].t_local_ms = map_timings[i].t_local_ms;
  }
}

}  // namespace

RunResult run_sequence(RunConfig cfg, const SweepSource& source) {
  cfg.validate();
  if (source.size() == 0) throw InvalidArgument("run_sequence: dataset holds no sweeps");
  Collector col;
  RunResult result;
  if (cfg.deterministic) {
    run_inline(cfg, source, col, result.map);
  } else {
    run_pipelined(cfg, source, col, result.map);
  }
  result.trajectory = std::move(col.trajectory);
  result.stats = std::move(col.stats);
  for (std::size_t i = 1; i < result.trajectory.size(); ++i) {
    result.velocities.push_back(estimate_velocity(result.trajectory, i));
  }
  if (result.map) {
    result.stats.map_cells = result.map->cell_count();
    result.stats.map_points = result.map->point_count();
  }
  return result;
}

RunResult run_sequence(RunConfig cfg) {
  if (cfg.dataset.empty()) throw InvalidArgument("run_sequence: no dataset configured");
  const DirectorySource source(cfg.dataset, cfg.scan_period);
  return run_sequence(std::move(cfg), source);
}

void write_stats_csv(const fs::path& path, const RunStats& stats) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << "frame,t_feat_ms,t_opt_ms,t_map_ms,n_corr,degenerate\n";
  char buf[160];
  for (const auto& f : stats.frames) {
    const int n = std::snprintf(buf, sizeof(buf), "%d,%.4f,%.4f,%.4f,%zu,%d\n", f.frame,
                                f.t_feat_ms, f.t_opt_ms, f.t_map_ms + f.t_local_ms, f.n_corr,
                                f.degenerate ? 1 : 0);
    out.write(buf, n);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_velocities_csv(const fs::path& path, const std::vector<VelocityEstimate>& vels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << "frame,vx,vy,vz\n";
  char buf[160];
  for (const auto& v : vels) {
    const int n = std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", v.epoch, v.linear.x(),
                                v.linear.y(), v.linear.z());
    out.write(buf, n);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_outputs(const RunConfig& cfg, const RunResult& result) {
  if (!cfg.poses_out.empty()) write_kitti_poses(cfg.poses_out, result.trajectory);
  if (!cfg.stats_out.empty()) write_stats_csv(cfg.stats_out, result.stats);
  if (!cfg.velocities_out.empty()) write_velocities_csv(cfg.velocities_out, result.velocities);
  if (!cfg.map_out.empty() && result.map) {
    write_map_dump(cfg.map_out, *result.map);
    fs::path sidecar = cfg.map_out;
    sidecar += ".json";
    write_map_stats(sidecar, *result.map);
  }
}

}  // namespace edgelo
