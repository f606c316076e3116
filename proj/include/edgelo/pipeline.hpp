#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "edgelo/features.hpp"
#include "edgelo/odometry.hpp"
#include "edgelo/sweep_io.hpp"
#include "edgelo/trajectory.hpp"
#include "edgelo/voxel_map.hpp"

namespace edgelo {

struct RunConfig {
  BeamModel beams;
  double r_min = 3.0;
  double r_max = 75.0;
  FeatureConfig features;
  MapConfig map;
  OptimizerConfig optimizer;

  std::filesystem::path dataset;
  std::filesystem::path poses_out;
  std::filesystem::path stats_out;
  std::filesystem::path velocities_out;
  std::filesystem::path map_out;

  /// Run the three stages inline on one thread instead of pipelined threads.
  bool deterministic = false;
  /// Sweep period used when the dataset carries no timestamps.
  double scan_period = 0.1;

  /// Validates every sub-config and copies the range gate into the residual weight.
  void validate();

  /// Sets one `key = value` entry. Throws InvalidArgument on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
};

/// Flat key/value text: `key = value` (or `key value`), `#` starts a comment.
void apply_config_text(RunConfig& cfg, std::string_view text);
void load_config_file(RunConfig& cfg, const std::filesystem::path& path);
/// `key=value` override as given on the command line.
void apply_override(RunConfig& cfg, std::string_view assignment);

struct RawFrame {
  std::vector<RawPoint> points;
  double timestamp = 0.0;
};

/// Random-access sweep provider.
class SweepSource {
 public:
  virtual ~SweepSource() = default;
  virtual std::size_t size() const = 0;
  virtual RawFrame load(std::size_t i) const = 0;
};

class InMemorySource : public SweepSource {
 public:
  explicit InMemorySource(std::vector<RawFrame> frames) : frames_(std::move(frames)) {}
  std::size_t size() const override { return frames_.size(); }
  RawFrame load(std::size_t i) const override { return frames_.at(i); }

 private:
  std::vector<RawFrame> frames_;
};

/// Directory of sweeps: `<dir>/velodyne/`, `<dir>/csv/` or `<dir>` itself holding
/// `.bin` (KITTI) or `.csv` files,
/// in lexicographic file order. Timestamps come from `<dir>/times.txt` when
/// present, else i * period.
class DirectorySource : public SweepSource {
 public:
  DirectorySource(const std::filesystem::path& dir, double period);
  std::size_t size() const override { return files_.size(); }
  RawFrame load(std::size_t i) const override;

 private:
  std::vector<std::filesystem::path> files_;
  std::vector<double> times_;
};

enum class BootstrapBehavior {
  kSeedOnly,               // pose := identity, no optimisation, map seeded
  kIdentityPrior,          // prior := previous pose (no motion)
  kConstantVelocityPrior,  // prior := constant_velocity_prior
};

BootstrapBehavior bootstrap_policy(int sweep_index);

struct FrameStats {
  int frame = 0;
  double t_feat_ms = 0.0;
  double t_opt_ms = 0.0;
  double t_map_ms = 0.0;    // global map update
  double t_local_ms = 0.0;  // local map build
  std::size_t n_corr = 0;   // correspondences in the last outer iteration
  bool degenerate = false;
};

struct RunStats {
  std::vector<FrameStats> frames;
  std::size_t map_cells = 0;
  std::size_t map_points = 0;
};

struct RunResult {
  Trajectory trajectory;
  std::vector<VelocityEstimate> velocities;
  RunStats stats;
  std::shared_ptr<const GlobalMap> map;
};

/// Odometry + mapping over every sweep of `source`.
RunResult run_sequence(RunConfig cfg, const SweepSource& source);
/// Same, reading the sweeps from cfg.dataset.
RunResult run_sequence(RunConfig cfg);

/// Writes whichever of poses/stats/velocities/map outputs `cfg` names.
void write_outputs(const RunConfig& cfg, const RunResult& result);

void write_stats_csv(const std::filesystem::path& path, const RunStats& stats);
void write_velocities_csv(const std::filesystem::path& path,
                          const std::vector<VelocityEstimate>& velocities);

}  // namespace edgelo
