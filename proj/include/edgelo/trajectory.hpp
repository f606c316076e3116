#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "edgelo/geometry.hpp"

namespace edgelo {

struct TrajectoryEntry {
  int index = 0;
  double timestamp = 0.0;  // seconds
  PoseSE3 pose;            // T^W_L: sensor frame -> world frame
};

/// Sweep poses in acquisition order. Indices are strictly increasing.
class Trajectory {
 public:
  Trajectory() = default;

  /// Throws InvalidArgument if `index` does not exceed the last index.
  void push_back(int index, double timestamp, const PoseSE3& pose);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const TrajectoryEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<TrajectoryEntry>& entries() const { return entries_; }
  std::vector<Point3> positions() const;
  std::vector<PoseSE3> poses() const;

  /// Builds a trajectory from poses with indices 0..n-1 and timestamps i * period.
  static Trajectory from_poses(const std::vector<PoseSE3>& poses, double period = 0.1);

 private:
  std::vector<TrajectoryEntry> entries_;
};

/// Per-axis linear velocity in the world frame (m/s) at sweep `epoch`.
struct VelocityEstimate {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  int epoch = 0;
};

/// Backward difference of positions i-1 -> i over their timestamp gap.
/// Throws InvalidArgument for i == 0 or i out of range, and for a zero or
/// negative time step.
VelocityEstimate estimate_velocity(const Trajectory& traj, std::size_t i);

/// KITTI pose file: one line per frame, 12 numbers (row-major upper 3x4).
void write_kitti_poses(const std::filesystem::path& path, const Trajectory& traj);
std::vector<PoseSE3> read_kitti_poses(const std::filesystem::path& path);
/// Formats one pose line exactly as write_kitti_poses does (no newline).
std::string format_kitti_pose(const PoseSE3& pose);

}  // namespace edgelo
