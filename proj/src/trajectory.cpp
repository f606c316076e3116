#include "edgelo/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "edgelo/errors.hpp"

namespace edgelo {

void Trajectory::push_back(int index, double timestamp, const PoseSE3& pose) {
  if (!entries_.empty() && index <= entries_.back().index) {
    throw InvalidArgument("trajectory indices must be strictly increasing");
  }
  entries_.push_back({index, timestamp, pose});
}

std::vector<Point3> Trajectory::positions() const {
  std::vector<Point3> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.pose.translation());
  return out;
}

std::vector<PoseSE3> Trajectory::poses() const {
  std::vector<PoseSE3> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.pose);
  return out;
}

Trajectory Trajectory::from_poses(const std::vector<PoseSE3>& poses, double period) {
  Trajectory t;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    t.push_back(static_cast<int>(i), static_cast<double>(i) * period, poses[i]);
  }
  return t;
}

VelocityEstimate estimate_velocity(const Trajectory& traj, std::size_t i) {
  if (i == 0) throw InvalidArgument("estimate_velocity: undefined for the first sweep");
  if (i >= traj.size()) throw InvalidArgument("estimate_velocity: index out of range");
  const auto& cur = traj[i];
  const auto& prev = traj[i - 1];
  const double dt = cur.timestamp - prev.timestamp;
  if (!(dt > 0.0)) throw InvalidArgument("estimate_velocity: non-positive time step");
  return {(cur.pose.translation() - prev.pose.translation()) / dt, cur.index};
}

std::string format_kitti_pose(const PoseSE3& pose) {
  const auto v = pose.row_major_3x4();
  std::string line;
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Normalise negative zero so equal poses always print identically.
    const double x = v[i] == 0.0 ? 0.0 : v[i];
    const int n = std::snprintf(buf, sizeof(buf), "%.17g", x);
    if (i) line.push_back(' ');
    line.append(buf, static_cast<std::size_t>(n));
  }
  return line;
}

void write_kitti_poses(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  for (const auto& e : traj.entries()) out << format_kitti_pose(e.pose) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<PoseSE3> read_kitti_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<PoseSE3> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::array<double, 12> v{};
    for (auto& x : v) {
      if (!(ss >> x)) {
        throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                          " does not hold 12 numbers");
      }
    }
    std::string extra;
    if (ss >> extra) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        " has more than 12 numbers");
    }
    poses.push_back(PoseSE3::from_row_major_3x4(v));
  }
  return poses;
}

}  // namespace edgelo
