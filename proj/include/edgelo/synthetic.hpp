#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "edgelo/geometry.hpp"
#include "edgelo/pipeline.hpp"
#include "edgelo/sweep_io.hpp"

namespace edgelo {

/// Vertical cylinder.
struct Pole {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.1;
  double z_min = -5.0;
  double z_max = 5.0;
};

/// Box with a vertical axis, rotated by `yaw` about it. Walls are thin boxes.
struct Box {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d half_extent{0.5, 0.5};
  double yaw = 0.0;
  /// Tilt of the local x axis above the horizontal (rad). The box turns about
  /// (center, 0), so z_min and z_max are heights in the tilted frame.
  double pitch = 0.0;
  double z_min = -5.0;
  double z_max = 5.0;
};

struct SyntheticBeams {
  std::vector<double> elevations_deg;  // one entry per ring, ring index = position
  int azimuth_steps = 1800;            // rays per ring, azimuth -pi + k * 2pi / steps
  double max_range = 120.0;

  /// `count` rings evenly spaced over [min_deg, max_deg].
  static SyntheticBeams uniform(int count, double min_deg, double max_deg, int azimuth_steps);
  /// Binning model that recovers the ring of every generated point.
  BeamModel binning_model() const;
};

/// Gaussian noise on the measured range: `sigma` below `far_range`, `far_sigma` at or beyond.
struct RangeNoise {
  double sigma = 0.0;
  double far_sigma = 0.0;
  double far_range = 1e9;

  double sigma_at(double range) const { return range < far_range ? sigma : far_sigma; }
};

struct SyntheticWorld {
  std::uint64_t seed = 0;
  std::vector<Pole> poles;
  std::vector<Box> boxes;
  std::vector<PoseSE3> trajectory;  // T^W_L per sweep
  SyntheticBeams beams;
  RangeNoise noise;
  double period = 0.1;
};

struct SyntheticFrame {
  std::vector<RawPoint> points;  // sensor frame, ring set, ordered by ring then azimuth
  PoseSE3 ground_truth;
  double timestamp = 0.0;
};

/// Range along the unit world-frame ray to the nearest primitive, if any
/// hit lies within (0, max_range].
std::optional<double> raycast(const SyntheticWorld& world, const Point3& origin,
                              const Eigen::Vector3d& direction, double max_range);

/// Sweep i of the world: ray-cast every (ring, azimuth) from the scripted pose.
/// Noise is drawn from a generator seeded by (world.seed, i) only.
SyntheticFrame generate_sweep(const SyntheticWorld& world, std::size_t i);
std::vector<SyntheticFrame> generate_sweeps(const SyntheticWorld& world);

/// Lazily generated sweeps for run_sequence.
class SyntheticSource : public SweepSource {
 public:
  explicit SyntheticSource(SyntheticWorld world) : world_(std::move(world)) {}
  std::size_t size() const override { return world_.trajectory.size(); }
  RawFrame load(std::size_t i) const override;
  const SyntheticWorld& world() const { return world_; }

 private:
  SyntheticWorld world_;
};

/// Closed rounded-rectangle path centred at the origin, sampled every `step`
/// metres with the heading along the path. Small sinusoidal height, roll and
/// pitch excursions keep every degree of freedom excited.
struct LoopPath {
  double length = 60.0;
  double width = 30.0;
  double corner_radius = 8.0;
  double step = 0.5;
  std::size_t count = 200;
  double z_amplitude = 0.0;
  double tilt_amplitude_deg = 0.0;
  double start_offset = 0.0;  // arc length of the first sample
};
std::vector<PoseSE3> loop_path(const LoopPath& path);
std::vector<PoseSE3> straight_path(const Point3& start, double heading, double step,
                                   std::size_t count);

/// Corridor that follows the default LoopPath: a tall inner block with columns,
/// an outer wall split by doorway gaps, pillars around the corners, overhead
/// beams and diagonal braces beside the path.
SyntheticWorld make_corridor_world(std::uint64_t seed, std::size_t sweeps, double sigma);

/// Open field of poles and pillars around a loop path, with range-dependent noise.
SyntheticWorld make_field_world(std::uint64_t seed, std::size_t sweeps, const RangeNoise& noise);

/// JSON world files (format version 1).
SyntheticWorld load_world(const std::filesystem::path& path);
void save_world(const std::filesystem::path& path, const SyntheticWorld& world);

/// Writes the sweeps as a KITTI-style dataset: velodyne/NNNNNN.bin (or csv/
/// with ring column), times.txt and poses.txt (ground truth).
void write_synthetic_dataset(const SyntheticWorld& world, const std::filesystem::path& dir,
                             bool csv = false);

}  // namespace edgelo
