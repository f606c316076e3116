#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgelo/geometry.hpp"

namespace edgelo {

struct RawPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
  std::optional<int> ring;

  Point3 position() const { return {x, y, z}; }
  double range() const { return position().norm(); }
};

/// Points returned by a single beam, ordered by azimuth.
struct Scan {
  int beam = 0;
  std::vector<RawPoint> points;
};

struct Sweep {
  std::vector<Scan> scans;  // ascending beam index
  double timestamp = 0.0;
  int index = 0;
  std::size_t dropped = 0;  // points that fell outside every elevation bin

  std::size_t point_count() const;
};

/// How points without a ring field are assigned to beams: the closed
/// elevation interval [elevation_min_deg, elevation_max_deg] is split into
/// `beam_count` equal bins, beam 0 at the bottom.
struct BeamModel {
  int beam_count = 64;
  double elevation_min_deg = -24.8;
  double elevation_max_deg = 2.0;
  /// Ignore ring fields and always bin by elevation.
  bool force_elevation_binning = false;
  /// Re-sort each scan by atan2(y, x) instead of keeping input order.
  bool sort_by_azimuth = false;

  void validate() const;
  /// Beam for a given elevation (degrees) or nullopt outside all bins.
  std::optional<int> beam_for_elevation(double elevation_deg) const;
};

double elevation_deg(const RawPoint& p);
double azimuth_rad(const RawPoint& p);

/// Reads a KITTI velodyne file: little-endian float32 records (x, y, z, intensity).
std::vector<RawPoint> read_kitti_bin(const std::filesystem::path& path);
void write_kitti_bin(const std::filesystem::path& path, std::span<const RawPoint> points);

/// Reads a CSV file with header `x,y,z,intensity[,ring]`.
std::vector<RawPoint> read_csv_points(const std::filesystem::path& path);
void write_csv_points(const std::filesystem::path& path, std::span<const RawPoint> points,
                      bool with_ring);

Sweep split_scans(std::span<const RawPoint> points, const BeamModel& model);

/// Keeps the points with r_min <= |p| <= r_max. Throws InvalidArgument unless
/// 0 <= r_min < r_max.
Sweep range_filter(const Sweep& sweep, double r_min, double r_max);

}  // namespace edgelo
