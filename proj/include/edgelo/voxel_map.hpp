#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "edgelo/geometry.hpp"
#include "edgelo/kdtree.hpp"

namespace edgelo {

/// Lattice coordinates of a map cell.
struct CellIndex {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::int64_t iz = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

struct MapConfig {
  double s_xy = 25.0;
  double s_z = 20.0;
  std::size_t tau = 64;
  double voxel_leaf = 0.4;
  int local_radius_cells = 1;
  std::size_t recent_sweeps = 3;

  void validate() const;
};

/// Scalar pre-mix applied to each lattice coordinate before combination: the
/// two's-complement bits of v run through one splitmix64 step
/// (add 0x9e3779b97f4a7c15, then the xor-shift-multiply finalizer).
std::uint64_t mix_coordinate(std::int64_t v);

/// (h(ix) ^ (h(iy) << 1)) ^ (h(iz) << 2)
std::uint64_t cell_hash(const CellIndex& index);
/// h(ix) + h(iy) + h(iz), wrapping. Symmetric under permutation.
std::uint64_t baseline_hash(const CellIndex& index);

enum class HashKind { kShiftXor, kAdditive };

/// Cell of p: floor division per axis, cells are half-open [lo, hi).
CellIndex cell_index(const Point3& p, const MapConfig& cfg);
Point3 cell_center(const CellIndex& index, const MapConfig& cfg);

/// Replaces points by the centroid of each occupied leaf voxel (grid anchored
/// at the origin). Output is ordered by voxel lattice coordinate.
std::vector<Point3> voxel_downsample(std::span<const Point3> points, double leaf);

struct Cell {
  CellIndex index;
  Point3 center = Point3::Zero();
  std::vector<Point3> points;
};

struct UpdateStats {
  std::size_t cells_created = 0;
  std::size_t cells_filtered = 0;
  std::size_t points_added = 0;
};

struct EntropyReport {
  std::size_t bucket_count = 0;
  std::size_t item_count = 0;
  std::vector<double> probabilities;  // per bucket
  double entropy = 0.0;               // nats
};

/// Immutable snapshot used by the odometry stage for k-NN queries.
class LocalMap {
 public:
  LocalMap() = default;
  LocalMap(std::vector<Point3> points, int epoch);

  const std::vector<Point3>& points() const { return tree_.points(); }
  std::size_t size() const { return tree_.size(); }
  bool empty() const { return tree_.empty(); }
  int epoch() const { return epoch_; }

  struct KnnResult {
    std::vector<Neighbor> neighbors;  // ascending distance
    bool short_result = false;        // fewer than k points available
  };
  KnnResult knn(const Point3& query, std::size_t k) const;

 private:
  KdTree tree_;
  int epoch_ = -1;
};

/// Global map: hash table from cell lattice index to cell contents.
class GlobalMap {
 public:
  explicit GlobalMap(MapConfig cfg = {}, HashKind hash = HashKind::kShiftXor);

  const MapConfig& config() const { return cfg_; }
  HashKind hash_kind() const { return hash_kind_; }
  std::size_t cell_count() const { return table_.size(); }
  std::size_t point_count() const;
  bool empty() const { return table_.empty(); }

  /// Adds world-frame points; each touched cell holding more than tau points
  /// at the end of the batch is voxel-filtered once.
  UpdateStats update(std::span<const Point3> points_world);

  /// Inserts points into their cells without any filtering (map reload).
  void insert_unfiltered(std::span<const Point3> points_world);

  const Cell* find(const CellIndex& index) const;

  /// Cells in visiting order (unspecified but deterministic for a given history).
  void for_each_cell(const std::function<void(const Cell&)>& fn) const;

  /// Points of every cell within Chebyshev distance local_radius_cells of
  /// the cell containing `center`, enumerated dz, dy, dx ascending.
  std::vector<Point3> neighbourhood_points(const Point3& center) const;

  EntropyReport table_entropy() const;

 private:
  struct Hasher {
    HashKind kind;
    std::size_t operator()(const CellIndex& i) const {
      return static_cast<std::size_t>(kind == HashKind::kShiftXor ? cell_hash(i)
                                                                   : baseline_hash(i));
    }
  };

  Cell& cell_for(const CellIndex& index, bool& created);

  MapConfig cfg_;
  HashKind hash_kind_;
  std::unordered_map<CellIndex, Cell, Hasher> table_;
};

/// Updates `map` with `edges_world`. Free-function spelling of GlobalMap::update.
inline UpdateStats map_update(GlobalMap& map, std::span<const Point3> edges_world) {
  return map.update(edges_world);
}

/// Adaptive local map: cell neighbourhood around the sensor position plus the
/// recent world-frame edge sets (oldest first).
std::shared_ptr<const LocalMap> build_local_map(const GlobalMap& map, const PoseSE3& lidar_pose,
                                                std::span<const std::vector<Point3>> recent,
                                                int epoch);

EntropyReport table_entropy(const GlobalMap& map);

/// Map dump: one `ix iy iz x y z` line per point.
void write_map_dump(const std::filesystem::path& path, const GlobalMap& map);
/// Reads a dump back as (index, point) pairs; validates that every point lies in its cell.
std::vector<std::pair<CellIndex, Point3>> read_map_dump(const std::filesystem::path& path,
                                                        const MapConfig& cfg);

}  // namespace edgelo
