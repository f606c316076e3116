#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "edgelo/geometry.hpp"
#include "edgelo/voxel_map.hpp"

namespace edgelo {

/// Stats sidecar for a map dump: cell count, point count and the entropy report, as JSON.
void write_map_stats(const std::filesystem::path& path, const GlobalMap& map);

/// Cells visited by a sensor driving around a square loop until `insertions`
/// cells are streamed, touching every cell within `reach` cells of its position.
/// Cells repeat whenever the loop revisits them.
struct RevisitStream {
  std::size_t insertions = 10000;
  int loop_half_side = 20;  // cells
  int reach = 2;            // cells
  int z_levels = 2;
};
std::vector<CellIndex> loop_revisit_cells(std::uint64_t seed, const RevisitStream& spec = {});

/// Inserts one point at the centre of every streamed cell into a unit-cell
/// map keyed by `hash` and returns its table entropy.
EntropyReport stream_entropy(const std::vector<CellIndex>& cells, HashKind hash);

/// Synthetic world-frame edge batches: vertical line features scattered along
/// a long drive, `points_per_sweep` samples per batch around the current position.
struct EdgeStream {
  std::size_t sweeps = 1000;
  std::size_t points_per_sweep = 150;
  double step = 1.0;        // m travelled per sweep
  double lateral = 40.0;    // feature spread either side of the path
  double forward = 60.0;    // feature reach ahead and behind
};
std::vector<std::vector<Point3>> synthetic_edge_stream(std::uint64_t seed, const EdgeStream& spec = {});

enum class MapBackend { kHashedCells, kMonolithicKdTree };

/// Wall-clock time of each map update over the stream, milliseconds. The
/// k-d tree backend appends the batch to one growing point array and
/// rebuilds a tree over all of it.
std::vector<double> time_map_updates(const std::vector<std::vector<Point3>>& batches,
                                     MapBackend backend, const MapConfig& cfg = {});

struct DecileSummary {
  double first_median = 0.0;
  double last_median = 0.0;
  double ratio() const { return first_median > 0.0 ? last_median / first_median : 0.0; }
};
/// Medians of the first and last tenth of `samples`. Throws InvalidArgument for fewer than 10.
DecileSummary decile_medians(const std::vector<double>& samples);

}  // namespace edgelo
