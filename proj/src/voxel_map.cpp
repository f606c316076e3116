#include "edgelo/voxel_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "edgelo/errors.hpp"

namespace edgelo {

void MapConfig::validate() const {
  if (!(s_xy > 0.0) || !(s_z > 0.0)) throw InvalidArgument("cell sizes must be positive");
  if (tau < 1) throw InvalidArgument("tau must be >= 1");
  if (!(voxel_leaf > 0.0)) throw InvalidArgument("voxel_leaf must be positive");
  if (local_radius_cells < 0) throw InvalidArgument("local_radius_cells must be >= 0");
}

std::uint64_t mix_coordinate(std::int64_t v) {
  std::uint64_t z = static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t cell_hash(const CellIndex& i) {
  return (mix_coordinate(i.ix) ^ (mix_coordinate(i.iy) << 1)) ^ (mix_coordinate(i.iz) << 2);
}

std::uint64_t baseline_hash(const CellIndex& i) {
  return mix_coordinate(i.ix) + mix_coordinate(i.iy) + mix_coordinate(i.iz);
}

CellIndex cell_index(const Point3& p, const MapConfig& cfg) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cfg.s_xy)),
          static_cast<std::int64_t>(std::floor(p.y() / cfg.s_xy)),
          static_cast<std::int64_t>(std::floor(p.z() / cfg.s_z))};
}

Point3 cell_center(const CellIndex& i, const MapConfig& cfg) {
  return {static_cast<double>(i.ix) * cfg.s_xy + 0.5 * cfg.s_xy,
          static_cast<double>(i.iy) * cfg.s_xy + 0.5 * cfg.s_xy,
          static_cast<double>(i.iz) * cfg.s_z + 0.5 * cfg.s_z};
}

std::vector<Point3> voxel_downsample(std::span<const Point3> points, double leaf) {
  if (!(leaf > 0.0)) throw InvalidArgument("voxel_downsample: leaf must be positive");
  using Key = std::array<std::int64_t, 3>;
  std::vector<std::pair<Key, std::uint32_t>> keyed;
  keyed.reserve(points.size());
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const Point3& p = points[i];
    keyed.push_back({Key{static_cast<std::int64_t>(std::floor(p.x() / leaf)),
                         static_cast<std::int64_t>(std::floor(p.y() / leaf)),
                         static_cast<std::int64_t>(std::floor(p.z() / leaf))},
                     i});
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<Point3> out;
  for (std::size_t b = 0; b < keyed.size();) {
    std::size_t e = b;
    Point3 sum = Point3::Zero();
    Point3 lo = points[keyed[b].second];
    Point3 hi = lo;
    while (e < keyed.size() && keyed[e].first == keyed[b].first) {
      const Point3& p = points[keyed[e].second];
      sum += p;
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
      ++e;
    }
    // Clamping to the members' bounding box only removes rounding overshoot,
    // so the centroid stays inside any box that holds all members.
    out.push_back((sum / static_cast<double>(e - b)).cwiseMax(lo).cwiseMin(hi));
    b = e;
  }
  return out;
}

LocalMap::LocalMap(std::vector<Point3> points, int epoch)
    : tree_(std::move(points)), epoch_(epoch) {}

LocalMap::KnnResult LocalMap::knn(const Point3& query, std::size_t k) const {
  if (k < 1) throw InvalidArgument("knn: k must be >= 1");
  KnnResult r;
  r.neighbors = tree_.knn(query, k);
  r.short_result = r.neighbors.size() < k;
  return r;
}

GlobalMap::GlobalMap(MapConfig cfg, HashKind hash)
    : cfg_(cfg), hash_kind_(hash), table_(0, Hasher{hash}) {
  cfg_.validate();
}

std::size_t GlobalMap::point_count() const {
  std::size_t n = 0;
  for (const auto& [idx, cell] : table_) n += cell.points.size();
  return n;
}

Cell& GlobalMap::cell_for(const CellIndex& index, bool& created) {
  auto [it, inserted] = table_.try_emplace(index);
  created = inserted;
  if (inserted) {
    it->second.index = index;
    it->second.center = cell_center(index, cfg_);
  }
  return it->second;
}

UpdateStats GlobalMap::update(std::span<const Point3> points_world) {
  UpdateStats stats;
  std::vector<Cell*> touched;
  for (const Point3& p : points_world) {
    if (!p.allFinite()) throw InvalidArgument("map update: non-finite point");
    bool created = false;
    Cell& cell = cell_for(cell_index(p, cfg_), created);
    if (created) ++stats.cells_created;
    if (std::find(touched.begin(), touched.end(), &cell) == touched.end()) {
      touched.push_back(&cell);
    }
    cell.points.push_back(p);
    ++stats.points_added;
  }
  for (Cell* cell : touched) {
    if (cell->points.size() <= cfg_.tau) continue;
    cell->points = voxel_downsample(cell->points, cfg_.voxel_leaf);
    ++stats.cells_filtered;
  }
  return stats;
}

void GlobalMap::insert_unfiltered(std::span<const Point3> points_world) {
  for (const Point3& p : points_world) {
    bool created = false;
    cell_for(cell_index(p, cfg_), created).points.push_back(p);
  }
}

const Cell* GlobalMap::find(const CellIndex& index) const {
  const auto it = table_.find(index);
  return it == table_.end() ? nullptr : &it->second;
}

void GlobalMap::for_each_cell(const std::function<void(const Cell&)>& fn) const {
  for (const auto& [idx, cell] : table_) fn(cell);
}

std::vector<Point3> GlobalMap::neighbourhood_points(const Point3& center) const {
  const CellIndex c = cell_index(center, cfg_);
  const std::int64_t r = cfg_.local_radius_cells;
  std::vector<Point3> out;
  for (std::int64_t dz = -r; dz <= r; ++dz) {
    for (std::int64_t dy = -r; dy <= r; ++dy) {
      for (std::int64_t dx = -r; dx <= r; ++dx) {
        const Cell* cell = find({c.ix + dx, c.iy + dy, c.iz + dz});
        if (cell) out.insert(out.end(), cell->points.begin(), cell->points.end());
      }
    }
  }
  return out;
}

EntropyReport GlobalMap::table_entropy() const {
  if (table_.empty()) throw InvalidArgument("table_entropy: map is empty");
  EntropyReport rep;
  rep.bucket_count = table_.bucket_count();
  std::vector<std::size_t> counts(rep.bucket_count, 0);
  for (std::size_t b = 0; b < rep.bucket_count; ++b) {
    for (auto it = table_.begin(b); it != table_.end(b); ++it) {
      counts[b] += it->second.points.size();
    }
    rep.item_count += counts[b];
  }
  if (rep.item_count == 0) throw InvalidArgument("table_entropy: map holds no points");
  rep.probabilities.resize(rep.bucket_count);
  const double total = static_cast<double>(rep.item_count);
  for (std::size_t b = 0; b < rep.bucket_count; ++b) {
    const double p = static_cast<double>(counts[b]) / total;
    rep.probabilities[b] = p;
    if (p > 0.0) rep.entropy -= p * std::log(p);
  }
  return rep;
}

std::shared_ptr<const LocalMap> build_local_map(const GlobalMap& map, const PoseSE3& lidar_pose,
                                                std::span<const std::vector<Point3>> recent,
                                                int epoch) {
  std::vector<Point3> pts = map.neighbourhood_points(lidar_pose.translation());
  for (const auto& set : recent) pts.insert(pts.end(), set.begin(), set.end());
  return std::make_shared<const LocalMap>(std::move(pts), epoch);
}

EntropyReport table_entropy(const GlobalMap& map) { return map.table_entropy(); }

void write_map_dump(const std::filesystem::path& path, const GlobalMap& map) {
  std::vector<const Cell*> cells;
  map.for_each_cell([&](const Cell& c) { cells.push_back(&c); });
  std::sort(cells.begin(), cells.end(), [](const Cell* a, const Cell* b) {
    return std::tie(a->index.ix, a->index.iy, a->index.iz) <
           std::tie(b->index.ix, b->index.iy, b->index.iz);
  });
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  char buf[256];
  for (const Cell* c : cells) {
    for (const Point3& p : c->points) {
      const int n = std::snprintf(buf, sizeof(buf), "%lld %lld %lld %.17g %.17g %.17g\n",
                                  static_cast<long long>(c->index.ix),
                                  static_cast<long long>(c->index.iy),
                                  static_cast<long long>(c->index.iz), p.x(), p.y(), p.z());
      out.write(buf, n);
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::pair<CellIndex, Point3>> read_map_dump(const std::filesystem::path& path,
                                                        const MapConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::pair<CellIndex, Point3>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    CellIndex idx;
    double x = 0, y = 0, z = 0;
    if (!(ss >> idx.ix >> idx.iy >> idx.iz >> x >> y >> z)) {
      throw FormatError(path.string() + ": malformed line " + std::to_string(line_no));
    }
    const Point3 p(x, y, z);
    if (!(cell_index(p, cfg) == idx)) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        " stores a point outside its cell (wrong cell sizes?)");
    }
    out.emplace_back(idx, p);
  }
  return out;
}

}  // namespace edgelo
