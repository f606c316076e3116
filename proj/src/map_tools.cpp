#include "edgelo/map_tools.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "edgelo/errors.hpp"
#include "edgelo/kdtree.hpp"

namespace edgelo {

void write_map_stats(const std::filesystem::path& path, const GlobalMap& map) {
  nlohmann::json j;
  j["cells"] = map.cell_count();
  j["points"] = map.point_count();
  if (map.point_count() > 0) {
    const EntropyReport rep = map.table_entropy();
    j["entropy"] = {{"buckets", rep.bucket_count},
                    {"items", rep.item_count},
                    {"occupied_buckets",
                     std::count_if(rep.probabilities.begin(), rep.probabilities.end(),
                                   [](double p) { return p > 0.0; })},
                    {"entropy_nats", rep.entropy}};
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<CellIndex> loop_revisit_cells(std::uint64_t seed, const RevisitStream& spec) {
  if (spec.loop_half_side < 1 || spec.reach < 0 || spec.z_levels < 1) {
    throw InvalidArgument("loop_revisit_cells: bad stream shape");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> offset(-spec.loop_half_side / 2, spec.loop_half_side / 2);
  std::uniform_int_distribution<int> jitter(-1, 1);
  const int cx = offset(rng);
  const int cy = offset(rng);
  const int L = spec.loop_half_side;

  std::vector<CellIndex> out;
  out.reserve(spec.insertions);
  int s = 0;
  while (out.size() < spec.insertions) {
    const int side = (s / (2 * L)) % 4;
    const int a = s % (2 * L) - L;
    int x = 0;
    int y = 0;
    switch (side) {
      case 0: x = a; y = -L; break;
      case 1: x = L; y = a; break;
      case 2: x = -a; y = L; break;
      default: x = -L; y = -a; break;
    }
    x += cx + jitter(rng);
    y += cy + jitter(rng);
    for (int z = 0; z < spec.z_levels && out.size() < spec.insertions; ++z) {
      for (int dy = -spec.reach; dy <= spec.reach && out.size() < spec.insertions; ++dy) {
        for (int dx = -spec.reach; dx <= spec.reach && out.size() < spec.insertions; ++dx) {
          out.push_back({x + dx, y + dy, z});
        }
      }
    }
    ++s;
  }
  return out;
}

EntropyReport stream_entropy(const std::vector<CellIndex>& cells, HashKind hash) {
  MapConfig cfg;
  cfg.s_xy = 1.0;
  cfg.s_z = 1.0;
  GlobalMap map(cfg, hash);
  std::vector<Point3> pts;
  pts.reserve(cells.size());
  for (const CellIndex& c : cells) pts.push_back(cell_center(c, cfg));
  map.insert_unfiltered(pts);
  return map.table_entropy();
}

std::vector<std::vector<Point3>> synthetic_edge_stream(std::uint64_t seed, const EdgeStream& spec) {
  constexpr double kPoleSpacing = 5.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto pole_offset = [&](std::int64_t gx, std::int64_t gy, int axis) {
    const std::uint64_t h = mix_coordinate(static_cast<std::int64_t>(seed) ^
                                           mix_coordinate(gx * 3 + axis) ^
                                           (mix_coordinate(gy) << 1));
    return kPoleSpacing * (0.2 + 0.6 * static_cast<double>(h >> 11) * 0x1.0p-53);
  };

  std::vector<std::vector<Point3>> batches(spec.sweeps);
  for (std::size_t i = 0; i < spec.sweeps; ++i) {
    const double x0 = static_cast<double>(i) * spec.step;
    auto& batch = batches[i];
    batch.reserve(spec.points_per_sweep);
    for (std::size_t k = 0; k < spec.points_per_sweep; ++k) {
      const double x = x0 + (2.0 * u01(rng) - 1.0) * spec.forward;
      const double y = (2.0 * u01(rng) - 1.0) * spec.lateral;
      const auto gx = static_cast<std::int64_t>(std::floor(x / kPoleSpacing));
      const auto gy = static_cast<std::int64_t>(std::floor(y / kPoleSpacing));
      batch.emplace_back(gx * kPoleSpacing + pole_offset(gx, gy, 0),
                         gy * kPoleSpacing + pole_offset(gx, gy, 1), -2.0 + 5.0 * u01(rng));
    }
  }
  return batches;
}

std::vector<double> time_map_updates(const std::vector<std::vector<Point3>>& batches,
                                     MapBackend backend, const MapConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  std::vector<double> ms;
  ms.reserve(batches.size());
  GlobalMap map(cfg);
  std::vector<Point3> all;
  for (const auto& batch : batches) {
    const auto t0 = Clock::now();
    if (backend == MapBackend::kHashedCells) {
      map.update(batch);
    } else {
      all.insert(all.end(), batch.begin(), batch.end());
      const KdTree tree(all);
      if (tree.size() != all.size()) throw Error("k-d tree lost points");
    }
    ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  return ms;
}

namespace {

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

DecileSummary decile_medians(const std::vector<double>& samples) {
  if (samples.size() < 10) throw InvalidArgument("decile_medians: need at least 10 samples");
  const std::size_t n = samples.size() / 10;
  DecileSummary s;
  s.first_median = median({samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n)});
  s.last_median = median({samples.end() - static_cast<std::ptrdiff_t>(n), samples.end()});
  return s;
}

}  // namespace edgelo
