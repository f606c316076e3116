#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "edgelo/errors.hpp"
#include "edgelo/kdtree.hpp"
#include "edgelo/voxel_map.hpp"

using namespace edgelo;

namespace {

// Reference splitmix64 step (Steele, Lea and Flood constants).
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Key = std::tuple<double, double, double>;
Key key(const Point3& p) { return {p.x(), p.y(), p.z()}; }

std::multiset<Key> as_set(const std::vector<Point3>& pts) {
  std::multiset<Key> out;
  for (const auto& p : pts) out.insert(key(p));
  return out;
}

std::vector<Point3> random_points(std::mt19937_64& rng, std::size_t n, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  std::vector<Point3> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({u(rng), u(rng), u(rng)});
  return out;
}

std::vector<Neighbor> brute_knn(const std::vector<Point3>& pts, const Point3& q, std::size_t k) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    all.push_back({static_cast<std::uint32_t>(i), squared_distance(pts[i], q)});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.squared_distance < b.squared_distance;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

std::uint64_t content_hash(const Cell& c) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& p : c.points) {
    for (int a = 0; a < 3; ++a) {
      std::uint64_t bits;
      const double v = p(a);
      std::memcpy(&bits, &v, sizeof bits);
      h = (h ^ bits) * 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace

TEST(CellIndex, TableSizesExample) {
  const MapConfig cfg;
  const CellIndex c = cell_index({10, 10, 5}, cfg);
  EXPECT_EQ(c, (CellIndex{0, 0, 0}));
  EXPECT_TRUE(cell_center(c, cfg).isApprox(Point3(12.5, 12.5, 10.0)));
}

TEST(CellIndex, FloorsNegativeCoordinates) {
  const MapConfig cfg;
  const CellIndex c = cell_index({-1, 0, 0}, cfg);
  EXPECT_EQ(c.ix, std::floor(-1.0 / 25.0));
  EXPECT_EQ(c.ix, -1);
  EXPECT_DOUBLE_EQ(cell_center(c, cfg).x(), -12.5);
}

TEST(CellIndex, UpperBoundaryBelongsToNextCell) {
  EXPECT_EQ(cell_index({25, 0, 0}, MapConfig{}).ix, 1);
  EXPECT_EQ(cell_index({0, 0, 20}, MapConfig{}).iz, 1);
  EXPECT_EQ(cell_index({24.999999, 0, 0}, MapConfig{}).ix, 0);
}

TEST(CellIndex, CenterReproducesIndex) {
  std::mt19937_64 rng(1);
  const MapConfig cfg;
  for (const auto& p : random_points(rng, 5000, 1000.0)) {
    const CellIndex c = cell_index(p, cfg);
    const Point3 ctr = cell_center(c, cfg);
    EXPECT_EQ(cell_index(ctr, cfg), c);
    const Point3 oracle((c.ix + 0.5) * cfg.s_xy, (c.iy + 0.5) * cfg.s_xy, (c.iz + 0.5) * cfg.s_z);
    EXPECT_LT((ctr - oracle).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Hash, MixIsSplitmix64) {
  for (std::int64_t v : {0LL, 1LL, -1LL, 12345LL, -987654321LL}) {
    EXPECT_EQ(mix_coordinate(v), splitmix64(static_cast<std::uint64_t>(v)));
  }
}

TEST(Hash, CellHashExamples) {
  EXPECT_EQ(cell_hash({4, -2, 7}), cell_hash({4, -2, 7}));
  EXPECT_NE(cell_hash({0, 0, 0}), cell_hash({0, 0, 1}));
  EXPECT_NE(cell_hash({1, 2, 3}), cell_hash({3, 2, 1}));
  const std::uint64_t oracle =
      (splitmix64(1) ^ (splitmix64(2) << 1)) ^ (splitmix64(3) << 2);
  EXPECT_EQ(cell_hash({1, 2, 3}), oracle);
}

TEST(Hash, BaselineHashExamples) {
  EXPECT_EQ(baseline_hash({1, 2, 3}), baseline_hash({3, 2, 1}));
  EXPECT_EQ(baseline_hash({1, 2, 3}), baseline_hash({2, 3, 1}));
  EXPECT_EQ(baseline_hash({0, 0, 0}), 3 * splitmix64(0));
  EXPECT_EQ(baseline_hash({-5, 8, 2}), baseline_hash({-5, 8, 2}));
}

TEST(VoxelDownsample, OneLeafGivesCentroid) {
  const std::vector<Point3> pts{{0.1, 0.1, 0.1}, {0.3, 0.2, 0.1}, {0.2, 0.3, 0.35}};
  const auto out = voxel_downsample(pts, 0.4);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].isApprox(Point3(0.2, 0.2, 0.55 / 3.0)));
}

TEST(VoxelDownsample, SparseGridIsUnchanged) {
  std::vector<Point3> pts;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) pts.push_back({0.25 + 0.5 * i, 0.25 + 0.5 * j, -0.25});
  }
  EXPECT_EQ(as_set(voxel_downsample(pts, 0.5)), as_set(pts));
}

TEST(VoxelDownsample, OctantCentroidsInUnitCube) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point3> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  std::map<std::tuple<int, int, int>, std::pair<Point3, int>> octants;
  for (const auto& p : pts) {
    auto& [sum, n] = octants[{p.x() >= 0.5, p.y() >= 0.5, p.z() >= 0.5}];
    if (n == 0) sum = Point3::Zero();
    sum += p;
    ++n;
  }
  const auto out = voxel_downsample(pts, 0.5);
  ASSERT_LE(out.size(), 8u);
  ASSERT_EQ(out.size(), octants.size());
  for (const auto& q : out) {
    const auto& [sum, n] = octants.at({q.x() >= 0.5, q.y() >= 0.5, q.z() >= 0.5});
    EXPECT_LT((q - sum / n).norm(), 1e-12);
  }
}

TEST(MapUpdate, FirstPointCreatesCell) {
  GlobalMap map;
  const std::vector<Point3> p{{1, 2, 3}};
  const UpdateStats st = map_update(map, p);
  EXPECT_EQ(st.cells_created, 1u);
  EXPECT_EQ(st.points_added, 1u);
  EXPECT_EQ(map.cell_count(), 1u);
  ASSERT_NE(map.find({0, 0, 0}), nullptr);
  EXPECT_EQ(map.find({0, 0, 0})->points.size(), 1u);
}

TEST(MapUpdate, OverfullCellIsDownsampled) {
  MapConfig cfg;
  cfg.tau = 5;
  GlobalMap map(cfg);
  const std::vector<Point3> pts(6, Point3(3.0, 4.0, 5.0));
  const UpdateStats st = map_update(map, pts);
  EXPECT_EQ(st.cells_filtered, 1u);
  const Cell* c = map.find(cell_index(pts[0], cfg));
  ASSERT_NE(c, nullptr);
  ASSERT_EQ(c->points.size(), 1u);
  EXPECT_TRUE(c->points[0].isApprox(pts[0]));
}

TEST(MapUpdate, PointsInDifferentCellsDoNotInteract) {
  GlobalMap map;
  const std::vector<Point3> pts{{1, 1, 1}, {30, 1, 1}};
  const UpdateStats st = map_update(map, pts);
  EXPECT_EQ(st.cells_created, 2u);
  EXPECT_EQ(map.find({0, 0, 0})->points, std::vector<Point3>{pts[0]});
  EXPECT_EQ(map.find({1, 0, 0})->points, std::vector<Point3>{pts[1]});
}

TEST(MapUpdate, RejectsNonFinitePoints) {
  GlobalMap map;
  const std::vector<Point3> pts{{std::nan(""), 0, 0}};
  EXPECT_THROW(map_update(map, pts), InvalidArgument);
}

TEST(MapUpdate, PartitionInvariantUnderFuzz) {
  std::mt19937_64 rng(3);
  MapConfig cfg;
  cfg.s_xy = 5.0;
  cfg.s_z = 4.0;
  cfg.tau = 16;
  cfg.voxel_leaf = 2.5;  // at most 2x2x2 leaves per cell, so filtering always gets under tau
  GlobalMap map(cfg);
  std::uniform_int_distribution<int> batch(1, 200);
  std::size_t inserted = 0;
  while (inserted < 100000) {
    const auto pts = random_points(rng, static_cast<std::size_t>(batch(rng)), 30.0);
    map.update(pts);
    inserted += pts.size();
  }
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> seen;
  map.for_each_cell([&](const Cell& c) {
    EXPECT_TRUE(seen.insert({c.index.ix, c.index.iy, c.index.iz}).second);
    EXPECT_LE(c.points.size(), cfg.tau);
    for (const auto& p : c.points) EXPECT_EQ(cell_index(p, cfg), c.index);
  });
}

TEST(MapUpdate, UpdateTouchesOnlyItsCell) {
  std::mt19937_64 rng(4);
  MapConfig cfg;
  cfg.tau = 8;
  GlobalMap map(cfg);
  map.update(random_points(rng, 3000, 60.0));
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::uint64_t> before;
  map.for_each_cell([&](const Cell& c) { before[{c.index.ix, c.index.iy, c.index.iz}] = content_hash(c); });

  std::uniform_real_distribution<double> in_cell(0.5, 24.5);
  std::vector<Point3> local;
  for (int i = 0; i < 50; ++i) local.push_back({in_cell(rng), in_cell(rng), in_cell(rng) * 0.8});
  map.update(local);
  std::size_t changed = 0;
  map.for_each_cell([&](const Cell& c) {
    const auto k = std::make_tuple(c.index.ix, c.index.iy, c.index.iz);
    if (c.index == CellIndex{0, 0, 0}) return;
    ASSERT_TRUE(before.count(k));
    changed += before.at(k) != content_hash(c);
  });
  EXPECT_EQ(changed, 0u);
}

TEST(LocalMap, EmptyMapAndNoRecentSets) {
  const GlobalMap map;
  const auto local = build_local_map(map, PoseSE3::identity(), {}, 0);
  EXPECT_TRUE(local->empty());
}

TEST(LocalMap, OwnCellPlusRecentSets) {
  GlobalMap map;
  const std::vector<Point3> cell_pts{{1, 1, 1}, {2, 2, 2}};
  map.update(cell_pts);
  const std::vector<std::vector<Point3>> recent{{{100, 0, 0}}, {{0, 100, 0}, {0, 0, 100}}};
  const auto local = build_local_map(map, PoseSE3::from_translation({5, 5, 5}), recent, 3);
  EXPECT_EQ(local->epoch(), 3);
  EXPECT_EQ(as_set(local->points()),
            as_set({{1, 1, 1}, {2, 2, 2}, {100, 0, 0}, {0, 100, 0}, {0, 0, 100}}));
}

TEST(LocalMap, CornerPoseCollectsAll27Neighbours) {
  const MapConfig cfg;
  GlobalMap map(cfg);
  std::vector<Point3> expected;
  std::vector<Point3> far;
  for (int dz = -2; dz <= 2; ++dz) {
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) {
        const Point3 p = cell_center({dx, dy, dz}, cfg) + Point3(0.3, -0.2, 0.1);
        if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) <= 1) {
          expected.push_back(p);
        } else {
          far.push_back(p);
        }
      }
    }
  }
  map.update(expected);
  map.update(far);
  // Pose exactly on the lower corner of cell (0,0,0).
  const auto local = build_local_map(map, PoseSE3::from_translation({0, 0, 0}), {}, 0);
  EXPECT_EQ(expected.size(), 27u);
  EXPECT_EQ(as_set(local->points()), as_set(expected));
}

TEST(LocalMap, MatchesBruteForceNeighbourhoodUnion) {
  std::mt19937_64 rng(5);
  MapConfig cfg;
  cfg.s_xy = 6.0;
  cfg.s_z = 5.0;
  for (int trial = 0; trial < 30; ++trial) {
    GlobalMap map(cfg);
    const auto pts = random_points(rng, 2000, 25.0);
    map.update(pts);
    std::vector<std::vector<Point3>> recent{random_points(rng, 20, 25.0), random_points(rng, 20, 25.0),
                                            random_points(rng, 20, 25.0)};
    const Point3 pos = random_points(rng, 1, 20.0)[0];
    const CellIndex c = cell_index(pos, cfg);
    std::vector<Point3> oracle;
    map.for_each_cell([&](const Cell& cell) {
      const auto d = std::max({std::abs(cell.index.ix - c.ix), std::abs(cell.index.iy - c.iy),
                               std::abs(cell.index.iz - c.iz)});
      if (d <= cfg.local_radius_cells) oracle.insert(oracle.end(), cell.points.begin(), cell.points.end());
    });
    for (const auto& r : recent) oracle.insert(oracle.end(), r.begin(), r.end());
    const auto local = build_local_map(map, PoseSE3::from_translation(pos), recent, trial);
    EXPECT_EQ(as_set(local->points()), as_set(oracle));
  }
}

TEST(Knn, SinglePointIsShortForLargerK) {
  const LocalMap local({{1, 2, 3}}, 0);
  for (std::size_t k : {1u, 2u, 5u}) {
    const auto r = local.knn({7, 7, 7}, k);
    ASSERT_EQ(r.neighbors.size(), 1u);
    EXPECT_EQ(r.neighbors[0].index, 0u);
    EXPECT_EQ(r.short_result, k > 1);
  }
}

TEST(Knn, QueryOnStoredPointComesFirst) {
  std::mt19937_64 rng(6);
  const auto pts = random_points(rng, 100, 10.0);
  const LocalMap local(pts, 0);
  const auto r = local.knn(pts[42], 5);
  EXPECT_EQ(r.neighbors[0].index, 42u);
  EXPECT_EQ(r.neighbors[0].squared_distance, 0.0);
}

TEST(Knn, TwoHundredPointsMatchBruteForce) {
  std::mt19937_64 rng(7);
  const auto pts = random_points(rng, 200, 10.0);
  const LocalMap local(pts, 0);
  for (const auto& q : random_points(rng, 50, 12.0)) {
    const auto got = local.knn(q, 5).neighbors;
    const auto want = brute_knn(pts, q, 5);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].index, want[i].index);
      EXPECT_EQ(got[i].squared_distance, want[i].squared_distance);
    }
  }
}

TEST(Knn, RandomTrialsWithDuplicatesMatchBruteForce) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> size(1, 500), kk(1, 12);
  std::uniform_int_distribution<int> grid(-4, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point3> pts;
    const std::size_t n = size(rng);
    // Integer lattice points produce many exact distance ties.
    for (std::size_t i = 0; i < n; ++i) pts.push_back(Point3(grid(rng), grid(rng), grid(rng)) * 0.5);
    const LocalMap local(pts, 0);
    for (int q = 0; q < 10; ++q) {
      const Point3 query = Point3(grid(rng), grid(rng), grid(rng)) * 0.25;
      const std::size_t k = kk(rng);
      const auto got = local.knn(query, k);
      const auto want = brute_knn(pts, query, k);
      EXPECT_EQ(got.short_result, n < k);
      ASSERT_EQ(got.neighbors.size(), want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(got.neighbors[i].index, want[i].index) << "trial " << trial;
      }
    }
  }
}

TEST(Entropy, OneBucketGivesZero) {
  GlobalMap single;
  single.update(std::vector<Point3>{{1, 1, 1}, {2, 2, 2}, {3, 3, 3}});
  EXPECT_EQ(table_entropy(single).entropy, 0.0);

  // Permuted indices collide under the additive hash and land in one bucket.
  MapConfig unit;
  unit.s_xy = unit.s_z = 1.0;
  GlobalMap additive(unit, HashKind::kAdditive);
  additive.insert_unfiltered(std::vector<Point3>{{1.5, 2.5, 3.5}, {3.5, 2.5, 1.5}, {2.5, 1.5, 3.5}});
  const EntropyReport rep = table_entropy(additive);
  EXPECT_EQ(additive.cell_count(), 3u);
  EXPECT_NEAR(rep.entropy, 0.0, 1e-15);
}

TEST(Entropy, EqualCountsInDistinctBucketsGiveLogN) {
  MapConfig unit;
  unit.s_xy = unit.s_z = 1.0;
  GlobalMap map(unit);
  std::vector<Point3> pts;
  for (int i = 0; i < 4; ++i) {
    for (int rep = 0; rep < 3; ++rep) pts.push_back({i + 0.5, 0.25 * rep + 0.1, 0.5});
  }
  map.insert_unfiltered(pts);
  const EntropyReport rep = map.table_entropy();
  const auto occupied = std::count_if(rep.probabilities.begin(), rep.probabilities.end(),
                                      [](double p) { return p > 0.0; });
  ASSERT_EQ(occupied, 4);
  EXPECT_NEAR(rep.entropy, std::log(4.0), 1e-12);
}

TEST(Entropy, BoundsAndNormalisation) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    GlobalMap map;
    map.update(random_points(rng, 500, 300.0));
    const EntropyReport rep = map.table_entropy();
    double sum = 0.0, h = 0.0;
    for (double p : rep.probabilities) {
      sum += p;
      if (p > 0) h -= p * std::log(p);
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_NEAR(rep.entropy, h, 1e-12);
    EXPECT_GE(rep.entropy, 0.0);
    EXPECT_LE(rep.entropy, std::log(static_cast<double>(rep.bucket_count)) + 1e-12);
  }
}

TEST(MapDump, RoundTrip) {
  std::mt19937_64 rng(10);
  GlobalMap map;
  map.update(random_points(rng, 800, 100.0));
  const auto path = std::filesystem::temp_directory_path() / "edgelo_map_dump.txt";
  write_map_dump(path, map);
  const auto entries = read_map_dump(path, map.config());
  EXPECT_EQ(entries.size(), map.point_count());
  for (const auto& [idx, p] : entries) {
    const Cell* c = map.find(idx);
    ASSERT_NE(c, nullptr);
    EXPECT_NE(std::find(c->points.begin(), c->points.end(), p), c->points.end());
  }
}
