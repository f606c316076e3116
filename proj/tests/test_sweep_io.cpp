#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "edgelo/errors.hpp"
#include "edgelo/sweep_io.hpp"

using namespace edgelo;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "edgelo_sweep_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

RawPoint at_elevation(double elev_deg, double azimuth, double range) {
  const double e = elev_deg * std::numbers::pi / 180.0;
  return {range * std::cos(e) * std::cos(azimuth), range * std::cos(e) * std::sin(azimuth),
          range * std::sin(e), 0.0, std::nullopt};
}

std::vector<RawPoint> random_cloud(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> el(-30.0, 10.0), az(-3.14, 3.14), r(0.5, 100.0);
  std::vector<RawPoint> out;
  for (int i = 0; i < n; ++i) out.push_back(at_elevation(el(rng), az(rng), r(rng)));
  return out;
}

}  // namespace

TEST(ReadKittiBin, EmptyFileGivesNoPoints) {
  const auto p = temp_file("empty.bin");
  write_bytes(p, {});
  EXPECT_TRUE(read_kitti_bin(p).empty());
}

TEST(ReadKittiBin, HandCraftedRecord) {
  // Little-endian IEEE-754 float32: 1.0, 2.0, 3.0, 0.5
  const auto p = temp_file("one.bin");
  write_bytes(p, {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0x40,
                  0x00, 0x00, 0x40, 0x40, 0x00, 0x00, 0x00, 0x3f});
  const auto pts = read_kitti_bin(p);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].x, 1.0);
  EXPECT_EQ(pts[0].y, 2.0);
  EXPECT_EQ(pts[0].z, 3.0);
  EXPECT_EQ(pts[0].intensity, 0.5);
  EXPECT_FALSE(pts[0].ring.has_value());
}

TEST(ReadKittiBin, MalformedLengthIsRejected) {
  const auto p = temp_file("bad.bin");
  write_bytes(p, std::vector<unsigned char>(17, 0));
  EXPECT_THROW(read_kitti_bin(p), FormatError);
}

TEST(ReadKittiBin, MissingFileIsIoError) {
  EXPECT_THROW(read_kitti_bin(temp_file("does_not_exist.bin")), IoError);
}

TEST(ReadKittiBin, RoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-80.0f, 80.0f);
  std::vector<RawPoint> pts;
  for (int i = 0; i < 500; ++i) {
    pts.push_back({u(rng), u(rng), u(rng), std::abs(u(rng)) / 80.0f, std::nullopt});
  }
  const auto p = temp_file("rt.bin");
  write_kitti_bin(p, pts);
  EXPECT_EQ(fs::file_size(p), 16u * pts.size());
  const auto back = read_kitti_bin(p);
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(back[i].x, pts[i].x);
    EXPECT_EQ(back[i].y, pts[i].y);
    EXPECT_EQ(back[i].z, pts[i].z);
    EXPECT_EQ(back[i].intensity, pts[i].intensity);
  }
}

TEST(CsvPoints, RoundTripWithRing) {
  std::vector<RawPoint> pts{{1.5, -2.25, 3.0, 0.5, 4}, {0.1, 0.2, 0.3, 0.0, 0}};
  const auto p = temp_file("pts.csv");
  write_csv_points(p, pts, true);
  const auto back = read_csv_points(p);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].x, 1.5);
  EXPECT_EQ(back[0].ring, 4);
  EXPECT_EQ(back[1].z, 0.3);
  EXPECT_EQ(back[1].ring, 0);
}

TEST(CsvPoints, BadHeaderIsFormatError) {
  const auto p = temp_file("bad.csv");
  std::ofstream(p) << "a,b,c\n1,2,3\n";
  EXPECT_THROW(read_csv_points(p), FormatError);
}

TEST(SplitScans, RingFieldSelectsScan) {
  std::vector<RawPoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({10.0 + i, 1.0, 0.0, 0.0, 7});
  const Sweep s = split_scans(pts, BeamModel{});
  ASSERT_EQ(s.scans.size(), 1u);
  EXPECT_EQ(s.scans[0].beam, 7);
  EXPECT_EQ(s.scans[0].points.size(), 10u);
  EXPECT_EQ(s.dropped, 0u);
}

TEST(SplitScans, Hdl64MidBinElevation) {
  const BeamModel hdl;  // 64 beams over [-24.8, 2.0]
  const double width = (2.0 - -24.8) / 64.0;
  const double mid10 = -24.8 + 10.5 * width;
  const Sweep s = split_scans(std::vector<RawPoint>{at_elevation(mid10, 0.3, 20.0)}, hdl);
  ASSERT_EQ(s.scans.size(), 1u);
  EXPECT_EQ(s.scans[0].beam, 10);
  EXPECT_EQ(hdl.beam_for_elevation(mid10), 10);
}

TEST(SplitScans, SteepPointIsDropped) {
  const RawPoint steep{0.1, 0.1, 10.0, 0.0, std::nullopt};
  EXPECT_GT(elevation_deg(steep), 89.0);
  const Sweep s = split_scans(std::vector<RawPoint>{steep}, BeamModel{});
  EXPECT_TRUE(s.scans.empty());
  EXPECT_EQ(s.dropped, 1u);
}

TEST(SplitScans, BinEdgesAreClosedAtTheTop) {
  const BeamModel hdl;
  EXPECT_EQ(hdl.beam_for_elevation(-24.8), 0);
  EXPECT_EQ(hdl.beam_for_elevation(2.0), 63);
  EXPECT_FALSE(hdl.beam_for_elevation(2.0001).has_value());
  EXPECT_FALSE(hdl.beam_for_elevation(-24.8001).has_value());
}

TEST(SplitScans, PartitionCountsEveryPoint) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pts = random_cloud(seed, 2000);
    const Sweep s = split_scans(pts, BeamModel{});
    std::size_t total = s.dropped;
    for (const auto& scan : s.scans) total += scan.points.size();
    EXPECT_EQ(total, pts.size());
    for (std::size_t i = 1; i < s.scans.size(); ++i) {
      EXPECT_LT(s.scans[i - 1].beam, s.scans[i].beam);
    }
  }
}

TEST(SplitScans, SortByAzimuthOrdersEachScan) {
  BeamModel m;
  m.sort_by_azimuth = true;
  const Sweep s = split_scans(random_cloud(5, 3000), m);
  for (const auto& scan : s.scans) {
    for (std::size_t i = 1; i < scan.points.size(); ++i) {
      EXPECT_LE(azimuth_rad(scan.points[i - 1]), azimuth_rad(scan.points[i]));
    }
  }
}

TEST(RangeFilter, TableBoundaries) {
  Sweep s;
  s.scans.push_back({0, {{2.9, 0, 0, 0, 0}, {3.0, 0, 0, 0, 0}, {75.0, 0, 0, 0, 0},
                         {75.1, 0, 0, 0, 0}, {40.0, 0, 0, 0, 0}}});
  const Sweep f = range_filter(s, 3.0, 75.0);
  ASSERT_EQ(f.scans.size(), 1u);
  ASSERT_EQ(f.scans[0].points.size(), 3u);
  EXPECT_EQ(f.scans[0].points[0].x, 3.0);
  EXPECT_EQ(f.scans[0].points[1].x, 75.0);
  EXPECT_EQ(f.scans[0].points[2].x, 40.0);
}

TEST(RangeFilter, EmptySweep) {
  EXPECT_TRUE(range_filter(Sweep{}, 3.0, 75.0).scans.empty());
}

TEST(RangeFilter, RejectsBadBounds) {
  EXPECT_THROW(range_filter(Sweep{}, 5.0, 5.0), InvalidArgument);
  EXPECT_THROW(range_filter(Sweep{}, -1.0, 5.0), InvalidArgument);
}

TEST(RangeFilter, IdempotentAndWithinBounds) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Sweep s = split_scans(random_cloud(seed, 2000), BeamModel{});
    const Sweep once = range_filter(s, 3.0, 75.0);
    const Sweep twice = range_filter(once, 3.0, 75.0);
    ASSERT_EQ(once.scans.size(), twice.scans.size());
    for (std::size_t i = 0; i < once.scans.size(); ++i) {
      ASSERT_EQ(once.scans[i].points.size(), twice.scans[i].points.size());
      for (std::size_t j = 0; j < once.scans[i].points.size(); ++j) {
        const double r = once.scans[i].points[j].range();
        EXPECT_GE(r, 3.0);
        EXPECT_LE(r, 75.0);
        EXPECT_EQ(once.scans[i].points[j].x, twice.scans[i].points[j].x);
      }
    }
  }
}
