#include "edgelo/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "edgelo/errors.hpp"

namespace edgelo {

void FeatureConfig::validate() const {
  if (sectors < 1) throw InvalidArgument("sectors must be >= 1");
  if (edges_per_sector < 0) throw InvalidArgument("edges_per_sector must be >= 0");
  if (curvature_half_width < 1) throw InvalidArgument("curvature_half_width must be >= 1");
  if (min_curvature < 0.0) throw InvalidArgument("min_curvature must be >= 0");
}

double curvature(const Scan& scan, std::size_t index, CurvatureWindow window, bool wrap_around,
                 bool loam_style) {
  const auto m = static_cast<std::size_t>(window.half_width);
  const std::size_t n = scan.points.size();
  if (window.half_width < 1) throw InvalidArgument("curvature window half-width must be >= 1");
  if (index >= n) throw InvalidArgument("curvature: index out of range");
  if (n < 2 * m + 1) throw InvalidArgument("curvature: scan shorter than the window");
  if (!wrap_around && (index < m || index + m >= n)) {
    throw InvalidArgument("curvature: insufficient neighbours around index " +
                          std::to_string(index));
  }
  const Point3 pj = scan.points[index].position();
  double sum_norm = 0.0;
  Point3 sum_diff = Point3::Zero();
  for (std::size_t off = 1; off <= m; ++off) {
    const Point3 before = scan.points[(index + n - off) % n].position();
    const Point3 after = scan.points[(index + off) % n].position();
    if (loam_style) {
      sum_diff += (pj - before) + (pj - after);
    } else {
      sum_norm += (pj - before).norm() + (pj - after).norm();
    }
  }
  const double numerator = loam_style ? sum_diff.norm() : sum_norm;
  return numerator / (2.0 * static_cast<double>(m) * pj.norm());
}

int azimuth_sector(double azimuth, int sectors) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(azimuth + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  const int s = static_cast<int>(std::floor(a / (two_pi / sectors)));
  return std::clamp(s, 0, sectors - 1);
}

namespace {

struct Candidate {
  std::size_t index;
  double curvature;
};

std::size_t index_distance(std::size_t a, std::size_t b, std::size_t n, bool wrap) {
  const std::size_t d = a > b ? a - b : b - a;
  return wrap ? std::min(d, n - d) : d;
}

void select_scan_edges(const Scan& scan, const FeatureConfig& cfg, std::vector<EdgePoint>& out) {
  const std::size_t n = scan.points.size();
  const auto m = static_cast<std::size_t>(cfg.curvature_half_width);
  if (n < 2 * m + 1) return;

  const std::size_t first = cfg.wrap_around ? 0 : m;
  const std::size_t last = cfg.wrap_around ? n : n - m;
  std::vector<std::vector<Candidate>> by_sector(static_cast<std::size_t>(cfg.sectors));
  for (std::size_t j = first; j < last; ++j) {
    const double c = curvature(scan, j, {cfg.curvature_half_width}, cfg.wrap_around,
                               cfg.loam_style_curvature);
    if (!std::isfinite(c) || c < cfg.min_curvature) continue;
    const int s = azimuth_sector(azimuth_rad(scan.points[j]), cfg.sectors);
    by_sector[static_cast<std::size_t>(s)].push_back({j, c});
  }

  const auto suppress = static_cast<std::size_t>(std::max(cfg.suppression(), 0));
  std::vector<std::size_t> accepted;
  for (int s = 0; s < cfg.sectors; ++s) {
    auto& cands = by_sector[static_cast<std::size_t>(s)];
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.curvature != b.curvature) return a.curvature > b.curvature;
      return a.index < b.index;
    });
    int taken = 0;
    for (const auto& c : cands) {
      if (taken >= cfg.edges_per_sector) break;
      const bool blocked = std::any_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
        return index_distance(a, c.index, n, cfg.wrap_around) <= suppress;
      });
      if (blocked) continue;
      accepted.push_back(c.index);
      ++taken;
      const RawPoint& rp = scan.points[c.index];
      out.push_back({rp.position(), c.curvature, rp.range(), scan.beam, s, c.index});
    }
  }
}

}  // namespace

EdgeSet extract_edges(const Sweep& sweep, const FeatureConfig& cfg) {
  cfg.validate();
  EdgeSet set;
  set.sweep_index = sweep.index;
  for (const auto& scan : sweep.scans) select_scan_edges(scan, cfg, set.edges);
  std::stable_sort(set.edges.begin(), set.edges.end(), [](const EdgePoint& a, const EdgePoint& b) {
    if (a.beam != b.beam) return a.beam < b.beam;
    if (a.sector != b.sector) return a.sector < b.sector;
    return a.index < b.index;
  });
  return set;
}

}  // namespace edgelo
