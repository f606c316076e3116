#pragma once

#include <cstddef>
#include <vector>

#include "edgelo/geometry.hpp"
#include "edgelo/sweep_io.hpp"

namespace edgelo {

struct EdgePoint {
  Point3 position;         // sensor frame
  double curvature = 0.0;
  double range = 0.0;      // |position|, cached for the residual weight
  int beam = 0;
  int sector = 0;
  std::size_t index = 0;   // position within its scan
};

struct EdgeSet {
  std::vector<EdgePoint> edges;  // sorted by (beam, sector, index)
  int sweep_index = 0;
};

/// Half-width m of the curvature neighbourhood: m points on each side.
struct CurvatureWindow {
  int half_width = 5;
};

struct FeatureConfig {
  int sectors = 8;
  int edges_per_sector = 10;
  int curvature_half_width = 5;
  /// Non-maxima suppression radius in scan indices; negative means "same as
  /// curvature_half_width".
  int suppression_half_width = -1;
  double min_curvature = 0.01;
  bool wrap_around = false;
  /// Use |sum(p_j - p_k)| instead of sum |p_j - p_k| in the numerator.
  bool loam_style_curvature = false;

  void validate() const;
  int suppression() const {
    return suppression_half_width < 0 ? curvature_half_width : suppression_half_width;
  }
};

/// Curvature of point `index` in `scan`:
///   c = 1 / (2m |p_j|) * sum_{k in window, k != j} |p_j - p_k|
/// Throws InvalidArgument if the window does not fit and wrap-around is off,
/// or if the scan is too short to hold a full window.
double curvature(const Scan& scan, std::size_t index, CurvatureWindow window,
                 bool wrap_around = false, bool loam_style = false);

/// Sector of an azimuth (rad, any range) when [-pi, pi) is split into `sectors` parts.
int azimuth_sector(double azimuth, int sectors);

EdgeSet extract_edges(const Sweep& sweep, const FeatureConfig& cfg);

}  // namespace edgelo
