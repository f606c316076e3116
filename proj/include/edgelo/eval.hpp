#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "edgelo/geometry.hpp"
#include "edgelo/trajectory.hpp"

namespace edgelo {

/// Absolute trajectory error: RMSE of position differences after rigidly
/// aligning `estimated` onto `reference`. Throws InvalidArgument on length
/// mismatch or fewer than 3 frames.
double ate(const Trajectory& estimated, const Trajectory& reference);
double ate(std::span<const PoseSE3> estimated, std::span<const PoseSE3> reference);

struct SegmentLengthError {
  double length = 0.0;                   // m
  std::size_t segments = 0;
  double translational_percent = 0.0;
  double rotational_deg_per_100m = 0.0;
};

struct RelErrorReport {
  bool empty = true;  // no segment of any evaluated length fits the path
  std::size_t segments = 0;
  double translational_percent = 0.0;
  double rotational_deg_per_100m = 0.0;
  std::vector<SegmentLengthError> per_length;
};

struct RelErrorOptions {
  std::vector<double> lengths{100, 200, 300, 400, 500, 600, 700, 800};
  std::size_t step = 1;  // stride between segment start frames
};

/// Segment-based relative errors: for every start frame and segment length L,
/// compares the relative motion over the first frame whose path distance
/// exceeds L. Translational error is |t_err| / L (percent); rotational error
/// is the angle of the error rotation per metre, reported per 100 m.
RelErrorReport kitti_rel_errors(std::span<const PoseSE3> estimated,
                                std::span<const PoseSE3> reference,
                                const RelErrorOptions& opts = {});
RelErrorReport kitti_rel_errors(const Trajectory& estimated, const Trajectory& reference,
                                const RelErrorOptions& opts = {});

/// Cumulative path length along the positions of `poses`.
std::vector<double> path_distances(std::span<const PoseSE3> poses);

}  // namespace edgelo
