#include "edgelo/eval.hpp"

#include <cmath>
#include <numbers>

#include "edgelo/errors.hpp"

namespace edgelo {

double ate(std::span<const PoseSE3> estimated, std::span<const PoseSE3> reference) {
  if (estimated.size() != reference.size()) {
    throw InvalidArgument("ate: trajectories differ in length");
  }
  if (estimated.size() < 3) throw InvalidArgument("ate: need at least 3 frames");
  std::vector<Point3> est;
  std::vector<Point3> ref;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    est.push_back(estimated[i].translation());
    ref.push_back(reference[i].translation());
  }
  // Straight paths are collinear; any of the equally good alignments gives the same RMSE.
  const PoseSE3 align = detail::umeyama_solve(est, ref);
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) sum += (align.apply(est[i]) - ref[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(est.size()));
}

double ate(const Trajectory& estimated, const Trajectory& reference) {
  const auto e = estimated.poses();
  const auto r = reference.poses();
  return ate(std::span<const PoseSE3>(e), std::span<const PoseSE3>(r));
}

std::vector<double> path_distances(std::span<const PoseSE3> poses) {
  std::vector<double> dist;
  dist.reserve(poses.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (i > 0) acc += (poses[i].translation() - poses[i - 1].translation()).norm();
    dist.push_back(acc);
  }
  return dist;
}

RelErrorReport kitti_rel_errors(std::span<const PoseSE3> estimated,
                                std::span<const PoseSE3> reference, const RelErrorOptions& opts) {
  if (estimated.size() != reference.size()) {
    throw InvalidArgument("kitti_rel_errors: trajectories differ in length");
  }
  if (opts.step == 0) throw InvalidArgument("kitti_rel_errors: step must be >= 1");
  RelErrorReport rep;
  const std::vector<double> dist = path_distances(reference);
  constexpr double kRadToDeg = 180.0 / std::numbers::pi;
  double t_sum = 0.0;
  double r_sum = 0.0;
  for (double len : opts.lengths) {
    SegmentLengthError per{len};
    double t_len = 0.0;
    double r_len = 0.0;
    for (std::size_t first = 0; first < reference.size(); first += opts.step) {
      std::size_t last = first;
      while (last < dist.size() && dist[last] <= dist[first] + len) ++last;
      if (last >= dist.size()) break;  // later starts cannot fit either
      const PoseSE3 delta_ref = reference[first].inverse() * reference[last];
      const PoseSE3 delta_est = estimated[first].inverse() * estimated[last];
      const PoseSE3 err = delta_est.inverse() * delta_ref;
      const double t_err = err.translation().norm() / len;
      const double r_err = err.rotation_angle() / len;
      t_len += t_err;
      r_len += r_err;
      ++per.segments;
    }
    if (per.segments > 0) {
      per.translational_percent = 100.0 * t_len / static_cast<double>(per.segments);
      per.rotational_deg_per_100m = 100.0 * kRadToDeg * r_len / static_cast<double>(per.segments);
      t_sum += t_len;
      r_sum += r_len;
      rep.segments += per.segments;
    }
    rep.per_length.push_back(per);
  }
  if (rep.segments > 0) {
    rep.empty = false;
    rep.translational_percent = 100.0 * t_sum / static_cast<double>(rep.segments);
    rep.rotational_deg_per_100m = 100.0 * kRadToDeg * r_sum / static_cast<double>(rep.segments);
  }
  return rep;
}

RelErrorReport kitti_rel_errors(const Trajectory& estimated, const Trajectory& reference,
                                const RelErrorOptions& opts) {
  const auto e = estimated.poses();
  const auto r = reference.poses();
  return kitti_rel_errors(std::span<const PoseSE3>(e), std::span<const PoseSE3>(r), opts);
}

}  // namespace edgelo
