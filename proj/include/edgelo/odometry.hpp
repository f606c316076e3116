#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "edgelo/features.hpp"
#include "edgelo/geometry.hpp"
#include "edgelo/voxel_map.hpp"

namespace edgelo {

enum class JacobianMode { kAnalytic, kNumeric };

struct OptimizerConfig {
  int outer_iterations = 2;
  int lm_max_iterations = 25;
  double lm_initial_damping = 1e-4;
  double cost_tolerance = 1e-8;  // relative decrease of an accepted step
  double step_tolerance = 1e-10;
  double eigen_ratio = 3.0;
  int knn_k = 5;
  double huber_delta = 0.3;
  bool use_weighting = true;
  JacobianMode jacobian = JacobianMode::kAnalytic;
  /// Range interval of the residual weight; should match the range filter.
  double weight_r_min = 3.0;
  double weight_r_max = 75.0;
  /// Skip an edge whose k-th nearest map point is farther than this (m).
  double max_neighbor_distance = std::numeric_limits<double>::infinity();

  void validate() const;
};

struct LineAnchors {
  Point3 n1;
  Point3 n2;
};

/// Two map points closer than this are treated as the same point when
/// choosing line anchors (the local map may hold exact duplicates).
inline constexpr double kMinAnchorSeparation = 1e-6;

/// Decides whether `neighbors` (ascending distance to the query) lie on a
/// line: the largest eigenvalue of their mean-centred scatter matrix must be
/// at least `eigen_ratio` times the second largest. On success returns the
/// nearest point and the nearest point distinct from it.
/// Throws DegenerateGeometry if all neighbours coincide.
std::optional<LineAnchors> line_fit(std::span<const Point3> neighbors, double eigen_ratio = 3.0);

/// |(p - n1) x (n1 - n2)| / |n1 - n2|. Throws DegenerateGeometry when
/// |n1 - n2| < 1e-12.
double point_to_line_distance(const Point3& p, const Point3& n1, const Point3& n2);

/// 1 - (r - r_min) / (r_max - r_min). Throws InvalidArgument outside [r_min, r_max].
double residual_weight(double range, double r_min, double r_max);

/// Huber kernel on a squared residual s: s below delta^2, 2 delta sqrt(s) - delta^2 above.
double huber_rho(double s, double delta);
/// d rho / d s.
double huber_rho_derivative(double s, double delta);

struct Correspondence {
  Point3 source;     // edge, sensor frame
  Point3 world;      // edge projected with the pose it was matched at
  Point3 n1;
  Point3 n2;
  double range = 0.0;
  double weight = 1.0;
  double distance = 0.0;
  double residual = 0.0;  // weight * distance
};

double weighted_residual(const Correspondence& corr);

/// Vector form of the residual at `pose`: weight * ((p^W - n1) x (n1 - n2)) / |n1 - n2|.
/// Its norm equals the scalar residual weight * distance.
Eigen::Vector3d residual_vector(const Correspondence& corr, const PoseSE3& pose);

/// Jacobian of residual_vector with respect to a left increment exp(delta) * pose.
Eigen::Matrix<double, 3, 6> residual_jacobian(const Correspondence& corr, const PoseSE3& pose);
/// Central finite differences of residual_vector, step h per coordinate.
Eigen::Matrix<double, 3, 6> residual_jacobian_numeric(const Correspondence& corr,
                                                      const PoseSE3& pose, double h = 1e-6);

/// Gradient of the scalar residual weight * distance with respect to the increment.
/// Undefined (returned as zero) where the distance is zero.
Eigen::Matrix<double, 1, 6> scalar_residual_jacobian(const Correspondence& corr,
                                                     const PoseSE3& pose);

std::vector<Correspondence> build_correspondences(const EdgeSet& edges, const PoseSE3& pose,
                                                  const LocalMap& local,
                                                  const OptimizerConfig& cfg);

/// 0.5 * sum rho(|residual|^2) at `pose`.
double total_cost(std::span<const Correspondence> corrs, const PoseSE3& pose, double huber_delta);

struct SolveReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<std::size_t> correspondences;  // per outer iteration
  std::vector<int> inner_iterations;         // per outer iteration
  /// Cost at the start of each outer iteration followed by the cost after each
  /// accepted LM step, one list per outer iteration.
  std::vector<std::vector<double>> accepted_costs;
  bool converged = false;
  bool degenerate = false;

  /// True if no accepted LM step increased the cost.
  bool monotone() const;
};

struct PoseEstimate {
  PoseSE3 pose;
  SolveReport report;
};

/// Minimises the robust point-to-line cost over the sensor pose with
/// `outer_iterations` rounds of (re-associate, Levenberg-Marquardt).
PoseEstimate optimize_pose(const EdgeSet& edges, const LocalMap& local,
                           const PoseSE3& initial_guess, const OptimizerConfig& cfg);

}  // namespace edgelo
