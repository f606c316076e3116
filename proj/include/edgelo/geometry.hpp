#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace edgelo {

using Point3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Minimal 6-dof increment: angle-axis rotation (rad) followed by translation (m).
struct PoseDelta6 {
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Vec6 as_vector() const;
  static PoseDelta6 from_vector(const Vec6& v);
};

/// Rigid transform T^A_B: maps points expressed in frame B into frame A as
/// p^A = R p^B + t. Immutable value type.
class PoseSE3 {
 public:
  PoseSE3() = default;
  /// `rotation` must be orthonormal with det +1 (not checked).
  PoseSE3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static PoseSE3 identity() { return {}; }
  static PoseSE3 from_translation(const Eigen::Vector3d& t);
  static PoseSE3 from_angle_axis(const Eigen::Vector3d& rotation_vector,
                                 const Eigen::Vector3d& t = Eigen::Vector3d::Zero());
  /// Builds a pose from the row-major upper 3x4 block (KITTI pose layout).
  static PoseSE3 from_row_major_3x4(std::span<const double, 12> values);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  PoseSE3 compose(const PoseSE3& other) const;
  PoseSE3 inverse() const;

  /// Left-multiplicative update exp(delta) * this.
  PoseSE3 retract_left(const PoseDelta6& delta) const;

  Eigen::Matrix4d matrix() const;
  std::array<double, 12> row_major_3x4() const;

  /// Rotation angle of this pose in radians, in [0, pi].
  double rotation_angle() const;

  friend PoseSE3 operator*(const PoseSE3& a, const PoseSE3& b) { return a.compose(b); }

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

// Free-function spellings of the pose algebra.
inline Point3 se3_apply(const PoseSE3& pose, const Point3& p) { return pose.apply(p); }
inline PoseSE3 se3_compose(const PoseSE3& a, const PoseSE3& b) { return a.compose(b); }
inline PoseSE3 se3_inverse(const PoseSE3& a) { return a.inverse(); }

/// exp: increment -> pose with rotation AngleAxis(delta.rotation), translation delta.translation.
PoseSE3 exp_delta(const PoseDelta6& delta);
/// Inverse of exp_delta for rotation angles below pi.
PoseDelta6 log_delta(const PoseSE3& pose);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Projects an almost-rotation matrix back onto SO(3).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m);

/// Initial guess that repeats the last inter-frame motion:
/// T_prev * inverse(T_prevprev) * T_prev.
PoseSE3 constant_velocity_prior(const PoseSE3& t_prev, const PoseSE3& t_prevprev);

/// Rigid (rotation + translation, no scale) alignment. Returns the transform
/// A that minimizes sum |A * estimated_i - reference_i|^2, i.e. it maps the
/// estimated points onto the reference points.
/// Throws InvalidArgument on size mismatch or fewer than 3 points and
/// DegenerateGeometry when the points are collinear (cross-covariance rank < 2).
PoseSE3 umeyama_align(std::span<const Point3> estimated, std::span<const Point3> reference);

namespace detail {
/// Same least-squares solution as umeyama_align but without the rank check;
/// for collinear inputs it returns one of the (equally optimal) minimizers.
PoseSE3 umeyama_solve(std::span<const Point3> estimated, std::span<const Point3> reference);
}  // namespace detail

}  // namespace edgelo
