#include "edgelo/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "edgelo/errors.hpp"

namespace edgelo {

Vec6 PoseDelta6::as_vector() const {
  Vec6 v;
  v << rotation, translation;
  return v;
}

PoseDelta6 PoseDelta6::from_vector(const Vec6& v) {
  return {v.head<3>(), v.tail<3>()};
}

PoseSE3::PoseSE3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {}

PoseSE3 PoseSE3::from_translation(const Eigen::Vector3d& t) {
  return {Eigen::Matrix3d::Identity(), t};
}

PoseSE3 PoseSE3::from_angle_axis(const Eigen::Vector3d& rotation_vector,
                                 const Eigen::Vector3d& t) {
  const double angle = rotation_vector.norm();
  if (angle == 0.0) return from_translation(t);
  return {Eigen::AngleAxisd(angle, rotation_vector / angle).toRotationMatrix(), t};
}

PoseSE3 PoseSE3::from_row_major_3x4(std::span<const double, 12> v) {
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
  return {r, Eigen::Vector3d(v[3], v[7], v[11])};
}

PoseSE3 PoseSE3::compose(const PoseSE3& other) const {
  return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
}

PoseSE3 PoseSE3::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

PoseSE3 PoseSE3::retract_left(const PoseDelta6& delta) const {
  return exp_delta(delta).compose(*this);
}

Eigen::Matrix4d PoseSE3::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

std::array<double, 12> PoseSE3::row_major_3x4() const {
  std::array<double, 12> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r * 4 + c] = rotation_(r, c);
    out[r * 4 + 3] = translation_(r);
  }
  return out;
}

double PoseSE3::rotation_angle() const {
  // atan2 keeps full precision near zero, where acos of the trace does not.
  const Eigen::Vector3d v(rotation_(2, 1) - rotation_(1, 2), rotation_(0, 2) - rotation_(2, 0),
                          rotation_(1, 0) - rotation_(0, 1));
  return std::atan2(0.5 * v.norm(), 0.5 * (rotation_.trace() - 1.0));
}

PoseSE3 exp_delta(const PoseDelta6& delta) {
  return PoseSE3::from_angle_axis(delta.rotation, delta.translation);
}

PoseDelta6 log_delta(const PoseSE3& pose) {
  const Eigen::AngleAxisd aa(pose.rotation());
  return {aa.axis() * aa.angle(), pose.translation()};
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

PoseSE3 constant_velocity_prior(const PoseSE3& t_prev, const PoseSE3& t_prevprev) {
  return t_prev.compose(t_prevprev.inverse()).compose(t_prev);
}

namespace {

struct AlignmentProblem {
  Eigen::Vector3d mean_est = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_ref = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();  // sum (ref - mean_ref)(est - mean_est)^T / n
};

AlignmentProblem accumulate(std::span<const Point3> est, std::span<const Point3> ref) {
  if (est.size() != ref.size()) {
    throw InvalidArgument("umeyama_align: point lists differ in length");
  }
  if (est.size() < 3) throw InvalidArgument("umeyama_align: need at least 3 points");
  AlignmentProblem prob;
  const double n = static_cast<double>(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    prob.mean_est += est[i];
    prob.mean_ref += ref[i];
  }
  prob.mean_est /= n;
  prob.mean_ref /= n;
  for (std::size_t i = 0; i < est.size(); ++i) {
    prob.cross += (ref[i] - prob.mean_ref) * (est[i] - prob.mean_est).transpose();
  }
  prob.cross /= n;
  return prob;
}

PoseSE3 solve(const AlignmentProblem& prob, const Eigen::JacobiSVD<Eigen::Matrix3d>& svd) {
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) s(2, 2) = -1.0;
  const Eigen::Matrix3d r = svd.matrixU() * s * svd.matrixV().transpose();
  return {r, prob.mean_ref - r * prob.mean_est};
}

}  // namespace

PoseSE3 umeyama_align(std::span<const Point3> estimated, std::span<const Point3> reference) {
  const AlignmentProblem prob = accumulate(estimated, reference);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(prob.cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw DegenerateGeometry("umeyama_align: points are collinear or coincident");
  }
  return solve(prob, svd);
}

namespace detail {

PoseSE3 umeyama_solve(std::span<const Point3> estimated, std::span<const Point3> reference) {
  const AlignmentProblem prob = accumulate(estimated, reference);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(prob.cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return solve(prob, svd);
}

}  // namespace detail

}  // namespace edgelo
