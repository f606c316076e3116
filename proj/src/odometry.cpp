#include "edgelo/odometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "edgelo/errors.hpp"

namespace edgelo {

void OptimizerConfig::validate() const {
  if (outer_iterations < 1) throw InvalidArgument("outer_iterations must be >= 1");
  if (lm_max_iterations < 1) throw InvalidArgument("lm_max_iterations must be >= 1");
  if (!(lm_initial_damping > 0.0)) throw InvalidArgument("lm_initial_damping must be > 0");
  if (!(cost_tolerance > 0.0) || !(step_tolerance > 0.0)) {
    throw InvalidArgument("tolerances must be > 0");
  }
  if (!(eigen_ratio > 0.0)) throw InvalidArgument("eigen_ratio must be > 0");
  if (knn_k < 2) throw InvalidArgument("knn_k must be >= 2");
  if (!(huber_delta > 0.0)) throw InvalidArgument("huber_delta must be > 0");
  if (!(max_neighbor_distance > 0.0)) throw InvalidArgument("max_neighbor_distance must be > 0");
  if (!(weight_r_min >= 0.0 && weight_r_min < weight_r_max)) {
    throw InvalidArgument("need 0 <= weight_r_min < weight_r_max");
  }
}

std::optional<LineAnchors> line_fit(std::span<const Point3> neighbors, double eigen_ratio) {
  if (neighbors.size() < 2) throw InvalidArgument("line_fit: need at least two neighbours");
  Point3 mean = Point3::Zero();
  for (const auto& p : neighbors) mean += p;
  mean /= static_cast<double>(neighbors.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : neighbors) {
    const Point3 d = p - mean;
    scatter += d * d.transpose();
  }
  scatter /= static_cast<double>(neighbors.size());

  const auto& first = neighbors.front();
  const auto distinct = std::find_if(neighbors.begin() + 1, neighbors.end(), [&](const Point3& p) {
    return (p - first).norm() > kMinAnchorSeparation;
  });
  if (distinct == neighbors.end()) {
    throw DegenerateGeometry("line_fit: neighbours coincide");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (ev(2) < eigen_ratio * ev(1)) return std::nullopt;
  return LineAnchors{first, *distinct};
}

double point_to_line_distance(const Point3& p, const Point3& n1, const Point3& n2) {
  const Point3 n12 = n1 - n2;
  const double len = n12.norm();
  if (len < 1e-12) throw DegenerateGeometry("point_to_line_distance: anchors coincide");
  return (p - n1).cross(n12).norm() / len;
}

double residual_weight(double range, double r_min, double r_max) {
  if (!(r_min < r_max)) throw InvalidArgument("residual_weight: need r_min < r_max");
  if (!(range >= r_min && range <= r_max)) {
    throw InvalidArgument("residual_weight: range outside [r_min, r_max]");
  }
  return 1.0 - (range - r_min) / (r_max - r_min);
}

double huber_rho(double s, double delta) {
  if (s < 0.0) throw InvalidArgument("huber_rho: negative squared residual");
  const double r = std::sqrt(s);
  return r <= delta ? s : 2.0 * delta * r - delta * delta;
}

double huber_rho_derivative(double s, double delta) {
  const double r = std::sqrt(s);
  return r <= delta ? 1.0 : delta / r;
}

double weighted_residual(const Correspondence& corr) { return corr.weight * corr.distance; }

Eigen::Vector3d residual_vector(const Correspondence& c, const PoseSE3& pose) {
  const Point3 pw = pose.apply(c.source);
  const Point3 n12 = c.n1 - c.n2;
  return c.weight * (pw - c.n1).cross(n12) / n12.norm();
}

Eigen::Matrix<double, 3, 6> residual_jacobian(const Correspondence& c, const PoseSE3& pose) {
  const Point3 pw = pose.apply(c.source);
  const Point3 n12 = c.n1 - c.n2;
  // e = -w [n12]x (pw - n1) / |n12|;  d pw / d delta = [-[pw]x  I]
  const Eigen::Matrix3d de_dp = -c.weight * skew(n12) / n12.norm();
  Eigen::Matrix<double, 3, 6> j;
  j.leftCols<3>() = -de_dp * skew(pw);
  j.rightCols<3>() = de_dp;
  return j;
}

Eigen::Matrix<double, 3, 6> residual_jacobian_numeric(const Correspondence& c,
                                                      const PoseSE3& pose, double h) {
  Eigen::Matrix<double, 3, 6> j;
  for (int i = 0; i < 6; ++i) {
    Vec6 step = Vec6::Zero();
    step(i) = h;
    const Eigen::Vector3d plus = residual_vector(c, pose.retract_left(PoseDelta6::from_vector(step)));
    const Eigen::Vector3d minus =
        residual_vector(c, pose.retract_left(PoseDelta6::from_vector(-step)));
    j.col(i) = (plus - minus) / (2.0 * h);
  }
  return j;
}

Eigen::Matrix<double, 1, 6> scalar_residual_jacobian(const Correspondence& c,
                                                     const PoseSE3& pose) {
  const Eigen::Vector3d e = residual_vector(c, pose);
  const double n = e.norm();
  if (n == 0.0) return Eigen::Matrix<double, 1, 6>::Zero();
  return e.transpose() * residual_jacobian(c, pose) / n;
}

std::vector<Correspondence> build_correspondences(const EdgeSet& edges, const PoseSE3& pose,
                                                  const LocalMap& local,
                                                  const OptimizerConfig& cfg) {
  std::vector<Correspondence> out;
  if (local.empty()) return out;
  const auto k = static_cast<std::size_t>(cfg.knn_k);
  const double max_sq = cfg.max_neighbor_distance * cfg.max_neighbor_distance;
  std::vector<Point3> nbrs;
  nbrs.reserve(k);
  for (const auto& e : edges.edges) {
    const Point3 pw = pose.apply(e.position);
    const auto result = local.knn(pw, k);
    if (result.short_result) continue;
    if (result.neighbors.back().squared_distance > max_sq) continue;
    nbrs.clear();
    for (const auto& n : result.neighbors) nbrs.push_back(local.points()[n.index]);
    std::optional<LineAnchors> line;
    try {
      line = line_fit(nbrs, cfg.eigen_ratio);
    } catch (const DegenerateGeometry&) {
      continue;
    }
    if (!line) continue;
    Correspondence c;
    c.source = e.position;
    c.world = pw;
    c.n1 = line->n1;
    c.n2 = line->n2;
    c.range = e.range;
    c.weight = cfg.use_weighting
                   ? residual_weight(std::clamp(e.range, cfg.weight_r_min, cfg.weight_r_max),
                                     cfg.weight_r_min, cfg.weight_r_max)
                   : 1.0;
    c.distance = point_to_line_distance(pw, c.n1, c.n2);
    c.residual = weighted_residual(c);
    out.push_back(c);
  }
  return out;
}

double total_cost(std::span<const Correspondence> corrs, const PoseSE3& pose, double delta) {
  double cost = 0.0;
  for (const auto& c : corrs) cost += huber_rho(residual_vector(c, pose).squaredNorm(), delta);
  return 0.5 * cost;
}

bool SolveReport::monotone() const {
  for (const auto& costs : accepted_costs) {
    for (std::size_t i = 1; i < costs.size(); ++i) {
      if (costs[i] > costs[i - 1]) return false;
    }
  }
  return true;
}

namespace {

struct InnerResult {
  PoseSE3 pose;
  int iterations = 0;
  bool converged = false;
};

InnerResult levenberg_marquardt(std::span<const Correspondence> corrs, PoseSE3 pose,
                                const OptimizerConfig& cfg, std::vector<double>& costs) {
  InnerResult res;
  double cost = total_cost(corrs, pose, cfg.huber_delta);
  costs.push_back(cost);
  double lambda = cfg.lm_initial_damping;
  for (int it = 0; it < cfg.lm_max_iterations; ++it) {
    res.iterations = it + 1;
    Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
    Vec6 g = Vec6::Zero();
    for (const auto& c : corrs) {
      const Eigen::Vector3d e = residual_vector(c, pose);
      const Eigen::Matrix<double, 3, 6> j = cfg.jacobian == JacobianMode::kAnalytic
                                                ? residual_jacobian(c, pose)
                                                : residual_jacobian_numeric(c, pose);
      const double w = huber_rho_derivative(e.squaredNorm(), cfg.huber_delta);
      h.noalias() += w * j.transpose() * j;
      g.noalias() += w * j.transpose() * e;
    }
    if (g.lpNorm<Eigen::Infinity>() <= 1e-15 || cost == 0.0) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    while (!accepted && lambda < 1e16) {
      Eigen::Matrix<double, 6, 6> a = h;
      a.diagonal() += lambda * h.diagonal().cwiseMax(1e-9);
      const Vec6 step = a.ldlt().solve(-g);
      const PoseSE3 candidate = pose.retract_left(PoseDelta6::from_vector(step));
      const double new_cost = total_cost(corrs, candidate, cfg.huber_delta);
      if (step.allFinite() && new_cost < cost) {
        const double decrease = (cost - new_cost) / cost;
        pose = candidate;
        cost = new_cost;
        costs.push_back(cost);
        lambda = std::max(lambda * 0.5, 1e-12);
        accepted = true;
        if (decrease < cfg.cost_tolerance || step.norm() < cfg.step_tolerance) {
          res.converged = true;
        }
      } else {
        if (step.allFinite() && step.norm() < cfg.step_tolerance) {
          res.converged = true;
          break;
        }
        lambda *= 10.0;
      }
    }
    if (res.converged || !accepted) {
      if (!accepted) res.converged = true;  // no descent direction left at this damping
      break;
    }
  }
  res.pose = pose;
  return res;
}

}  // namespace

PoseEstimate optimize_pose(const EdgeSet& edges, const LocalMap& local,
                           const PoseSE3& initial_guess, const OptimizerConfig& cfg) {
  cfg.validate();
  PoseEstimate out{initial_guess, {}};
  SolveReport& rep = out.report;
  PoseSE3 pose = initial_guess;
  for (int outer = 0; outer < cfg.outer_iterations; ++outer) {
    const auto corrs = build_correspondences(edges, pose, local, cfg);
    rep.correspondences.push_back(corrs.size());
    if (corrs.empty()) {
      rep.inner_iterations.push_back(0);
      if (outer == 0) {
        rep.degenerate = true;
        return out;
      }
      break;
    }
    rep.accepted_costs.emplace_back();
    const InnerResult inner = levenberg_marquardt(corrs, pose, cfg, rep.accepted_costs.back());
    if (outer == 0) rep.initial_cost = rep.accepted_costs.back().front();
    rep.inner_iterations.push_back(inner.iterations);
    rep.final_cost = rep.accepted_costs.back().back();
    rep.converged = inner.converged;
    pose = inner.pose;
  }
  out.pose = PoseSE3(orthonormalize(pose.rotation()), pose.translation());
  return out;
}

}  // namespace edgelo
