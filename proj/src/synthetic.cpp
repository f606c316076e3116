#include "edgelo/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "edgelo/errors.hpp"
#include "edgelo/trajectory.hpp"

namespace edgelo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHitEpsilon = 1e-9;

double deg2rad(double d) { return d * kPi / 180.0; }

std::optional<double> intersect_pole(const Pole& pole, const Point3& o, const Eigen::Vector3d& d) {
  double best = std::numeric_limits<double>::infinity();
  const double ox = o.x() - pole.center.x();
  const double oy = o.y() - pole.center.y();
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-15) {
    const double b = ox * d.x() + oy * d.y();
    const double c = ox * ox + oy * oy - pole.radius * pole.radius;
    const double disc = b * b - a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / a, (-b + sq) / a}) {
        if (t <= kHitEpsilon) continue;
        const double z = o.z() + t * d.z();
        if (z >= pole.z_min && z <= pole.z_max) {
          best = std::min(best, t);
          break;
        }
      }
    }
  }
  if (std::abs(d.z()) > 1e-15) {
    for (double zc : {pole.z_min, pole.z_max}) {
      const double t = (zc - o.z()) / d.z();
      if (t <= kHitEpsilon) continue;
      const double x = ox + t * d.x();
      const double y = oy + t * d.y();
      if (x * x + y * y <= pole.radius * pole.radius) best = std::min(best, t);
    }
  }
  if (std::isinf(best)) return std::nullopt;
  return best;
}

Eigen::Matrix3d box_rotation(const Box& box) {
  return (Eigen::AngleAxisd(box.yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(-box.pitch, Eigen::Vector3d::UnitY()))
      .toRotationMatrix();
}

std::optional<double> intersect_box(const Box& box, const Point3& o, const Eigen::Vector3d& d) {
  const Eigen::Matrix3d rt = box_rotation(box).transpose();
  const Eigen::Vector3d org = rt * (o - Point3(box.center.x(), box.center.y(), 0.0));
  const Eigen::Vector3d dir = rt * d;
  const double lo[3] = {-box.half_extent.x(), -box.half_extent.y(), box.z_min};
  const double hi[3] = {box.half_extent.x(), box.half_extent.y(), box.z_max};
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(dir[k]) < 1e-15) {
      if (org[k] < lo[k] || org[k] > hi[k]) return std::nullopt;
      continue;
    }
    double t0 = (lo[k] - org[k]) / dir[k];
    double t1 = (hi[k] - org[k]) / dir[k];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near <= kHitEpsilon) return std::nullopt;  // behind, or origin inside
  return t_near;
}

// Horizontal offsets of the eight corners from the box center.
std::array<Eigen::Vector2d, 8> box_footprint(const Box& b) {
  const Eigen::Matrix3d r = box_rotation(b);
  std::array<Eigen::Vector2d, 8> out;
  int k = 0;
  for (double x : {-b.half_extent.x(), b.half_extent.x()}) {
    for (double y : {-b.half_extent.y(), b.half_extent.y()}) {
      for (double z : {b.z_min, b.z_max}) out[k++] = (r * Eigen::Vector3d(x, y, z)).head<2>();
    }
  }
  return out;
}

double box_radius(const Box& b) {
  double r = 0.0;
  for (const auto& c : box_footprint(b)) r = std::max(r, c.norm());
  return r;
}

// Primitives bucketed by the world azimuth interval their horizontal footprint
// covers as seen from the sweep origin. A ray can only meet a primitive inside
// that interval, whatever its elevation.
class AzimuthIndex {
 public:
  static constexpr int kBins = 1440;

  AzimuthIndex(const SyntheticWorld& world, const Point3& origin, double max_range)
      : bins_(kBins) {
    const Eigen::Vector2d o2 = origin.head<2>();
    for (const Pole& p : world.poles) {
      const Eigen::Vector2d rel = p.center - o2;
      const double d = rel.norm();
      if (d > max_range + p.radius) continue;
      if (d <= p.radius) {
        add_all(Ref{&p, nullptr});
        continue;
      }
      const double half = std::asin(p.radius / d);
      add(Ref{&p, nullptr}, std::atan2(rel.y(), rel.x()), -half, half);
    }
    for (const Box& b : world.boxes) {
      const Eigen::Vector2d rel = b.center - o2;
      const double d = rel.norm();
      const double radius = box_radius(b);
      if (d > max_range + radius) continue;
      if (d <= radius) {
        add_all(Ref{nullptr, &b});
        continue;
      }
      const double c = std::atan2(rel.y(), rel.x());
      double lo = 0.0;
      double hi = 0.0;
      for (const auto& offset : box_footprint(b)) {
        const Eigen::Vector2d corner = rel + offset;
        const double a = std::remainder(std::atan2(corner.y(), corner.x()) - c, 2 * kPi);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      add(Ref{nullptr, &b}, c, lo, hi);
    }
  }

  std::optional<double> cast(const Point3& o, const Eigen::Vector3d& d, double max_range) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Ref& r : bins_[bin(std::atan2(d.y(), d.x()))]) {
      const auto t = r.pole ? intersect_pole(*r.pole, o, d) : intersect_box(*r.box, o, d);
      if (t) best = std::min(best, *t);
    }
    if (best > max_range) return std::nullopt;
    return best;
  }

 private:
  struct Ref {
    const Pole* pole;
    const Box* box;
  };

  static int bin(double azimuth) {
    const double u = (azimuth + kPi) / (2 * kPi);
    const int b = static_cast<int>(std::floor(u * kBins));
    return ((b % kBins) + kBins) % kBins;
  }

  void add_all(const Ref& r) {
    for (auto& b : bins_) b.push_back(r);
  }

  void add(const Ref& r, double centre, double lo, double hi) {
    constexpr double kMargin = 1e-6;
    const int first = static_cast<int>(std::floor((centre + lo - kMargin + kPi) / (2 * kPi) * kBins));
    const int last = static_cast<int>(std::floor((centre + hi + kMargin + kPi) / (2 * kPi) * kBins));
    for (int b = first; b <= last; ++b) bins_[((b % kBins) + kBins) % kBins].push_back(r);
  }

  std::vector<std::vector<Ref>> bins_;
};

// Rounded rectangle centred at the origin, traversed counter-clockwise
// starting at the left end of the bottom straight.
struct RoundedRect {
  double length, width, radius;

  double straight_x() const { return length - 2 * radius; }
  double straight_y() const { return width - 2 * radius; }
  double arc() const { return 0.5 * kPi * radius; }
  double perimeter() const { return 2 * straight_x() + 2 * straight_y() + 4 * arc(); }

  // Position and heading at arc length s.
  void sample(double s, Eigen::Vector2d& pos, double& heading) const {
    s = std::fmod(s, perimeter());
    if (s < 0) s += perimeter();
    const double hx = length / 2 - radius;
    const double hy = width / 2 - radius;
    const double seg[4] = {straight_x(), straight_y(), straight_x(), straight_y()};
    const Eigen::Vector2d starts[4] = {{-hx, -width / 2}, {length / 2, -hy}, {hx, width / 2},
                                       {-length / 2, hy}};
    const Eigen::Vector2d centres[4] = {{hx, -hy}, {hx, hy}, {-hx, hy}, {-hx, -hy}};
    for (int side = 0; side < 4; ++side) {
      const double h0 = side * kPi / 2;
      const Eigen::Vector2d dir(std::cos(h0), std::sin(h0));
      if (s <= seg[side]) {
        pos = starts[side] + s * dir;
        heading = h0;
        return;
      }
      s -= seg[side];
      if (s <= arc() || side == 3) {
        const double a = std::min(s, arc()) / radius;
        const double phi = h0 - kPi / 2 + a;
        pos = centres[side] + radius * Eigen::Vector2d(std::cos(phi), std::sin(phi));
        heading = h0 + a;
        return;
      }
      s -= arc();
    }
  }

  // Unsigned distance from q to the path.
  double distance(const Eigen::Vector2d& q) const {
    const Eigen::Vector2d half(length / 2 - radius, width / 2 - radius);
    const Eigen::Vector2d a = q.cwiseAbs() - half;
    const double outside = a.cwiseMax(0.0).norm();
    const double inside = std::min(std::max(a.x(), a.y()), 0.0);
    return std::abs(outside + inside - radius);
  }
};

Eigen::Matrix3d rotation_zyx(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

SyntheticBeams SyntheticBeams::uniform(int count, double min_deg, double max_deg,
                                       int azimuth_steps) {
  if (count < 2 || !(max_deg > min_deg) || azimuth_steps < 1) {
    throw InvalidArgument("SyntheticBeams::uniform: bad ring layout");
  }
  SyntheticBeams beams;
  beams.azimuth_steps = azimuth_steps;
  for (int i = 0; i < count; ++i) {
    beams.elevations_deg.push_back(min_deg + (max_deg - min_deg) * i / (count - 1));
  }
  return beams;
}

BeamModel SyntheticBeams::binning_model() const {
  if (elevations_deg.size() < 2) throw InvalidArgument("binning_model: need at least two rings");
  const double lo = elevations_deg.front();
  const double hi = elevations_deg.back();
  const double half = 0.5 * (hi - lo) / static_cast<double>(elevations_deg.size() - 1);
  BeamModel model;
  model.beam_count = static_cast<int>(elevations_deg.size());
  model.elevation_min_deg = lo - half;
  model.elevation_max_deg = hi + half;
  return model;
}

std::optional<double> raycast(const SyntheticWorld& world, const Point3& origin,
                              const Eigen::Vector3d& direction, double max_range) {
  return AzimuthIndex(world, origin, max_range).cast(origin, direction, max_range);
}

SyntheticFrame generate_sweep(const SyntheticWorld& world, std::size_t i) {
  if (i >= world.trajectory.size()) throw InvalidArgument("generate_sweep: index out of range");
  SyntheticFrame frame;
  frame.ground_truth = world.trajectory[i];
  frame.timestamp = static_cast<double>(i) * world.period;

  std::seed_seq seq{static_cast<std::uint32_t>(world.seed), static_cast<std::uint32_t>(world.seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Point3 origin = frame.ground_truth.translation();
  const Eigen::Matrix3d& R = frame.ground_truth.rotation();
  const double max_range = world.beams.max_range;
  const AzimuthIndex index(world, origin, max_range);
  const int steps = world.beams.azimuth_steps;

  for (std::size_t ring = 0; ring < world.beams.elevations_deg.size(); ++ring) {
    const double el = deg2rad(world.beams.elevations_deg[ring]);
    const double ce = std::cos(el);
    const double se = std::sin(el);
    for (int k = 0; k < steps; ++k) {
      const double az = -kPi + 2.0 * kPi * k / steps;
      const Eigen::Vector3d local(ce * std::cos(az), ce * std::sin(az), se);
      const auto hit = index.cast(origin, R * local, max_range);
      if (!hit) continue;
      const double noise = gauss(rng);
      const double r = *hit + world.noise.sigma_at(*hit) * noise;
      if (r <= 0.0) continue;
      const Eigen::Vector3d p = r * local;
      RawPoint pt;
      pt.x = p.x();
      pt.y = p.y();
      pt.z = p.z();
      pt.ring = static_cast<int>(ring);
      frame.points.push_back(pt);
    }
  }
  return frame;
}

std::vector<SyntheticFrame> generate_sweeps(const SyntheticWorld& world) {
  std::vector<SyntheticFrame> out;
  out.reserve(world.trajectory.size());
  for (std::size_t i = 0; i < world.trajectory.size(); ++i) out.push_back(generate_sweep(world, i));
  return out;
}

RawFrame SyntheticSource::load(std::size_t i) const {
  SyntheticFrame f = generate_sweep(world_, i);
  return RawFrame{std::move(f.points), f.timestamp};
}

std::vector<PoseSE3> loop_path(const LoopPath& path) {
  if (!(path.corner_radius > 0) || path.length < 2 * path.corner_radius ||
      path.width < 2 * path.corner_radius || !(path.step > 0)) {
    throw InvalidArgument("loop_path: bad dimensions");
  }
  const RoundedRect rr{path.length, path.width, path.corner_radius};
  const double tilt = deg2rad(path.tilt_amplitude_deg);
  std::vector<PoseSE3> poses;
  poses.reserve(path.count);
  for (std::size_t i = 0; i < path.count; ++i) {
    const double s = path.start_offset + static_cast<double>(i) * path.step;
    Eigen::Vector2d xy;
    double heading = 0.0;
    rr.sample(s, xy, heading);
    const double z = path.z_amplitude * std::sin(2 * kPi * s / 37.0);
    const double roll = tilt * std::sin(2 * kPi * s / 23.0);
    const double pitch = tilt * std::sin(2 * kPi * s / 31.0 + 1.0);
    poses.emplace_back(rotation_zyx(heading, pitch, roll), Eigen::Vector3d(xy.x(), xy.y(), z));
  }
  return poses;
}

std::vector<PoseSE3> straight_path(const Point3& start, double heading, double step,
                                   std::size_t count) {
  std::vector<PoseSE3> poses;
  const Eigen::Matrix3d R = rotation_zyx(heading, 0.0, 0.0);
  const Eigen::Vector3d dir = R.col(0);
  for (std::size_t i = 0; i < count; ++i) {
    poses.emplace_back(R, start + static_cast<double>(i) * step * dir);
  }
  return poses;
}

SyntheticWorld make_corridor_world(std::uint64_t seed, std::size_t sweeps, double sigma) {
  SyntheticWorld world;
  world.seed = seed;
  world.beams = SyntheticBeams::uniform(16, -15.0, 15.0, 3600);
  world.noise.sigma = sigma;
  world.noise.far_sigma = sigma;

  LoopPath path;
  path.count = sweeps;
  path.z_amplitude = 0.15;
  path.tilt_amplitude_deg = 1.5;
  world.trajectory = loop_path(path);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double offset = 4.5;
  const double thickness = 0.3;
  const double floor_z = -4.0;

  // Inner block, tall enough that no ring passes over it.
  Box island;
  island.half_extent = {path.length / 2 - offset, path.width / 2 - offset};
  island.z_min = floor_z;
  island.z_max = 30.0;
  world.boxes.push_back(island);

  // Columns against the inner block.
  const Eigen::Vector2d ih = island.half_extent;
  for (int side = 0; side < 4; ++side) {
    const bool along_x = side % 2 == 0;
    const double extent = along_x ? ih.x() : ih.y();
    for (double a = -extent + 4.0; a < extent - 2.0; a += 9.0 + 4.0 * u01(rng)) {
      Box col;
      col.half_extent = {0.35, 0.35};
      const double sgn = side < 2 ? -1.0 : 1.0;
      col.center = along_x ? Eigen::Vector2d(a, sgn * (ih.y() + 0.35))
                           : Eigen::Vector2d(sgn * (ih.x() + 0.35), a);
      col.z_min = floor_z;
      col.z_max = 30.0;
      world.boxes.push_back(col);
    }
  }

  // Outer wall along the straights, split by doorway gaps.
  const double ox = path.length / 2 + offset;
  const double oy = path.width / 2 + offset;
  const double sx = path.length / 2 - path.corner_radius;
  const double sy = path.width / 2 - path.corner_radius;
  auto wall_run = [&](const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
    const Eigen::Vector2d dir = (to - from).normalized();
    const double total = (to - from).norm();
    double a = 0.0;
    while (a < total - 1.0) {
      const double len = std::min(4.0 + 4.0 * u01(rng), total - a);
      Box w;
      w.center = from + (a + len / 2) * dir;
      w.half_extent = {len / 2, thickness / 2};
      w.yaw = std::atan2(dir.y(), dir.x());
      w.z_min = floor_z + 0.5 * u01(rng);
      w.z_max = 2.0 + 2.0 * u01(rng);
      world.boxes.push_back(w);
      a += len + 1.5 + 1.5 * u01(rng);
    }
  };
  wall_run({-sx, -oy}, {sx, -oy});
  wall_run({ox, -sy}, {ox, sy});
  wall_run({sx, oy}, {-sx, oy});
  wall_run({-ox, sy}, {-ox, -sy});

  // Pillars around the outer side of each corner.
  const double ring_r = path.corner_radius + offset;
  const Eigen::Vector2d centres[4] = {{sx, -sy}, {sx, sy}, {-sx, sy}, {-sx, -sy}};
  for (int c = 0; c < 4; ++c) {
    const double phi0 = -kPi / 2 + c * kPi / 2;
    const int n = static_cast<int>(0.5 * kPi * ring_r / 3.0);
    for (int k = 0; k <= n; ++k) {
      const double phi = phi0 + (0.5 * kPi) * k / n;
      Box p;
      p.center = centres[c] + (ring_r + 0.3) * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      p.half_extent = {0.6, 0.3};
      p.yaw = phi + kPi / 2;
      p.z_min = floor_z;
      p.z_max = 2.0 + 2.0 * u01(rng);
      world.boxes.push_back(p);
    }
  }

  // Overhead cross beams spanning the corridor.
  const RoundedRect rr{path.length, path.width, path.corner_radius};
  for (double s = 2.0; s < rr.perimeter(); s += 4.0 + 3.0 * u01(rng)) {
    Eigen::Vector2d pos;
    double heading = 0.0;
    rr.sample(s, pos, heading);
    Box beam;
    beam.center = pos;
    beam.half_extent = {0.15, offset + 0.1};
    beam.yaw = heading;
    beam.z_min = 2.5 + u01(rng);
    beam.z_max = beam.z_min + 0.3;
    world.boxes.push_back(beam);
  }

  // Diagonal braces beside the path. Their edges cross the rings at steep
  // angles, which pins height, roll and pitch.
  for (double s = 1.0; s < rr.perimeter(); s += 0.25 + 0.5 * u01(rng)) {
    Eigen::Vector2d pos;
    double heading = 0.0;
    rr.sample(s, pos, heading);
    const double side = u01(rng) < 0.5 ? -1.0 : 1.0;
    Box brace;
    brace.center = pos + side * (3.5 + 0.5 * u01(rng)) *
                             Eigen::Vector2d(-std::sin(heading), std::cos(heading));
    brace.half_extent = {1.2 + 0.6 * u01(rng), 0.1};
    brace.yaw = heading;
    brace.pitch = (u01(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + 0.4 * u01(rng));
    brace.z_min = -1.0 + 2.0 * u01(rng);
    brace.z_max = brace.z_min + 0.2;
    world.boxes.push_back(brace);
  }
  return world;
}

SyntheticWorld make_field_world(std::uint64_t seed, std::size_t sweeps, const RangeNoise& noise) {
  SyntheticWorld world;
  world.seed = seed;
  world.beams = SyntheticBeams::uniform(16, -15.0, 15.0, 3600);
  world.noise = noise;

  LoopPath path;
  path.count = sweeps;
  path.z_amplitude = 0.15;
  path.tilt_amplitude_deg = 1.5;
  world.trajectory = loop_path(path);

  const RoundedRect rr{path.length, path.width, path.corner_radius};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double margin = 45.0;
  const int objects = 160;
  int placed = 0;
  while (placed < objects) {
    const Eigen::Vector2d c((u01(rng) - 0.5) * (path.length + 2 * margin),
                            (u01(rng) - 0.5) * (path.width + 2 * margin));
    if (rr.distance(c) < 3.5) continue;
    const double z_min = -4.0 - u01(rng);
    const double z_max = 1.5 + 3.0 * u01(rng);
    if (u01(rng) < 0.5) {
      Pole p;
      p.center = c;
      p.radius = 0.1 + 0.2 * u01(rng);
      p.z_min = z_min;
      p.z_max = z_max;
      world.poles.push_back(p);
    } else {
      Box b;
      b.center = c;
      b.half_extent = {0.3 + 0.7 * u01(rng), 0.3 + 0.7 * u01(rng)};
      b.yaw = kPi * u01(rng);
      b.z_min = z_min;
      b.z_max = z_max;
      world.boxes.push_back(b);
    }
    ++placed;
  }
  return world;
}

namespace {

json pose_json(const PoseSE3& p) {
  const auto v = p.row_major_3x4();
  return json(std::vector<double>(v.begin(), v.end()));
}

}  // namespace

void save_world(const fs::path& path, const SyntheticWorld& world) {
  json j;
  j["version"] = 1;
  j["seed"] = world.seed;
  j["period"] = world.period;
  j["beams"] = {{"elevations_deg", world.beams.elevations_deg},
                {"azimuth_steps", world.beams.azimuth_steps},
                {"max_range", world.beams.max_range}};
  j["noise"] = {{"sigma", world.noise.sigma},
                {"far_sigma", world.noise.far_sigma},
                {"far_range", world.noise.far_range}};
  j["poles"] = json::array();
  for (const Pole& p : world.poles) {
    j["poles"].push_back({{"center", {p.center.x(), p.center.y()}},
                          {"radius", p.radius},
                          {"z_min", p.z_min},
                          {"z_max", p.z_max}});
  }
  j["boxes"] = json::array();
  for (const Box& b : world.boxes) {
    j["boxes"].push_back({{"center", {b.center.x(), b.center.y()}},
                          {"half_extent", {b.half_extent.x(), b.half_extent.y()}},
                          {"yaw", b.yaw},
                          {"pitch", b.pitch},
                          {"z_min", b.z_min},
                          {"z_max", b.z_max}});
  }
  j["trajectory"] = json::array();
  for (const PoseSE3& p : world.trajectory) j["trajectory"].push_back(pose_json(p));

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

SyntheticWorld load_world(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    in >> j;
    if (j.at("version").get<int>() != 1) throw FormatError("unsupported world version");
    SyntheticWorld w;
    w.seed = j.at("seed").get<std::uint64_t>();
    w.period = j.at("period").get<double>();
    const json& beams = j.at("beams");
    w.beams.elevations_deg = beams.at("elevations_deg").get<std::vector<double>>();
    w.beams.azimuth_steps = beams.at("azimuth_steps").get<int>();
    w.beams.max_range = beams.at("max_range").get<double>();
    const json& noise = j.at("noise");
    w.noise.sigma = noise.at("sigma").get<double>();
    w.noise.far_sigma = noise.at("far_sigma").get<double>();
    w.noise.far_range = noise.at("far_range").get<double>();
    for (const json& p : j.at("poles")) {
      Pole pole;
      pole.center = {p.at("center").at(0).get<double>(), p.at("center").at(1).get<double>()};
      pole.radius = p.at("radius").get<double>();
      pole.z_min = p.at("z_min").get<double>();
      pole.z_max = p.at("z_max").get<double>();
      w.poles.push_back(pole);
    }
    for (const json& b : j.at("boxes")) {
      Box box;
      box.center = {b.at("center").at(0).get<double>(), b.at("center").at(1).get<double>()};
      box.half_extent = {b.at("half_extent").at(0).get<double>(),
                         b.at("half_extent").at(1).get<double>()};
      box.yaw = b.at("yaw").get<double>();
      box.pitch = b.value("pitch", 0.0);
      box.z_min = b.at("z_min").get<double>();
      box.z_max = b.at("z_max").get<double>();
      w.boxes.push_back(box);
    }
    for (const json& p : j.at("trajectory")) {
      const auto v = p.get<std::vector<double>>();
      if (v.size() != 12) throw FormatError("trajectory pose must have 12 values");
      w.trajectory.push_back(PoseSE3::from_row_major_3x4(std::span<const double, 12>(v.data(), 12)));
    }
    return w;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_synthetic_dataset(const SyntheticWorld& world, const fs::path& dir, bool csv) {
  const fs::path scans = dir / (csv ? "csv" : "velodyne");
  fs::create_directories(scans);
  std::ofstream times(dir / "times.txt");
  if (!times) throw IoError("cannot write " + (dir / "times.txt").string());
  for (std::size_t i = 0; i < world.trajectory.size(); ++i) {
    const SyntheticFrame f = generate_sweep(world, i);
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.%s", i, csv ? "csv" : "bin");
    if (csv) {
      write_csv_points(scans / name, f.points, true);
    } else {
      write_kitti_bin(scans / name, f.points);
    }
    char line[64];
    std::snprintf(line, sizeof line, "%.17g\n", f.timestamp);
    times << line;
  }
  write_kitti_poses(dir / "poses.txt", Trajectory::from_poses(world.trajectory, world.period));
}

}  // namespace edgelo
