#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "edgelo/errors.hpp"
#include "edgelo/pipeline.hpp"

namespace edgelo {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config: '" + std::string(key) + "' expects a number, got '" +
                          std::string(v) + "'");
  }
  return out;
}

long long to_int(std::string_view key, std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config: '" + std::string(key) + "' expects an integer, got '" +
                          std::string(v) + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("config: '" + std::string(key) + "' expects a boolean, got '" +
                        std::string(v) + "'");
}

}  // namespace

void RunConfig::validate() {
  beams.validate();
  if (!(r_min >= 0.0 && r_min < r_max)) throw InvalidArgument("need 0 <= r_min < r_max");
  features.validate();
  map.validate();
  optimizer.weight_r_min = r_min;
  optimizer.weight_r_max = r_max;
  optimizer.validate();
  if (!(scan_period > 0.0)) throw InvalidArgument("scan_period must be positive");
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  const auto d = [&] { return to_double(key, value); };
  const auto i = [&] { return to_int(key, value); };
  const auto b = [&] { return to_bool(key, value); };
  // sweep_io
  if (key == "r_min") r_min = d();
  else if (key == "r_max") r_max = d();
  else if (key == "beam_count") beams.beam_count = static_cast<int>(i());
  else if (key == "elevation_min_deg") beams.elevation_min_deg = d();
  else if (key == "elevation_max_deg") beams.elevation_max_deg = d();
  else if (key == "force_elevation_binning") beams.force_elevation_binning = b();
  else if (key == "sort_by_azimuth") beams.sort_by_azimuth = b();
  // features
  else if (key == "sectors") features.sectors = static_cast<int>(i());
  else if (key == "edges_per_sector") features.edges_per_sector = static_cast<int>(i());
  else if (key == "curvature_half_width") features.curvature_half_width = static_cast<int>(i());
  else if (key == "suppression_half_width") features.suppression_half_width = static_cast<int>(i());
  else if (key == "min_curvature") features.min_curvature = d();
  else if (key == "wrap_around") features.wrap_around = b();
  else if (key == "loam_style_curvature") features.loam_style_curvature = b();
  // voxel_map
  else if (key == "s_xy") map.s_xy = d();
  else if (key == "s_z") map.s_z = d();
  else if (key == "tau") map.tau = static_cast<std::size_t>(i());
  else if (key == "voxel_leaf") map.voxel_leaf = d();
  else if (key == "local_radius_cells") map.local_radius_cells = static_cast<int>(i());
  else if (key == "recent_sweeps") map.recent_sweeps = static_cast<std::size_t>(i());
  // odometry
  else if (key == "outer_iterations") optimizer.outer_iterations = static_cast<int>(i());
  else if (key == "knn_k") optimizer.knn_k = static_cast<int>(i());
  else if (key == "eigen_ratio") optimizer.eigen_ratio = d();
  else if (key == "huber_delta") optimizer.huber_delta = d();
  else if (key == "use_weighting") optimizer.use_weighting = b();
  else if (key == "lm_max_iterations") optimizer.lm_max_iterations = static_cast<int>(i());
  else if (key == "lm_initial_damping") optimizer.lm_initial_damping = d();
  else if (key == "cost_tolerance") optimizer.cost_tolerance = d();
  else if (key == "step_tolerance") optimizer.step_tolerance = d();
  else if (key == "max_neighbor_distance") optimizer.max_neighbor_distance = d();
  else if (key == "jacobian") {
    if (value == "analytic") optimizer.jacobian = JacobianMode::kAnalytic;
    else if (value == "numeric") optimizer.jacobian = JacobianMode::kNumeric;
    else throw InvalidArgument("config: jacobian must be analytic or numeric");
  }
  // pipeline
  else if (key == "dataset") dataset = std::string(value);
  else if (key == "poses_out") poses_out = std::string(value);
  else if (key == "stats_out") stats_out = std::string(value);
  else if (key == "velocities_out") velocities_out = std::string(value);
  else if (key == "map_out") map_out = std::string(value);
  else if (key == "deterministic") deterministic = b();
  else if (key == "scan_period") scan_period = d();
  else throw InvalidArgument("config: unknown key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    auto sep = line.find('=');
    if (sep == std::string_view::npos) sep = line.find_first_of(" \t");
    if (sep == std::string_view::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, sep)), trim(line.substr(sep + 1)));
  }
}

void load_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw InvalidArgument("override '" + std::string(assignment) + "' is not key=value");
  }
  cfg.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

}  // namespace edgelo
