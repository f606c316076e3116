#include "edgelo/sweep_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "edgelo/errors.hpp"

namespace edgelo {

std::size_t Sweep::point_count() const {
  std::size_t n = 0;
  for (const auto& s : scans) n += s.points.size();
  return n;
}

void BeamModel::validate() const {
  if (beam_count < 1) throw InvalidArgument("beam_count must be >= 1");
  if (!(elevation_min_deg < elevation_max_deg)) {
    throw InvalidArgument("elevation_min_deg must be below elevation_max_deg");
  }
}

std::optional<int> BeamModel::beam_for_elevation(double e) const {
  if (!(e >= elevation_min_deg && e <= elevation_max_deg)) return std::nullopt;
  const double width = (elevation_max_deg - elevation_min_deg) / beam_count;
  const int beam = static_cast<int>(std::floor((e - elevation_min_deg) / width));
  return std::min(beam, beam_count - 1);
}

double elevation_deg(const RawPoint& p) {
  return std::atan2(p.z, std::hypot(p.x, p.y)) * 180.0 / std::numbers::pi;
}

double azimuth_rad(const RawPoint& p) { return std::atan2(p.y, p.x); }

namespace {

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFF000000u) >> 24) | ((v & 0x00FF0000u) >> 8) | ((v & 0x0000FF00u) << 8) |
        ((v & 0x000000FFu) << 24);
  }
  return v;
}

float decode_f32(const unsigned char* bytes) {
  std::uint32_t raw = 0;
  std::memcpy(&raw, bytes, 4);
  return std::bit_cast<float>(to_little_endian(raw));
}

void encode_f32(float f, unsigned char* bytes) {
  const std::uint32_t raw = to_little_endian(std::bit_cast<std::uint32_t>(f));
  std::memcpy(bytes, &raw, 4);
}

double parse_double(std::string_view field, std::size_t line_no) {
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front()))) {
    field.remove_prefix(1);
  }
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back()))) {
    field.remove_suffix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": bad number '" +
                      std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<RawPoint> read_kitti_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  if (bytes.size() % 16 != 0) {
    throw FormatError(path.string() + ": size " + std::to_string(bytes.size()) +
                      " is not a multiple of 16 bytes");
  }
  std::vector<RawPoint> points;
  points.reserve(bytes.size() / 16);
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    RawPoint p;
    p.x = decode_f32(&bytes[off]);
    p.y = decode_f32(&bytes[off + 4]);
    p.z = decode_f32(&bytes[off + 8]);
    p.intensity = decode_f32(&bytes[off + 12]);
    points.push_back(p);
  }
  return points;
}

void write_kitti_bin(const std::filesystem::path& path, std::span<const RawPoint> points) {
  std::vector<unsigned char> bytes(points.size() * 16);
  for (std::size_t i = 0; i < points.size(); ++i) {
    unsigned char* rec = &bytes[i * 16];
    encode_f32(static_cast<float>(points[i].x), rec);
    encode_f32(static_cast<float>(points[i].y), rec + 4);
    encode_f32(static_cast<float>(points[i].z), rec + 8);
    encode_f32(static_cast<float>(points[i].intensity), rec + 12);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<RawPoint> read_csv_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_ring = false;
  if (line == "x,y,z,intensity,ring") {
    has_ring = true;
  } else if (line != "x,y,z,intensity") {
    throw FormatError(path.string() + ": unexpected header '" + line + "'");
  }
  const std::size_t expected = has_ring ? 5 : 4;
  std::vector<RawPoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != expected) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields");
    }
    RawPoint p;
    p.x = parse_double(fields[0], line_no);
    p.y = parse_double(fields[1], line_no);
    p.z = parse_double(fields[2], line_no);
    p.intensity = parse_double(fields[3], line_no);
    if (has_ring) {
      const double ring = parse_double(fields[4], line_no);
      if (ring < 0 || ring != std::floor(ring)) {
        throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                          " has a non-integer ring");
      }
      p.ring = static_cast<int>(ring);
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        " has non-finite coordinates");
    }
    points.push_back(p);
  }
  return points;
}

void write_csv_points(const std::filesystem::path& path, std::span<const RawPoint> points,
                      bool with_ring) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out << (with_ring ? "x,y,z,intensity,ring\n" : "x,y,z,intensity\n");
  char buf[160];
  for (const auto& p : points) {
    int n = std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g", p.x, p.y, p.z,
                          p.intensity);
    out.write(buf, n);
    if (with_ring) out << ',' << p.ring.value_or(0);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Sweep split_scans(std::span<const RawPoint> points, const BeamModel& model) {
  model.validate();
  std::map<int, std::vector<RawPoint>> by_beam;
  Sweep sweep;
  for (const auto& p : points) {
    std::optional<int> beam;
    if (p.ring && !model.force_elevation_binning) {
      beam = *p.ring;
    } else {
      beam = model.beam_for_elevation(elevation_deg(p));
    }
    if (!beam) {
      ++sweep.dropped;
      continue;
    }
    by_beam[*beam].push_back(p);
  }
  sweep.scans.reserve(by_beam.size());
  for (auto& [beam, pts] : by_beam) {
    if (model.sort_by_azimuth) {
      std::stable_sort(pts.begin(), pts.end(), [](const RawPoint& a, const RawPoint& b) {
        return azimuth_rad(a) < azimuth_rad(b);
      });
    }
    sweep.scans.push_back(Scan{beam, std::move(pts)});
  }
  return sweep;
}

Sweep range_filter(const Sweep& sweep, double r_min, double r_max) {
  if (!(r_min >= 0.0 && r_min < r_max)) {
    throw InvalidArgument("range_filter: need 0 <= r_min < r_max");
  }
  Sweep out;
  out.timestamp = sweep.timestamp;
  out.index = sweep.index;
  out.dropped = sweep.dropped;
  for (const auto& scan : sweep.scans) {
    Scan kept{scan.beam, {}};
    kept.points.reserve(scan.points.size());
    for (const auto& p : scan.points) {
      const double r = p.range();
      if (r >= r_min && r <= r_max) kept.points.push_back(p);
    }
    if (!kept.points.empty()) out.scans.push_back(std::move(kept));
  }
  return out;
}

}  // namespace edgelo
