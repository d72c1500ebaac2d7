#include "occfof/encode.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "occfof/errors.hpp"
#include "occfof/parallel.hpp"

namespace occfof {

void validate(const OrthoFrame& frame) {
  if (!(frame.half_extent > 0.0)) throw DomainError("frame half_extent must be positive");
  if (frame.width < 1 || frame.height < 1) throw DomainError("frame size must be positive");
}

std::string format_frame(const OrthoFrame& frame) {
  std::ostringstream out;
  out.precision(17);
  out << "center_x=" << frame.center.x() << "\n"
      << "center_y=" << frame.center.y() << "\n"
      << "center_z=" << frame.center.z() << "\n"
      << "half_extent=" << frame.half_extent << "\n"
      << "width=" << frame.width << "\n"
      << "height=" << frame.height << "\n";
  return out.str();
}

OrthoFrame parse_frame(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("frame: expected key=value", line_no);
    auto trim = [](std::string v) {
      v.erase(0, v.find_first_not_of(" \t"));
      v.erase(v.find_last_not_of(" \t") + 1);
      return v;
    };
    const std::string key = trim(line.substr(0, eq));
    static const std::set<std::string> known{"center_x", "center_y", "center_z",
                                             "half_extent", "width", "height"};
    if (!known.count(key)) throw ParseError("frame: unknown key '" + key + "'", line_no);
    kv[key] = trim(line.substr(eq + 1));
  }
  OrthoFrame frame;
  auto number = [&](const char* key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    double value = 0.0;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(std::string("frame: bad value for ") + key, 0);
    }
    return value;
  };
  frame.center = Vec3(number("center_x", 0.0), number("center_y", 0.0), number("center_z", 0.0));
  frame.half_extent = number("half_extent", 1.0);
  auto size = [&](const char* key) {
    const double v = number(key, 128);
    if (v != std::floor(v) || v < 1 || v > 1 << 20) {
      throw ParseError(std::string("frame: ") + key + " must be a positive integer", 0);
    }
    return static_cast<int>(v);
  };
  frame.width = size("width");
  frame.height = size("height");
  validate(frame);
  return frame;
}

namespace {

const TriMesh& checked_watertight(const TriMesh& mesh) {
  const auto report = check_watertight(mesh);
  if (!report.watertight) {
    throw MeshError("mesh is not watertight: " + std::to_string(report.boundary_edges.size()) +
                    " boundary, " + std::to_string(report.nonmanifold_edges.size()) +
                    " non-manifold, " + std::to_string(report.inconsistent_edges.size()) +
                    " inconsistently oriented edge(s)");
  }
  return mesh;
}

}  // namespace

RayCaster::RayCaster(const TriMesh& mesh, const OrthoFrame& frame)
    : mesh_(checked_watertight(mesh)), frame_(frame), bvh_(mesh) {
  validate(frame);
}

RayResult RayCaster::cast(int row, int col) const {
  if (row < 0 || row >= frame_.height || col < 0 || col >= frame_.width) {
    throw DomainError("pixel outside the frame");
  }
  RayResult result;
  std::vector<double> depths;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    const double shift = attempt * kJitter;
    const double x = frame_.pixel_x(col + shift);
    const double y = frame_.pixel_y(row + shift);
    depths.clear();
    bvh_.z_line_hits(frame_.center.x() + frame_.half_extent * x,
                     frame_.center.y() + frame_.half_extent * y, depths);
    if (depths.size() % 2 == 0) {
      result.retries = attempt;
      std::sort(depths.begin(), depths.end());
      for (std::size_t i = 0; i + 1 < depths.size(); i += 2) {
        const double z_in =
            std::clamp((depths[i] - frame_.center.z()) / frame_.half_extent, -1.0, 1.0);
        const double z_out =
            std::clamp((depths[i + 1] - frame_.center.z()) / frame_.half_extent, -1.0, 1.0);
        if (!(z_in < z_out)) continue;
        if (!result.intervals.empty() && result.intervals.back().z_out >= z_in) {
          result.intervals.back().z_out = std::max(result.intervals.back().z_out, z_out);
        } else {
          result.intervals.push_back({z_in, z_out});
        }
      }
      return result;
    }
  }
  spdlog::warn("ray through pixel ({}, {}) kept an odd hit count after {} jittered recasts; "
               "treating it as empty",
               row, col, kMaxRetries);
  result.retries = -1;
  return result;
}

IntervalList ray_intervals(const TriMesh& mesh, const OrthoFrame& frame, int row, int col) {
  return RayCaster(mesh, frame).cast(row, col).intervals;
}

FourierField mesh_to_fof(const TriMesh& mesh, const OrthoFrame& frame, const BasisConfig& cfg) {
  validate(cfg);
  const RayCaster caster(mesh, frame);
  FourierField field(frame.width, frame.height, cfg.channels());
  const std::size_t pixels = field.pixel_count();
  std::atomic<std::size_t> degenerate{0};
  parallel_for(pixels, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const int row = static_cast<int>(p / frame.width);
      const int col = static_cast<int>(p % frame.width);
      const RayResult ray = caster.cast(row, col);
      if (ray.retries < 0) degenerate.fetch_add(1, std::memory_order_relaxed);
      if (!ray.intervals.empty()) intervals_to_coeffs(ray.intervals, cfg, field.pixel(row, col));
    }
  });
  if (degenerate > 0) spdlog::warn("mesh_to_fof: {} degenerate ray(s) left empty", degenerate.load());
  return field;
}

double field_volume(const FourierField& field, const OrthoFrame& frame) {
  if (field.width() != frame.width || field.height() != frame.height) {
    throw ShapeError("field and frame dimensions differ");
  }
  double total = 0.0;
  for (int r = 0; r < field.height(); ++r) {
    for (int c = 0; c < field.width(); ++c) total += field.at(r, c, 0);
  }
  return 2.0 * total * frame.half_extent * frame.pixel_area();
}

}  // namespace occfof
