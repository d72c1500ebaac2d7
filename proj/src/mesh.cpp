#include "occfof/mesh.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "occfof/errors.hpp"

namespace occfof {

Aabb bounds(const TriMesh& mesh) {
  Aabb box;
  for (const auto& v : mesh.vertices) box.extend(v);
  return box;
}

Vec3 face_normal(const TriMesh& mesh, std::size_t face) {
  const auto& f = mesh.faces[face];
  const Vec3 n = (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                     .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double face_area(const TriMesh& mesh, std::size_t face) {
  const auto& f = mesh.faces[face];
  return 0.5 * (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                   .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]])
                   .norm();
}

double surface_area(const TriMesh& mesh) {
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) total += face_area(mesh, i);
  return total;
}

void validate(const TriMesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    for (int idx : mesh.faces[i]) {
      if (idx < 0 || idx >= nv) {
        throw ShapeError("face " + std::to_string(i) + " references vertex " +
                         std::to_string(idx) + " of " + std::to_string(nv));
      }
    }
  }
  if (!mesh.normals.empty() && mesh.normals.size() != mesh.vertices.size()) {
    throw ShapeError("per-vertex normal count does not match vertex count");
  }
}

std::size_t remove_degenerate_faces(TriMesh& mesh) {
  const std::size_t before = mesh.faces.size();
  std::vector<Face> kept;
  kept.reserve(before);
  for (std::size_t i = 0; i < before; ++i) {
    const auto& f = mesh.faces[i];
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
    if (face_area(mesh, i) == 0.0) continue;
    kept.push_back(f);
  }
  mesh.faces = std::move(kept);
  return before - mesh.faces.size();
}

void compute_vertex_normals(TriMesh& mesh) {
  mesh.normals.assign(mesh.vertices.size(), Vec3::Zero());
  for (const auto& f : mesh.faces) {
    // Unnormalized cross product weights by twice the face area.
    const Vec3 n = (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                       .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    for (int idx : f) mesh.normals[idx] += n;
  }
  for (auto& n : mesh.normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
}

TriMesh translated(TriMesh mesh, const Vec3& offset) {
  for (auto& v : mesh.vertices) v += offset;
  return mesh;
}

TriMesh scaled(TriMesh mesh, double factor, const Vec3& origin) {
  for (auto& v : mesh.vertices) v = origin + factor * (v - origin);
  if (factor < 0.0) {
    for (auto& n : mesh.normals) n = -n;
  }
  return mesh;
}

TriMesh flipped_winding(TriMesh mesh) {
  for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  for (auto& n : mesh.normals) n = -n;
  return mesh;
}

TriMesh normalize_to_box(const TriMesh& mesh, double half_extent) {
  if (mesh.vertices.empty()) return mesh;
  const Aabb box = bounds(mesh);
  const double current = 0.5 * box.extent().maxCoeff();
  if (!(current > 0.0)) throw DomainError("cannot normalize a mesh with zero extent");
  TriMesh out = translated(mesh, -box.center());
  return scaled(std::move(out), half_extent / current);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) tokens.push_back(s.substr(start, i - start));
  }
  return tokens;
}

double parse_double(std::string_view token, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("line " + std::to_string(line) + ": bad number '" + std::string(token) + "'",
                     line);
  }
  return value;
}

long parse_long(std::string_view token, std::size_t line) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("line " + std::to_string(line) + ": bad index '" + std::string(token) + "'",
                     line);
  }
  return value;
}

// Resolves a 1-based (or negative, relative) OBJ index to a 0-based one.
int resolve_index(long raw, std::size_t count, std::size_t line) {
  long resolved = 0;
  if (raw > 0) {
    resolved = raw - 1;
  } else if (raw < 0) {
    resolved = static_cast<long>(count) + raw;
  } else {
    throw ParseError("line " + std::to_string(line) + ": OBJ indices are 1-based, got 0", line);
  }
  if (resolved < 0 || resolved >= static_cast<long>(count)) {
    throw ParseError("line " + std::to_string(line) + ": index " + std::to_string(raw) +
                         " out of range",
                     line);
  }
  return static_cast<int>(resolved);
}

}  // namespace

TriMesh parse_obj(std::string_view text) {
  TriMesh mesh;
  std::vector<Vec3> file_normals;
  // Vertex index -> normal index, when faces reference normals.
  std::vector<int> normal_of_vertex;
  std::map<std::string, std::size_t> skipped;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') {
      if (eol == text.size()) break;
      continue;
    }
    const auto tokens = split_ws(line);
    const std::string_view kind = tokens.front();
    if (kind == "v") {
      if (tokens.size() < 4) {
        throw ParseError("line " + std::to_string(line_no) + ": vertex needs 3 coordinates",
                         line_no);
      }
      mesh.vertices.emplace_back(parse_double(tokens[1], line_no), parse_double(tokens[2], line_no),
                                 parse_double(tokens[3], line_no));
    } else if (kind == "vn") {
      if (tokens.size() < 4) {
        throw ParseError("line " + std::to_string(line_no) + ": normal needs 3 components",
                         line_no);
      }
      file_normals.emplace_back(parse_double(tokens[1], line_no), parse_double(tokens[2], line_no),
                                parse_double(tokens[3], line_no));
    } else if (kind == "f") {
      if (tokens.size() < 4) {
        throw ParseError("line " + std::to_string(line_no) + ": face needs at least 3 vertices",
                         line_no);
      }
      std::vector<int> polygon;
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        const std::string_view token = tokens[t];
        const auto slash = token.find('/');
        const int v = resolve_index(parse_long(token.substr(0, slash), line_no),
                                    mesh.vertices.size(), line_no);
        if (slash != std::string_view::npos) {
          const auto second = token.find('/', slash + 1);
          if (second != std::string_view::npos && second + 1 < token.size()) {
            const int n = resolve_index(parse_long(token.substr(second + 1), line_no),
                                        file_normals.size(), line_no);
            if (normal_of_vertex.size() < mesh.vertices.size()) {
              normal_of_vertex.resize(mesh.vertices.size(), -1);
            }
            normal_of_vertex[v] = n;
          }
        }
        polygon.push_back(v);
      }
      for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
        mesh.faces.push_back({polygon[0], polygon[i], polygon[i + 1]});
      }
    } else {
      ++skipped[std::string(kind)];
    }
    if (eol == text.size()) break;
  }

  for (const auto& [kind, count] : skipped) {
    spdlog::warn("OBJ: ignored {} unsupported '{}' record(s)", count, kind);
  }

  // Per-vertex normals are kept only when every vertex has one.
  if (!file_normals.empty()) {
    if (normal_of_vertex.empty() && file_normals.size() == mesh.vertices.size()) {
      mesh.normals = file_normals;
    } else if (normal_of_vertex.size() == mesh.vertices.size() &&
               std::none_of(normal_of_vertex.begin(), normal_of_vertex.end(),
                            [](int n) { return n < 0; })) {
      mesh.normals.resize(mesh.vertices.size());
      for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        mesh.normals[i] = file_normals[normal_of_vertex[i]];
      }
    } else {
      spdlog::warn("OBJ: normals do not cover every vertex, ignoring them");
    }
  }

  const std::size_t removed = remove_degenerate_faces(mesh);
  if (removed > 0) spdlog::warn("OBJ: removed {} degenerate face(s)", removed);
  return mesh;
}

TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return parse_obj(buffer.str());
}

namespace {

void append_double(std::string& out, double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

std::string format_obj(const TriMesh& mesh) {
  validate(mesh);
  std::string out;
  out.reserve(mesh.vertices.size() * 64 + mesh.faces.size() * 32);
  for (const auto& v : mesh.vertices) {
    out += "v ";
    append_double(out, v.x());
    out += ' ';
    append_double(out, v.y());
    out += ' ';
    append_double(out, v.z());
    out += '\n';
  }
  for (const auto& n : mesh.normals) {
    out += "vn ";
    append_double(out, n.x());
    out += ' ';
    append_double(out, n.y());
    out += ' ';
    append_double(out, n.z());
    out += '\n';
  }
  const bool with_normals = mesh.has_normals();
  for (const auto& f : mesh.faces) {
    out += 'f';
    for (int idx : f) {
      const std::string one = std::to_string(idx + 1);
      out += ' ';
      out += one;
      if (with_normals) {
        out += "//";
        out += one;
      }
    }
    out += '\n';
  }
  return out;
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  const std::string text = format_obj(mesh);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

WatertightReport check_watertight(const TriMesh& mesh) {
  validate(mesh);
  struct EdgeUse {
    int forward = 0;   // traversed as (min, max)
    int backward = 0;  // traversed as (max, min)
  };
  std::map<std::pair<int, int>, EdgeUse> edges;
  for (const auto& f : mesh.faces) {
    for (int i = 0; i < 3; ++i) {
      const int a = f[i];
      const int b = f[(i + 1) % 3];
      auto& use = edges[{std::min(a, b), std::max(a, b)}];
      (a < b ? use.forward : use.backward) += 1;
    }
  }
  WatertightReport report;
  for (const auto& [key, use] : edges) {
    const int total = use.forward + use.backward;
    if (total == 1) {
      report.boundary_edges.push_back(use.forward == 1 ? key : std::pair{key.second, key.first});
    } else if (total > 2) {
      report.nonmanifold_edges.push_back(key);
    } else if (use.forward != 1) {
      report.inconsistent_edges.push_back(key);
    }
  }
  report.watertight = report.boundary_edges.empty() && report.nonmanifold_edges.empty() &&
                      report.inconsistent_edges.empty();
  return report;
}

}  // namespace occfof
