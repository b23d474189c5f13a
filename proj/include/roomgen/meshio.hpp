#pragma once

// Mesh ingestion (OFF, OBJ), OBJ export, unit-sphere normalization and
// area-weighted surface sampling.

#include "roomgen/geometry.hpp"
#include "roomgen/rng.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace roomgen {

class MeshParseError : public std::runtime_error {
 public:
  MeshParseError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline void add_polygon(SurfaceMesh& mesh, const std::vector<std::uint32_t>& poly) {
  // Fan triangulation; index-degenerate triangles are dropped.
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    const Triangle t{poly[0], poly[k], poly[k + 1]};
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
    mesh.triangles.push_back(t);
  }
}

// Reads lines, skipping comments and blanks, tracking line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    // At end of input, errors point at the last line read.
    if (line_no_ == 0) line_no_ = 1;
    return false;
  }
  int line_no() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace detail

/// Parses an OFF stream. `name` is used in error messages only.
inline SurfaceMesh read_off(std::istream& in, const std::string& name = "<off>") {
  detail::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw MeshParseError(name, reader.line_no(), "empty file");

  auto tokens = detail::split_ws(line);
  if (tokens.empty() || tokens[0].substr(0, 3) != "OFF")
    throw MeshParseError(name, reader.line_no(), "missing OFF header");
  // Some ModelNet files glue the counts onto the header ("OFF490 518 0").
  std::vector<std::string_view> counts;
  if (tokens[0].size() > 3) counts.push_back(tokens[0].substr(3));
  counts.insert(counts.end(), tokens.begin() + 1, tokens.end());
  if (counts.empty()) {
    if (!reader.next(line))
      throw MeshParseError(name, reader.line_no(), "missing element counts");
    counts = detail::split_ws(line);
  }
  std::size_t nv = 0, nf = 0;
  if (counts.size() < 2 || !detail::parse_number(counts[0], nv) ||
      !detail::parse_number(counts[1], nf))
    throw MeshParseError(name, reader.line_no(), "malformed element counts");

  SurfaceMesh mesh;
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!reader.next(line))
      throw MeshParseError(name, reader.line_no(),
                           "expected " + std::to_string(nv) + " vertices, file ends after " +
                               std::to_string(i));
    const auto tok = detail::split_ws(line);
    Vec3 v;
    if (tok.size() < 3 || !detail::parse_number(tok[0], v.x()) ||
        !detail::parse_number(tok[1], v.y()) || !detail::parse_number(tok[2], v.z()))
      throw MeshParseError(name, reader.line_no(), "malformed vertex");
    mesh.vertices.push_back(v);
  }
  std::vector<std::uint32_t> poly;
  for (std::size_t f = 0; f < nf; ++f) {
    if (!reader.next(line))
      throw MeshParseError(name, reader.line_no(),
                           "expected " + std::to_string(nf) + " faces, file ends after " +
                               std::to_string(f));
    const auto tok = detail::split_ws(line);
    std::size_t k = 0;
    if (tok.empty() || !detail::parse_number(tok[0], k) || k < 3 || tok.size() < k + 1)
      throw MeshParseError(name, reader.line_no(), "malformed face");
    poly.clear();
    for (std::size_t j = 0; j < k; ++j) {
      std::uint32_t idx = 0;
      if (!detail::parse_number(tok[j + 1], idx))
        throw MeshParseError(name, reader.line_no(), "malformed face index");
      if (idx >= nv)
        throw MeshParseError(name, reader.line_no(),
                             "face index " + std::to_string(idx) + " out of range");
      poly.push_back(idx);
    }
    detail::add_polygon(mesh, poly);
  }
  return mesh;
}

/// Parses an OBJ stream: `v` and `f` records only; other records are ignored.
inline SurfaceMesh read_obj(std::istream& in, const std::string& name = "<obj>") {
  SurfaceMesh mesh;
  detail::LineReader reader(in);
  std::string line;
  std::vector<std::uint32_t> poly;
  while (reader.next(line)) {
    const auto tok = detail::split_ws(line);
    if (tok[0] == "v") {
      Vec3 v;
      if (tok.size() < 4 || !detail::parse_number(tok[1], v.x()) ||
          !detail::parse_number(tok[2], v.y()) || !detail::parse_number(tok[3], v.z()))
        throw MeshParseError(name, reader.line_no(), "malformed vertex");
      mesh.vertices.push_back(v);
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw MeshParseError(name, reader.line_no(), "face needs 3+ vertices");
      poly.clear();
      for (std::size_t j = 1; j < tok.size(); ++j) {
        const auto ref = tok[j].substr(0, tok[j].find('/'));
        long long idx = 0;
        if (!detail::parse_number(ref, idx) || idx == 0)
          throw MeshParseError(name, reader.line_no(), "malformed face index");
        const auto nv = static_cast<long long>(mesh.vertices.size());
        const long long resolved = idx > 0 ? idx - 1 : nv + idx;
        if (resolved < 0 || resolved >= nv)
          throw MeshParseError(name, reader.line_no(),
                               "face index " + std::string(ref) + " out of range");
        poly.push_back(static_cast<std::uint32_t>(resolved));
      }
      detail::add_polygon(mesh, poly);
    }
  }
  return mesh;
}

/// Loads an OFF or OBJ file, chosen by extension.
inline SurfaceMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file " + path.string());
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".off") return read_off(in, path.string());
  if (ext == ".obj") return read_obj(in, path.string());
  throw std::runtime_error("unsupported mesh format: " + path.string());
}

inline void write_obj(std::ostream& out, const SurfaceMesh& mesh) {
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

inline void write_obj(const std::filesystem::path& path, const SurfaceMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_obj(out, mesh);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Translation and uniform scale mapping geometry into the unit sphere:
/// p' = (p - center) * scale.
struct UnitSphereTransform {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
};

/// Centers on the AABB center and scales so the farthest point has norm 1.
inline UnitSphereTransform fit_unit_sphere(std::span<const Vec3> points) {
  if (points.empty()) throw GeometryError("cannot normalize empty geometry");
  const Vec3 center = bounds_of(points).center();
  double max_norm = 0.0;
  for (const auto& p : points) max_norm = std::max(max_norm, (p - center).norm());
  if (!(max_norm > 0.0) || !std::isfinite(max_norm))
    throw GeometryError("cannot normalize geometry with zero extent");
  return {center, 1.0 / max_norm};
}

template <Geometry G>
G normalize_unit_sphere(G g, UnitSphereTransform* applied = nullptr) {
  auto& pts = positions_of(g);
  const auto xf = fit_unit_sphere(pts);
  for (auto& p : pts) p = xf.apply(p);
  if (applied) *applied = xf;
  return g;
}

/// Uniform point in a triangle from two uniforms (square-root construction).
inline Vec3 sample_triangle(const Vec3& a, const Vec3& b, const Vec3& c, double u1,
                            double u2) {
  const double s = std::sqrt(u1);
  return (1.0 - s) * a + (s * (1.0 - u2)) * b + (s * u2) * c;
}

/// n points, each on a triangle picked with probability proportional to area
/// and placed uniformly within it. Points carry the face's object id.
inline PointCloud sample_surface(const SurfaceMesh& mesh, std::size_t n, Rng& rng) {
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    total += mesh.triangle_area(f);
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw GeometryError("cannot sample a mesh with zero area");

  PointCloud pc;
  pc.positions.reserve(n);
  pc.object_ids.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    const auto f = static_cast<std::size_t>(it - cumulative.begin());
    const auto& t = mesh.triangles[f];
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    pc.positions.push_back(sample_triangle(mesh.vertices[t[0]], mesh.vertices[t[1]],
                                           mesh.vertices[t[2]], u1, u2));
    pc.object_ids.push_back(mesh.face_object(f));
  }
  return pc;
}

}  // namespace roomgen
