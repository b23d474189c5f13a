#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roomgen {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Triangle = std::array<std::uint32_t, 3>;

/// Reserved object ids for room structure and empty pixels.
inline constexpr std::int32_t kNoObject = -1;
inline constexpr std::int32_t kFloorId = -2;
inline constexpr std::int32_t kWallId = -3;

inline bool is_structure_id(std::int32_t id) { return id < 0; }

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool empty() const { return (min.array() > max.array()).any(); }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double xy_area() const { return extent().x() * extent().y(); }
};

inline Aabb bounds_of(std::span<const Vec3> points) {
  Aabb box;
  for (const auto& p : points) box.extend(p);
  return box;
}

/// Indexed triangle mesh.
///
/// `object_id` tags a single-object mesh. A merged scene mesh fills
/// `face_ids` (one id per triangle) instead; face_object() resolves either.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::int32_t object_id = 0;
  std::vector<std::int32_t> face_ids;

  std::int32_t face_object(std::size_t face) const {
    return face_ids.empty() ? object_id : face_ids[face];
  }

  double triangle_area(std::size_t face) const {
    const auto& t = triangles[face];
    const Vec3 e1 = vertices[t[1]] - vertices[t[0]];
    const Vec3 e2 = vertices[t[2]] - vertices[t[0]];
    return 0.5 * e1.cross(e2).norm();
  }

  double area() const {
    double total = 0.0;
    for (std::size_t f = 0; f < triangles.size(); ++f) total += triangle_area(f);
    return total;
  }

  Aabb bounds() const { return bounds_of(vertices); }

  /// Throws GeometryError on an out-of-range or repeated index.
  void validate() const {
    const auto n = vertices.size();
    for (std::size_t f = 0; f < triangles.size(); ++f) {
      const auto& t = triangles[f];
      if (t[0] >= n || t[1] >= n || t[2] >= n)
        throw GeometryError("triangle " + std::to_string(f) +
                            " references a vertex out of range");
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
        throw GeometryError("triangle " + std::to_string(f) +
                            " has a repeated vertex index");
    }
    if (!face_ids.empty() && face_ids.size() != triangles.size())
      throw GeometryError("face_ids length does not match triangle count");
  }

  /// Appends `other`, tagging its faces with its object id.
  void append(const SurfaceMesh& other) {
    if (face_ids.empty() && !triangles.empty())
      face_ids.assign(triangles.size(), object_id);
    const auto offset = static_cast<std::uint32_t>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (std::size_t f = 0; f < other.triangles.size(); ++f) {
      const auto& t = other.triangles[f];
      triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
      face_ids.push_back(other.face_object(f));
    }
  }
};

/// Point positions with optional per-point color and object id.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Eigen::Vector3f> colors;
  std::vector<std::int32_t> object_ids;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_object_ids() const { return !object_ids.empty(); }

  Aabb bounds() const { return bounds_of(positions); }

  void validate() const {
    for (const auto& p : positions)
      if (!p.allFinite()) throw GeometryError("point cloud has a non-finite position");
    if (has_colors() && colors.size() != size())
      throw GeometryError("colors length does not match point count");
    if (has_object_ids() && object_ids.size() != size())
      throw GeometryError("object_ids length does not match point count");
  }

  void reserve(std::size_t n) {
    positions.reserve(n);
    object_ids.reserve(n);
  }

  /// Appends another cloud. Attribute arrays stay aligned: a missing
  /// attribute on one side is filled with defaults.
  void append(const PointCloud& other) {
    const std::size_t before = size();
    if (other.has_object_ids() || has_object_ids()) {
      object_ids.resize(before, kNoObject);
      if (other.has_object_ids())
        object_ids.insert(object_ids.end(), other.object_ids.begin(),
                          other.object_ids.end());
      else
        object_ids.resize(before + other.size(), kNoObject);
    }
    if (other.has_colors() || has_colors()) {
      colors.resize(before, Eigen::Vector3f::Zero());
      if (other.has_colors())
        colors.insert(colors.end(), other.colors.begin(), other.colors.end());
      else
        colors.resize(before + other.size(), Eigen::Vector3f::Zero());
    }
    positions.insert(positions.end(), other.positions.begin(),
                     other.positions.end());
  }

  /// Copies the points at `indices`, in order.
  PointCloud select(std::span<const std::size_t> indices) const {
    PointCloud out;
    out.positions.reserve(indices.size());
    if (has_colors()) out.colors.reserve(indices.size());
    if (has_object_ids()) out.object_ids.reserve(indices.size());
    for (auto i : indices) {
      out.positions.push_back(positions[i]);
      if (has_colors()) out.colors.push_back(colors[i]);
      if (has_object_ids()) out.object_ids.push_back(object_ids[i]);
    }
    return out;
  }
};

/// Mutable access to the positions of either geometry type.
inline std::vector<Vec3>& positions_of(SurfaceMesh& m) { return m.vertices; }
inline const std::vector<Vec3>& positions_of(const SurfaceMesh& m) { return m.vertices; }
inline std::vector<Vec3>& positions_of(PointCloud& pc) { return pc.positions; }
inline const std::vector<Vec3>& positions_of(const PointCloud& pc) { return pc.positions; }

template <class G>
concept Geometry = requires(G g) {
  { positions_of(g) } -> std::same_as<std::vector<Vec3>&>;
};

/// Reverses triangle winding; a mirror transform needs this to keep
/// face orientation consistent. No-op for point clouds.
inline void flip_winding(SurfaceMesh& m) {
  for (auto& t : m.triangles) std::swap(t[1], t[2]);
}
inline void flip_winding(PointCloud&) {}

/// Squared Euclidean distance, evaluated left to right as dx*dx + dy*dy + dz*dz.
inline double distance2(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

inline Mat3 rotation_z(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace roomgen
