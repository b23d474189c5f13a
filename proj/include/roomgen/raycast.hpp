#pragma once

// Ray-cast depth rendering of triangle scenes through a BVH.

#include "roomgen/geometry.hpp"
#include "roomgen/parallel.hpp"
#include "roomgen/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <tuple>
#include <vector>

namespace roomgen::raycast {

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // need not be normalized
};

struct Hit {
  double t = 0.0;  // parameter along the (unnormalized) direction
  std::uint32_t triangle = 0;
  std::int32_t object_id = kNoObject;
};

inline constexpr double kMinT = 1e-9;

/// Moller-Trumbore, two-sided. Returns t > kMinT on a hit.
inline std::optional<double> intersect_triangle(const Ray& ray, const Vec3& v0, const Vec3& e1,
                                                const Vec3& e2) {
  const Vec3 pvec = ray.direction.cross(e2);
  const double det = e1.dot(pvec);
  if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 tvec = ray.origin - v0;
  const double u = tvec.dot(pvec) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = ray.direction.dot(qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv;
  if (!(t > kMinT)) return std::nullopt;
  return t;
}

/// Nearest hit is ordered by (t, triangle index) so both search paths agree
/// on exact ties.
inline bool closer(double t, std::uint32_t tri, const Hit& best) {
  return t < best.t || (t == best.t && tri < best.triangle);
}

/// Bounding-volume hierarchy over a triangle mesh (binned SAH build).
/// Immutable after construction; safe to query from many threads.
class Bvh {
 public:
  explicit Bvh(const SurfaceMesh& mesh) {
    const std::size_t n = mesh.triangles.size();
    v0_.resize(n);
    e1_.resize(n);
    e2_.resize(n);
    ids_.resize(n);
    std::vector<Aabb> boxes(n);
    std::vector<Vec3> centroids(n);
    for (std::size_t f = 0; f < n; ++f) {
      const auto& t = mesh.triangles[f];
      const Vec3& a = mesh.vertices[t[0]];
      const Vec3& b = mesh.vertices[t[1]];
      const Vec3& c = mesh.vertices[t[2]];
      v0_[f] = a;
      e1_[f] = b - a;
      e2_[f] = c - a;
      ids_[f] = mesh.face_object(f);
      boxes[f].extend(a);
      boxes[f].extend(b);
      boxes[f].extend(c);
      centroids[f] = boxes[f].center();
    }
    order_.resize(n);
    for (std::size_t f = 0; f < n; ++f) order_[f] = static_cast<std::uint32_t>(f);
    if (n > 0) {
      nodes_.reserve(2 * n / kLeafSize + 1);
      nodes_.emplace_back();
      build(0, boxes, centroids, 0, static_cast<std::uint32_t>(n), 0);
    }
  }

  std::size_t triangle_count() const { return order_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.count > 0; }));
  }

  std::optional<Hit> intersect(const Ray& ray) const {
    if (nodes_.empty()) return std::nullopt;
    Hit best;
    best.t = std::numeric_limits<double>::infinity();
    bool found = false;

    Vec3 inv;
    for (int d = 0; d < 3; ++d) {
      const double dd = ray.direction[d];
      inv[d] = dd == 0.0 ? std::copysign(1e300, dd) : 1.0 / dd;
    }
    std::array<std::uint32_t, 128> stack;
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
      const Node& node = nodes_[stack[--sp]];
      if (!overlaps(node.box, ray, inv, best.t)) continue;
      if (node.count > 0) {
        for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
          const std::uint32_t f = order_[k];
          const auto t = intersect_triangle(ray, v0_[f], e1_[f], e2_[f]);
          if (t && closer(*t, f, best)) {
            best = {*t, f, ids_[f]};
            found = true;
          }
        }
      } else {
        // Visit the nearer child first.
        const Node& l = nodes_[node.first];
        const Node& r = nodes_[node.first + 1];
        const double tl = entry(l.box, ray, inv), tr = entry(r.box, ray, inv);
        if (tl <= tr) {
          stack[sp++] = node.first + 1;
          stack[sp++] = node.first;
        } else {
          stack[sp++] = node.first;
          stack[sp++] = node.first + 1;
        }
      }
    }
    if (!found) return std::nullopt;
    return best;
  }

 private:
  static constexpr std::uint32_t kLeafSize = 4;
  static constexpr int kBins = 16;
  static constexpr int kMaxSahDepth = 40;

  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // first triangle (leaf) or left child (inner)
    std::uint32_t count = 0;  // > 0 for leaves
  };

  static Aabb padded(Aabb b) {
    // Slack well above rounding error of the slab and triangle tests.
    const double pad = 1e-9 * (1.0 + b.max.cwiseAbs().maxCoeff() + b.min.cwiseAbs().maxCoeff());
    b.min.array() -= pad;
    b.max.array() += pad;
    return b;
  }

  static std::pair<double, double> slab(const Aabb& b, const Ray& ray, const Vec3& inv) {
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 3; ++d) {
      double a = (b.min[d] - ray.origin[d]) * inv[d];
      double c = (b.max[d] - ray.origin[d]) * inv[d];
      if (a > c) std::swap(a, c);
      t0 = std::max(t0, a);
      t1 = std::min(t1, c);
    }
    return {t0, t1};
  }

  static bool overlaps(const Aabb& b, const Ray& ray, const Vec3& inv, double best_t) {
    const auto [t0, t1] = slab(b, ray, inv);
    return t0 <= t1 && t0 <= best_t;
  }

  static double entry(const Aabb& b, const Ray& ray, const Vec3& inv) {
    const auto [t0, t1] = slab(b, ray, inv);
    return t0 <= t1 ? t0 : std::numeric_limits<double>::infinity();
  }

  static double half_area(const Aabb& b) {
    if (b.empty()) return 0.0;
    const Vec3 e = b.extent();
    return e.x() * e.y() + e.y() * e.z() + e.z() * e.x();
  }

  void build(std::uint32_t slot, const std::vector<Aabb>& boxes,
             const std::vector<Vec3>& centroids, std::uint32_t first, std::uint32_t count,
             int depth) {
    Aabb box, cbox;
    for (std::uint32_t k = first; k < first + count; ++k) {
      box.extend(boxes[order_[k]]);
      cbox.extend(centroids[order_[k]]);
    }
    nodes_[slot].box = padded(box);
    nodes_[slot].first = first;
    nodes_[slot].count = count;
    if (count <= kLeafSize) return;

    int axis = 0;
    const Vec3 cext = cbox.extent();
    cext.maxCoeff(&axis);
    if (!(cext[axis] > 0.0)) return;  // all centroids coincide: keep as leaf

    // Binned SAH along the widest centroid axis.
    std::array<Aabb, kBins> bin_box;
    std::array<std::uint32_t, kBins> bin_count{};
    const double scale = kBins / cext[axis];
    auto bin_of = [&](std::uint32_t f) {
      return std::min(kBins - 1, static_cast<int>((centroids[f][axis] - cbox.min[axis]) * scale));
    };
    for (std::uint32_t k = first; k < first + count; ++k) {
      const auto f = order_[k];
      const int b = bin_of(f);
      bin_box[b].extend(boxes[f]);
      ++bin_count[b];
    }
    std::array<double, kBins - 1> left_cost{};
    Aabb acc;
    std::uint32_t acc_n = 0;
    for (int b = 0; b < kBins - 1; ++b) {
      acc.extend(bin_box[b]);
      acc_n += bin_count[b];
      left_cost[b] = half_area(acc) * acc_n;
    }
    acc = Aabb();
    acc_n = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    int best_split = -1;
    for (int b = kBins - 1; b > 0; --b) {
      acc.extend(bin_box[b]);
      acc_n += bin_count[b];
      const double cost = left_cost[b - 1] + half_area(acc) * acc_n;
      if (acc_n > 0 && acc_n < count && cost < best_cost) {
        best_cost = cost;
        best_split = b;
      }
    }

    std::uint32_t mid;
    if (best_split < 0 || depth >= kMaxSahDepth) {
      // Median split keeps deep subtrees balanced.
      mid = first + count / 2;
      std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                       [&](std::uint32_t a, std::uint32_t b) {
                         return std::tie(centroids[a][axis], a) < std::tie(centroids[b][axis], b);
                       });
    } else {
      const auto it = std::stable_partition(order_.begin() + first, order_.begin() + first + count,
                                            [&](std::uint32_t f) { return bin_of(f) < best_split; });
      mid = static_cast<std::uint32_t>(it - order_.begin());
    }

    // Children are stored adjacently so one index addresses both.
    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    nodes_[slot].first = left;
    nodes_[slot].count = 0;
    build(left, boxes, centroids, first, mid - first, depth + 1);
    build(left + 1, boxes, centroids, mid, first + count - mid, depth + 1);
  }

  std::vector<Vec3> v0_, e1_, e2_;
  std::vector<std::int32_t> ids_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

inline Bvh build_accelerator(const SurfaceMesh& mesh) { return Bvh(mesh); }

/// Reference nearest-hit search over every triangle.
inline std::optional<Hit> intersect_brute_force(const SurfaceMesh& mesh, const Ray& ray) {
  Hit best;
  best.t = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    const Vec3& a = mesh.vertices[t[0]];
    const auto hit = intersect_triangle(ray, a, mesh.vertices[t[1]] - a, mesh.vertices[t[2]] - a);
    const auto tri = static_cast<std::uint32_t>(f);
    if (hit && closer(*hit, tri, best)) {
      best = {*hit, tri, mesh.face_object(f)};
      found = true;
    }
  }
  if (!found) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// Cameras and depth frames
// ---------------------------------------------------------------------------

struct CameraIntrinsics {
  double fx = 577.5, fy = 577.5;
  double cx = 319.5, cy = 239.5;
  int width = 640, height = 480;

  bool valid() const {
    return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 && cx < width && cy >= 0 &&
           cy < height;
  }

  /// Intrinsics for the same camera at 1/factor resolution.
  CameraIntrinsics downscaled(int factor) const {
    CameraIntrinsics c = *this;
    c.width = width / factor;
    c.height = height / factor;
    c.fx = fx / factor;
    c.fy = fy / factor;
    // Pixel u spans [u, u + 1) in the coordinates cx and cy live in.
    c.cx = cx / factor;
    c.cy = cy / factor;
    return c;
  }
};

/// World-from-camera rigid transform. Camera frame: x right, y down, z forward.
using Pose = Eigen::Isometry3d;

/// Camera looking along (yaw, pitch) from `position`, with world +Z up.
inline Pose look_pose(const Vec3& position, double yaw, double pitch) {
  const Vec3 forward(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw),
                     std::sin(pitch));
  const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
  const Vec3 down = forward.cross(right);
  Pose pose = Pose::Identity();
  pose.linear().col(0) = right;
  pose.linear().col(1) = down;
  pose.linear().col(2) = forward;
  pose.translation() = position;
  return pose;
}

struct DepthFrame {
  CameraIntrinsics intrinsics;
  Pose pose = Pose::Identity();
  std::vector<double> depth;           // meters, 0 = no hit, row-major
  std::vector<std::int32_t> id_map;    // kNoObject where depth == 0

  double depth_at(int u, int v) const { return depth[static_cast<std::size_t>(v) * intrinsics.width + u]; }
  std::int32_t id_at(int u, int v) const { return id_map[static_cast<std::size_t>(v) * intrinsics.width + u]; }
};

/// Camera-frame ray direction through the center of pixel (u, v); z = 1.
inline Vec3 pixel_direction(const CameraIntrinsics& k, int u, int v) {
  return {(u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0};
}

/// Lifts pixel (u, v) at camera-frame depth z to world coordinates.
inline Vec3 back_project(const CameraIntrinsics& k, const Pose& pose, int u, int v, double z) {
  return pose * (pixel_direction(k, u, v) * z);
}

/// One ray per pixel center. Since the camera-frame direction has z = 1,
/// the hit parameter equals the camera-frame depth.
inline DepthFrame render_depth(const Bvh& index, const CameraIntrinsics& k, const Pose& pose,
                               unsigned workers = 1) {
  DepthFrame frame;
  frame.intrinsics = k;
  frame.pose = pose;
  const auto n = static_cast<std::size_t>(k.width) * k.height;
  frame.depth.assign(n, 0.0);
  frame.id_map.assign(n, kNoObject);
  const Mat3 rot = pose.linear();
  parallel_for(static_cast<std::size_t>(k.height), workers, [&](std::size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < k.width; ++u) {
      const Ray ray{pose.translation(), rot * pixel_direction(k, u, v)};
      if (const auto hit = index.intersect(ray)) {
        const auto p = row * k.width + static_cast<std::size_t>(u);
        frame.depth[p] = hit->t;
        frame.id_map[p] = hit->object_id;
      }
    }
  });
  return frame;
}

/// Lifts every valid pixel to 3D, casts a ray from the camera toward the
/// lifted point and compares the camera-frame depth of the new hit with the
/// stored depth. Returns the largest absolute difference in meters (0 for a
/// frame without valid pixels).
inline double round_trip_error(const Bvh& index, const DepthFrame& f, unsigned workers = 1) {
  const auto& k = f.intrinsics;
  const Pose inv = f.pose.inverse();
  std::vector<double> worst(static_cast<std::size_t>(k.height), 0.0);
  parallel_for(worst.size(), workers, [&](std::size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < k.width; ++u) {
      const double z = f.depth_at(u, v);
      if (z <= 0.0) continue;
      const Vec3 p = back_project(k, f.pose, u, v, z);
      const auto hit = index.intersect({f.pose.translation(), p - f.pose.translation()});
      const double err = hit ? std::abs((inv * (f.pose.translation() + hit->t * (p - f.pose.translation()))).z() - z)
                             : std::numeric_limits<double>::infinity();
      worst[row] = std::max(worst[row], err);
    }
  });
  return worst.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

/// Pixel counts per object id (structure and empty pixels excluded).
inline std::map<std::int32_t, std::size_t> object_pixel_counts(const DepthFrame& f) {
  std::map<std::int32_t, std::size_t> counts;
  for (auto id : f.id_map)
    if (!is_structure_id(id)) ++counts[id];
  return counts;
}

/// Object ids covering at least `min_pixels` pixels, ascending.
inline std::vector<std::int32_t> qualifying_objects(const DepthFrame& f, std::size_t min_pixels) {
  std::vector<std::int32_t> ids;
  for (const auto& [id, n] : object_pixel_counts(f))
    if (n >= min_pixels) ids.push_back(id);
  return ids;
}

struct ViewConfig {
  CameraIntrinsics intrinsics;
  std::size_t min_objects = 7;
  std::size_t min_pixels = 64;
  int max_attempts = 100;
  double wall_clearance = 0.3;
  double height_min = 1.2, height_max = 1.8;
  double pitch_min_deg = -30.0, pitch_max_deg = 10.0;
  /// Poses are first screened at 1/prefilter_factor resolution; only poses
  /// that pass a lenient low-resolution count are rendered at full size.
  /// The full-resolution check alone decides acceptance. 1 disables.
  int prefilter_factor = 4;
};

struct ValidView {
  DepthFrame frame;
  std::vector<std::int32_t> object_ids;  // qualifying ids
  int attempts = 0;
};

class ViewRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Room extents needed to place cameras.
struct RoomBox {
  double width = 0.0, length = 0.0;
};

inline Pose sample_pose(Rng& rng, const RoomBox& room, const ViewConfig& cfg) {
  const double c = cfg.wall_clearance;
  const double x = rng.uniform(c, std::max(c, room.width - c));
  const double y = rng.uniform(c, std::max(c, room.length - c));
  const double z = rng.uniform(cfg.height_min, cfg.height_max);
  const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double deg = std::numbers::pi / 180.0;
  const double pitch = rng.uniform(cfg.pitch_min_deg * deg, cfg.pitch_max_deg * deg);
  return look_pose({x, y, z}, yaw, pitch);
}

/// Samples camera poses until a rendered frame shows at least
/// cfg.min_objects objects with cfg.min_pixels pixels each. Throws
/// ViewRejected after cfg.max_attempts poses.
inline ValidView sample_valid_view(const Bvh& index, const RoomBox& room, std::size_t scene_objects,
                                   Rng& rng, const ViewConfig& cfg = {}) {
  if (scene_objects < cfg.min_objects)
    throw std::invalid_argument("scene has " + std::to_string(scene_objects) +
                                " objects; a valid view needs " + std::to_string(cfg.min_objects));
  const int f = std::max(1, cfg.prefilter_factor);
  const auto coarse = cfg.intrinsics.downscaled(f);
  // A full-resolution object with min_pixels covers about min_pixels/f^2
  // coarse pixels; half of that keeps the screen lenient.
  const std::size_t coarse_pixels =
      std::max<std::size_t>(1, cfg.min_pixels / static_cast<std::size_t>(2 * f * f));
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    const Pose pose = sample_pose(rng, room, cfg);
    if (f > 1 && qualifying_objects(render_depth(index, coarse, pose), coarse_pixels).size() <
                     cfg.min_objects)
      continue;
    auto frame = render_depth(index, cfg.intrinsics, pose);
    auto ids = qualifying_objects(frame, cfg.min_pixels);
    if (ids.size() >= cfg.min_objects) return {std::move(frame), std::move(ids), attempt};
  }
  throw ViewRejected("no valid camera pose after " + std::to_string(cfg.max_attempts) + " attempts");
}

}  // namespace roomgen::raycast
