#pragma once

// Randomized room scenes: per-object augmentation, heightmap placement,
// room structure, voxel downsampling and the multi-view point cloud export.

#include "roomgen/geometry.hpp"
#include "roomgen/meshio.hpp"
#include "roomgen/objects.hpp"
#include "roomgen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

namespace roomgen::scene {

// ---------------------------------------------------------------------------
// Object augmentation
// ---------------------------------------------------------------------------

struct AugmentConfig {
  double scale_min = 0.7;
  double scale_max = 1.5;
  double flip_probability = 0.5;
  double swap_probability = 0.5;  // harmonics only
  bool rotate = true;
};

struct AugmentParams {
  double scale = 1.0;
  bool flip = false;
  double z_rotation = 0.0;
  bool zy_swap = false;

  friend bool operator==(const AugmentParams&, const AugmentParams&) = default;
};

/// Draws augmentation parameters. Always consumes four draws so that the
/// stream position does not depend on the configuration.
inline AugmentParams draw_augment(Rng& rng, const AugmentConfig& cfg, bool is_harmonic) {
  AugmentParams a;
  a.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  a.flip = rng.bernoulli(cfg.flip_probability);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  a.z_rotation = cfg.rotate ? angle : 0.0;
  const bool swap = rng.bernoulli(cfg.swap_probability);
  a.zy_swap = is_harmonic && swap;
  return a;
}

/// Scale, left-right flip (x -> -x), rotation about Z, then the Z/Y swap.
template <Geometry G>
G apply_augment(G g, const AugmentParams& a) {
  auto& pts = positions_of(g);
  const Mat3 rot = rotation_z(a.z_rotation);
  for (auto& p : pts) {
    p *= a.scale;
    if (a.flip) p.x() = -p.x();
    if (a.z_rotation != 0.0) p = rot * p;
    if (a.zy_swap) std::swap(p.y(), p.z());
  }
  // Each mirror reverses orientation.
  if (a.flip != a.zy_swap) flip_winding(g);
  return g;
}

template <Geometry G>
G augment_object(G obj, Rng& rng, bool is_harmonic, const AugmentConfig& cfg = {}) {
  return apply_augment(std::move(obj), draw_augment(rng, cfg, is_harmonic));
}

inline ObjectGeometry apply_augment(ObjectGeometry g, const AugmentParams& a) {
  return std::visit([&](auto&& x) -> ObjectGeometry { return apply_augment(std::move(x), a); },
                    std::move(g));
}

// ---------------------------------------------------------------------------
// Scene description
// ---------------------------------------------------------------------------

struct ObjectPlacement {
  std::size_t object_ref = 0;
  AugmentParams augment;
  Vec3 position = Vec3::Zero();  // translation applied after augmentation

  friend bool operator==(const ObjectPlacement&, const ObjectPlacement&) = default;
};

/// Room spans [0, room_width] x [0, room_length] with the floor at z = 0.
struct SceneSpec {
  double room_width = 0.0;
  double room_length = 0.0;
  double wall_height = 0.0;
  std::vector<ObjectPlacement> placements;
  std::uint64_t seed = 0;

  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct SceneConfig {
  int min_objects = 12;
  int max_objects = 16;
  AugmentConfig augment;
  double area_factor_min = 3.0;
  double area_factor_max = 6.0;
  double aspect_min = 0.5;
  double aspect_max = 2.0;
  double wall_height_min = 2.5;
  double wall_height_max = 3.0;
  double max_stack_height = 2.0;
  double heightmap_resolution = 0.05;
  int placement_retries = 50;
  std::size_t points_per_object = 3000;
  /// Mesh objects are sampled with at least area / plane_spacing^2 points,
  /// the floor and wall density, so that object density stays consistent
  /// across objects after voxelization. false: exactly points_per_object.
  bool match_plane_density = true;
  double plane_spacing = 0.03;
  double voxel_size = 0.04;
  std::size_t n_points = 40000;
};

/// Raised when a scene cannot be completed; the caller regenerates it with a
/// derived seed.
class SceneRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Indices ordered by descending area; equal areas keep their input order.
inline std::vector<std::size_t> placement_order(std::span<const double> areas) {
  std::vector<std::size_t> order(areas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return areas[a] > areas[b]; });
  return order;
}

// ---------------------------------------------------------------------------
// Heightmap placement
// ---------------------------------------------------------------------------

/// Height profile of one object on a grid anchored at its AABB minimum.
/// Occupied cells store the highest geometry above the object's bottom.
struct Footprint {
  double resolution = 0.05;
  Vec3 extent = Vec3::Zero();
  int nx = 0, ny = 0;
  struct Cell {
    int i, j;
    double top;
  };
  std::vector<Cell> cells;
};

namespace detail {

inline int cell_index(double v, double res, int n) {
  const auto c = static_cast<int>(std::floor(v / res));
  return std::clamp(c, 0, n - 1);
}

inline Footprint make_footprint_grid(const Aabb& box, double res) {
  Footprint fp;
  fp.resolution = res;
  fp.extent = box.extent();
  fp.nx = std::max(1, static_cast<int>(std::ceil(fp.extent.x() / res)));
  fp.ny = std::max(1, static_cast<int>(std::ceil(fp.extent.y() / res)));
  return fp;
}

inline void collect_cells(Footprint& fp, const std::vector<double>& grid) {
  for (int j = 0; j < fp.ny; ++j)
    for (int i = 0; i < fp.nx; ++i) {
      const double t = grid[static_cast<std::size_t>(j) * fp.nx + i];
      if (t >= 0.0) fp.cells.push_back({i, j, t});
    }
}

}  // namespace detail

inline Footprint compute_footprint(const SurfaceMesh& mesh, double res) {
  const Aabb box = mesh.bounds();
  auto fp = detail::make_footprint_grid(box, res);
  std::vector<double> grid(static_cast<std::size_t>(fp.nx) * fp.ny, -1.0);
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const double top = std::max({a.z(), b.z(), c.z()}) - box.min.z();
    const int i0 = detail::cell_index(std::min({a.x(), b.x(), c.x()}) - box.min.x(), res, fp.nx);
    const int i1 = detail::cell_index(std::max({a.x(), b.x(), c.x()}) - box.min.x(), res, fp.nx);
    const int j0 = detail::cell_index(std::min({a.y(), b.y(), c.y()}) - box.min.y(), res, fp.ny);
    const int j1 = detail::cell_index(std::max({a.y(), b.y(), c.y()}) - box.min.y(), res, fp.ny);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        auto& g = grid[static_cast<std::size_t>(j) * fp.nx + i];
        g = std::max(g, top);
      }
  }
  detail::collect_cells(fp, grid);
  return fp;
}

inline Footprint compute_footprint(const PointCloud& pc, double res) {
  const Aabb box = pc.bounds();
  auto fp = detail::make_footprint_grid(box, res);
  std::vector<double> grid(static_cast<std::size_t>(fp.nx) * fp.ny, -1.0);
  for (const auto& p : pc.positions) {
    const int i = detail::cell_index(p.x() - box.min.x(), res, fp.nx);
    const int j = detail::cell_index(p.y() - box.min.y(), res, fp.ny);
    auto& g = grid[static_cast<std::size_t>(j) * fp.nx + i];
    g = std::max(g, p.z() - box.min.z());
  }
  detail::collect_cells(fp, grid);
  return fp;
}

inline Footprint compute_footprint(const ObjectGeometry& g, double res) {
  return std::visit([&](const auto& x) { return compute_footprint(x, res); }, g);
}

/// Running heightmap of the room floor. A footprint placed with its AABB
/// minimum at (x, y) covers, for each occupied local cell (i, j), the world
/// cells floor(x/res)+i+{0,1} by floor(y/res)+j+{0,1}. The one-cell dilation
/// keeps the query conservative for positions off the grid lattice.
class Heightmap {
 public:
  Heightmap(double width, double length, double res)
      : res_(res),
        nx_(std::max(1, static_cast<int>(std::ceil(width / res)))),
        ny_(std::max(1, static_cast<int>(std::ceil(length / res)))),
        h_(static_cast<std::size_t>(nx_) * ny_, 0.0) {}

  double resolution() const { return res_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double at(int i, int j) const { return h_[index(i, j)]; }

  /// Highest surface under the footprint placed at (x, y).
  double support(const Footprint& fp, double x, double y) const {
    double s = 0.0;
    for_each_cell(fp, x, y, [&](std::size_t k, const Footprint::Cell&) { s = std::max(s, h_[k]); });
    return s;
  }

  /// Raises the heightmap with the footprint resting at height `bottom`.
  void commit(const Footprint& fp, double x, double y, double bottom) {
    for_each_cell(fp, x, y, [&](std::size_t k, const Footprint::Cell& c) {
      h_[k] = std::max(h_[k], bottom + c.top);
    });
  }

  /// Lattice origins (ix, iy) whose footprint block [ix, ix+nx] x [iy, iy+ny]
  /// lies entirely on bare floor and whose AABB fits in the room.
  std::vector<std::pair<int, int>> free_floor_origins(const Footprint& fp, double width,
                                                      double length) const {
    std::vector<int> prefix(static_cast<std::size_t>(nx_ + 1) * (ny_ + 1), 0);
    auto P = [&](int i, int j) -> int& { return prefix[static_cast<std::size_t>(j) * (nx_ + 1) + i]; };
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i)
        P(i + 1, j + 1) = P(i, j + 1) + P(i + 1, j) - P(i, j) + (h_[index(i, j)] > 0.0 ? 1 : 0);
    std::vector<std::pair<int, int>> out;
    for (int iy = 0; iy < ny_; ++iy) {
      if (iy * res_ + fp.extent.y() > length) break;
      for (int ix = 0; ix < nx_; ++ix) {
        if (ix * res_ + fp.extent.x() > width) break;
        const int i1 = std::min(nx_, ix + fp.nx + 1), j1 = std::min(ny_, iy + fp.ny + 1);
        const int blocked = P(i1, j1) - P(ix, j1) - P(i1, iy) + P(ix, iy);
        if (blocked == 0) out.emplace_back(ix, iy);
      }
    }
    return out;
  }

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

  template <class F>
  void for_each_cell(const Footprint& fp, double x, double y, F&& f) const {
    const int bx = static_cast<int>(std::floor(x / res_));
    const int by = static_cast<int>(std::floor(y / res_));
    for (const auto& c : fp.cells)
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) {
          const int i = std::clamp(bx + c.i + di, 0, nx_ - 1);
          const int j = std::clamp(by + c.j + dj, 0, ny_ - 1);
          f(index(i, j), c);
        }
  }

  double res_;
  int nx_, ny_;
  std::vector<double> h_;
};

/// Stacking rule: a position is acceptable when the object's top stays at or
/// below the height limit.
inline bool placement_allowed(double support, double object_height, double max_height) {
  return support + object_height <= max_height;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

struct AssembledScene {
  SceneSpec spec;
  /// World-space geometry in placement order; object id = placement index.
  std::vector<ObjectGeometry> objects;
};

inline void set_object_id(ObjectGeometry& g, std::int32_t id) {
  if (auto* m = std::get_if<SurfaceMesh>(&g)) {
    m->object_id = id;
    m->face_ids.clear();
  } else {
    auto& pc = std::get<PointCloud>(g);
    pc.object_ids.assign(pc.size(), id);
  }
}

inline void translate(ObjectGeometry& g, const Vec3& t) {
  for (auto& p : positions_of(g)) p += t;
}

/// Rebuilds the world-space geometry of one placement.
inline ObjectGeometry instantiate(const ObjectSet& set, const ObjectPlacement& pl, std::int32_t id) {
  auto g = apply_augment(set.load(pl.object_ref), pl.augment);
  translate(g, pl.position);
  set_object_id(g, id);
  return g;
}

inline std::vector<ObjectGeometry> instantiate_all(const ObjectSet& set, const SceneSpec& spec) {
  std::vector<ObjectGeometry> out;
  out.reserve(spec.placements.size());
  for (std::size_t k = 0; k < spec.placements.size(); ++k)
    out.push_back(instantiate(set, spec.placements[k], static_cast<std::int32_t>(k)));
  return out;
}

/// Picks 12-16 distinct objects, augments them, sizes the room from their
/// summed XY projection areas and drops them largest-first onto a running
/// heightmap. Throws SceneRejected when an object cannot be placed.
inline AssembledScene assemble_scene(const ObjectSet& set, Rng& rng, const SceneConfig& cfg = {},
                                     std::uint64_t seed = 0) {
  if (set.size() < static_cast<std::size_t>(cfg.max_objects))
    throw std::invalid_argument("object set has " + std::to_string(set.size()) +
                                " objects; scenes need at least " +
                                std::to_string(cfg.max_objects));

  const auto k = static_cast<std::size_t>(rng.integer(cfg.min_objects, cfg.max_objects));
  std::vector<std::size_t> refs;
  while (refs.size() < k) {
    const auto r = static_cast<std::size_t>(rng.below(set.size()));
    if (std::find(refs.begin(), refs.end(), r) == refs.end()) refs.push_back(r);
  }

  struct Candidate {
    std::size_t ref;
    AugmentParams augment;
    ObjectGeometry geometry;
    Aabb box;
  };
  std::vector<Candidate> picked;
  picked.reserve(k);
  for (auto r : refs) {
    const auto aug = draw_augment(rng, cfg.augment, set.is_harmonic());
    auto g = apply_augment(set.load(r), aug);
    const Aabb box = bounds_of(positions_of(g));
    picked.push_back({r, aug, std::move(g), box});
  }

  std::vector<double> areas;
  for (const auto& c : picked) areas.push_back(c.box.xy_area());
  const auto order = placement_order(areas);

  const double area_sum = std::accumulate(areas.begin(), areas.end(), 0.0);
  const double factor = rng.uniform(cfg.area_factor_min, cfg.area_factor_max);
  const double aspect = rng.uniform(cfg.aspect_min, cfg.aspect_max);
  AssembledScene out;
  auto& spec = out.spec;
  spec.seed = seed;
  spec.room_width = std::sqrt(factor * area_sum * aspect);
  spec.room_length = std::sqrt(factor * area_sum / aspect);
  spec.wall_height = rng.uniform(cfg.wall_height_min, cfg.wall_height_max);

  Heightmap hm(spec.room_width, spec.room_length, cfg.heightmap_resolution);
  for (auto idx : order) {
    auto& c = picked[idx];
    const Vec3 ext = c.box.extent();
    if (ext.x() > spec.room_width || ext.y() > spec.room_length)
      throw SceneRejected("object wider than the room");
    const auto fp = compute_footprint(c.geometry, cfg.heightmap_resolution);

    std::optional<Vec3> origin;  // world position of the AABB minimum
    for (int attempt = 0; attempt < cfg.placement_retries && !origin; ++attempt) {
      const double x = rng.uniform(0.0, spec.room_width - ext.x());
      const double y = rng.uniform(0.0, spec.room_length - ext.y());
      const double support = hm.support(fp, x, y);
      if (placement_allowed(support, ext.z(), cfg.max_stack_height)) origin = Vec3(x, y, support);
    }
    if (!origin) {
      const auto free = hm.free_floor_origins(fp, spec.room_width, spec.room_length);
      if (free.empty()) throw SceneRejected("no free floor position for object");
      const auto [ix, iy] = free[rng.below(free.size())];
      origin = Vec3(ix * hm.resolution(), iy * hm.resolution(), 0.0);
    }
    hm.commit(fp, origin->x(), origin->y(), origin->z());

    ObjectPlacement pl{c.ref, c.augment, *origin - c.box.min};
    translate(c.geometry, pl.position);
    set_object_id(c.geometry, static_cast<std::int32_t>(spec.placements.size()));
    spec.placements.push_back(pl);
    out.objects.push_back(std::move(c.geometry));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Room structure
// ---------------------------------------------------------------------------

/// Floor (kFloorId) and four perimeter walls (kWallId) as a mesh.
inline SurfaceMesh room_mesh(const SceneSpec& s) {
  const double W = s.room_width, L = s.room_length, H = s.wall_height;
  SurfaceMesh m;
  auto quad = [&](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, std::int32_t id) {
    const auto base = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.insert(m.vertices.end(), {a, b, c, d});
    m.triangles.push_back({base, base + 1, base + 2});
    m.triangles.push_back({base, base + 2, base + 3});
    m.face_ids.push_back(id);
    m.face_ids.push_back(id);
  };
  quad({0, 0, 0}, {W, 0, 0}, {W, L, 0}, {0, L, 0}, kFloorId);
  quad({0, 0, 0}, {0, 0, H}, {W, 0, H}, {W, 0, 0}, kWallId);
  quad({W, 0, 0}, {W, 0, H}, {W, L, H}, {W, L, 0}, kWallId);
  quad({W, L, 0}, {W, L, H}, {0, L, H}, {0, L, 0}, kWallId);
  quad({0, L, 0}, {0, L, H}, {0, 0, H}, {0, 0, 0}, kWallId);
  return m;
}

/// Room structure plus every mesh object, with per-face object ids.
inline SurfaceMesh scene_mesh(const AssembledScene& scene) {
  SurfaceMesh merged = room_mesh(scene.spec);
  for (const auto& g : scene.objects) {
    if (const auto* m = std::get_if<SurfaceMesh>(&g))
      merged.append(*m);
    else
      throw std::invalid_argument("scene mesh requires mesh objects");
  }
  return merged;
}

/// Jittered grid samples on the floor and walls, one per spacing x spacing cell.
inline PointCloud sample_room_planes(const SceneSpec& s, double spacing, Rng& rng) {
  PointCloud pc;
  auto plane = [&](double len_u, double len_v, auto&& to_world, std::int32_t id) {
    const int nu = std::max(1, static_cast<int>(std::ceil(len_u / spacing)));
    const int nv = std::max(1, static_cast<int>(std::ceil(len_v / spacing)));
    const double du = len_u / nu, dv = len_v / nv;
    for (int j = 0; j < nv; ++j)
      for (int i = 0; i < nu; ++i) {
        const double u = (i + rng.uniform()) * du;
        const double v = (j + rng.uniform()) * dv;
        pc.positions.push_back(to_world(u, v));
        pc.object_ids.push_back(id);
      }
  };
  const double W = s.room_width, L = s.room_length, H = s.wall_height;
  plane(W, L, [](double u, double v) { return Vec3(u, v, 0.0); }, kFloorId);
  plane(W, H, [](double u, double v) { return Vec3(u, 0.0, v); }, kWallId);
  plane(W, H, [L](double u, double v) { return Vec3(u, L, v); }, kWallId);
  plane(L, H, [](double u, double v) { return Vec3(0.0, u, v); }, kWallId);
  plane(L, H, [W](double u, double v) { return Vec3(W, u, v); }, kWallId);
  return pc;
}

// ---------------------------------------------------------------------------
// Voxel downsampling
// ---------------------------------------------------------------------------

using VoxelKey = std::array<std::int64_t, 3>;

inline VoxelKey voxel_of(const Vec3& p, double voxel) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}

namespace detail {

// Nudges a centroid coordinate back into voxel `k` if rounding pushed it out.
inline double clamp_into_voxel(double c, std::int64_t k, double voxel) {
  for (int guard = 0; guard < 64; ++guard) {
    const auto kc = static_cast<std::int64_t>(std::floor(c / voxel));
    if (kc == k) break;
    c = std::nextafter(c, kc > k ? -HUGE_VAL : HUGE_VAL);
  }
  return c;
}

}  // namespace detail

/// One point per occupied voxel: the centroid of its members. Colors are
/// averaged; object id is the majority (ties to the smallest id). Output is
/// ordered by voxel index.
inline PointCloud voxel_downsample(const PointCloud& pc, double voxel = 0.04) {
  if (!(voxel > 0.0)) throw std::invalid_argument("voxel size must be positive");
  PointCloud out;
  if (pc.empty()) return out;

  std::vector<std::pair<VoxelKey, std::size_t>> keyed(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) keyed[i] = {voxel_of(pc.positions[i], voxel), i};
  std::sort(keyed.begin(), keyed.end());

  std::vector<std::int32_t> ids;
  for (std::size_t a = 0; a < keyed.size();) {
    std::size_t b = a;
    while (b < keyed.size() && keyed[b].first == keyed[a].first) ++b;
    const auto n = static_cast<double>(b - a);

    Vec3 sum = Vec3::Zero();
    Eigen::Vector3d csum = Eigen::Vector3d::Zero();
    ids.clear();
    for (std::size_t k = a; k < b; ++k) {
      const auto i = keyed[k].second;
      sum += pc.positions[i];
      if (pc.has_colors()) csum += pc.colors[i].cast<double>();
      if (pc.has_object_ids()) ids.push_back(pc.object_ids[i]);
    }
    Vec3 c = sum / n;
    const auto& key = keyed[a].first;
    for (int d = 0; d < 3; ++d) c[d] = detail::clamp_into_voxel(c[d], key[d], voxel);
    out.positions.push_back(c);
    if (pc.has_colors()) out.colors.push_back((csum / n).cast<float>());
    if (pc.has_object_ids()) {
      std::sort(ids.begin(), ids.end());
      std::int32_t best = ids.front();
      std::size_t best_count = 0;
      for (std::size_t s = 0; s < ids.size();) {
        std::size_t e = s;
        while (e < ids.size() && ids[e] == ids[s]) ++e;
        if (e - s > best_count) {
          best_count = e - s;
          best = ids[s];
        }
        s = e;
      }
      out.object_ids.push_back(best);
    }
    a = b;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multi-view export
// ---------------------------------------------------------------------------

/// Exactly n points: a random subset without replacement (in original order)
/// when enough points exist, otherwise all points plus random repeats.
inline PointCloud subsample_exact(const PointCloud& pc, std::size_t n, Rng& rng) {
  if (pc.empty()) throw std::invalid_argument("cannot subsample an empty cloud");
  std::vector<std::size_t> idx;
  if (pc.size() >= n) {
    std::vector<std::size_t> all(pc.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(all.size() - i));
      std::swap(all[i], all[j]);
    }
    idx.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(idx.begin(), idx.end());
  } else {
    idx.resize(pc.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (idx.size() < n) idx.push_back(static_cast<std::size_t>(rng.below(pc.size())));
  }
  return pc.select(idx);
}

/// Points sampled from one placed object (mesh surface or cloud subset).
inline PointCloud sample_object_points(const ObjectGeometry& g, std::size_t n, Rng& rng) {
  if (const auto* m = std::get_if<SurfaceMesh>(&g)) return sample_surface(*m, n, rng);
  const auto& pc = std::get<PointCloud>(g);
  return pc.size() == n ? pc : subsample_exact(pc, n, rng);
}

/// Merged, voxel-downsampled scene cloud with exactly cfg.n_points points.
/// Randomness comes from a stream derived from the scene seed.
inline PointCloud finalize_multiview(const SceneSpec& spec, const std::vector<ObjectGeometry>& objects,
                                     const SceneConfig& cfg = {}) {
  Rng rng(derive_seed(spec.seed, "multiview", 0));
  PointCloud merged;
  for (const auto& g : objects) {
    std::size_t n = cfg.points_per_object;
    if (const auto* m = std::get_if<SurfaceMesh>(&g); m && cfg.match_plane_density)
      n = std::max(n, static_cast<std::size_t>(std::ceil(m->area() / (cfg.plane_spacing * cfg.plane_spacing))));
    merged.append(sample_object_points(g, n, rng));
  }
  merged.append(sample_room_planes(spec, cfg.plane_spacing, rng));
  const auto voxelized = voxel_downsample(merged, cfg.voxel_size);
  return subsample_exact(voxelized, cfg.n_points, rng);
}

inline PointCloud finalize_multiview(const SceneSpec& spec, const ObjectSet& set,
                                     const SceneConfig& cfg = {}) {
  return finalize_multiview(spec, instantiate_all(set, spec), cfg);
}

}  // namespace roomgen::scene
