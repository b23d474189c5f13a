#pragma once

// Fractal point-cloud objects from randomized 3D iterated function systems.

#include "roomgen/geometry.hpp"
#include "roomgen/meshio.hpp"
#include "roomgen/rng.hpp"

#include <Eigen/SVD>

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace roomgen::fractal {

struct AffineMap {
  Mat3 linear = Mat3::Identity();
  Vec3 offset = Vec3::Zero();
  double weight = 1.0;

  Vec3 apply(const Vec3& x) const { return linear * x + offset; }

  friend bool operator==(const AffineMap& a, const AffineMap& b) {
    return a.linear == b.linear && a.offset == b.offset && a.weight == b.weight;
  }
};

inline constexpr std::size_t kMinMaps = 2;
inline constexpr std::size_t kMaxMaps = 8;

struct IfsSystem {
  std::vector<AffineMap> maps;

  /// Checks map count and weight normalization. `min_maps` may be lowered to
  /// 1 for hand-built test systems.
  bool valid(std::size_t min_maps = kMinMaps) const {
    if (maps.size() < min_maps || maps.size() > kMaxMaps) return false;
    double sum = 0.0;
    for (const auto& m : maps) {
      if (!(m.weight > 0.0)) return false;
      sum += m.weight;
    }
    return std::abs(sum - 1.0) <= 1e-9;
  }

  friend bool operator==(const IfsSystem&, const IfsSystem&) = default;
};

struct Config {
  std::size_t n_points = 3000;
  std::size_t burn_in = 100;
  double min_axis_variance = 0.05;
  double weight_floor = 0.01;
  double divergence_norm = 1e6;
  /// Linear parts with a larger spectral norm are scaled down to it before
  /// the chaos game; 0 keeps the raw draw.
  double max_singular_value = 0.9;
  std::size_t min_maps = kMinMaps;
  std::size_t max_maps = kMaxMaps;
  std::size_t max_attempts = 1000;
};

/// Entries of each matrix and offset uniform on [-1, 1]; weights proportional
/// to |det| (floored), normalized to sum to one.
inline IfsSystem sample_ifs(Rng& rng, std::size_t n_maps, double weight_floor = 0.01) {
  if (n_maps < kMinMaps || n_maps > kMaxMaps)
    throw std::invalid_argument("IFS map count must be in [2, 8]");
  IfsSystem s;
  s.maps.resize(n_maps);
  double sum = 0.0;
  for (auto& m : s.maps) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m.linear(r, c) = rng.uniform(-1.0, 1.0);
    for (int r = 0; r < 3; ++r) m.offset[r] = rng.uniform(-1.0, 1.0);
    m.weight = std::max(std::abs(m.linear.determinant()), weight_floor);
    sum += m.weight;
  }
  for (auto& m : s.maps) m.weight /= sum;
  return s;
}

/// Scales every linear part whose largest singular value exceeds `max_sv`
/// down to exactly `max_sv`, then recomputes the determinant weights.
inline void limit_contraction(IfsSystem& s, double max_sv, double weight_floor = 0.01) {
  if (!(max_sv > 0.0)) return;
  double sum = 0.0;
  for (auto& m : s.maps) {
    const double sv = Eigen::JacobiSVD<Mat3>(m.linear).singularValues()[0];
    if (sv > max_sv) m.linear *= max_sv / sv;
    m.weight = std::max(std::abs(m.linear.determinant()), weight_floor);
    sum += m.weight;
  }
  for (auto& m : s.maps) m.weight /= sum;
}

/// Chaos game from `start` (the origin by default). Returns nullopt when an
/// iterate diverges (non-finite or norm above `divergence_norm`), so the
/// caller can resample.
inline std::optional<PointCloud> chaos_game(const IfsSystem& s, std::size_t n_points,
                                            std::size_t burn_in, Rng& rng,
                                            double divergence_norm = 1e6,
                                            const Vec3& start = Vec3::Zero()) {
  if (n_points == 0) throw std::invalid_argument("chaos_game needs n_points >= 1");
  if (s.maps.empty()) throw std::invalid_argument("chaos_game needs at least one map");
  std::vector<double> cumulative(s.maps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.maps.size(); ++i) cumulative[i] = acc += s.maps[i].weight;

  PointCloud pc;
  pc.positions.reserve(n_points);
  Vec3 x = start;
  const double limit2 = divergence_norm * divergence_norm;
  for (std::size_t k = 0; k < burn_in + n_points; ++k) {
    const double u = rng.uniform() * acc;
    std::size_t i = 0;
    while (i + 1 < cumulative.size() && u >= cumulative[i]) ++i;
    x = s.maps[i].apply(x);
    const double n2 = x.squaredNorm();
    if (!std::isfinite(n2) || n2 > limit2) return std::nullopt;
    if (k >= burn_in) pc.positions.push_back(x);
  }
  return pc;
}

/// Per-axis variance of the cloud after unit-sphere normalization.
inline Vec3 normalized_axis_variance(const PointCloud& cloud) {
  const auto pc = normalize_unit_sphere(cloud);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pc.positions) mean += p;
  mean /= static_cast<double>(pc.size());
  Vec3 var = Vec3::Zero();
  for (const auto& p : pc.positions) var += (p - mean).cwiseAbs2();
  return var / static_cast<double>(pc.size());
}

/// Rejects collapsed or near-planar/linear attractors: every axis of the
/// normalized cloud must have variance above `min_variance`.
inline bool accept_system(const PointCloud& cloud, double min_variance = 0.05) {
  if (cloud.empty()) throw std::invalid_argument("accept_system needs a non-empty cloud");
  const Vec3 first = cloud.positions.front();
  bool all_same = true;
  for (const auto& p : cloud.positions)
    if (p != first) { all_same = false; break; }
  if (all_same) return false;
  return (normalized_axis_variance(cloud).array() > min_variance).all();
}

/// An accepted system plus the seed that reproduces its point cloud.
struct FractalObject {
  IfsSystem system;
  std::uint64_t points_seed = 0;
  std::size_t attempts = 0;
};

/// Samples systems from `rng` until one yields a non-divergent, accepted
/// cloud. Throws after cfg.max_attempts failures.
inline FractalObject sample_object(Rng& rng, const Config& cfg = {}) {
  for (std::size_t attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    const auto n_maps = static_cast<std::size_t>(rng.integer(
        static_cast<std::int64_t>(cfg.min_maps), static_cast<std::int64_t>(cfg.max_maps)));
    auto system = sample_ifs(rng, n_maps, cfg.weight_floor);
    limit_contraction(system, cfg.max_singular_value, cfg.weight_floor);
    const std::uint64_t seed = rng.next_u64();
    Rng points_rng(seed);
    auto cloud = chaos_game(system, cfg.n_points, cfg.burn_in, points_rng, cfg.divergence_norm);
    if (cloud && accept_system(*cloud, cfg.min_axis_variance))
      return {std::move(system), seed, attempt};
  }
  throw std::runtime_error("no acceptable IFS system within the attempt budget");
}

/// Regenerates the normalized point cloud of an accepted object.
inline PointCloud object_cloud(const FractalObject& obj, const Config& cfg = {}) {
  Rng rng(obj.points_seed);
  auto cloud = chaos_game(obj.system, cfg.n_points, cfg.burn_in, rng, cfg.divergence_norm);
  if (!cloud) throw std::runtime_error("stored IFS system diverged on replay");
  return normalize_unit_sphere(std::move(*cloud));
}

// Text format, one block per system:
//   ifs <n_maps> <points_seed>
//   a11 a12 a13 a21 a22 a23 a31 a32 a33 b1 b2 b3 weight     (one line per map)

inline void write_systems(std::ostream& out, const std::vector<FractalObject>& objects) {
  char buf[64];
  for (const auto& obj : objects) {
    out << "ifs " << obj.system.maps.size() << ' ' << obj.points_seed << '\n';
    for (const auto& m : obj.system.maps) {
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          std::snprintf(buf, sizeof buf, "%.17g ", m.linear(r, c));
          out << buf;
        }
      for (int r = 0; r < 3; ++r) {
        std::snprintf(buf, sizeof buf, "%.17g ", m.offset[r]);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, "%.17g", m.weight);
      out << buf << '\n';
    }
  }
}

inline std::vector<FractalObject> read_systems(std::istream& in) {
  std::vector<FractalObject> objects;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw GeometryError("line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    std::string tag;
    std::size_t n_maps = 0;
    FractalObject obj;
    if (!(hs >> tag >> n_maps >> obj.points_seed) || tag != "ifs") fail("expected 'ifs <n_maps> <seed>'");
    if (n_maps < 1 || n_maps > kMaxMaps) fail("map count out of range");
    for (std::size_t k = 0; k < n_maps; ++k) {
      if (!std::getline(in, line)) fail("truncated IFS block");
      ++line_no;
      std::istringstream ls(line);
      AffineMap m;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) ls >> m.linear(r, c);
      for (int r = 0; r < 3; ++r) ls >> m.offset[r];
      ls >> m.weight;
      std::string extra;
      if (ls.fail() || (ls >> extra)) fail("expected 13 numbers per map");
      obj.system.maps.push_back(m);
    }
    if (!obj.system.valid(1)) fail("weights do not sum to one");
    objects.push_back(std::move(obj));
  }
  return objects;
}

}  // namespace roomgen::fractal
