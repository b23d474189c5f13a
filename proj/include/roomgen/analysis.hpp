#pragma once

// Object-set diversity from pairwise Chamfer distances.

#include "roomgen/kdtree.hpp"
#include "roomgen/objects.hpp"
#include "roomgen/parallel.hpp"
#include "roomgen/rng.hpp"
#include "roomgen/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

namespace roomgen::analysis {

namespace detail {

// Mean over `from` of the distance to the nearest point of `tree`'s set.
inline double directed_mean(std::span<const Vec3> from, const KdTree& tree) {
  double sum = 0.0;
  for (const auto& p : from) sum += std::sqrt(tree.nearest(p).distance2);
  return sum / static_cast<double>(from.size());
}

}  // namespace detail

/// Symmetric mean nearest-neighbor distance:
/// 0.5 * (mean_a min_b |a-b| + mean_b min_a |b-a|).
inline double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("chamfer needs non-empty clouds");
  const KdTree ta(a), tb(b);
  return 0.5 * (detail::directed_mean(a, tb) + detail::directed_mean(b, ta));
}

inline double chamfer(const PointCloud& a, const PointCloud& b) {
  return chamfer(std::span<const Vec3>(a.positions), std::span<const Vec3>(b.positions));
}

struct DiversityReport {
  std::size_t n_objects = 0;
  std::size_t n_pairs = 0;
  double chamfer_min = 0.0;
  double chamfer_mean = 0.0;
  double chamfer_p10 = 0.0;
  double chamfer_p50 = 0.0;
};

/// Nearest-rank quantile of ascending `sorted`.
inline double quantile(const std::vector<double>& sorted, double q) {
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

inline DiversityReport summarize(std::size_t n_objects, std::vector<double> distances) {
  if (distances.empty()) throw std::invalid_argument("no distances to summarize");
  std::sort(distances.begin(), distances.end());
  DiversityReport r;
  r.n_objects = n_objects;
  r.n_pairs = distances.size();
  r.chamfer_min = distances.front();
  r.chamfer_mean = std::accumulate(distances.begin(), distances.end(), 0.0) /
                   static_cast<double>(distances.size());
  r.chamfer_p10 = quantile(distances, 0.10);
  r.chamfer_p50 = quantile(distances, 0.50);
  return r;
}

/// How object pairs are chosen.
///  - uniform: distinct unordered pairs uniformly at random.
///  - nearest: random distinct anchors, each paired with the objects whose
///    coarse occupancy descriptors are closest (first neighbors of every
///    anchor, then second neighbors, ...). This measures how close the
///    closest objects of a set are, which shrinks as the set grows.
enum class Pairing { uniform, nearest };

struct DiversityConfig {
  std::size_t points_per_object = 1024;
  Pairing pairing = Pairing::uniform;
  int descriptor_cells = 4;  // per axis, over [-1, 1]^3
  unsigned workers = 1;
};

/// Normalized object cloud with a fixed sample. Every object draws from the
/// same stream, so identical objects get identical samples.
inline PointCloud object_sample(const ObjectSet& set, std::size_t index, std::uint64_t seed,
                                std::size_t n) {
  Rng rng(derive_seed(seed, "diversity-object", 0));
  auto g = set.load(index);
  return scene::sample_object_points(g, n, rng);
}

/// Fraction of points per cell of a cells^3 grid over [-1, 1]^3.
inline std::vector<float> occupancy_descriptor(const PointCloud& pc, int cells) {
  std::vector<float> d(static_cast<std::size_t>(cells) * cells * cells, 0.0f);
  auto bin = [cells](double v) {
    return std::clamp(static_cast<int>(std::floor((v + 1.0) * 0.5 * cells)), 0, cells - 1);
  };
  for (const auto& p : pc.positions)
    d[(static_cast<std::size_t>(bin(p.z())) * cells + bin(p.y())) * cells + bin(p.x())] += 1.0f;
  for (auto& v : d) v /= static_cast<float>(pc.size());
  return d;
}

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> uniform_pairs(std::size_t n_objects,
                                                                      std::size_t n_pairs, Rng& rng) {
  const std::size_t max_pairs = n_objects * (n_objects - 1) / 2;
  if (n_pairs > max_pairs) throw std::invalid_argument("more pairs requested than exist");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  while (pairs.size() < n_pairs) {
    auto i = static_cast<std::size_t>(rng.below(n_objects));
    auto j = static_cast<std::size_t>(rng.below(n_objects));
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (seen.insert({i, j}).second) pairs.emplace_back(i, j);
  }
  return pairs;
}

inline std::vector<std::pair<std::size_t, std::size_t>> nearest_pairs(
    const ObjectSet& set, std::size_t n_pairs, std::uint64_t seed, const DiversityConfig& cfg,
    Rng& rng) {
  const std::size_t n = set.size();
  std::vector<std::vector<float>> desc(n);
  parallel_for(n, cfg.workers, [&](std::size_t i) {
    desc[i] = occupancy_descriptor(object_sample(set, i, seed, cfg.points_per_object),
                                   cfg.descriptor_cells);
  });

  std::vector<std::size_t> anchors(n);
  std::iota(anchors.begin(), anchors.end(), std::size_t{0});
  roomgen::shuffle(anchors.begin(), anchors.end(), rng);

  // Each of the first m anchors gets its k nearest partners; pairs are taken
  // rank by rank (all first neighbors, then all second neighbors, ...).
  const std::size_t m = std::min(n, n_pairs);
  const std::size_t k = std::min(n - 1, 2 * ((n_pairs + m - 1) / m) + 1);
  std::vector<std::vector<std::size_t>> partners(m);
  parallel_for(m, cfg.workers, [&](std::size_t a) {
    const auto i = anchors[a];
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < desc[i].size(); ++c) {
        const double e = static_cast<double>(desc[i][c]) - desc[j][c];
        s += e * e;
      }
      d.emplace_back(s, j);
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    for (std::size_t r = 0; r < k; ++r) partners[a].push_back(d[r].second);
  });

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t r = 0; r < k && pairs.size() < n_pairs; ++r)
    for (std::size_t a = 0; a < m && pairs.size() < n_pairs; ++a) {
      auto i = anchors[a], j = partners[a][r];
      if (i > j) std::swap(i, j);
      if (seen.insert({i, j}).second) pairs.emplace_back(i, j);
    }
  return pairs;
}

}  // namespace detail

/// Chamfer statistics over n_pairs distinct object pairs. Every object is
/// normalized into the unit sphere and represented by a fixed sample of
/// cfg.points_per_object points.
inline DiversityReport diversity_report(const ObjectSet& set, std::size_t n_pairs, Rng& rng,
                                        const DiversityConfig& cfg = {}) {
  if (set.size() < 2) throw std::invalid_argument("diversity needs at least two objects");
  if (n_pairs == 0) throw std::invalid_argument("diversity needs at least one pair");
  const std::uint64_t seed = rng.next_u64();
  const auto pairs = cfg.pairing == Pairing::uniform
                         ? detail::uniform_pairs(set.size(), n_pairs, rng)
                         : detail::nearest_pairs(set, n_pairs, seed, cfg, rng);
  std::vector<double> distances(pairs.size());
  parallel_for(pairs.size(), cfg.workers, [&](std::size_t k) {
    const auto a = object_sample(set, pairs[k].first, seed, cfg.points_per_object);
    const auto b = object_sample(set, pairs[k].second, seed, cfg.points_per_object);
    distances[k] = chamfer(a, b);
  });
  return summarize(set.size(), std::move(distances));
}

}  // namespace roomgen::analysis
