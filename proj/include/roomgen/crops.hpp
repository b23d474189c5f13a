#pragma once

// Training crops: k-NN region crops, overlapping contrastive pairs, depth-map
// window crops, pseudo-color and standard point-cloud augmentation.

#include "roomgen/geometry.hpp"
#include "roomgen/raycast.hpp"
#include "roomgen/rng.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

namespace roomgen::crops {

struct CropConfig {
  std::size_t knn_count = 20000;
  double depth_ratio_min = 0.6;
  double depth_ratio_max = 0.8;
  double pair_overlap_min = 0.1;
  double pair_anchor_radius = 1.0;  // meters
  int max_retries = 50;
  double color_constant = 0.5;
  double color_dropout_p = 0.5;
  double jitter_sigma = 0.05;

  bool valid() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    return knn_count > 0 && depth_ratio_min > 0 && depth_ratio_min <= depth_ratio_max &&
           depth_ratio_max <= 1.0 && prob(pair_overlap_min) && prob(color_dropout_p) &&
           prob(color_constant) && jitter_sigma >= 0 && pair_anchor_radius > 0 && max_retries > 0;
  }
};

class CropError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Indices of the n points nearest to pc[anchor], ascending by index.
/// Distance ties are broken by the smaller index.
inline std::vector<std::size_t> knn_indices(const PointCloud& pc, std::size_t anchor, std::size_t n) {
  if (pc.size() < n) throw CropError("cloud has fewer points than the crop size");
  const Vec3 a = pc.positions[anchor];
  std::vector<std::pair<double, std::size_t>> d(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) d[i] = {distance2(pc.positions[i], a), i};
  if (n < d.size())
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n), d.end());
  std::vector<std::size_t> idx(n);
  for (std::size_t k = 0; k < n; ++k) idx[k] = d[k].second;
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct KnnCrop {
  PointCloud cloud;
  std::size_t anchor = 0;
  std::vector<std::size_t> indices;
};

inline KnnCrop crop_knn_at(const PointCloud& pc, std::size_t anchor, std::size_t n) {
  KnnCrop c;
  c.anchor = anchor;
  c.indices = knn_indices(pc, anchor, n);
  c.cloud = pc.select(c.indices);
  return c;
}

/// The n points closest to a uniformly chosen anchor point.
inline KnnCrop crop_knn(const PointCloud& pc, Rng& rng, std::size_t n) {
  if (pc.size() < n || pc.empty()) throw CropError("cloud has fewer points than the crop size");
  return crop_knn_at(pc, static_cast<std::size_t>(rng.below(pc.size())), n);
}

/// |a ∩ b| / min(|a|, |b|) for ascending index lists.
inline double overlap_fraction(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t shared = 0;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i] == b[j]) { ++shared; ++i; ++j; }
    else if (a[i] < b[j]) ++i;
    else ++j;
  }
  return static_cast<double>(shared) / static_cast<double>(std::min(a.size(), b.size()));
}

struct CropPair {
  KnnCrop first, second;
  double overlap = 0.0;
};

/// Two overlapping k-NN crops. The second anchor is drawn among points within
/// cfg.pair_anchor_radius of the first; pairs whose overlap falls below
/// cfg.pair_overlap_min are redrawn.
inline CropPair crop_pair_contrastive(const PointCloud& pc, Rng& rng, const CropConfig& cfg = {}) {
  if (pc.size() < cfg.knn_count) throw CropError("cloud has fewer points than the crop size");
  const double r2 = cfg.pair_anchor_radius * cfg.pair_anchor_radius;
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    auto first = crop_knn(pc, rng, cfg.knn_count);
    std::vector<std::size_t> near;
    for (std::size_t i = 0; i < pc.size(); ++i)
      if (distance2(pc.positions[i], pc.positions[first.anchor]) <= r2) near.push_back(i);
    auto second = crop_knn_at(pc, near[rng.below(near.size())], cfg.knn_count);
    const double overlap = overlap_fraction(first.indices, second.indices);
    if (overlap >= cfg.pair_overlap_min) return {std::move(first), std::move(second), overlap};
  }
  throw CropError("no crop pair reached the overlap floor");
}

struct Window {
  int x0 = 0, y0 = 0, width = 0, height = 0;
};

/// Lifts the valid pixels of `window` to a world-frame cloud with object ids.
inline PointCloud lift_window(const raycast::DepthFrame& f, const Window& w) {
  PointCloud pc;
  for (int v = w.y0; v < w.y0 + w.height; ++v)
    for (int u = w.x0; u < w.x0 + w.width; ++u) {
      const double z = f.depth_at(u, v);
      if (z <= 0.0) continue;
      pc.positions.push_back(raycast::back_project(f.intrinsics, f.pose, u, v, z));
      pc.object_ids.push_back(f.id_at(u, v));
    }
  return pc;
}

struct DepthCrop {
  PointCloud cloud;
  Window window;
};

/// Rectangular window with independent side ratios in [ratio_min, ratio_max]
/// per axis at a uniform position, lifted to world coordinates. Windows with
/// no valid pixel are redrawn.
inline DepthCrop crop_depth_rect(const raycast::DepthFrame& f, Rng& rng, double ratio_min = 0.6,
                                 double ratio_max = 0.8, int max_retries = 50) {
  const int W = f.intrinsics.width, H = f.intrinsics.height;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const double rw = rng.uniform(ratio_min, ratio_max);
    const double rh = rng.uniform(ratio_min, ratio_max);
    Window w;
    w.width = std::clamp(static_cast<int>(std::floor(rw * W)), 1, W);
    w.height = std::clamp(static_cast<int>(std::floor(rh * H)), 1, H);
    w.x0 = static_cast<int>(rng.integer(0, W - w.width));
    w.y0 = static_cast<int>(rng.integer(0, H - w.height));
    auto cloud = lift_window(f, w);
    if (!cloud.empty()) return {std::move(cloud), w};
  }
  throw CropError("depth frame has no valid pixels in any sampled window");
}

/// Constant color plus clipped Gaussian jitter per point and channel, then
/// whole-crop color dropout with probability cfg.color_dropout_p.
inline PointCloud pseudo_color(PointCloud pc, Rng& rng, const CropConfig& cfg = {}) {
  pc.colors.resize(pc.size());
  for (auto& c : pc.colors)
    for (int ch = 0; ch < 3; ++ch) {
      const double v = cfg.jitter_sigma > 0.0 ? rng.normal(cfg.color_constant, cfg.jitter_sigma)
                                              : cfg.color_constant;
      c[ch] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  if (rng.bernoulli(cfg.color_dropout_p))
    for (auto& c : pc.colors) c.setZero();
  return pc;
}

struct AugmentConfig {
  double translation = 0.5;  // per-axis U[-t, t], meters
  bool rotate = true;        // U[0, 2pi) about Z
  double scale_min = 0.9, scale_max = 1.1;
  double jitter_sigma = 0.01;  // meters
  double jitter_clip = 0.05;
  double flip_probability = 0.5;

  static AugmentConfig identity() { return {0.0, false, 1.0, 1.0, 0.0, 0.0, 0.0}; }
};

/// Z-rotation, left-right flip, uniform scale, translation, then per-point
/// jitter. Draw order is fixed regardless of configuration.
inline PointCloud standard_augment(PointCloud pc, Rng& rng, const AugmentConfig& cfg = {}) {
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const bool flip = rng.bernoulli(cfg.flip_probability);
  const double scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  Vec3 shift;
  for (int d = 0; d < 3; ++d) shift[d] = rng.uniform(-cfg.translation, cfg.translation);
  const Mat3 rot = rotation_z(cfg.rotate ? angle : 0.0);
  for (auto& p : pc.positions) {
    if (cfg.rotate) p = rot * p;
    if (flip) p.x() = -p.x();
    p = p * scale + shift;
    if (cfg.jitter_sigma > 0.0)
      for (int d = 0; d < 3; ++d)
        p[d] += std::clamp(rng.normal(0.0, cfg.jitter_sigma), -cfg.jitter_clip, cfg.jitter_clip);
  }
  return pc;
}

}  // namespace roomgen::crops
