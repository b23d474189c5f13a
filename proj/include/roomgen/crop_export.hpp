#pragma once

// Streams training crops from a generated dataset to colored PLY files.

#include "roomgen/crops.hpp"
#include "roomgen/pipeline.hpp"

namespace roomgen::pipeline {

enum class CropMode { mae, contrastive, depth };

inline CropMode parse_crop_mode(const std::string& s) {
  if (s == "mae") return CropMode::mae;
  if (s == "contrastive") return CropMode::contrastive;
  if (s == "depth") return CropMode::depth;
  throw ConfigError("unknown crop mode '" + s + "' (mae, contrastive, depth)");
}

struct CropRequest {
  CropMode mode = CropMode::mae;
  std::uint64_t seed = 0;
  std::size_t first_scene = 0;
  std::optional<std::size_t> limit;  // scenes to visit
  std::size_t per_scene = 1;
  bool augment = true;  // standard augmentation before pseudo-coloring
  fs::path out_dir;
};

struct ExportedCrop {
  std::size_t scene = 0, sample = 0;
  std::vector<fs::path> files;
  std::vector<std::size_t> sizes;
  double overlap = 0.0;  // contrastive only
};

/// Augmented, pseudo-colored copy of a crop.
inline PointCloud finish_crop(PointCloud pc, Rng& rng, const crops::CropConfig& cfg, bool augment) {
  if (augment) pc = crops::standard_augment(std::move(pc), rng);
  return crops::pseudo_color(std::move(pc), rng, cfg);
}

/// Crop sample j of scene s draws from derive_seed(derive_seed(seed, "crop", s), mode, j).
inline std::vector<ExportedCrop> export_crops(const fs::path& manifest_path, const CropRequest& req,
                                              unsigned workers = 1) {
  const auto m = read_manifest(manifest_path);
  const auto cfg = m.config();
  const auto layout = m.layout();
  if (req.mode == CropMode::depth && !cfg.wants_single_view())
    throw PipelineError("depth crops need a dataset with single-view frames");
  if (req.mode != CropMode::depth && !cfg.wants_multiview())
    throw PipelineError("point crops need a dataset with multi-view clouds");
  fs::create_directories(req.out_dir);

  const std::size_t end = req.limit ? std::min(m.scenes.size(), req.first_scene + *req.limit) : m.scenes.size();
  const std::size_t begin = std::min(req.first_scene, end);
  const char* tag = req.mode == CropMode::mae ? "mae" : req.mode == CropMode::contrastive ? "contrastive" : "depth";
  std::vector<ExportedCrop> out((end - begin) * req.per_scene);

  parallel_for(end - begin, workers, [&](std::size_t k) {
    const std::size_t s = begin + k;
    const json& rec = m.scenes[s];
    const std::uint64_t scene_crop_seed = derive_seed(req.seed, "crop", s);
    PointCloud cloud;
    std::vector<raycast::DepthFrame> frames;
    if (req.mode == CropMode::depth) {
      for (const auto& f : rec.at("frames")) {
        auto p = [&](const char* key) { return layout.root / f.at(key).at("path").get<std::string>(); };
        frames.push_back(depth_io::read_frame({p("depth"), p("ids"), p("camera")}).frame);
      }
    } else {
      cloud = read_ply(layout.root / rec.at("multiview").at("path").get<std::string>());
    }
    for (std::size_t j = 0; j < req.per_scene; ++j) {
      Rng rng(derive_seed(scene_crop_seed, tag, j));
      auto& e = out[k * req.per_scene + j];
      e.scene = s;
      e.sample = j;
      const std::string stem = Layout::scene_stem(s) + "_" + tag + std::to_string(j);
      auto emit = [&](PointCloud pc, const std::string& suffix) {
        pc = finish_crop(std::move(pc), rng, cfg.crop, req.augment);
        const fs::path path = req.out_dir / (stem + suffix + ".ply");
        write_ply(path, pc);
        e.files.push_back(path);
        e.sizes.push_back(pc.size());
      };
      switch (req.mode) {
        case CropMode::mae:
          emit(crops::crop_knn(cloud, rng, cfg.crop.knn_count).cloud, "");
          break;
        case CropMode::contrastive: {
          auto pair = crops::crop_pair_contrastive(cloud, rng, cfg.crop);
          e.overlap = pair.overlap;
          emit(std::move(pair.first.cloud), "_a");
          emit(std::move(pair.second.cloud), "_b");
          break;
        }
        case CropMode::depth: {
          const auto& frame = frames[rng.below(frames.size())];
          emit(crops::crop_depth_rect(frame, rng, cfg.crop.depth_ratio_min, cfg.crop.depth_ratio_max,
                                      cfg.crop.max_retries)
                   .cloud,
               "");
          break;
        }
      }
    }
  });
  return out;
}

}  // namespace roomgen::pipeline
