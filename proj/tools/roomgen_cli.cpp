// roomgen command line: object sets, scenes, depth frames, crops, statistics
// and dataset validation.

#include "roomgen/analysis.hpp"
#include "roomgen/crop_export.hpp"
#include "roomgen/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace {

using namespace roomgen;
namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::optional<std::size_t> limit;
  std::string output_dir;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_limit) {
  cmd->add_option("-c,--config", f.config, "TOML configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  if (with_limit) cmd->add_option("--limit", f.limit, "process at most this many scenes");
  cmd->add_option("-o,--output-dir", f.output_dir, "output directory (overrides config and ROOMGEN_OUTPUT_DIR)");
  cmd->add_flag("-q,--quiet", f.quiet, "no progress output");
}

GenerationConfig resolve_config(const CommonFlags& f) {
  GenerationConfig cfg = f.config.empty() ? GenerationConfig{} : load_config(f.config);
  apply_environment(cfg);
  if (!f.output_dir.empty()) cfg.output_dir = f.output_dir;
  if (f.seed) cfg.master_seed = *f.seed;
  return cfg;
}

std::function<void(const std::string&)> logger(const CommonFlags& f) {
  if (f.quiet) return {};
  return [](const std::string& msg) { std::cerr << msg << '\n'; };
}

fs::path manifest_path(const std::string& given, const CommonFlags& f) {
  if (!given.empty()) return given;
  return fs::path(resolve_config(f).output_dir) / "manifest.jsonl";
}

int run_scenes(GenerationConfig cfg, const CommonFlags& f) {
  pipeline::RunOptions opt;
  opt.workers = f.workers;
  opt.limit = f.limit;
  opt.log = logger(f);
  const auto t0 = std::chrono::steady_clock::now();
  const auto summary = pipeline::run_generation(cfg, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json out{{"manifest", summary.manifest.string()},
                     {"scenes", summary.scenes},
                     {"reused", summary.reused},
                     {"rejections", summary.rejections},
                     {"manifest_sha256", summary.manifest_sha256},
                     {"seconds", secs}};
  std::cout << out.dump(1) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roomgen: synthetic indoor scene datasets from formula-driven objects"};
  app.require_subcommand(1);
  CommonFlags f;

  auto* gen_objects = app.add_subcommand("gen-objects", "generate (or reuse) the object set");
  add_common(gen_objects, f, false);
  bool force = false;
  std::string export_dir;
  std::size_t export_count = 0;
  gen_objects->add_flag("--force", force, "regenerate even when a matching set exists");
  gen_objects->add_option("--export-obj", export_dir, "also write the first N objects as OBJ files here");
  gen_objects->add_option("--export-count", export_count, "number of objects to export")->default_val(10);

  auto* gen_scenes = app.add_subcommand("gen-scenes", "generate scenes and the manifest");
  add_common(gen_scenes, f, true);

  auto* render = app.add_subcommand("render-depth", "generate scenes with single-view depth frames");
  add_common(render, f, true);

  auto* crop = app.add_subcommand("crop", "export training crops from a dataset");
  add_common(crop, f, true);
  std::string manifest, mode = "mae", crop_out;
  std::size_t per_scene = 1, first = 0;
  bool no_augment = false;
  crop->add_option("-m,--manifest", manifest, "manifest.jsonl (default: <output_dir>/manifest.jsonl)");
  crop->add_option("--mode", mode, "mae, contrastive or depth")->check(CLI::IsMember({"mae", "contrastive", "depth"}));
  crop->add_option("--per-scene", per_scene, "crops per scene")->check(CLI::PositiveNumber);
  crop->add_option("--first", first, "first scene index");
  crop->add_option("--out", crop_out, "directory for crop PLY files")->required();
  crop->add_flag("--no-augment", no_augment, "skip the standard augmentation");

  auto* stats = app.add_subcommand("stats", "object-set diversity report (JSON)");
  add_common(stats, f, false);
  std::size_t pairs = 2000, points = 1024;
  std::string pairing = "uniform", stats_out;
  stats->add_option("--pairs", pairs, "object pairs to compare")->check(CLI::PositiveNumber);
  stats->add_option("--points", points, "points per object")->check(CLI::PositiveNumber);
  stats->add_option("--pairing", pairing, "uniform or nearest")->check(CLI::IsMember({"uniform", "nearest"}));
  stats->add_option("--out", stats_out, "write the report here instead of stdout");

  auto* validate = app.add_subcommand("validate", "re-check a generated dataset");
  add_common(validate, f, false);
  std::size_t sample = 20;
  validate->add_option("-m,--manifest", manifest, "manifest.jsonl (default: <output_dir>/manifest.jsonl)");
  validate->add_option("--sample", sample, "scenes receiving the expensive checks (0 = all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_objects->parsed()) {
      const auto cfg = resolve_config(f);
      cfg.validate();
      const pipeline::Layout layout{cfg.output_dir};
      const auto info = pipeline::prepare_objects(cfg, layout, f.workers, force);
      nlohmann::json out{{"kind", to_string(info.set.kind())},
                         {"count", info.set.size()},
                         {"file", info.file.string()},
                         {"sha256", info.sha256}};
      if (info.attempts > 0) {
        out["attempts"] = info.attempts;
        out["acceptance_rate"] = static_cast<double>(info.set.size()) / static_cast<double>(info.attempts);
      }
      if (!export_dir.empty()) {
        fs::create_directories(export_dir);
        for (std::size_t i = 0; i < std::min(export_count, info.set.size()); ++i) {
          const auto g = info.set.load(i);
          const auto name = fs::path(export_dir) / ("object_" + std::to_string(i));
          if (const auto* mesh = std::get_if<SurfaceMesh>(&g)) write_obj(name.string() + ".obj", *mesh);
          else write_ply(name.string() + ".ply", std::get<PointCloud>(g));
        }
      }
      std::cout << out.dump(1) << '\n';
      return 0;
    }
    if (gen_scenes->parsed()) return run_scenes(resolve_config(f), f);
    if (render->parsed()) {
      auto cfg = resolve_config(f);
      if (cfg.view_mode == ViewMode::multi) cfg.view_mode = ViewMode::single;
      return run_scenes(cfg, f);
    }
    if (crop->parsed()) {
      pipeline::CropRequest req;
      req.mode = pipeline::parse_crop_mode(mode);
      req.seed = f.seed.value_or(0);
      req.first_scene = first;
      req.limit = f.limit;
      req.per_scene = per_scene;
      req.augment = !no_augment;
      req.out_dir = crop_out;
      const auto crops = pipeline::export_crops(manifest_path(manifest, f), req, f.workers);
      for (const auto& c : crops) {
        nlohmann::json line{{"scene", c.scene}, {"sample", c.sample}, {"sizes", c.sizes}};
        nlohmann::json files = nlohmann::json::array();
        for (const auto& p : c.files) files.push_back(p.string());
        line["files"] = std::move(files);
        if (req.mode == pipeline::CropMode::contrastive) line["overlap"] = c.overlap;
        std::cout << line.dump() << '\n';
      }
      return 0;
    }
    if (stats->parsed()) {
      const auto cfg = resolve_config(f);
      cfg.validate();
      const auto info = pipeline::prepare_objects(cfg, pipeline::Layout{cfg.output_dir}, f.workers);
      analysis::DiversityConfig dc;
      dc.points_per_object = points;
      dc.pairing = pairing == "nearest" ? analysis::Pairing::nearest : analysis::Pairing::uniform;
      dc.workers = f.workers;
      Rng rng(derive_seed(cfg.master_seed, "stats", 0));
      const auto r = analysis::diversity_report(info.set, pairs, rng, dc);
      nlohmann::json out{{"object_source", to_string(info.set.kind())},
                         {"n_objects", r.n_objects},
                         {"n_pairs", r.n_pairs},
                         {"pairing", pairing},
                         {"points_per_object", points},
                         {"chamfer_min", r.chamfer_min},
                         {"chamfer_mean", r.chamfer_mean},
                         {"chamfer_p10", r.chamfer_p10},
                         {"chamfer_p50", r.chamfer_p50}};
      if (stats_out.empty()) {
        std::cout << out.dump(1) << '\n';
      } else {
        std::ofstream o(stats_out);
        o << out.dump(1) << '\n';
        if (!o) throw std::runtime_error("cannot write " + stats_out);
      }
      return 0;
    }
    if (validate->parsed()) {
      pipeline::ValidateOptions opt;
      opt.sample = sample;
      opt.workers = f.workers;
      const auto report = pipeline::validate_dataset(manifest_path(manifest, f), opt);
      std::cout << report.to_json().dump(1) << '\n';
      return report.ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
