#include "roomgen/crop_export.hpp"
#include "roomgen/pipeline.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace roomgen;
using namespace roomgen::pipeline;

namespace {

GenerationConfig small_config(const fs::path& out, std::size_t scenes = 20) {
  GenerationConfig cfg;
  cfg.n_objects = 40;
  cfg.n_scenes = scenes;
  cfg.master_seed = 2024;
  cfg.mesh = {32, 64};
  cfg.output_dir = out;
  return cfg;
}

std::string slurp(const fs::path& p) { return read_file_bytes(p); }

std::vector<json> manifest_lines(const fs::path& p) {
  std::vector<json> out;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

void write_manifest_lines(const fs::path& p, const std::vector<json>& lines) {
  std::string text;
  for (const auto& l : lines) text += l.dump() + "\n";
  write_text_atomic(p, text);
}

bool has_violation(const ValidationReport& r, const std::string& needle) {
  for (const auto& v : r.violations)
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Config, DefaultsAndMultipliers) {
  GenerationConfig cfg;
  EXPECT_EQ(cfg.effective_objects(), 10000u);
  EXPECT_EQ(cfg.effective_scenes(), 78000u);
  EXPECT_EQ(cfg.view_mode, ViewMode::multi);
  cfg.object_multiplier = 0.2;
  cfg.scene_multiplier = 0.5;
  EXPECT_EQ(cfg.effective_objects(), 2000u);
  EXPECT_EQ(cfg.effective_scenes(), 39000u);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, TomlOverridesAndRoundTrip) {
  const auto cfg = config_from_toml_string(R"(
object_source = "fractal"
n_objects = 300
scene_multiplier = 0.01
master_seed = 77
[fractal]
max_singular_value = 0.8
[scene]
scale = [0.8, 1.2]
voxel_size = 0.05
[camera]
pitch_deg = [-20.0, 5.0]
[crop]
knn_count = 1000
)");
  EXPECT_EQ(cfg.object_source, ObjectKind::fractal);
  EXPECT_EQ(cfg.n_objects, 300u);
  EXPECT_EQ(cfg.effective_scenes(), 780u);
  EXPECT_EQ(cfg.master_seed, 77u);
  EXPECT_EQ(cfg.fractal.max_singular_value, 0.8);
  EXPECT_EQ(cfg.scene.augment.scale_min, 0.8);
  EXPECT_EQ(cfg.scene.augment.scale_max, 1.2);
  EXPECT_EQ(cfg.scene.voxel_size, 0.05);
  EXPECT_EQ(cfg.camera.pitch_min_deg, -20.0);
  EXPECT_EQ(cfg.crop.knn_count, 1000u);
  EXPECT_EQ(cfg.scene.min_objects, 12);  // untouched keys keep defaults
  EXPECT_EQ(config_from_json(cfg.to_json()).to_json(), cfg.to_json());
}

TEST(Config, Errors) {
  EXPECT_THROW(config_from_toml_string("object_source = \"lego\""), ConfigError);
  EXPECT_THROW(config_from_toml_string("n_objects = \"many\""), ConfigError);
  EXPECT_THROW(config_from_toml_string("[scene]\nscale = [1.0]"), ConfigError);
  EXPECT_THROW(config_from_toml_string("n_objects = "), ConfigError);
  auto fractal_depth = config_from_toml_string("object_source = \"fractal\"\nview_mode = \"single\"");
  EXPECT_THROW(fractal_depth.validate(), ConfigError);
  auto cad = config_from_toml_string("object_source = \"cad\"");
  EXPECT_THROW(cad.validate(), ConfigError);
  GenerationConfig zero;
  zero.scene_multiplier = 0.0;
  EXPECT_THROW(zero.validate(), ConfigError);
}

TEST(Config, EnvironmentOverridesOutputDir) {
  GenerationConfig cfg;
  ::setenv(kOutputDirEnv, "/tmp/roomgen_env_dir", 1);
  apply_environment(cfg);
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(cfg.output_dir, fs::path("/tmp/roomgen_env_dir"));
  GenerationConfig untouched;
  apply_environment(untouched);
  EXPECT_EQ(untouched.output_dir, fs::path("roomgen_out"));
}

TEST(Config, SampleConfigsLoadAndValidate) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(ROOMGEN_CONFIG_DIR)) {
    if (e.path().extension() != ".toml") continue;
    ++n;
    const auto cfg = load_config(e.path());
    EXPECT_NO_THROW(cfg.validate()) << e.path();
  }
  EXPECT_GE(n, 4u);
  const auto desk = load_config(fs::path(ROOMGEN_CONFIG_DIR) / "desk_harmonics.toml");
  EXPECT_EQ(desk.effective_objects(), 200u);
  EXPECT_EQ(desk.effective_scenes(), 200u);
}

TEST(Seeds, SceneSeedsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < 10000; ++i) seen.insert(scene_seed(1, i));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_EQ(scene_seed(1, 5), derive_seed(1, "scene", 5));
  EXPECT_NE(scene_seed(1, 5), scene_seed(2, 5));
}

TEST(Layout, Names) {
  const Layout l{"/data"};
  EXPECT_EQ(l.scene_ply(42), fs::path("/data/scenes/scene_0000042.ply"));
  EXPECT_EQ(l.frame(3, 1).depth, fs::path("/data/views/scene_0000003_f1_depth.png"));
  EXPECT_EQ(l.relative(l.scene_ply(1)), "scenes/scene_0000001.ply");
}

TEST(ObjectSets, SerializeParseRoundTrip) {
  for (auto kind : {ObjectKind::harmonics, ObjectKind::fractal}) {
    auto cfg = small_config(testkit::scratch_dir("objects_rt"));
    cfg.object_source = kind;
    cfg.n_objects = 20;
    const auto info = generate_object_set(cfg);
    EXPECT_EQ(info.set.size(), 20u);
    const auto text = serialize_object_set(info.set, cfg.cad_dir);
    const auto back = parse_object_set(cfg, text);
    EXPECT_EQ(serialize_object_set(back, cfg.cad_dir), text);
    EXPECT_EQ(positions_of(back.load(7)), positions_of(info.set.load(7)));
  }
}

TEST(ObjectSets, PrepareReusesMatchingSet) {
  const auto dir = testkit::scratch_dir("objects_reuse");
  auto cfg = small_config(dir);
  const Layout layout{dir};
  const auto first = prepare_objects(cfg, layout);
  const auto again = prepare_objects(cfg, layout);
  EXPECT_EQ(first.sha256, again.sha256);
  EXPECT_EQ(again.attempts, first.attempts);
  cfg.master_seed += 1;
  EXPECT_NE(prepare_objects(cfg, layout).sha256, first.sha256);
}

TEST(ObjectSets, CadDirectory) {
  const auto dir = testkit::scratch_dir("cad_set");
  const auto cad = dir / "cad";
  fs::create_directories(cad / "chairs");
  for (int i = 0; i < 16; ++i)
    write_obj(cad / (i % 2 ? "chairs" : ".") / ("m" + std::to_string(i) + ".obj"),
              testkit::box_mesh(Vec3::Zero(), Vec3(1 + 0.1 * i, 1, 0.5 + 0.05 * i)));
  auto cfg = small_config(dir / "out", 2);
  cfg.object_source = ObjectKind::cad;
  cfg.cad_dir = cad;
  cfg.n_objects = 16;
  const auto summary = run_generation(cfg);
  EXPECT_EQ(summary.scenes, 2u);
  EXPECT_TRUE(validate_dataset(summary.manifest).ok());
}

class Generation : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testkit::scratch_dir("generation");
    summary_ = run_generation(small_config(dir_ / "a"));
  }
  static fs::path dir_;
  static RunSummary summary_;
};
fs::path Generation::dir_;
RunSummary Generation::summary_;

TEST_F(Generation, ManifestStructure) {
  const auto lines = manifest_lines(summary_.manifest);
  ASSERT_EQ(lines.size(), 21u);
  EXPECT_EQ(lines[0]["type"], "header");
  EXPECT_EQ(lines[0]["tool_version"], kToolVersion);
  EXPECT_EQ(lines[0]["n_scenes"], 20);
  EXPECT_EQ(lines[0]["objects"]["count"], 40);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& r = lines[i];
    EXPECT_EQ(r["type"], "scene");
    EXPECT_EQ(r["index"], i - 1);
    EXPECT_EQ(r["multiview"]["n_points"], 40000);
    EXPECT_EQ(r["objects"].size(), r["n_objects"].get<std::size_t>());
  }
  EXPECT_EQ(sha256_file(summary_.manifest), summary_.manifest_sha256);
  const auto m = read_manifest(summary_.manifest);
  EXPECT_EQ(m.scenes.size(), 20u);
  EXPECT_EQ(m.config().to_json(), small_config(dir_ / "a").to_json());
}

TEST_F(Generation, SceneCloudsMatchRecords) {
  const auto m = read_manifest(summary_.manifest);
  const auto objects = manifest_objects(m);
  const auto& rec = m.scenes[3];
  const auto cloud = read_ply(m.root / rec["multiview"]["path"].get<std::string>());
  EXPECT_EQ(cloud.size(), 40000u);
  const auto spec = spec_from_record(rec);
  EXPECT_EQ(spec.seed, rec["seed"].get<std::uint64_t>());
  const auto rebuilt = scene::finalize_multiview(spec, objects, m.config().scene);
  EXPECT_EQ(rebuilt.positions, cloud.positions);
  EXPECT_EQ(rebuilt.object_ids, cloud.object_ids);
}

TEST_F(Generation, DeterministicAcrossRunsAndWorkerCounts) {
  RunOptions opt;
  opt.workers = 8;
  const auto b = run_generation(small_config(dir_ / "b"), opt);
  EXPECT_EQ(b.manifest_sha256, summary_.manifest_sha256);
  EXPECT_EQ(slurp(b.manifest), slurp(summary_.manifest));
  EXPECT_EQ(slurp(Layout{dir_ / "b"}.scene_ply(17)), slurp(Layout{dir_ / "a"}.scene_ply(17)));
  auto other = small_config(dir_ / "c", 3);
  other.master_seed += 1;
  opt.workers = 1;
  run_generation(other, opt);
  EXPECT_NE(slurp(Layout{dir_ / "c"}.scene_ply(0)), slurp(Layout{dir_ / "a"}.scene_ply(0)));
}

TEST_F(Generation, LimitProducesPrefix) {
  RunOptions opt;
  opt.limit = 5;
  const auto d = run_generation(small_config(dir_ / "d"), opt);
  EXPECT_EQ(d.scenes, 5u);
  const auto full = manifest_lines(summary_.manifest), part = manifest_lines(d.manifest);
  ASSERT_EQ(part.size(), 6u);
  for (std::size_t i = 1; i < part.size(); ++i) EXPECT_EQ(part[i], full[i]);
}

TEST_F(Generation, RestartRegeneratesOnlyMissingScenes) {
  const auto dir = dir_ / "e";
  fs::create_directories(dir);
  fs::copy(dir_ / "a", dir, fs::copy_options::recursive);
  const Layout layout{dir};
  fs::remove(layout.record(4));
  fs::remove(layout.scene_ply(9));
  {
    std::ofstream trunc(layout.scene_ply(12), std::ios::binary | std::ios::trunc);
    trunc << "ply\n";
  }
  fs::remove(layout.manifest());
  const auto r = run_generation(small_config(dir));
  EXPECT_EQ(r.reused, 17u);
  EXPECT_EQ(r.manifest_sha256, summary_.manifest_sha256);
  EXPECT_EQ(slurp(layout.scene_ply(12)), slurp(Layout{dir_ / "a"}.scene_ply(12)));

  RunOptions fresh;
  fresh.resume = false;
  EXPECT_EQ(run_generation(small_config(dir), fresh).reused, 0u);
}

TEST_F(Generation, ValidateCleanDataset) {
  ValidateOptions opt;
  opt.sample = 0;
  const auto report = validate_dataset(summary_.manifest, opt);
  EXPECT_TRUE(report.ok()) << report.to_json().dump(1);
  EXPECT_EQ(report.scenes_checked, 20u);
  EXPECT_EQ(report.scenes_sampled, 20u);
}

TEST_F(Generation, ValidateFlagsTruncatedAndShortClouds) {
  const auto dir = dir_ / "f";
  fs::create_directories(dir);
  fs::copy(dir_ / "a", dir, fs::copy_options::recursive);
  const Layout layout{dir};

  const auto bytes = slurp(layout.scene_ply(2));
  {
    std::ofstream out(layout.scene_ply(2), std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 100));
  }
  auto report = validate_dataset(layout.manifest());
  EXPECT_TRUE(has_violation(report, "scene 2: checksum mismatch")) << report.to_json().dump(1);

  // A well-formed cloud one point short, with the manifest checksum updated.
  auto cloud = read_ply(layout.scene_ply(5));
  cloud = cloud.select([&] {
    std::vector<std::size_t> idx(39999);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
  }());
  write_ply(layout.scene_ply(5), cloud);
  auto lines = manifest_lines(layout.manifest());
  lines[6]["multiview"]["sha256"] = sha256_file(layout.scene_ply(5));
  write_manifest_lines(layout.manifest(), lines);
  report = validate_dataset(layout.manifest());
  EXPECT_TRUE(has_violation(report, "scene 5: cloud has 39999 points")) << report.to_json().dump(1);

  // Too many objects in a record.
  lines = manifest_lines(layout.manifest());
  auto extra = lines[8]["objects"][0];
  while (lines[8]["objects"].size() < 17) lines[8]["objects"].push_back(extra);
  lines[8]["n_objects"] = 17;
  write_manifest_lines(layout.manifest(), lines);
  report = validate_dataset(layout.manifest());
  EXPECT_TRUE(has_violation(report, "scene 7: has 17 objects")) << report.to_json().dump(1);
  EXPECT_TRUE(has_violation(report, "scene 7: repeats an object"));

  // Object archive tampering.
  {
    std::ofstream out(layout.object_file(ObjectKind::harmonics), std::ios::app);
    out << "0 0 0 0 0 0 0 0\n";
  }
  EXPECT_TRUE(has_violation(validate_dataset(layout.manifest()), "object set file"));
}

TEST(SingleView, FramesAreWrittenAndValid) {
  const auto dir = testkit::scratch_dir("single_view");
  auto cfg = small_config(dir, 3);
  cfg.view_mode = ViewMode::both;
  const auto summary = run_generation(cfg);
  const auto m = read_manifest(summary.manifest);
  ASSERT_EQ(m.frame_records, 3u);
  for (const auto& rec : m.scenes) {
    const auto& f = rec["frames"][0];
    EXPECT_GE(f["object_ids"].size(), 7u);
    const auto loaded = depth_io::read_frame({m.root / f["depth"]["path"].get<std::string>(),
                                              m.root / f["ids"]["path"].get<std::string>(),
                                              m.root / f["camera"]["path"].get<std::string>()});
    EXPECT_EQ(loaded.frame.intrinsics.width, 640);
    EXPECT_EQ(raycast::qualifying_objects(loaded.frame, 64), f["object_ids"].get<std::vector<std::int32_t>>());
  }
  ValidateOptions opt;
  opt.sample = 0;
  const auto report = validate_dataset(summary.manifest, opt);
  EXPECT_TRUE(report.ok()) << report.to_json().dump(1);
  EXPECT_EQ(report.frames_checked, 3u);

  CropRequest req;
  req.mode = CropMode::depth;
  req.out_dir = dir / "crops";
  req.per_scene = 2;
  const auto crops = export_crops(summary.manifest, req);
  ASSERT_EQ(crops.size(), 6u);
  for (const auto& c : crops) {
    const auto pc = read_ply(c.files.at(0));
    EXPECT_EQ(pc.size(), c.sizes.at(0));
    EXPECT_TRUE(pc.has_colors());
  }
}

TEST_F(Generation, CropExportModes) {
  CropRequest req;
  req.out_dir = dir_ / "crops_mae";
  req.limit = 3;
  req.seed = 5;
  const auto mae = export_crops(summary_.manifest, req);
  ASSERT_EQ(mae.size(), 3u);
  for (const auto& c : mae) {
    const auto pc = read_ply(c.files.at(0));
    EXPECT_EQ(pc.size(), 20000u);
    for (const auto& col : pc.colors)
      for (int ch = 0; ch < 3; ++ch) ASSERT_TRUE(col[ch] >= 0.0f && col[ch] <= 1.0f);
  }
  const auto mae_again = export_crops(summary_.manifest, req, 3);
  EXPECT_EQ(slurp(mae_again[1].files[0]), slurp(mae[1].files[0]));

  req.mode = CropMode::contrastive;
  req.out_dir = dir_ / "crops_pair";
  req.first_scene = 10;
  for (const auto& c : export_crops(summary_.manifest, req)) {
    EXPECT_EQ(c.files.size(), 2u);
    EXPECT_GE(c.overlap, 0.1);
    EXPECT_GE(c.scene, 10u);
  }
  req.mode = CropMode::depth;
  EXPECT_THROW(export_crops(summary_.manifest, req), PipelineError);
}

TEST(Manifest, ReadErrors) {
  const auto dir = testkit::scratch_dir("manifest_errors");
  auto write = [&](const std::string& text) {
    std::ofstream(dir / "manifest.jsonl") << text;
    return dir / "manifest.jsonl";
  };
  EXPECT_THROW(read_manifest(dir / "missing.jsonl"), PipelineError);
  EXPECT_THROW(read_manifest(write("{\"type\":\"scene\"}\n")), PipelineError);
  EXPECT_THROW(read_manifest(write("{\"type\":\"header\"}\nnot json\n")), PipelineError);
  EXPECT_THROW(read_manifest(write("{\"type\":\"header\"}\n{\"type\":\"frame\",\"scene\":0}\n")), PipelineError);
  const auto report = validate_dataset(write("{\"type\":\"header\"}\n"));
  EXPECT_FALSE(report.ok());
}
