#pragma once

// Batch dataset generation: object sets, per-scene jobs, the JSONL manifest
// and dataset validation.

#include "roomgen/checksum.hpp"
#include "roomgen/config.hpp"
#include "roomgen/depth_io.hpp"
#include "roomgen/parallel.hpp"
#include "roomgen/ply.hpp"
#include "roomgen/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

namespace roomgen::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kToolVersion = "roomgen 1.0.0";

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Directory layout of a generated dataset. All manifest paths are relative
/// to the root.
struct Layout {
  fs::path root;

  fs::path objects_dir() const { return root / "objects"; }
  fs::path scenes_dir() const { return root / "scenes"; }
  fs::path views_dir() const { return root / "views"; }
  fs::path records_dir() const { return root / "records"; }
  fs::path manifest() const { return root / "manifest.jsonl"; }
  fs::path object_file(ObjectKind k) const {
    switch (k) {
      case ObjectKind::harmonics: return objects_dir() / "harmonics.txt";
      case ObjectKind::fractal: return objects_dir() / "ifs.txt";
      case ObjectKind::cad: return objects_dir() / "cad.txt";
    }
    return objects_dir() / "objects.txt";
  }
  fs::path object_summary() const { return objects_dir() / "objects.json"; }

  static std::string scene_stem(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%07zu", index);
    return buf;
  }
  fs::path scene_ply(std::size_t index) const { return scenes_dir() / (scene_stem(index) + ".ply"); }
  depth_io::FramePaths frame(std::size_t index, std::size_t f) const {
    const std::string base = scene_stem(index) + "_f" + std::to_string(f);
    return {views_dir() / (base + "_depth.png"), views_dir() / (base + "_ids.png"),
            views_dir() / (base + "_camera.json")};
  }
  fs::path record(std::size_t index) const { return records_dir() / (scene_stem(index) + ".json"); }
  std::string relative(const fs::path& p) const { return p.lexically_relative(root).generic_string(); }
};

/// Writes through a temporary file so readers never see partial content.
inline void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw PipelineError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw PipelineError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Object sets
// ---------------------------------------------------------------------------

struct ObjectSetInfo {
  ObjectSet set;
  fs::path file;
  std::string sha256;
  std::size_t attempts = 0;  // fractal: systems drawn in total; 0 when loaded
};

/// Mesh files under `dir` (recursive), sorted by relative path.
inline std::vector<fs::path> find_cad_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw PipelineError("cad_dir is not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".off" || ext == ".obj") out.push_back(e.path().lexically_relative(dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Deterministic object set for cfg; object i draws from its own derived
/// seed so the set is independent of the worker count.
inline ObjectSetInfo generate_object_set(const GenerationConfig& cfg, unsigned workers = 1) {
  const std::size_t n = cfg.effective_objects();
  switch (cfg.object_source) {
    case ObjectKind::harmonics: {
      std::vector<harmonics::Coefficients> coeffs(n);
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(cfg.master_seed, "object", i));
        coeffs[i] = harmonics::sample_coefficients(rng);
      }
      return {ObjectSet::from_harmonics(std::move(coeffs), cfg.mesh), {}, {}, 0};
    }
    case ObjectKind::fractal: {
      std::vector<fractal::FractalObject> objs(n);
      parallel_for(n, workers, [&](std::size_t i) {
        Rng rng(derive_seed(cfg.master_seed, "object", i));
        objs[i] = fractal::sample_object(rng, cfg.fractal);
      });
      std::size_t attempts = 0;
      for (const auto& o : objs) attempts += o.attempts;
      return {ObjectSet::from_fractals(std::move(objs), cfg.fractal), {}, {}, attempts};
    }
    case ObjectKind::cad: {
      auto rel = find_cad_files(cfg.cad_dir);
      if (rel.empty()) throw PipelineError("no .off/.obj files under " + cfg.cad_dir.string());
      if (rel.size() > n) rel.resize(n);
      std::vector<fs::path> paths;
      for (const auto& r : rel) paths.push_back(cfg.cad_dir / r);
      return {ObjectSet::from_files(std::move(paths)), {}, {}, 0};
    }
  }
  throw std::logic_error("unknown object source");
}

inline std::string serialize_object_set(const ObjectSet& set, const fs::path& cad_dir) {
  std::ostringstream out;
  switch (set.kind()) {
    case ObjectKind::harmonics: harmonics::write_coefficients(out, set.harmonics()); break;
    case ObjectKind::fractal: fractal::write_systems(out, set.fractals()); break;
    case ObjectKind::cad:
      for (const auto& p : set.paths()) out << p.lexically_relative(cad_dir).generic_string() << '\n';
      break;
  }
  return out.str();
}

inline ObjectSet parse_object_set(const GenerationConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  switch (cfg.object_source) {
    case ObjectKind::harmonics:
      return ObjectSet::from_harmonics(harmonics::read_coefficients(in), cfg.mesh);
    case ObjectKind::fractal:
      return ObjectSet::from_fractals(fractal::read_systems(in), cfg.fractal);
    case ObjectKind::cad: {
      std::vector<fs::path> paths;
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) paths.push_back(cfg.cad_dir / line);
      return ObjectSet::from_files(std::move(paths));
    }
  }
  throw std::logic_error("unknown object source");
}

/// Identity of an object set: everything that determines its content.
inline json object_set_key(const GenerationConfig& cfg) {
  const auto full = cfg.to_json();
  return {{"object_source", full["object_source"]},
          {"n_objects", cfg.effective_objects()},
          {"master_seed", cfg.master_seed},
          {"cad_dir", full["cad_dir"]},
          {"fractal", full["fractal"]}};
}

/// Loads the saved object set when it matches cfg, otherwise generates and
/// saves it.
inline ObjectSetInfo prepare_objects(const GenerationConfig& cfg, const Layout& layout, unsigned workers = 1,
                                     bool force = false) {
  fs::create_directories(layout.objects_dir());
  const fs::path file = layout.object_file(cfg.object_source);
  const json key = object_set_key(cfg);
  if (!force && fs::exists(file) && fs::exists(layout.object_summary())) {
    std::ifstream in(layout.object_summary());
    const json summary = json::parse(in, nullptr, false);
    if (!summary.is_discarded() && summary.value("key", json()) == key) {
      const std::string text = read_file_bytes(file);
      if (sha256_hex(text) == summary.value("sha256", "")) {
        return {parse_object_set(cfg, text), file, sha256_hex(text), summary.value("attempts", std::size_t{0})};
      }
    }
  }
  ObjectSetInfo info = generate_object_set(cfg, workers);
  const std::string text = serialize_object_set(info.set, cfg.cad_dir);
  write_text_atomic(file, text);
  info.file = file;
  info.sha256 = sha256_hex(text);
  json summary{{"key", key}, {"count", info.set.size()}, {"sha256", info.sha256}, {"attempts", info.attempts}};
  if (info.attempts > 0)
    summary["acceptance_rate"] = static_cast<double>(info.set.size()) / static_cast<double>(info.attempts);
  write_text_atomic(layout.object_summary(), summary.dump(1) + "\n");
  return info;
}

// ---------------------------------------------------------------------------
// Per-scene job
// ---------------------------------------------------------------------------

inline json placement_json(const scene::ObjectPlacement& p) {
  return {{"ref", p.object_ref},
          {"scale", p.augment.scale},
          {"flip", p.augment.flip},
          {"z_rotation", p.augment.z_rotation},
          {"zy_swap", p.augment.zy_swap},
          {"position", {p.position.x(), p.position.y(), p.position.z()}}};
}

inline scene::ObjectPlacement placement_from_json(const json& j) {
  scene::ObjectPlacement p;
  p.object_ref = j.at("ref");
  p.augment.scale = j.at("scale");
  p.augment.flip = j.at("flip");
  p.augment.z_rotation = j.at("z_rotation");
  p.augment.zy_swap = j.at("zy_swap");
  const auto& pos = j.at("position");
  p.position = Vec3(pos.at(0), pos.at(1), pos.at(2));
  return p;
}

/// Scene layout stored in a record.
inline scene::SceneSpec spec_from_record(const json& rec) {
  scene::SceneSpec s;
  s.seed = rec.at("seed");
  const auto& room = rec.at("room");
  s.room_width = room.at("width");
  s.room_length = room.at("length");
  s.wall_height = room.at("height");
  for (const auto& o : rec.at("objects")) s.placements.push_back(placement_from_json(o));
  return s;
}

inline json file_entry(const Layout& layout, const fs::path& p) {
  return {{"path", layout.relative(p)}, {"sha256", sha256_file(p)}};
}

inline std::uint64_t scene_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, "scene", index);
}

/// Seed of regeneration attempt `attempt` (0 = the scene seed itself).
inline std::uint64_t attempt_seed(std::uint64_t base, int attempt) {
  return attempt == 0 ? base : derive_seed(base, "retry", static_cast<std::uint64_t>(attempt));
}

/// Generates scene `index`, writes its files and returns its record.
/// Rejected attempts are regenerated with derived seeds and listed under
/// "rejections".
inline json generate_scene(const GenerationConfig& cfg, const ObjectSet& set, const Layout& layout,
                           std::size_t index) {
  const std::uint64_t base = scene_seed(cfg.master_seed, index);
  json rejections = json::array();
  for (int attempt = 0; attempt < cfg.max_scene_attempts; ++attempt) {
    const std::uint64_t seed = attempt_seed(base, attempt);
    Rng rng(seed);
    std::optional<scene::AssembledScene> assembled;
    try {
      assembled = scene::assemble_scene(set, rng, cfg.scene, seed);
    } catch (const scene::SceneRejected& e) {
      rejections.push_back({{"attempt", attempt}, {"reason", e.what()}});
      continue;
    }
    const auto& spec = assembled->spec;

    std::vector<raycast::ValidView> views;
    if (cfg.wants_single_view()) {
      const auto mesh = scene::scene_mesh(*assembled);
      const raycast::Bvh bvh(mesh);
      const raycast::RoomBox room{spec.room_width, spec.room_length};
      try {
        for (std::size_t f = 0; f < cfg.frames_per_scene; ++f) {
          Rng view_rng(derive_seed(seed, "view", f));
          views.push_back(raycast::sample_valid_view(bvh, room, spec.placements.size(), view_rng, cfg.camera));
        }
      } catch (const raycast::ViewRejected& e) {
        rejections.push_back({{"attempt", attempt}, {"reason", e.what()}});
        continue;
      }
    }

    json rec{{"type", "scene"},
             {"index", index},
             {"seed", seed},
             {"attempt", attempt},
             {"rejections", rejections},
             {"room", {{"width", spec.room_width}, {"length", spec.room_length}, {"height", spec.wall_height}}},
             {"n_objects", spec.placements.size()}};
    json objects = json::array();
    for (const auto& p : spec.placements) objects.push_back(placement_json(p));
    rec["objects"] = std::move(objects);

    try {
      if (cfg.wants_multiview()) {
        const auto cloud = scene::finalize_multiview(spec, assembled->objects, cfg.scene);
        const auto path = layout.scene_ply(index);
        write_ply(path, cloud);
        auto entry = file_entry(layout, path);
        entry["n_points"] = cloud.size();
        rec["multiview"] = std::move(entry);
      }
      json frames = json::array();
      for (std::size_t f = 0; f < views.size(); ++f) {
        const auto paths = layout.frame(index, f);
        depth_io::write_frame(paths, views[f].frame, views[f].object_ids);
        frames.push_back({{"frame", f},
                          {"depth", file_entry(layout, paths.depth)},
                          {"ids", file_entry(layout, paths.ids)},
                          {"camera", file_entry(layout, paths.camera)},
                          {"object_ids", views[f].object_ids},
                          {"pose_attempts", views[f].attempts}});
      }
      if (cfg.wants_single_view()) rec["frames"] = std::move(frames);
    } catch (const std::exception& e) {
      throw PipelineError("scene " + std::to_string(index) + ": " + e.what());
    }
    return rec;
  }
  throw PipelineError("scene " + std::to_string(index) + ": rejected " +
                      std::to_string(cfg.max_scene_attempts) + " times");
}

/// Every file listed in a record exists with its recorded checksum.
inline bool record_files_intact(const Layout& layout, const json& rec) {
  auto ok = [&](const json& entry) {
    const fs::path p = layout.root / entry.at("path").get<std::string>();
    return fs::exists(p) && sha256_file(p) == entry.at("sha256").get<std::string>();
  };
  if (rec.contains("multiview") && !ok(rec["multiview"])) return false;
  if (rec.contains("frames"))
    for (const auto& f : rec["frames"])
      if (!ok(f["depth"]) || !ok(f["ids"]) || !ok(f["camera"])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct RunOptions {
  unsigned workers = 1;
  std::optional<std::size_t> limit;  // generate only the first `limit` scenes
  bool resume = true;                // reuse intact per-scene records
  std::function<void(const std::string&)> log;
};

struct RunSummary {
  fs::path manifest;
  std::size_t scenes = 0;
  std::size_t reused = 0;
  std::size_t rejections = 0;
  std::string manifest_sha256;
};

inline json manifest_header(const GenerationConfig& cfg, const ObjectSetInfo& objects, const Layout& layout,
                            std::size_t n_scenes) {
  return {{"type", "header"},
          {"tool_version", kToolVersion},
          {"config", cfg.to_json()},
          {"objects",
           {{"kind", to_string(objects.set.kind())},
            {"count", objects.set.size()},
            {"file", layout.relative(objects.file)},
            {"sha256", objects.sha256}}},
          {"n_scenes", n_scenes},
          {"n_frames", cfg.wants_single_view() ? n_scenes * cfg.frames_per_scene : 0}};
}

/// Manifest lines: the header, then per scene its scene record followed by
/// one frame record per rendered frame.
inline std::string manifest_text(const json& header, const std::vector<json>& records) {
  std::string out = header.dump() + "\n";
  for (const auto& rec : records) {
    json scene_rec = rec;
    scene_rec.erase("frames");
    out += scene_rec.dump() + "\n";
    if (!rec.contains("frames")) continue;
    for (const auto& f : rec["frames"]) {
      json fr = f;
      fr["type"] = "frame";
      fr["scene"] = rec["index"];
      out += fr.dump() + "\n";
    }
  }
  return out;
}

inline std::string config_digest(const GenerationConfig& cfg) { return sha256_hex(cfg.to_json().dump()); }

/// Generates (or loads) the object set, then every scene, then the manifest.
/// The output is a pure function of the configuration.
inline RunSummary run_generation(const GenerationConfig& cfg, const RunOptions& opt = {}) {
  cfg.validate();
  const Layout layout{cfg.output_dir};
  fs::create_directories(layout.root);
  const unsigned workers = std::max(1u, opt.workers);
  const auto objects = prepare_objects(cfg, layout, workers);
  if (objects.set.size() < static_cast<std::size_t>(cfg.scene.max_objects))
    throw PipelineError("object set has " + std::to_string(objects.set.size()) +
                        " objects; scenes need at least " + std::to_string(cfg.scene.max_objects));

  std::size_t n = cfg.effective_scenes();
  if (opt.limit) n = std::min(n, *opt.limit);
  fs::create_directories(layout.scenes_dir());
  fs::create_directories(layout.records_dir());
  if (cfg.wants_single_view()) fs::create_directories(layout.views_dir());

  const std::string digest = config_digest(cfg);
  std::vector<json> records(n);
  std::vector<char> reused(n, 0);
  std::mutex log_mutex;
  std::size_t done = 0;
  parallel_for(n, workers, [&](std::size_t i) {
    const auto rec_path = layout.record(i);
    if (opt.resume && fs::exists(rec_path)) {
      std::ifstream in(rec_path);
      json stored = json::parse(in, nullptr, false);
      if (!stored.is_discarded() && stored.value("config_digest", "") == digest &&
          stored.value("objects_sha256", "") == objects.sha256 && stored.contains("record") &&
          record_files_intact(layout, stored["record"])) {
        records[i] = std::move(stored["record"]);
        reused[i] = 1;
      }
    }
    if (!reused[i]) {
      records[i] = generate_scene(cfg, objects.set, layout, i);
      json stored{{"config_digest", digest}, {"objects_sha256", objects.sha256}, {"record", records[i]}};
      write_text_atomic(rec_path, stored.dump() + "\n");
    }
    if (opt.log) {
      std::lock_guard lock(log_mutex);
      ++done;
      if (done == n || done % 100 == 0)
        opt.log("scenes " + std::to_string(done) + "/" + std::to_string(n));
    }
  });

  RunSummary summary;
  summary.manifest = layout.manifest();
  summary.scenes = n;
  for (std::size_t i = 0; i < n; ++i) {
    summary.reused += reused[i];
    summary.rejections += records[i]["rejections"].size();
  }
  const std::string text = manifest_text(manifest_header(cfg, objects, layout, n), records);
  write_text_atomic(layout.manifest(), text);
  summary.manifest_sha256 = sha256_hex(text);
  return summary;
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

struct Manifest {
  fs::path root;
  json header;
  std::vector<json> scenes;  // scene records, frames re-attached under "frames"
  std::size_t frame_records = 0;

  GenerationConfig config() const { return config_from_json(header.at("config")); }
  Layout layout() const { return {root}; }
};

inline Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open manifest " + path.string());
  Manifest m;
  m.root = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw PipelineError(path.string() + ":" + std::to_string(line_no) + ": malformed record");
    const std::string type = j.value("type", "");
    if (line_no == 1) {
      if (type != "header") throw PipelineError(path.string() + ": first record is not a header");
      m.header = std::move(j);
    } else if (type == "scene") {
      m.scenes.push_back(std::move(j));
    } else if (type == "frame") {
      if (m.scenes.empty() || m.scenes.back()["index"] != j["scene"])
        throw PipelineError(path.string() + ":" + std::to_string(line_no) + ": frame without its scene");
      ++m.frame_records;
      j.erase("type");
      j.erase("scene");
      m.scenes.back()["frames"].push_back(std::move(j));
    } else {
      throw PipelineError(path.string() + ":" + std::to_string(line_no) + ": unknown record type");
    }
  }
  if (m.header.is_null()) throw PipelineError(path.string() + ": empty manifest");
  return m;
}

/// Loads the object set a manifest refers to.
inline ObjectSet manifest_objects(const Manifest& m) {
  const auto cfg = m.config();
  const fs::path file = m.root / m.header.at("objects").at("file").get<std::string>();
  return parse_object_set(cfg, read_file_bytes(file));
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidateOptions {
  /// Scenes receiving the expensive checks (voxel uniqueness, stacking,
  /// frame recounts), evenly spaced. 0 = all.
  std::size_t sample = 20;
  unsigned workers = 1;
};

struct ValidationReport {
  std::size_t scenes_checked = 0;
  std::size_t frames_checked = 0;
  std::size_t scenes_sampled = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  json to_json() const {
    return {{"scenes_checked", scenes_checked},
            {"frames_checked", frames_checked},
            {"scenes_sampled", scenes_sampled},
            {"violations", violations},
            {"ok", ok()}};
  }
};

inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  if (k == 0 || k >= n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t j = 0; j < k; ++j) out.push_back(j * n / k);
  return out;
}

/// Points falling in the same voxel.
inline std::size_t voxel_collisions(const PointCloud& pc, double voxel) {
  std::vector<scene::VoxelKey> keys;
  keys.reserve(pc.size());
  for (const auto& p : pc.positions) keys.push_back(scene::voxel_of(p, voxel));
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(keys.end() - std::unique(keys.begin(), keys.end()));
}

/// Highest top among objects resting on another object (bottom above the floor).
inline double max_stacked_top(const std::vector<ObjectGeometry>& objects) {
  double top = 0.0;
  for (const auto& g : objects) {
    const Aabb b = bounds_of(positions_of(g));
    if (b.min.z() > 1e-9) top = std::max(top, b.max.z());
  }
  return top;
}

inline ValidationReport validate_dataset(const fs::path& manifest_path, const ValidateOptions& opt = {}) {
  ValidationReport report;
  Manifest m;
  try {
    m = read_manifest(manifest_path);
  } catch (const std::exception& e) {
    report.violations.push_back(e.what());
    return report;
  }
  const auto layout = m.layout();
  GenerationConfig cfg;
  try {
    cfg = m.config();
  } catch (const std::exception& e) {
    report.violations.push_back(std::string("header config unreadable: ") + e.what());
    return report;
  }

  std::optional<ObjectSet> objects;
  const fs::path object_file = layout.root / m.header.at("objects").value("file", "");
  if (!fs::exists(object_file) || sha256_file(object_file) != m.header["objects"].value("sha256", "")) {
    report.violations.push_back("object set file missing or checksum mismatch: " + object_file.string());
  } else {
    objects = manifest_objects(m);
  }

  const std::size_t n = m.header.value("n_scenes", std::size_t{0});
  if (m.scenes.size() != n)
    report.violations.push_back("manifest lists " + std::to_string(m.scenes.size()) + " scene records; header says " +
                                std::to_string(n));
  const std::size_t n_frames = m.header.value("n_frames", std::size_t{0});
  if (m.frame_records != n_frames)
    report.violations.push_back("manifest lists " + std::to_string(m.frame_records) + " frame records; header says " +
                                std::to_string(n_frames));

  const auto sampled = sample_indices(m.scenes.size(), opt.sample);
  std::vector<char> is_sampled(m.scenes.size(), 0);
  for (auto i : sampled) is_sampled[i] = 1;
  report.scenes_sampled = sampled.size();

  std::vector<std::vector<std::string>> found(m.scenes.size());
  parallel_for(m.scenes.size(), std::max(1u, opt.workers), [&](std::size_t s) {
    auto& out = found[s];
    const json& rec = m.scenes[s];
    const std::string who = "scene " + std::to_string(s);
    auto flag = [&](const std::string& what) { out.push_back(who + ": " + what); };
    try {
      if (rec.at("index").get<std::size_t>() != s) flag("record index out of order");
      const auto& objs = rec.at("objects");
      const auto k = objs.size();
      if (k != rec.at("n_objects").get<std::size_t>()) flag("object count disagrees with object list");
      if (k < static_cast<std::size_t>(cfg.scene.min_objects) || k > static_cast<std::size_t>(cfg.scene.max_objects))
        flag("has " + std::to_string(k) + " objects (allowed " + std::to_string(cfg.scene.min_objects) + "-" +
             std::to_string(cfg.scene.max_objects) + ")");
      std::set<std::size_t> refs;
      for (const auto& o : objs) refs.insert(o.at("ref").get<std::size_t>());
      if (refs.size() != k) flag("repeats an object");
      if (objects && !refs.empty() && *refs.rbegin() >= objects->size()) flag("object reference out of range");

      auto check_file = [&](const json& entry) -> std::optional<fs::path> {
        const fs::path p = layout.root / entry.at("path").get<std::string>();
        if (!fs::exists(p)) {
          flag("missing file " + entry["path"].get<std::string>());
          return std::nullopt;
        }
        if (sha256_file(p) != entry.at("sha256").get<std::string>()) {
          flag("checksum mismatch for " + entry["path"].get<std::string>());
          return std::nullopt;
        }
        return p;
      };

      if (cfg.wants_multiview()) {
        if (!rec.contains("multiview")) {
          flag("missing multi-view cloud");
        } else if (auto p = check_file(rec["multiview"])) {
          const auto cloud = read_ply(*p);
          if (cloud.size() != cfg.scene.n_points)
            flag("cloud has " + std::to_string(cloud.size()) + " points (expected " +
                 std::to_string(cfg.scene.n_points) + ")");
          for (auto id : cloud.object_ids)
            if (id != kFloorId && id != kWallId && (id < 0 || static_cast<std::size_t>(id) >= k)) {
              flag("point carries an unknown object id");
              break;
            }
          if (is_sampled[s]) {
            if (auto c = voxel_collisions(cloud, cfg.scene.voxel_size); c > 0)
              flag(std::to_string(c) + " points share a voxel with another point");
          }
        }
      }
      if (is_sampled[s] && objects) {
        const auto spec = spec_from_record(rec);
        const double top = max_stacked_top(scene::instantiate_all(*objects, spec));
        if (top > cfg.scene.max_stack_height + 1e-9)
          flag("stacked object top at " + std::to_string(top) + " m");
      }
      if (cfg.wants_single_view()) {
        const auto frames = rec.value("frames", json::array());
        if (frames.size() != cfg.frames_per_scene) flag("has " + std::to_string(frames.size()) + " frames");
        for (const auto& f : frames) {
          const auto ids = f.at("object_ids").get<std::vector<std::int32_t>>();
          if (ids.size() < cfg.camera.min_objects)
            flag("frame shows " + std::to_string(ids.size()) + " qualifying objects");
          auto d = check_file(f.at("depth"));
          auto i = check_file(f.at("ids"));
          auto c = check_file(f.at("camera"));
          if (is_sampled[s] && d && i && c) {
            const auto loaded = depth_io::read_frame({*d, *i, *c});
            if (raycast::qualifying_objects(loaded.frame, cfg.camera.min_pixels) != ids)
              flag("frame id map disagrees with its qualifying object list");
          }
        }
      }
    } catch (const std::exception& e) {
      flag(std::string("unreadable record: ") + e.what());
    }
  });
  for (auto& v : found) report.violations.insert(report.violations.end(), v.begin(), v.end());
  report.scenes_checked = m.scenes.size();
  report.frames_checked = m.frame_records;
  return report;
}

}  // namespace roomgen::pipeline
