#pragma once

// Generation configuration: defaults, TOML loading and a JSON snapshot for
// manifests.

#include "roomgen/crops.hpp"
#include "roomgen/fractal.hpp"
#include "roomgen/harmonics.hpp"
#include "roomgen/objects.hpp"
#include "roomgen/raycast.hpp"
#include "roomgen/scenegen.hpp"

#include <json.hpp>
#include <toml.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

namespace roomgen {

enum class ViewMode { multi, single, both };

inline const char* to_string(ViewMode m) {
  switch (m) {
    case ViewMode::multi: return "multi";
    case ViewMode::single: return "single";
    case ViewMode::both: return "both";
  }
  return "?";
}

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ObjectKind parse_object_kind(const std::string& s) {
  if (s == "harmonics") return ObjectKind::harmonics;
  if (s == "fractal") return ObjectKind::fractal;
  if (s == "cad") return ObjectKind::cad;
  throw ConfigError("unknown object_source '" + s + "' (harmonics, fractal, cad)");
}

inline ViewMode parse_view_mode(const std::string& s) {
  if (s == "multi") return ViewMode::multi;
  if (s == "single") return ViewMode::single;
  if (s == "both") return ViewMode::both;
  throw ConfigError("unknown view_mode '" + s + "' (multi, single, both)");
}

/// Environment variable that overrides `output_dir`.
inline constexpr const char* kOutputDirEnv = "ROOMGEN_OUTPUT_DIR";

struct GenerationConfig {
  ObjectKind object_source = ObjectKind::harmonics;
  std::size_t n_objects = 10000;
  std::size_t n_scenes = 78000;
  double object_multiplier = 1.0;
  double scene_multiplier = 1.0;
  ViewMode view_mode = ViewMode::multi;
  std::size_t frames_per_scene = 1;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "roomgen_out";
  std::filesystem::path cad_dir;  // object_source = cad: OFF/OBJ files found here
  int max_scene_attempts = 100;

  harmonics::MeshResolution mesh;
  fractal::Config fractal;
  scene::SceneConfig scene;
  raycast::ViewConfig camera;
  crops::CropConfig crop;

  std::size_t effective_objects() const {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n_objects) * object_multiplier));
  }
  std::size_t effective_scenes() const {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n_scenes) * scene_multiplier));
  }
  bool wants_multiview() const { return view_mode != ViewMode::single; }
  bool wants_single_view() const { return view_mode != ViewMode::multi; }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("invalid configuration: ") + what);
    };
    require(effective_objects() > 0, "object count must be positive");
    require(effective_scenes() > 0, "scene count must be positive");
    require(object_multiplier > 0 && scene_multiplier > 0, "multipliers must be positive");
    require(frames_per_scene > 0, "frames_per_scene must be positive");
    require(max_scene_attempts > 0, "max_scene_attempts must be positive");
    require(mesh.n_polar >= 3 && mesh.n_azimuth >= 3, "mesh resolution must be at least 3x3");
    require(fractal.n_points > 0, "fractal n_points must be positive");
    require(fractal.min_maps >= fractal::kMinMaps && fractal.max_maps <= fractal::kMaxMaps &&
                fractal.min_maps <= fractal.max_maps,
            "fractal map counts must lie in [2, 8]");
    const auto& s = scene;
    require(s.min_objects >= 1 && s.min_objects <= s.max_objects, "scene object range");
    require(s.augment.scale_min > 0 && s.augment.scale_min <= s.augment.scale_max, "augment scale range");
    require(s.area_factor_min > 0 && s.area_factor_min <= s.area_factor_max, "room area factor range");
    require(s.aspect_min > 0 && s.aspect_min <= s.aspect_max, "room aspect range");
    require(s.wall_height_min > 0 && s.wall_height_min <= s.wall_height_max, "wall height range");
    require(s.max_stack_height > 0, "max_stack_height must be positive");
    require(s.heightmap_resolution > 0 && s.plane_spacing > 0 && s.voxel_size > 0, "grid sizes must be positive");
    require(s.points_per_object > 0 && s.n_points > 0, "point counts must be positive");
    require(camera.intrinsics.valid(), "camera intrinsics");
    require(camera.max_attempts > 0, "camera max_attempts must be positive");
    require(crop.valid(), "crop configuration");
    require(!(object_source == ObjectKind::fractal && wants_single_view()),
            "single-view rendering needs mesh objects; fractal objects are point clouds");
    require(object_source != ObjectKind::cad || !cad_dir.empty(), "object_source = cad needs cad_dir");
  }

  nlohmann::json to_json() const {
    using nlohmann::json;
    const auto& s = scene;
    const auto& k = camera.intrinsics;
    return json{
        {"object_source", to_string(object_source)},
        {"n_objects", n_objects},
        {"n_scenes", n_scenes},
        {"object_multiplier", object_multiplier},
        {"scene_multiplier", scene_multiplier},
        {"view_mode", to_string(view_mode)},
        {"frames_per_scene", frames_per_scene},
        {"master_seed", master_seed},
        {"cad_dir", cad_dir.generic_string()},
        {"max_scene_attempts", max_scene_attempts},
        {"harmonics", {{"n_polar", mesh.n_polar}, {"n_azimuth", mesh.n_azimuth}}},
        {"fractal",
         {{"n_points", fractal.n_points},
          {"burn_in", fractal.burn_in},
          {"min_axis_variance", fractal.min_axis_variance},
          {"weight_floor", fractal.weight_floor},
          {"max_singular_value", fractal.max_singular_value},
          {"min_maps", fractal.min_maps},
          {"max_maps", fractal.max_maps}}},
        {"scene",
         {{"min_objects", s.min_objects},
          {"max_objects", s.max_objects},
          {"scale", {s.augment.scale_min, s.augment.scale_max}},
          {"flip_probability", s.augment.flip_probability},
          {"swap_probability", s.augment.swap_probability},
          {"area_factor", {s.area_factor_min, s.area_factor_max}},
          {"aspect", {s.aspect_min, s.aspect_max}},
          {"wall_height", {s.wall_height_min, s.wall_height_max}},
          {"max_stack_height", s.max_stack_height},
          {"heightmap_resolution", s.heightmap_resolution},
          {"placement_retries", s.placement_retries},
          {"points_per_object", s.points_per_object},
          {"match_plane_density", s.match_plane_density},
          {"plane_spacing", s.plane_spacing},
          {"voxel_size", s.voxel_size},
          {"n_points", s.n_points}}},
        {"camera",
         {{"intrinsics", {k.fx, k.fy, k.cx, k.cy}},
          {"width", k.width},
          {"height", k.height},
          {"min_objects", camera.min_objects},
          {"min_pixels", camera.min_pixels},
          {"max_attempts", camera.max_attempts},
          {"wall_clearance", camera.wall_clearance},
          {"height_range", {camera.height_min, camera.height_max}},
          {"pitch_deg", {camera.pitch_min_deg, camera.pitch_max_deg}},
          {"prefilter_factor", camera.prefilter_factor}}},
        {"crop",
         {{"knn_count", crop.knn_count},
          {"depth_ratio", {crop.depth_ratio_min, crop.depth_ratio_max}},
          {"pair_overlap_min", crop.pair_overlap_min},
          {"pair_anchor_radius", crop.pair_anchor_radius},
          {"color_constant", crop.color_constant},
          {"color_dropout_p", crop.color_dropout_p},
          {"jitter_sigma", crop.jitter_sigma}}},
    };
  }
};

namespace detail {

template <class T>
void read_value(const toml::node_view<const toml::node>& node, T& out, const char* key) {
  if (!node) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node.value<bool>()) { out = *v; return; }
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = node.value<std::int64_t>()) {
      if (*v < 0 && std::is_unsigned_v<T>) throw ConfigError(std::string(key) + " must be non-negative");
      out = static_cast<T>(*v);
      return;
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (auto v = node.value<double>()) { out = *v; return; }
  } else {
    if (auto v = node.value<std::string>()) { out = *v; return; }
  }
  throw ConfigError(std::string("config key '") + key + "' has the wrong type");
}

inline void read_range(const toml::node_view<const toml::node>& node, double& lo, double& hi,
                       const char* key) {
  if (!node) return;
  const auto* arr = node.as_array();
  if (!arr || arr->size() != 2) throw ConfigError(std::string(key) + " must be a 2-element array");
  auto lo_v = (*arr)[0].value<double>(), hi_v = (*arr)[1].value<double>();
  if (!lo_v || !hi_v) throw ConfigError(std::string(key) + " must hold numbers");
  lo = *lo_v;
  hi = *hi_v;
}

}  // namespace detail

/// Reads a TOML document over the defaults. Unknown keys are ignored.
inline GenerationConfig config_from_toml(const toml::table& t, GenerationConfig c = {}) {
  using detail::read_range;
  using detail::read_value;
  std::string s;
  s = to_string(c.object_source);
  read_value(t["object_source"], s, "object_source");
  c.object_source = parse_object_kind(s);
  s = to_string(c.view_mode);
  read_value(t["view_mode"], s, "view_mode");
  c.view_mode = parse_view_mode(s);
  read_value(t["n_objects"], c.n_objects, "n_objects");
  read_value(t["n_scenes"], c.n_scenes, "n_scenes");
  read_value(t["object_multiplier"], c.object_multiplier, "object_multiplier");
  read_value(t["scene_multiplier"], c.scene_multiplier, "scene_multiplier");
  read_value(t["frames_per_scene"], c.frames_per_scene, "frames_per_scene");
  std::int64_t seed = static_cast<std::int64_t>(c.master_seed);
  read_value(t["master_seed"], seed, "master_seed");
  c.master_seed = static_cast<std::uint64_t>(seed);
  read_value(t["max_scene_attempts"], c.max_scene_attempts, "max_scene_attempts");
  s = c.output_dir.string();
  read_value(t["output_dir"], s, "output_dir");
  c.output_dir = s;
  s = c.cad_dir.string();
  read_value(t["cad_dir"], s, "cad_dir");
  c.cad_dir = s;

  const auto h = t["harmonics"];
  read_value(h["n_polar"], c.mesh.n_polar, "harmonics.n_polar");
  read_value(h["n_azimuth"], c.mesh.n_azimuth, "harmonics.n_azimuth");

  const auto f = t["fractal"];
  read_value(f["n_points"], c.fractal.n_points, "fractal.n_points");
  read_value(f["burn_in"], c.fractal.burn_in, "fractal.burn_in");
  read_value(f["min_axis_variance"], c.fractal.min_axis_variance, "fractal.min_axis_variance");
  read_value(f["weight_floor"], c.fractal.weight_floor, "fractal.weight_floor");
  read_value(f["max_singular_value"], c.fractal.max_singular_value, "fractal.max_singular_value");
  read_value(f["min_maps"], c.fractal.min_maps, "fractal.min_maps");
  read_value(f["max_maps"], c.fractal.max_maps, "fractal.max_maps");

  const auto sc = t["scene"];
  auto& S = c.scene;
  read_value(sc["min_objects"], S.min_objects, "scene.min_objects");
  read_value(sc["max_objects"], S.max_objects, "scene.max_objects");
  read_range(sc["scale"], S.augment.scale_min, S.augment.scale_max, "scene.scale");
  read_value(sc["flip_probability"], S.augment.flip_probability, "scene.flip_probability");
  read_value(sc["swap_probability"], S.augment.swap_probability, "scene.swap_probability");
  read_range(sc["area_factor"], S.area_factor_min, S.area_factor_max, "scene.area_factor");
  read_range(sc["aspect"], S.aspect_min, S.aspect_max, "scene.aspect");
  read_range(sc["wall_height"], S.wall_height_min, S.wall_height_max, "scene.wall_height");
  read_value(sc["max_stack_height"], S.max_stack_height, "scene.max_stack_height");
  read_value(sc["heightmap_resolution"], S.heightmap_resolution, "scene.heightmap_resolution");
  read_value(sc["placement_retries"], S.placement_retries, "scene.placement_retries");
  read_value(sc["points_per_object"], S.points_per_object, "scene.points_per_object");
  read_value(sc["match_plane_density"], S.match_plane_density, "scene.match_plane_density");
  read_value(sc["plane_spacing"], S.plane_spacing, "scene.plane_spacing");
  read_value(sc["voxel_size"], S.voxel_size, "scene.voxel_size");
  read_value(sc["n_points"], S.n_points, "scene.n_points");

  const auto cam = t["camera"];
  auto& C = c.camera;
  read_value(cam["fx"], C.intrinsics.fx, "camera.fx");
  read_value(cam["fy"], C.intrinsics.fy, "camera.fy");
  read_value(cam["cx"], C.intrinsics.cx, "camera.cx");
  read_value(cam["cy"], C.intrinsics.cy, "camera.cy");
  read_value(cam["width"], C.intrinsics.width, "camera.width");
  read_value(cam["height"], C.intrinsics.height, "camera.height");
  read_value(cam["min_objects"], C.min_objects, "camera.min_objects");
  read_value(cam["min_pixels"], C.min_pixels, "camera.min_pixels");
  read_value(cam["max_attempts"], C.max_attempts, "camera.max_attempts");
  read_value(cam["wall_clearance"], C.wall_clearance, "camera.wall_clearance");
  read_range(cam["height_range"], C.height_min, C.height_max, "camera.height_range");
  read_range(cam["pitch_deg"], C.pitch_min_deg, C.pitch_max_deg, "camera.pitch_deg");
  read_value(cam["prefilter_factor"], C.prefilter_factor, "camera.prefilter_factor");

  const auto cr = t["crop"];
  auto& R = c.crop;
  read_value(cr["knn_count"], R.knn_count, "crop.knn_count");
  read_range(cr["depth_ratio"], R.depth_ratio_min, R.depth_ratio_max, "crop.depth_ratio");
  read_value(cr["pair_overlap_min"], R.pair_overlap_min, "crop.pair_overlap_min");
  read_value(cr["pair_anchor_radius"], R.pair_anchor_radius, "crop.pair_anchor_radius");
  read_value(cr["color_constant"], R.color_constant, "crop.color_constant");
  read_value(cr["color_dropout_p"], R.color_dropout_p, "crop.color_dropout_p");
  read_value(cr["jitter_sigma"], R.jitter_sigma, "crop.jitter_sigma");
  return c;
}

inline GenerationConfig config_from_toml_string(std::string_view text) {
  try {
    return config_from_toml(toml::parse(text));
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string("TOML parse error: ") + std::string(e.description()));
  }
}

inline GenerationConfig load_config(const std::filesystem::path& path) {
  try {
    return config_from_toml(toml::parse_file(path.string()));
  } catch (const toml::parse_error& e) {
    throw ConfigError(path.string() + ": " + std::string(e.description()));
  }
}

/// Applies the output-directory environment override, if set.
inline void apply_environment(GenerationConfig& c) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) c.output_dir = dir;
}

/// Inverse of to_json for the fields a manifest consumer needs.
inline GenerationConfig config_from_json(const nlohmann::json& j) {
  GenerationConfig c;
  c.object_source = parse_object_kind(j.at("object_source"));
  c.n_objects = j.at("n_objects");
  c.n_scenes = j.at("n_scenes");
  c.object_multiplier = j.at("object_multiplier");
  c.scene_multiplier = j.at("scene_multiplier");
  c.view_mode = parse_view_mode(j.at("view_mode"));
  c.frames_per_scene = j.at("frames_per_scene");
  c.master_seed = j.at("master_seed");
  c.cad_dir = j.at("cad_dir").get<std::string>();
  c.max_scene_attempts = j.at("max_scene_attempts");
  c.mesh.n_polar = j.at("harmonics").at("n_polar");
  c.mesh.n_azimuth = j.at("harmonics").at("n_azimuth");
  const auto& f = j.at("fractal");
  c.fractal.n_points = f.at("n_points");
  c.fractal.burn_in = f.at("burn_in");
  c.fractal.min_axis_variance = f.at("min_axis_variance");
  c.fractal.weight_floor = f.at("weight_floor");
  c.fractal.max_singular_value = f.value("max_singular_value", c.fractal.max_singular_value);
  c.fractal.min_maps = f.at("min_maps");
  c.fractal.max_maps = f.at("max_maps");
  const auto& s = j.at("scene");
  auto& S = c.scene;
  S.min_objects = s.at("min_objects");
  S.max_objects = s.at("max_objects");
  S.augment.scale_min = s.at("scale").at(0);
  S.augment.scale_max = s.at("scale").at(1);
  S.augment.flip_probability = s.at("flip_probability");
  S.augment.swap_probability = s.at("swap_probability");
  S.area_factor_min = s.at("area_factor").at(0);
  S.area_factor_max = s.at("area_factor").at(1);
  S.aspect_min = s.at("aspect").at(0);
  S.aspect_max = s.at("aspect").at(1);
  S.wall_height_min = s.at("wall_height").at(0);
  S.wall_height_max = s.at("wall_height").at(1);
  S.max_stack_height = s.at("max_stack_height");
  S.heightmap_resolution = s.at("heightmap_resolution");
  S.placement_retries = s.at("placement_retries");
  S.points_per_object = s.at("points_per_object");
  S.match_plane_density = s.at("match_plane_density");
  S.plane_spacing = s.at("plane_spacing");
  S.voxel_size = s.at("voxel_size");
  S.n_points = s.at("n_points");
  const auto& cam = j.at("camera");
  auto& C = c.camera;
  C.intrinsics.fx = cam.at("intrinsics").at(0);
  C.intrinsics.fy = cam.at("intrinsics").at(1);
  C.intrinsics.cx = cam.at("intrinsics").at(2);
  C.intrinsics.cy = cam.at("intrinsics").at(3);
  C.intrinsics.width = cam.at("width");
  C.intrinsics.height = cam.at("height");
  C.min_objects = cam.at("min_objects");
  C.min_pixels = cam.at("min_pixels");
  C.max_attempts = cam.at("max_attempts");
  C.wall_clearance = cam.at("wall_clearance");
  C.height_min = cam.at("height_range").at(0);
  C.height_max = cam.at("height_range").at(1);
  C.pitch_min_deg = cam.at("pitch_deg").at(0);
  C.pitch_max_deg = cam.at("pitch_deg").at(1);
  C.prefilter_factor = cam.at("prefilter_factor");
  const auto& cr = j.at("crop");
  auto& R = c.crop;
  R.knn_count = cr.at("knn_count");
  R.depth_ratio_min = cr.at("depth_ratio").at(0);
  R.depth_ratio_max = cr.at("depth_ratio").at(1);
  R.pair_overlap_min = cr.at("pair_overlap_min");
  R.pair_anchor_radius = cr.at("pair_anchor_radius");
  R.color_constant = cr.at("color_constant");
  R.color_dropout_p = cr.at("color_dropout_p");
  R.jitter_sigma = cr.at("jitter_sigma");
  return c;
}

}  // namespace roomgen
