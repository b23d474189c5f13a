#pragma once

// Object sets: the pool scenes draw from. Objects are produced on demand from
// compact recipes (coefficients, IFS systems, file paths) and always come
// back normalized into the unit sphere.

#include "roomgen/fractal.hpp"
#include "roomgen/geometry.hpp"
#include "roomgen/harmonics.hpp"
#include "roomgen/meshio.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace roomgen {

enum class ObjectKind { harmonics, fractal, cad };

inline const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::harmonics: return "harmonics";
    case ObjectKind::fractal: return "fractal";
    case ObjectKind::cad: return "cad";
  }
  return "?";
}

using ObjectGeometry = std::variant<SurfaceMesh, PointCloud>;

inline std::vector<Vec3>& positions_of(ObjectGeometry& g) {
  return std::visit([](auto& x) -> std::vector<Vec3>& { return positions_of(x); }, g);
}
inline const std::vector<Vec3>& positions_of(const ObjectGeometry& g) {
  return std::visit([](const auto& x) -> const std::vector<Vec3>& { return positions_of(x); }, g);
}

class ObjectSet {
 public:
  static ObjectSet from_harmonics(std::vector<harmonics::Coefficients> coefficients,
                                  harmonics::MeshResolution resolution = {}) {
    ObjectSet s(ObjectKind::harmonics);
    s.harmonics_ = std::move(coefficients);
    s.resolution_ = resolution;
    return s;
  }

  static ObjectSet from_fractals(std::vector<fractal::FractalObject> objects,
                                 fractal::Config cfg = {}) {
    ObjectSet s(ObjectKind::fractal);
    s.fractals_ = std::move(objects);
    s.fractal_cfg_ = cfg;
    return s;
  }

  static ObjectSet from_files(std::vector<std::filesystem::path> paths) {
    ObjectSet s(ObjectKind::cad);
    s.paths_ = std::move(paths);
    return s;
  }

  /// In-memory meshes, treated like CAD models. Mostly for tests.
  static ObjectSet from_meshes(std::vector<SurfaceMesh> meshes) {
    ObjectSet s(ObjectKind::cad);
    s.meshes_ = std::move(meshes);
    return s;
  }

  ObjectKind kind() const { return kind_; }
  bool is_harmonic() const { return kind_ == ObjectKind::harmonics; }
  /// True when objects are meshes (ray-castable).
  bool has_meshes() const { return kind_ != ObjectKind::fractal; }

  std::size_t size() const {
    switch (kind_) {
      case ObjectKind::harmonics: return harmonics_.size();
      case ObjectKind::fractal: return fractals_.size();
      case ObjectKind::cad: return meshes_.empty() ? paths_.size() : meshes_.size();
    }
    return 0;
  }

  /// Object `index`, normalized into the unit sphere.
  ObjectGeometry load(std::size_t index) const {
    if (index >= size()) throw std::out_of_range("object index out of range");
    switch (kind_) {
      case ObjectKind::harmonics:
        return normalize_unit_sphere(harmonics::generate_mesh(harmonics_[index], resolution_));
      case ObjectKind::fractal:
        return fractal::object_cloud(fractals_[index], fractal_cfg_);
      case ObjectKind::cad:
        if (!meshes_.empty()) return normalize_unit_sphere(meshes_[index]);
        return normalize_unit_sphere(load_mesh(paths_[index]));
    }
    throw std::logic_error("unknown object kind");
  }

  const std::vector<harmonics::Coefficients>& harmonics() const { return harmonics_; }
  const std::vector<fractal::FractalObject>& fractals() const { return fractals_; }
  const std::vector<std::filesystem::path>& paths() const { return paths_; }

 private:
  explicit ObjectSet(ObjectKind k) : kind_(k) {}

  ObjectKind kind_;
  std::vector<harmonics::Coefficients> harmonics_;
  harmonics::MeshResolution resolution_;
  std::vector<fractal::FractalObject> fractals_;
  fractal::Config fractal_cfg_;
  std::vector<std::filesystem::path> paths_;
  std::vector<SurfaceMesh> meshes_;
};

}  // namespace roomgen
