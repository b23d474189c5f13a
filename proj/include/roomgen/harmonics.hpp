#pragma once

// Formula-driven objects: closed surfaces whose radius is a sum of four
// powered sines/cosines of the polar and azimuth angles.

#include "roomgen/geometry.hpp"
#include "roomgen/rng.hpp"

#include <array>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace roomgen::harmonics {

inline constexpr double kMaxFrequency = 5.0;
inline constexpr int kMaxExponent = 4;

/// The eight free parameters of one object: frequency multipliers m and
/// integer exponents p.
struct Coefficients {
  std::array<double, 4> m{};
  std::array<int, 4> p{};

  bool valid() const {
    for (double v : m)
      if (!(v >= -kMaxFrequency && v <= kMaxFrequency)) return false;
    for (int v : p)
      if (v < 0 || v > kMaxExponent) return false;
    return true;
  }

  friend bool operator==(const Coefficients&, const Coefficients&) = default;
};

inline Coefficients sample_coefficients(Rng& rng) {
  Coefficients c;
  for (auto& v : c.m) v = rng.uniform(-kMaxFrequency, kMaxFrequency);
  for (auto& v : c.p) v = static_cast<int>(rng.integer(0, kMaxExponent));
  return c;
}

/// x^p for small non-negative p, with x^0 == 1 (including 0^0).
inline double int_pow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

/// Signed radius at azimuth `theta` in [0, 2pi) and polar angle `phi` in [0, pi].
inline double eval_radius(const Coefficients& c, double theta, double phi) {
  return int_pow(std::sin(c.m[0] * phi), c.p[0]) +
         int_pow(std::cos(c.m[1] * phi), c.p[1]) +
         int_pow(std::sin(c.m[2] * theta), c.p[2]) +
         int_pow(std::cos(c.m[3] * theta), c.p[3]);
}

/// Cartesian point for a signed radius; negative r reflects through the origin.
inline Vec3 to_cartesian(double r, double theta, double phi) {
  const double s = std::sin(phi);
  return {r * s * std::cos(theta), r * s * std::sin(theta), r * std::cos(phi)};
}

struct MeshResolution {
  int n_polar = 64;
  int n_azimuth = 128;
};

inline double polar_angle(int i, int n_polar) {
  return (static_cast<double>(i) * std::numbers::pi) / n_polar;
}
inline double azimuth_angle(int j, int n_azimuth) {
  return (static_cast<double>(j) * (2.0 * std::numbers::pi)) / n_azimuth;
}

/// Rectangular-grid mesh of the surface.
///
/// Vertex (i, j) sits at polar angle i*pi/n_polar (i = 0..n_polar) and azimuth
/// j*2pi/n_azimuth (j = 0..n_azimuth-1) and has index i*n_azimuth + j. The
/// azimuth seam is welded. Pole rows are kept as separate vertices because
/// the radius still varies with azimuth there.
inline SurfaceMesh generate_mesh(const Coefficients& c, int n_polar,
                                 int n_azimuth) {
  if (n_polar < 3 || n_azimuth < 3)
    throw GeometryError("harmonics mesh resolution must be at least 3x3");

  SurfaceMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(n_polar + 1) * n_azimuth);
  for (int i = 0; i <= n_polar; ++i) {
    const double phi = polar_angle(i, n_polar);
    for (int j = 0; j < n_azimuth; ++j) {
      const double theta = azimuth_angle(j, n_azimuth);
      mesh.vertices.push_back(to_cartesian(eval_radius(c, theta, phi), theta, phi));
    }
  }

  mesh.triangles.reserve(static_cast<std::size_t>(2) * n_polar * n_azimuth);
  const auto index = [n_azimuth](int i, int j) {
    return static_cast<std::uint32_t>(i * n_azimuth + (j % n_azimuth));
  };
  for (int i = 0; i < n_polar; ++i) {
    for (int j = 0; j < n_azimuth; ++j) {
      const auto a = index(i, j), b = index(i, j + 1);
      const auto d = index(i + 1, j), e = index(i + 1, j + 1);
      mesh.triangles.push_back({a, d, b});
      mesh.triangles.push_back({b, d, e});
    }
  }
  return mesh;
}

inline SurfaceMesh generate_mesh(const Coefficients& c, MeshResolution res = {}) {
  return generate_mesh(c, res.n_polar, res.n_azimuth);
}

// Text format: one object per line, "m1 m2 m3 m4 p1 p2 p3 p4".
// Lines starting with '#' and blank lines are ignored on read.

inline void write_coefficients(std::ostream& out, const std::vector<Coefficients>& set) {
  char buf[64];
  for (const auto& c : set) {
    for (double v : c.m) {
      std::snprintf(buf, sizeof buf, "%.17g ", v);
      out << buf;
    }
    out << c.p[0] << ' ' << c.p[1] << ' ' << c.p[2] << ' ' << c.p[3] << '\n';
  }
}

inline std::vector<Coefficients> read_coefficients(std::istream& in) {
  std::vector<Coefficients> set;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Coefficients c;
    for (auto& v : c.m) ls >> v;
    for (auto& v : c.p) ls >> v;
    std::string extra;
    if (ls.fail() || (ls >> extra))
      throw GeometryError("line " + std::to_string(line_no) +
                          ": expected 8 numbers (m1..m4 p1..p4)");
    if (!c.valid())
      throw GeometryError("line " + std::to_string(line_no) +
                          ": coefficients out of range");
    set.push_back(c);
  }
  return set;
}

}  // namespace roomgen::harmonics
