#pragma once

// Binary little-endian PLY for point clouds.
//
// Written layout: element vertex with `double x, y, z`, then optionally
// `float red, green, blue` (0..1) and `int object_id`. The reader accepts any
// binary_little_endian vertex element whose properties are scalar types and
// picks out the ones it knows.

#include "roomgen/geometry.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace roomgen {

static_assert(std::endian::native == std::endian::little,
              "PLY I/O assumes a little-endian host");

class PlyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string ply_header(const PointCloud& pc) {
  std::ostringstream h;
  h << "ply\nformat binary_little_endian 1.0\n"
    << "element vertex " << pc.size() << '\n'
    << "property double x\nproperty double y\nproperty double z\n";
  if (pc.has_colors()) h << "property float red\nproperty float green\nproperty float blue\n";
  if (pc.has_object_ids()) h << "property int object_id\n";
  h << "end_header\n";
  return h.str();
}

inline std::string encode_ply(const PointCloud& pc) {
  pc.validate();
  std::string out = ply_header(pc);
  const std::size_t stride =
      3 * sizeof(double) + (pc.has_colors() ? 3 * sizeof(float) : 0) +
      (pc.has_object_ids() ? sizeof(std::int32_t) : 0);
  std::size_t pos = out.size();
  out.resize(pos + stride * pc.size());
  char* dst = out.data() + pos;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const double xyz[3] = {pc.positions[i].x(), pc.positions[i].y(), pc.positions[i].z()};
    std::memcpy(dst, xyz, sizeof xyz);
    dst += sizeof xyz;
    if (pc.has_colors()) {
      std::memcpy(dst, pc.colors[i].data(), 3 * sizeof(float));
      dst += 3 * sizeof(float);
    }
    if (pc.has_object_ids()) {
      std::memcpy(dst, &pc.object_ids[i], sizeof(std::int32_t));
      dst += sizeof(std::int32_t);
    }
  }
  return out;
}

inline void write_ply(const std::filesystem::path& path, const PointCloud& pc) {
  const auto bytes = encode_ply(pc);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PlyError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw PlyError("write failed: " + path.string());
}

namespace detail {

struct PlyProperty {
  std::string name;
  std::size_t size = 0;
  char kind = 'f';  // 'f' float, 'd' double, 'i' signed, 'u' unsigned
};

inline PlyProperty ply_property(const std::string& type, const std::string& name) {
  if (type == "double" || type == "float64") return {name, 8, 'd'};
  if (type == "float" || type == "float32") return {name, 4, 'f'};
  if (type == "int" || type == "int32") return {name, 4, 'i'};
  if (type == "uint" || type == "uint32") return {name, 4, 'u'};
  if (type == "short" || type == "int16") return {name, 2, 'i'};
  if (type == "ushort" || type == "uint16") return {name, 2, 'u'};
  if (type == "char" || type == "int8") return {name, 1, 'i'};
  if (type == "uchar" || type == "uint8") return {name, 1, 'u'};
  throw PlyError("unsupported PLY property type: " + type);
}

inline double ply_read_scalar(const char* src, const PlyProperty& p) {
  switch (p.kind) {
    case 'd': { double v; std::memcpy(&v, src, 8); return v; }
    case 'f': { float v; std::memcpy(&v, src, 4); return v; }
    case 'i': {
      if (p.size == 4) { std::int32_t v; std::memcpy(&v, src, 4); return v; }
      if (p.size == 2) { std::int16_t v; std::memcpy(&v, src, 2); return v; }
      return static_cast<std::int8_t>(*src);
    }
    default: {
      if (p.size == 4) { std::uint32_t v; std::memcpy(&v, src, 4); return v; }
      if (p.size == 2) { std::uint16_t v; std::memcpy(&v, src, 2); return v; }
      return static_cast<std::uint8_t>(*src);
    }
  }
}

}  // namespace detail

/// Decodes a binary little-endian PLY point cloud from memory.
inline PointCloud decode_ply(const std::string& bytes) {
  std::istringstream hs(bytes);
  std::string line;
  if (!std::getline(hs, line) || line != "ply") throw PlyError("missing 'ply' magic");
  std::size_t count = 0;
  bool in_vertex = false, seen_vertex = false, binary = false;
  std::vector<detail::PlyProperty> props;
  while (std::getline(hs, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      binary = fmt == "binary_little_endian";
    } else if (key == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex) {
        if (seen_vertex) throw PlyError("duplicate vertex element");
        seen_vertex = true;
        ls >> count;
      } else if (seen_vertex) {
        // Trailing elements (faces) are ignored; vertex data comes first.
        in_vertex = false;
      } else {
        throw PlyError("elements before 'vertex' are not supported");
      }
    } else if (key == "property" && in_vertex) {
      std::string type, name;
      ls >> type;
      if (type == "list") throw PlyError("list properties on vertices are not supported");
      ls >> name;
      props.push_back(detail::ply_property(type, name));
    } else if (key == "end_header") {
      break;
    }
  }
  if (!binary) throw PlyError("only binary_little_endian PLY is supported");
  if (!seen_vertex) throw PlyError("no vertex element");
  const auto data_start = static_cast<std::size_t>(hs.tellg());
  if (hs.tellg() < 0) throw PlyError("truncated header");

  std::size_t stride = 0;
  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, iid = -1;
  std::vector<std::size_t> offsets;
  for (std::size_t k = 0; k < props.size(); ++k) {
    offsets.push_back(stride);
    stride += props[k].size;
    const auto& n = props[k].name;
    const int ki = static_cast<int>(k);
    if (n == "x") ix = ki;
    else if (n == "y") iy = ki;
    else if (n == "z") iz = ki;
    else if (n == "red") ir = ki;
    else if (n == "green") ig = ki;
    else if (n == "blue") ib = ki;
    else if (n == "object_id") iid = ki;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw PlyError("vertex element lacks x/y/z");
  if (bytes.size() < data_start + stride * count)
    throw PlyError("truncated vertex data: expected " + std::to_string(count) + " points");

  const bool colors = ir >= 0 && ig >= 0 && ib >= 0;
  const float color_scale = colors && props[ir].kind == 'u' ? 1.0f / 255.0f : 1.0f;
  PointCloud pc;
  pc.positions.resize(count);
  if (colors) pc.colors.resize(count);
  if (iid >= 0) pc.object_ids.resize(count);
  const char* base = bytes.data() + data_start;
  for (std::size_t i = 0; i < count; ++i) {
    const char* rec = base + i * stride;
    auto get = [&](int k) { return detail::ply_read_scalar(rec + offsets[k], props[k]); };
    pc.positions[i] = {get(ix), get(iy), get(iz)};
    if (colors)
      pc.colors[i] = Eigen::Vector3f(static_cast<float>(get(ir)), static_cast<float>(get(ig)),
                                     static_cast<float>(get(ib))) * color_scale;
    if (iid >= 0) pc.object_ids[i] = static_cast<std::int32_t>(get(iid));
  }
  return pc;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline PointCloud read_ply(const std::filesystem::path& path) {
  try {
    return decode_ply(read_file_bytes(path));
  } catch (const PlyError& e) {
    throw PlyError(path.string() + ": " + e.what());
  }
}

}  // namespace roomgen
