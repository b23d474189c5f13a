#pragma once

// Depth frames on disk: 16-bit grayscale PNG depth in millimeters (0 = no
// hit), a 16-bit PNG id map, and a JSON camera sidecar.

#include "roomgen/raycast.hpp"

#include <png.h>
#include <json.hpp>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace roomgen::depth_io {

inline constexpr double kDepthUnit = 0.001;  // meters per PNG count

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Gray16 {
  int width = 0, height = 0;
  std::vector<std::uint16_t> pixels;  // row-major
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

inline void write_png16(const std::filesystem::path& path, const Gray16& img) {
  detail::FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw ImageError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw ImageError("libpng init failed");
  }
  // Row buffer outlives the setjmp scope.
  std::vector<png_byte> row(static_cast<std::size_t>(img.width) * 2);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ImageError("PNG encode failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const auto v = img.pixels[static_cast<std::size_t>(y) * img.width + x];
      row[2 * x] = static_cast<png_byte>(v >> 8);  // PNG samples are big-endian
      row[2 * x + 1] = static_cast<png_byte>(v & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline Gray16 read_png16(const std::filesystem::path& path) {
  detail::FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw ImageError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageError("libpng init failed");
  }
  Gray16 img;
  std::vector<png_byte> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageError("PNG decode failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  if (png_get_bit_depth(png, info) != 16 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageError("expected a 16-bit grayscale PNG: " + path.string());
  }
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  row.resize(static_cast<std::size_t>(img.width) * 2);
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < img.width; ++x)
      img.pixels[static_cast<std::size_t>(y) * img.width + x] =
          static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

/// Depth in millimeters, rounded; clamps at 65535 (65.535 m).
inline Gray16 encode_depth(const raycast::DepthFrame& f) {
  Gray16 img{f.intrinsics.width, f.intrinsics.height, {}};
  img.pixels.reserve(f.depth.size());
  for (double d : f.depth) {
    const double mm = std::round(d / kDepthUnit);
    img.pixels.push_back(static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0)));
  }
  return img;
}

/// Id code: 0 = no hit, 1 = floor, 2 = wall, 3 + k = object k.
inline std::uint16_t encode_id(std::int32_t id) {
  if (id == kNoObject) return 0;
  if (id == kFloorId) return 1;
  if (id == kWallId) return 2;
  return static_cast<std::uint16_t>(3 + id);
}

inline std::int32_t decode_id(std::uint16_t code) {
  switch (code) {
    case 0: return kNoObject;
    case 1: return kFloorId;
    case 2: return kWallId;
    default: return static_cast<std::int32_t>(code) - 3;
  }
}

inline Gray16 encode_ids(const raycast::DepthFrame& f) {
  Gray16 img{f.intrinsics.width, f.intrinsics.height, {}};
  img.pixels.reserve(f.id_map.size());
  for (auto id : f.id_map) img.pixels.push_back(encode_id(id));
  return img;
}

inline nlohmann::json camera_sidecar(const raycast::DepthFrame& f,
                                     const std::vector<std::int32_t>& qualifying_ids) {
  const auto& k = f.intrinsics;
  nlohmann::json pose = nlohmann::json::array();
  const Eigen::Matrix4d m = f.pose.matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) pose.push_back(m(r, c));
  return {{"width", k.width},
          {"height", k.height},
          {"intrinsics", {k.fx, k.fy, k.cx, k.cy}},
          {"pose", pose},
          {"depth_unit", kDepthUnit},
          {"object_ids", qualifying_ids}};
}

struct FramePaths {
  std::filesystem::path depth, ids, camera;
};

inline void write_frame(const FramePaths& paths, const raycast::DepthFrame& f,
                        const std::vector<std::int32_t>& qualifying_ids) {
  write_png16(paths.depth, encode_depth(f));
  write_png16(paths.ids, encode_ids(f));
  std::ofstream out(paths.camera);
  if (!out) throw ImageError("cannot write " + paths.camera.string());
  out << camera_sidecar(f, qualifying_ids).dump(1) << '\n';
}

struct LoadedFrame {
  raycast::DepthFrame frame;
  std::vector<std::int32_t> qualifying_ids;
};

inline LoadedFrame read_frame(const FramePaths& paths) {
  std::ifstream in(paths.camera);
  if (!in) throw ImageError("cannot open " + paths.camera.string());
  const auto j = nlohmann::json::parse(in);
  LoadedFrame out;
  auto& k = out.frame.intrinsics;
  k.width = j.at("width");
  k.height = j.at("height");
  const auto& intr = j.at("intrinsics");
  k.fx = intr.at(0);
  k.fy = intr.at(1);
  k.cx = intr.at(2);
  k.cy = intr.at(3);
  Eigen::Matrix4d m;
  const auto& pose = j.at("pose");
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = pose.at(4 * r + c);
  out.frame.pose.matrix() = m;
  const double unit = j.value("depth_unit", kDepthUnit);
  out.qualifying_ids = j.at("object_ids").get<std::vector<std::int32_t>>();

  const auto depth = read_png16(paths.depth);
  const auto ids = read_png16(paths.ids);
  if (depth.width != k.width || depth.height != k.height || ids.width != k.width ||
      ids.height != k.height)
    throw ImageError("frame image size does not match camera sidecar");
  out.frame.depth.reserve(depth.pixels.size());
  for (auto v : depth.pixels) out.frame.depth.push_back(v * unit);
  out.frame.id_map.reserve(ids.pixels.size());
  for (auto v : ids.pixels) out.frame.id_map.push_back(decode_id(v));
  return out;
}

}  // namespace roomgen::depth_io
