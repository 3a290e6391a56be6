// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/dataset.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mimonerf/threads.hpp"

namespace mimonerf {

namespace {

constexpr double kCameraRadius = 3.4;
constexpr double kNearMargin = 1.25;
constexpr double kFovDegrees = 35.0;

double focal_for(int resolution) {
  return 0.5 * resolution / std::tan(0.5 * kFovDegrees * M_PI / 180.0);
}

uint8_t quantize(double v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void append_be32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>(v >> 24));
  s.push_back(static_cast<char>(v >> 16));
  s.push_back(static_cast<char>(v >> 8));
  s.push_back(static_cast<char>(v));
}

}  // namespace

void write_ppm(const std::string& path, const Image8& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
  if (!out) throw IoError("short write to " + path);
}

Image8 read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw IoError(path + ": not a binary PPM");
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  if (!in || w <= 0 || h <= 0 || maxval != 255) throw IoError(path + ": unsupported PPM header");
  in.get();  // single whitespace after maxval
  Image8 img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size()))
    throw IoError(path + ": truncated pixel data");
  return img;
}

// Minimal PNG writer (8-bit RGB, filter 0) for quick viewing.
void write_png(const std::string& path, const Image8& img) {
  std::string raw;
  raw.reserve(static_cast<size_t>(img.height) * (1 + 3 * img.width));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back('\0');
    raw.append(reinterpret_cast<const char*>(img.pixel(0, y)), 3 * static_cast<size_t>(img.width));
  }
  uLongf comp_bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> compressed(comp_bound);
  if (compress2(compressed.data(), &comp_bound, reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw IoError("png: deflate failed");
  compressed.resize(comp_bound);

  auto chunk = [](const char type[4], const std::string& data) {
    std::string out;
    append_be32(out, static_cast<uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    append_be32(out, static_cast<uint32_t>(
                         crc32(0, reinterpret_cast<const Bytef*>(body.data()),
                               static_cast<uInt>(body.size()))));
    return out;
  };

  std::string ihdr;
  append_be32(ihdr, static_cast<uint32_t>(img.width));
  append_be32(ihdr, static_cast<uint32_t>(img.height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit, truecolor
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << std::string("\x89PNG\r\n\x1a\n", 8);
  out << chunk("IHDR", ihdr);
  out << chunk("IDAT", std::string(reinterpret_cast<char*>(compressed.data()), compressed.size()));
  out << chunk("IEND", "");
  if (!out) throw IoError("short write to " + path);
}

Dataset generate_dataset(const ProceduralScene& scene, int n_views, int resolution, uint64_t seed,
                         const std::string& camera_mode, int n_quad, int threads) {
  if (n_views < 2) throw UsageError("generate_dataset: need at least 2 views");
  if (resolution < 8) throw UsageError("generate_dataset: resolution too small");
  if (camera_mode != "orbit" && camera_mode != "forward")
    throw UsageError("generate_dataset: camera_mode must be orbit or forward");
  Dataset ds;
  ds.scene_name = scene.name;
  ds.camera_mode = camera_mode;
  ds.intrinsics = Intrinsics{resolution, resolution, focal_for(resolution)};
  ds.t_near = kCameraRadius - kNearMargin;
  ds.t_far = kCameraRadius + kNearMargin;
  ds.background = scene.background;

  Rng rng = make_rng(seed, kStreamCamera);
  ds.views.resize(n_views);
  for (int i = 0; i < n_views; ++i) {
    double azimuth, elevation;
    if (camera_mode == "orbit") {
      azimuth = 2.0 * M_PI * (i + 0.7 * rng.uniform()) / n_views;
      elevation = (M_PI / 180.0) * rng.uniform(-8.0, 42.0);
    } else {
      azimuth = M_PI / 2.0 + (M_PI / 180.0) * rng.uniform(-25.0, 25.0);
      elevation = (M_PI / 180.0) * rng.uniform(-15.0, 15.0);
    }
    const Vec3d pos(kCameraRadius * std::cos(elevation) * std::cos(azimuth),
                    kCameraRadius * std::sin(elevation),
                    kCameraRadius * std::cos(elevation) * std::sin(azimuth));
    DatasetView& view = ds.views[static_cast<size_t>(i)];
    view.pose = look_at(pos, Vec3d::Zero(), Vec3d::UnitY());
    view.is_test = (i % 5 == 4);
    char name[32];
    std::snprintf(name, sizeof(name), "img_%03d.ppm", i);
    view.filename = name;
    view.image.width = resolution;
    view.image.height = resolution;
    view.image.rgb.resize(static_cast<size_t>(resolution) * resolution * 3);
  }

  for (int i = 0; i < n_views; ++i) {
    DatasetView& view = ds.views[static_cast<size_t>(i)];
    parallel_shards(resolution, threads, [&](int, int y0, int y1) {
      for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < resolution; ++x) {
          const Ray ray = generate_ray(ds.intrinsics, view.pose, x, y, ds.t_near, ds.t_far);
          const Vec3d c = oracle_render(scene, ray, n_quad);
          uint8_t* px = view.image.pixel(x, y);
          px[0] = quantize(c.x());
          px[1] = quantize(c.y());
          px[2] = quantize(c.z());
        }
      }
    });
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream out(dir + "/manifest.txt");
  if (!out) throw IoError("cannot write " + dir + "/manifest.txt");
  char buf[512];
  out << "mimonerf-dataset 1\n";
  out << "scene " << ds.scene_name << "\n";
  out << "camera_mode " << ds.camera_mode << "\n";
  out << "resolution " << ds.intrinsics.width << " " << ds.intrinsics.height << "\n";
  std::snprintf(buf, sizeof(buf), "focal %.17g\nnear %.17g\nfar %.17g\n", ds.intrinsics.focal,
                ds.t_near, ds.t_far);
  out << buf;
  std::snprintf(buf, sizeof(buf), "background %.17g %.17g %.17g\n", ds.background.x(),
                ds.background.y(), ds.background.z());
  out << buf;
  out << "images " << ds.views.size() << "\n";
  for (const DatasetView& view : ds.views) {
    out << "image " << view.filename << " " << (view.is_test ? "test" : "train");
    // world-from-camera 3x4, row-major
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        std::snprintf(buf, sizeof(buf), " %.17g", view.pose.rot(r, c));
        out << buf;
      }
      std::snprintf(buf, sizeof(buf), " %.17g", view.pose.trans[r]);
      out << buf;
    }
    out << "\n";
    write_ppm(dir + "/" + view.filename, view.image);
  }
  if (!out) throw IoError("short write to " + dir + "/manifest.txt");
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream in(dir + "/manifest.txt");
  if (!in) throw IoError("cannot read " + dir + "/manifest.txt");
  std::string tag, version;
  in >> tag >> version;
  if (tag != "mimonerf-dataset" || version != "1")
    throw IoError(dir + ": unrecognized manifest header");
  Dataset ds;
  size_t n_images = 0;
  std::string key;
  while (in >> key) {
    if (key == "scene") {
      in >> ds.scene_name;
    } else if (key == "camera_mode") {
      in >> ds.camera_mode;
    } else if (key == "resolution") {
      in >> ds.intrinsics.width >> ds.intrinsics.height;
    } else if (key == "focal") {
      in >> ds.intrinsics.focal;
    } else if (key == "near") {
      in >> ds.t_near;
    } else if (key == "far") {
      in >> ds.t_far;
    } else if (key == "background") {
      in >> ds.background.x() >> ds.background.y() >> ds.background.z();
    } else if (key == "images") {
      in >> n_images;
    } else if (key == "image") {
      DatasetView view;
      std::string split;
      in >> view.filename >> split;
      view.is_test = (split == "test");
      if (split != "test" && split != "train")
        throw IoError(dir + ": bad split tag '" + split + "'");
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) in >> view.pose.rot(r, c);
        in >> view.pose.trans[r];
      }
      view.image = read_ppm(dir + "/" + view.filename);
      ds.views.push_back(std::move(view));
    } else {
      throw IoError(dir + ": unknown manifest key '" + key + "'");
    }
    if (!in && !in.eof()) throw IoError(dir + ": malformed manifest");
  }
  if (ds.views.size() != n_images) throw IoError(dir + ": manifest image count mismatch");
  for (const DatasetView& v : ds.views) {
    if (v.image.width != ds.intrinsics.width || v.image.height != ds.intrinsics.height)
      throw IoError(dir + "/" + v.filename + ": image size does not match intrinsics");
  }
  return ds;
}

Ray dataset_ray(const Dataset& ds, int view_index, int px, int py) {
  const DatasetView& view = ds.views.at(static_cast<size_t>(view_index));
  return generate_ray(ds.intrinsics, view.pose, px, py, ds.t_near, ds.t_far);
}

}  // namespace mimonerf
