// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/capi.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mimonerf/evalkit.hpp"
#include "mimonerf/threads.hpp"
#include "mimonerf/trainer.hpp"

using namespace mimonerf;

struct mn_config {
  TrainConfig cfg;
  std::string text_cache;
};

namespace {

thread_local std::string g_last_error;

mn_status fail(mn_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps the C++ error taxonomy onto status codes.
template <class Fn>
mn_status guarded(Fn&& fn) {
  try {
    fn();
    return MN_OK;
  } catch (const UsageError& e) {
    return fail(MN_ERR_USAGE, e.what());
  } catch (const IoError& e) {
    return fail(MN_ERR_IO, e.what());
  } catch (const NumericError& e) {
    return fail(MN_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(MN_ERR_USAGE, e.what());
  }
}

int resolve_threads(int threads) { return threads <= 0 ? default_thread_count() : threads; }

Dataset dataset_for(const Checkpoint& ckpt, const char* data_dir, int threads) {
  if (data_dir && *data_dir) return load_dataset(data_dir);
  if (ckpt.config_text.empty())
    throw UsageError("checkpoint carries no config snapshot; pass a dataset directory");
  return resolve_dataset(parse_config_text(ckpt.config_text), threads);
}

}  // namespace

extern "C" {

mn_config* mn_config_create(void) { return new mn_config(); }

void mn_config_destroy(mn_config* cfg) { delete cfg; }

mn_status mn_config_load_file(mn_config* cfg, const char* path) {
  if (!cfg || !path) return fail(MN_ERR_USAGE, "null argument");
  return guarded([&] { cfg->cfg = load_config(path); });
}

mn_status mn_config_set(mn_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(MN_ERR_USAGE, "null argument");
  return guarded([&] { set_config_key(cfg->cfg, key, value); });
}

const char* mn_config_text(mn_config* cfg) {
  if (!cfg) return "";
  cfg->text_cache = config_to_text(cfg->cfg);
  return cfg->text_cache.c_str();
}

const char* mn_last_error(void) { return g_last_error.c_str(); }

const char* mn_scene_list(void) {
  static std::string joined = [] {
    std::string out;
    for (const auto& s : scene_names()) out += (out.empty() ? "" : ",") + s;
    return out;
  }();
  return joined.c_str();
}

const char* mn_version(void) { return "1.0"; }

mn_status mn_gen_data(const char* scene, int views, int resolution, uint64_t seed,
                      const char* camera_mode, const char* background, const char* out_dir,
                      int threads) {
  if (!scene || !out_dir) return fail(MN_ERR_USAGE, "null argument");
  return guarded([&] {
    ProceduralScene s = make_scene(scene);
    if (background && *background) s.background = parse_background(background);
    const Dataset ds = generate_dataset(s, views, resolution, seed,
                                        camera_mode && *camera_mode ? camera_mode : "orbit", 4096,
                                        resolve_threads(threads));
    save_dataset(ds, out_dir);
  });
}

mn_status mn_train(const mn_config* cfg, const char* out_dir, int threads) {
  if (!cfg || !out_dir) return fail(MN_ERR_USAGE, "null argument");
  return guarded([&] {
    TrainConfig tc = cfg->cfg;
    validate_config(tc);
    const int t = resolve_threads(threads);
    const Dataset ds = resolve_dataset(tc, t);
    train(tc, ds, t, out_dir, &std::cout);
  });
}

mn_status mn_render(const char* checkpoint, const char* data_dir, int pose_index, int orbit,
                    const char* out_dir, int write_png_flag, int threads) {
  if (!checkpoint || !out_dir) return fail(MN_ERR_USAGE, "null argument");
  if (pose_index < 0 && orbit <= 0)
    return fail(MN_ERR_USAGE, "render: pass a pose index or an orbit frame count");
  return guarded([&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const int t = resolve_threads(threads);
    const Dataset ds = dataset_for(ckpt, data_dir, t);
    const TrainConfig tc = parse_config_text(ckpt.config_text);
    const RenderOptions opt = render_options_for(tc, ds);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    std::vector<std::pair<std::string, Pose>> jobs;
    if (pose_index >= 0) {
      if (pose_index >= static_cast<int>(ds.views.size()))
        throw UsageError("render: pose index out of range");
      jobs.emplace_back("render_pose_" + std::to_string(pose_index),
                        ds.views[static_cast<size_t>(pose_index)].pose);
    } else {
      // Circular path at the dataset's mean camera radius and elevation.
      double radius = 0.0, height = 0.0;
      for (const auto& v : ds.views) {
        radius += std::hypot(v.pose.trans.x(), v.pose.trans.z());
        height += v.pose.trans.y();
      }
      radius /= static_cast<double>(ds.views.size());
      height /= static_cast<double>(ds.views.size());
      for (int i = 0; i < orbit; ++i) {
        const double az = 2.0 * M_PI * i / orbit;
        const Vec3d pos(radius * std::cos(az), height, radius * std::sin(az));
        char name[32];
        std::snprintf(name, sizeof(name), "orbit_%03d", i);
        jobs.emplace_back(name, look_at(pos, Vec3d::Zero(), Vec3d::UnitY()));
      }
    }
    for (size_t i = 0; i < jobs.size(); ++i) {
      const RenderedImage img =
          render_view(ckpt.field, ckpt.coarse, ckpt.fine, ds.intrinsics, jobs[i].second,
                      ds.t_near, ds.t_far, opt, t, static_cast<uint64_t>(i));
      const Image8 q = img.quantize();
      write_ppm(std::string(out_dir) + "/" + jobs[i].first + ".ppm", q);
      if (write_png_flag) write_png(std::string(out_dir) + "/" + jobs[i].first + ".png", q);
    }
  });
}

mn_status mn_eval(const char* checkpoint, const char* data_dir, const char* split,
                  const char* out_csv, int threads) {
  if (!checkpoint) return fail(MN_ERR_USAGE, "null argument");
  const std::string split_name = split && *split ? split : "test";
  if (split_name != "test" && split_name != "train")
    return fail(MN_ERR_USAGE, "eval: split must be test or train");
  return guarded([&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const int t = resolve_threads(threads);
    const Dataset ds = dataset_for(ckpt, data_dir, t);
    const EvalReport report = evaluate_checkpoint(ckpt, ds, split_name == "test", t);
    std::cout << eval_report_table(report);
    if (out_csv && *out_csv) {
      std::ofstream out(out_csv);
      if (!out) throw IoError(std::string("cannot write ") + out_csv);
      out << eval_report_csv(report);
    }
  });
}

mn_status mn_bench(const char* const* checkpoints, const int* n_p, int count,
                   const char* data_dir, const char* out_csv, int threads) {
  if (!checkpoints || !n_p || count < 1) return fail(MN_ERR_USAGE, "bench: empty model list");
  return guarded([&] {
    std::string missing;
    for (int i = 0; i < count; ++i)
      if (!std::filesystem::exists(checkpoints[i]))
        missing += std::string(missing.empty() ? "" : ", ") + checkpoints[i];
    if (!missing.empty()) throw IoError("bench: missing checkpoints: " + missing);
    const int t = resolve_threads(threads);
    std::vector<BenchRow> rows;
    for (int i = 0; i < count; ++i) {
      const Checkpoint ckpt = load_checkpoint(checkpoints[i]);
      if (ckpt.field.arch.n_p != n_p[i])
        throw UsageError("bench: checkpoint " + std::string(checkpoints[i]) + " has n_p " +
                         std::to_string(ckpt.field.arch.n_p) + ", expected " +
                         std::to_string(n_p[i]));
      const Dataset ds = dataset_for(ckpt, data_dir, t);
      rows.push_back(bench_checkpoint(ckpt, ds, t));
    }
    std::cout << bench_table(rows);
    if (out_csv && *out_csv) {
      std::ofstream out(out_csv);
      if (!out) throw IoError(std::string("cannot write ") + out_csv);
      out << bench_csv(rows);
    }
  });
}

}  // extern "C"
