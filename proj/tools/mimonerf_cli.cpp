// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver over the C API. Exit codes: 0 success, 2 usage,
// 3 I/O or format, 4 numeric failure.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "mimonerf/capi.h"

namespace {

int finish(mn_status status) {
  if (status != MN_OK) std::fprintf(stderr, "error: %s\n", mn_last_error());
  return static_cast<int>(status);
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mimonerf: grouped-MLP neural radiance fields on procedural scenes"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;  // 0 = machine parallelism
  app.add_option("--threads", threads, "worker threads (1 = bit-deterministic)")
      ->capture_default_str();

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "render a procedural dataset");
  std::string gen_scene = "spheres3", gen_out, gen_mode = "orbit", gen_bg = "white";
  int gen_views = 20, gen_res = 64;
  uint64_t gen_seed = 1;
  gen->add_option("--scene", gen_scene, "procedural scene name")->capture_default_str();
  gen->add_option("--views", gen_views, "number of views")->capture_default_str();
  gen->add_option("--res", gen_res, "image resolution")->capture_default_str();
  gen->add_option("--seed", gen_seed, "rng seed")->capture_default_str();
  gen->add_option("--camera-mode", gen_mode, "orbit | forward")->capture_default_str();
  gen->add_option("--background", gen_bg, "white | black | gray | r,g,b")->capture_default_str();
  gen->add_option("--out", gen_out, "output dataset directory")->required();

  // train
  auto* train = app.add_subcommand("train", "train a model from a config file");
  std::string train_config, train_out;
  train->add_option("--config", train_config, "key=value config file")->required();
  train->add_option("--out", train_out, "output directory (default: config out_dir)");

  // render
  auto* render = app.add_subcommand("render", "render dataset poses or an orbit");
  std::string render_ckpt, render_data, render_out;
  int render_pose = -1, render_orbit = 0;
  bool render_png = false;
  render->add_option("--ckpt", render_ckpt, "checkpoint file")->required();
  render->add_option("--data", render_data, "dataset directory (default: from checkpoint)");
  render->add_option("--pose-index", render_pose, "dataset pose to render");
  render->add_option("--orbit", render_orbit, "render N poses on a circular path");
  render->add_flag("--png", render_png, "also write PNG");
  render->add_option("--out", render_out, "output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "score a checkpoint on a dataset split");
  std::string eval_ckpt, eval_data, eval_split = "test", eval_csv;
  eval->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--split", eval_split, "test | train")->capture_default_str();
  eval->add_option("--csv", eval_csv, "also write the report as CSV");

  // bench
  auto* bench = app.add_subcommand("bench", "compare rendering cost across group sizes");
  std::string bench_ckpts, bench_nps, bench_data, bench_csv;
  bench->add_option("--ckpt", bench_ckpts, "comma list of checkpoints, one per --np entry")
      ->required();
  bench->add_option("--np", bench_nps, "comma list of group sizes, e.g. 1,2,4,8")->required();
  bench->add_option("--data", bench_data, "dataset directory")->required();
  bench->add_option("--csv", bench_csv, "also write rows as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    return finish(mn_gen_data(gen_scene.c_str(), gen_views, gen_res, gen_seed, gen_mode.c_str(),
                              gen_bg.c_str(), gen_out.c_str(), threads));
  }
  if (train->parsed()) {
    mn_config* cfg = mn_config_create();
    mn_status status = mn_config_load_file(cfg, train_config.c_str());
    if (status == MN_OK) {
      std::string out = train_out;
      if (out.empty()) {
        // default to the config's out_dir
        const std::string text = mn_config_text(cfg);
        const size_t pos = text.find("out_dir=");
        const size_t end = text.find('\n', pos);
        out = text.substr(pos + 8, end - pos - 8);
      }
      status = mn_train(cfg, out.c_str(), threads);
    }
    mn_config_destroy(cfg);
    return finish(status);
  }
  if (render->parsed()) {
    return finish(mn_render(render_ckpt.c_str(), render_data.c_str(), render_pose, render_orbit,
                            render_out.c_str(), render_png ? 1 : 0, threads));
  }
  if (eval->parsed()) {
    return finish(mn_eval(eval_ckpt.c_str(), eval_data.c_str(), eval_split.c_str(),
                          eval_csv.empty() ? nullptr : eval_csv.c_str(), threads));
  }
  if (bench->parsed()) {
    const std::vector<std::string> ckpts = split_commas(bench_ckpts);
    const std::vector<std::string> nps = split_commas(bench_nps);
    if (ckpts.size() != nps.size() || ckpts.empty()) {
      std::fprintf(stderr, "error: --ckpt and --np need matching comma lists\n");
      return 2;
    }
    std::vector<const char*> ckpt_ptrs;
    std::vector<int> np_values;
    for (size_t i = 0; i < ckpts.size(); ++i) {
      ckpt_ptrs.push_back(ckpts[i].c_str());
      try {
        np_values.push_back(std::stoi(nps[i]));
      } catch (const std::exception&) {
        std::fprintf(stderr, "error: bad --np entry '%s'\n", nps[i].c_str());
        return 2;
      }
    }
    return finish(mn_bench(ckpt_ptrs.data(), np_values.data(), static_cast<int>(ckpt_ptrs.size()),
                           bench_data.c_str(), bench_csv.empty() ? nullptr : bench_csv.c_str(),
                           threads));
  }
  return 2;
}
