// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/trainer.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>

#include "mimonerf/metrics.hpp"
#include "mimonerf/threads.hpp"

namespace mimonerf {

namespace {

constexpr int kMetricsInterval = 100;
constexpr uint64_t kCoarseNetTag = 11;
constexpr uint64_t kFineNetTag = 12;

struct Setup {
  FieldConfig field;
  ReformulationConfig reforms;
  GroupingMode grouping = GroupingMode::kNeighbor;
  Vec3d background = Vec3d::Ones();
  std::vector<int> train_views;
  std::vector<int> test_views;
  bool distill = false;
  Checkpoint teacher;
  double lambda = 0.0;
};

struct RayDraw {
  Ray ray;
  Vec3f gt;
  uint64_t global_index = 0;
};

struct ShardAccum {
  MlpGrads<float> g_coarse;
  MlpGrads<float> g_fine;
  double pixel_sum = 0.0;
  double cons_sum = 0.0;
  RunCounter field_runs;
  RunCounter teacher_runs;
};

Setup build_setup(const TrainConfig& cfg, const Dataset& ds) {
  Setup s;
  s.field = make_field_config(cfg.n_p, cfg.width, cfg.depth, cfg.pos_freqs, cfg.dir_freqs);
  s.reforms = reformulations_for(cfg);
  s.grouping = cfg.grouping == "random" ? GroupingMode::kRandom : GroupingMode::kNeighbor;
  s.background = ds.background;
  s.train_views = ds.split_indices(false);
  s.test_views = ds.split_indices(true);
  s.lambda = s.reforms.lambda;
  if (s.train_views.empty()) throw UsageError("train: dataset has no training views");
  if (cfg.variant == "distill") {
    s.distill = true;
    s.teacher = load_checkpoint(cfg.teacher);
    if (s.teacher.field.arch.n_p != 1)
      throw UsageError("train: distillation teacher must be an n_p = 1 checkpoint");
    if (!s.teacher.config_text.empty()) {
      const TrainConfig teacher_cfg = parse_config_text(s.teacher.config_text);
      if (teacher_cfg.scene != cfg.scene)
        throw UsageError("train: teacher was trained on scene '" + teacher_cfg.scene +
                         "', expected '" + cfg.scene + "'");
    }
  }
  return s;
}

std::vector<RayDraw> draw_batch(const TrainConfig& cfg, const Dataset& ds, const Setup& setup,
                                int64_t iter) {
  std::vector<RayDraw> draws(static_cast<size_t>(cfg.batch_rays));
  for (int b = 0; b < cfg.batch_rays; ++b) {
    Rng rng = make_rng(cfg.seed, kStreamRayDraw, static_cast<uint64_t>(iter),
                       static_cast<uint64_t>(b));
    const int view =
        setup.train_views[static_cast<size_t>(rng.below(setup.train_views.size()))];
    const int px = static_cast<int>(rng.below(static_cast<uint64_t>(ds.intrinsics.width)));
    const int py = static_cast<int>(rng.below(static_cast<uint64_t>(ds.intrinsics.height)));
    RayDraw& d = draws[static_cast<size_t>(b)];
    d.ray = dataset_ray(ds, view, px, py);
    const uint8_t* p = ds.views[static_cast<size_t>(view)].image.pixel(px, py);
    d.gt = Vec3f(p[0] / 255.0f, p[1] / 255.0f, p[2] / 255.0f);
    d.global_index = static_cast<uint64_t>(b);
  }
  return draws;
}

// Evaluates all reformulations of one pass over the shard's rays.
std::vector<PassEval<float>> eval_reforms(const Setup& setup, const NetParams<float>& params,
                                          const PassSamples<float>& samples,
                                          const std::vector<int>& shifts, uint64_t seed,
                                          int64_t iter, int pass_id, int ray_base,
                                          RunCounter* counter, CompositeMonitor* monitor,
                                          bool want_tape) {
  std::vector<PassEval<float>> evals;
  evals.reserve(setup.reforms.entries.size());
  const Vec3f bg = setup.background.cast<float>();
  for (size_t m = 0; m < setup.reforms.entries.size(); ++m) {
    const LayoutPlan plan = plan_for(
        setup.reforms.entries[m], setup.field.arch.n_p, shifts[m], setup.grouping,
        hash_tags(seed, kStreamPermute, static_cast<uint64_t>(iter), static_cast<uint64_t>(pass_id),
                  static_cast<uint64_t>(m)));
    evals.push_back(evaluate_pass(setup.field, params, samples, plan, bg, want_tape, counter,
                                  monitor, ray_base));
  }
  return evals;
}

// One pass of losses + backward over the shard via the shared templated
// assembly; sums land in the shard accumulator.
void shard_pass(const Setup& setup, const NetParams<float>& params,
                const PassSamples<float>& samples, const std::vector<PassEval<float>>& evals,
                const PassEval<float>* teacher_eval, const std::vector<RayDraw>& draws, int r0,
                int batch_total, ShardAccum& acc, MlpGrads<float>& grads) {
  std::vector<Vec3f> gts(static_cast<size_t>(samples.n_rays));
  for (int r = 0; r < samples.n_rays; ++r)
    gts[static_cast<size_t>(r)] = draws[static_cast<size_t>(r0 + r)].gt;
  std::vector<int> repeats;
  for (const auto& e : setup.reforms.entries) repeats.push_back(e.repeat);
  const PassLossResult<float> res = pass_losses_and_backward<float>(
      setup.field, params, samples, evals, teacher_eval, gts, repeats,
      static_cast<float>(setup.lambda), 1.0f / static_cast<float>(batch_total),
      setup.background.cast<float>(), true, &grads);
  acc.pixel_sum += static_cast<double>(res.pixel_sum);
  acc.cons_sum += static_cast<double>(res.cons_sum);
}

Checkpoint make_checkpoint(const Setup& setup, const TrainConfig& cfg,
                           const NetParams<float>& coarse, const NetParams<float>& fine,
                           const AdamState& adam_c, const AdamState& adam_f, int64_t iteration) {
  Checkpoint ckpt;
  ckpt.field = setup.field;
  ckpt.coarse = coarse;
  ckpt.fine = fine;
  ckpt.adam_coarse = adam_c;
  ckpt.adam_fine = adam_f;
  ckpt.iteration = iteration;
  ckpt.config_text = config_to_text(cfg);
  return ckpt;
}

}  // namespace

ReformulationConfig reformulations_for(const TrainConfig& cfg) {
  if (cfg.variant == "self") {
    if (cfg.preset.size() == 2 && cfg.preset[0] == 'R' && cfg.preset[1] >= '1' &&
        cfg.preset[1] <= '6')
      return make_preset(cfg.preset, cfg.n_p, cfg.lambda);
    return parse_reformulations(cfg.preset, cfg.n_p, cfg.lambda);
  }
  // naive ignores lambda entirely; distill keeps it for the teacher term.
  return base_formulation(cfg.variant == "distill" ? cfg.lambda : 0.0);
}

RenderOptions render_options_for(const TrainConfig& cfg, const Dataset& ds) {
  RenderOptions opt;
  opt.n_coarse = cfg.n_coarse;
  opt.n_fine = cfg.n_fine;
  opt.grouping = cfg.grouping == "random" ? GroupingMode::kRandom : GroupingMode::kNeighbor;
  opt.background = ds.background;
  opt.seed = cfg.seed;
  return opt;
}

std::vector<int> draw_shifts(const ReformulationConfig& reforms, int n_p, GroupingMode mode,
                             uint64_t seed, int64_t iteration) {
  const size_t m_count = reforms.entries.size();
  std::vector<int> shifts(m_count, 0);
  if (mode == GroupingMode::kRandom) return shifts;  // random grouping ignores shifts
  std::vector<std::pair<int, int>> used;             // (window, shift)
  auto taken = [&](int w, int s) {
    for (const auto& [uw, us] : used)
      if (uw == w && us == s) return true;
    return false;
  };
  for (size_t m = 0; m < m_count; ++m) {
    if (!reforms.entries[m].resample_shift) {
      shifts[m] = reforms.entries[m].fixed_shift;
      used.emplace_back(reforms.entries[m].window(n_p), shifts[m]);
    }
  }
  Rng rng = make_rng(seed, kStreamShift, static_cast<uint64_t>(iteration));
  for (size_t m = 0; m < m_count; ++m) {
    if (!reforms.entries[m].resample_shift) continue;
    const int w = reforms.entries[m].window(n_p);
    std::vector<int> free;
    for (int s = 0; s < w; ++s)
      if (!taken(w, s)) free.push_back(s);
    shifts[m] = free[static_cast<size_t>(rng.below(free.size()))];
    used.emplace_back(w, shifts[m]);
  }
  return shifts;
}

int64_t expected_iteration_runs(const TrainConfig& cfg, const std::vector<int>& shifts) {
  const ReformulationConfig reforms = reformulations_for(cfg);
  const bool neighbor = cfg.grouping != "random";
  int64_t per_ray = 0;
  for (const int n : {cfg.n_coarse, cfg.n_coarse + cfg.n_fine}) {
    for (size_t m = 0; m < reforms.entries.size(); ++m) {
      const int w = reforms.entries[m].window(cfg.n_p);
      per_ray += n / w + ((neighbor && shifts[m] > 0) ? 1 : 0);
    }
  }
  return per_ray * cfg.batch_rays;
}

Dataset resolve_dataset(const TrainConfig& cfg, int threads) {
  if (std::filesystem::exists(cfg.scene + "/manifest.txt")) return load_dataset(cfg.scene);
  ProceduralScene scene = make_scene(cfg.scene);
  scene.background = parse_background(cfg.background);
  return generate_dataset(scene, cfg.views, cfg.resolution, cfg.seed, cfg.camera_mode, 4096,
                          threads);
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "iteration,loss,loss_pixel,loss_3d,psnr,runs,seconds\n";
  char buf[256];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g,%.9g,%llu,%.3f\n",
                  static_cast<long long>(r.iteration), r.loss, r.loss_pixel, r.loss_3d, r.psnr,
                  static_cast<unsigned long long>(r.runs), r.seconds);
    out << buf;
  }
  if (!out) throw IoError("short write to " + path);
}

TrainResult train(const TrainConfig& cfg, const Dataset& ds, int threads,
                  const std::string& out_dir, std::ostream* progress) {
  validate_config(cfg);
  if (threads < 1) threads = default_thread_count();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  Setup setup = build_setup(cfg, ds);
  NetParams<float> coarse = mlp_init(setup.field.arch, hash_tags(cfg.seed, kCoarseNetTag));
  NetParams<float> fine = mlp_init(setup.field.arch, hash_tags(cfg.seed, kFineNetTag));
  AdamHyper hyper;
  hyper.lr = static_cast<float>(cfg.lr);
  AdamState adam_c = adam_init(coarse, hyper);
  AdamState adam_f = adam_init(fine, hyper);

  TrainResult result;
  CompositeMonitor monitor;
  Checkpoint last_good =
      make_checkpoint(setup, cfg, coarse, fine, adam_c, adam_f, 0);

  const int eval_view = setup.test_views.empty() ? setup.train_views[0] : setup.test_views[0];
  const RenderOptions render_opt = render_options_for(cfg, ds);
  auto eval_psnr = [&]() {
    const RenderedImage img =
        render_view(setup.field, coarse, fine, ds.intrinsics, ds.views[static_cast<size_t>(eval_view)].pose,
                    ds.t_near, ds.t_far, render_opt, threads, static_cast<uint64_t>(eval_view));
    return psnr(img.rgb, ds.views[static_cast<size_t>(eval_view)].image);
  };

  std::deque<std::array<double, 3>> window;  // (total, pixel, cons) per iteration
  std::array<double, 3> window_sum{0.0, 0.0, 0.0};

  auto finalize = [&](int64_t iteration) {
    result.checkpoint = make_checkpoint(setup, cfg, coarse, fine, adam_c, adam_f, iteration);
    result.stats.composited_rays = monitor.rays.load();
    result.stats.invariant_violations = monitor.total_violations();
    if (!out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      save_checkpoint(result.checkpoint, out_dir + "/model.ckpt");
      write_metrics_csv(result.metrics, out_dir + "/metrics.csv");
    }
  };

  if (progress) {
    *progress << "training variant=" << cfg.variant << " n_p=" << cfg.n_p << " M="
              << setup.reforms.size() << " R=[";
    for (size_t m = 0; m < setup.reforms.entries.size(); ++m)
      *progress << (m ? "," : "") << setup.reforms.entries[m].repeat;
    *progress << "] lambda=" << setup.lambda << " iters=" << cfg.iters << "\n";
  }

  for (int64_t iter = 0; iter < cfg.iters; ++iter) {
    const std::vector<int> shifts =
        draw_shifts(setup.reforms, cfg.n_p, setup.grouping, cfg.seed, iter);
    const std::vector<RayDraw> draws = draw_batch(cfg, ds, setup, iter);
    const int batch = static_cast<int>(draws.size());

    const int shards = std::max(1, std::min(threads, batch));
    std::vector<ShardAccum> accums(static_cast<size_t>(shards));

    try {
      parallel_shards(batch, shards, [&](int shard, int r0, int r1) {
        ShardAccum& acc = accums[static_cast<size_t>(shard)];
        const int n_rays = r1 - r0;
        std::vector<Ray> rays(static_cast<size_t>(n_rays));
        for (int r = 0; r < n_rays; ++r) rays[static_cast<size_t>(r)] = draws[static_cast<size_t>(r0 + r)].ray;

        // Coarse pass.
        std::vector<SampleSet<float>> sets(static_cast<size_t>(n_rays));
        for (int r = 0; r < n_rays; ++r) {
          Rng rng = make_rng(cfg.seed, kStreamJitter, static_cast<uint64_t>(iter),
                             static_cast<uint64_t>(r0 + r));
          sets[static_cast<size_t>(r)] =
              stratified_sample<float>(rays[static_cast<size_t>(r)], cfg.n_coarse, cfg.jitter, rng);
        }
        PassSamples<float> coarse_samples = build_pass_samples(setup.field, rays, sets);
        std::vector<PassEval<float>> coarse_evals =
            eval_reforms(setup, coarse, coarse_samples, shifts, cfg.seed, iter, 0, r0,
                         &acc.field_runs, &monitor, true);

        // Fine pass on the shared hierarchical grid (guided by the first
        // reformulation's coarse weights; sample positions carry no grad).
        std::vector<SampleSet<float>> fine_sets(static_cast<size_t>(n_rays));
        for (int r = 0; r < n_rays; ++r) {
          Rng rng = make_rng(cfg.seed, kStreamHierarchical, static_cast<uint64_t>(iter),
                             static_cast<uint64_t>(r0 + r));
          const VecX<float> t = coarse_samples.t.row(r).transpose();
          const VecX<float> w = coarse_evals[0].comp[static_cast<size_t>(r)].weights;
          fine_sets[static_cast<size_t>(r)] =
              hierarchical_sample<float>(rays[static_cast<size_t>(r)], t, w, cfg.n_fine, rng);
        }
        PassSamples<float> fine_samples = build_pass_samples(setup.field, rays, fine_sets);
        std::vector<PassEval<float>> fine_evals =
            eval_reforms(setup, fine, fine_samples, shifts, cfg.seed, iter, 1, r0,
                         &acc.field_runs, &monitor, true);

        // Frozen teacher on the same grids.
        PassEval<float> teacher_coarse, teacher_fine;
        if (setup.distill) {
          const LayoutPlan base = plan_for(ReformEntry{}, 1, 0, GroupingMode::kNeighbor, 0);
          const Vec3f bg = setup.background.cast<float>();
          PassSamples<float> tc = build_pass_samples(setup.teacher.field, rays, sets);
          teacher_coarse = evaluate_pass(setup.teacher.field, setup.teacher.coarse, tc, base, bg,
                                         false, &acc.teacher_runs, nullptr);
          PassSamples<float> tf = build_pass_samples(setup.teacher.field, rays, fine_sets);
          teacher_fine = evaluate_pass(setup.teacher.field, setup.teacher.fine, tf, base, bg,
                                       false, &acc.teacher_runs, nullptr);
        }

        shard_pass(setup, coarse, coarse_samples, coarse_evals,
                   setup.distill ? &teacher_coarse : nullptr, draws, r0, batch, acc,
                   acc.g_coarse);
        shard_pass(setup, fine, fine_samples, fine_evals,
                   setup.distill ? &teacher_fine : nullptr, draws, r0, batch, acc, acc.g_fine);
      });

      // Deterministic reduction in shard order.
      double pixel_sum = 0.0, cons_sum = 0.0;
      uint64_t iter_runs = 0;
      for (int s = 1; s < shards; ++s) {
        if (!accums[static_cast<size_t>(s)].g_coarse.params.w.empty())
          accums[0].g_coarse.params.add(accums[static_cast<size_t>(s)].g_coarse.params);
        if (!accums[static_cast<size_t>(s)].g_fine.params.w.empty())
          accums[0].g_fine.params.add(accums[static_cast<size_t>(s)].g_fine.params);
      }
      for (int s = 0; s < shards; ++s) {
        pixel_sum += accums[static_cast<size_t>(s)].pixel_sum;
        cons_sum += accums[static_cast<size_t>(s)].cons_sum;
        iter_runs += accums[static_cast<size_t>(s)].field_runs.count;
        result.stats.teacher_runs += accums[static_cast<size_t>(s)].teacher_runs.count;
      }
      result.stats.field_runs += iter_runs;

      const int64_t expected = expected_iteration_runs(cfg, shifts);
      if (static_cast<int64_t>(iter_runs) != expected)
        throw NumericError("run accounting mismatch at iteration " + std::to_string(iter) +
                           ": measured " + std::to_string(iter_runs) + ", expected " +
                           std::to_string(expected));

      const double pixel_mean = pixel_sum / batch;
      const double cons_mean = cons_sum / batch;
      const double total = full_objective(pixel_mean, cons_mean, setup.lambda);
      if (!std::isfinite(total))
        throw NumericError("training loss diverged at iteration " + std::to_string(iter));

      adam_step(coarse, accums[0].g_coarse.params, adam_c);
      adam_step(fine, accums[0].g_fine.params, adam_f);

      window.push_back({total, pixel_mean, cons_mean});
      window_sum[0] += total;
      window_sum[1] += pixel_mean;
      window_sum[2] += cons_mean;
      if (window.size() > kMetricsInterval) {
        for (int i = 0; i < 3; ++i) window_sum[static_cast<size_t>(i)] -= window.front()[static_cast<size_t>(i)];
        window.pop_front();
      }
    } catch (const NumericError& err) {
      if (progress) *progress << "aborting: " << err.what() << "\n";
      result.metrics.push_back({iter, std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN(), 0.0,
                                result.stats.field_runs, elapsed()});
      result.checkpoint = last_good;
      result.stats.composited_rays = monitor.rays.load();
      result.stats.invariant_violations = monitor.total_violations();
      if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        save_checkpoint(last_good, out_dir + "/model.ckpt");
        write_metrics_csv(result.metrics, out_dir + "/metrics.csv");
      }
      throw;
    }

    const int64_t done = iter + 1;
    if (done % kMetricsInterval == 0 || done == cfg.iters) {
      MetricsRow row;
      row.iteration = done;
      const double count = static_cast<double>(window.size());
      row.loss = window_sum[0] / count;
      row.loss_pixel = window_sum[1] / count;
      row.loss_3d = window_sum[2] / count;
      row.psnr = eval_psnr();
      row.runs = result.stats.field_runs;
      row.seconds = elapsed();
      result.metrics.push_back(row);
      last_good = make_checkpoint(setup, cfg, coarse, fine, adam_c, adam_f, done);
      if (progress && (done % (kMetricsInterval * 10) == 0 || done == cfg.iters)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "iter %6lld/%lld  loss %.6f  psnr %.2f  %.1fs\n",
                      static_cast<long long>(done), static_cast<long long>(cfg.iters), row.loss,
                      row.psnr, row.seconds);
        *progress << buf << std::flush;
      }
    }
  }

  finalize(cfg.iters);
  return result;
}

}  // namespace mimonerf
