// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/evalkit.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace mimonerf {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct SplitRender {
  std::vector<int> views;
  std::vector<RenderedImage> images;
  uint64_t runs = 0;
  double seconds = 0.0;
};

SplitRender render_split(const Checkpoint& ckpt, const Dataset& ds, bool test_split,
                         int threads) {
  const TrainConfig cfg = parse_config_text(ckpt.config_text);
  const RenderOptions opt = render_options_for(cfg, ds);
  SplitRender out;
  out.views = ds.split_indices(test_split);
  if (out.views.empty()) throw UsageError("eval: requested split is empty");
  RunCounter counter;
  const double t0 = now_seconds();
  for (int view : out.views) {
    out.images.push_back(render_view(ckpt.field, ckpt.coarse, ckpt.fine, ds.intrinsics,
                                     ds.views[static_cast<size_t>(view)].pose, ds.t_near,
                                     ds.t_far, opt, threads, static_cast<uint64_t>(view),
                                     &counter));
  }
  out.seconds = now_seconds() - t0;
  out.runs = counter.count;
  return out;
}

}  // namespace

EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& ds, bool test_split,
                               int threads) {
  const TrainConfig cfg = parse_config_text(ckpt.config_text);
  const SplitRender render = render_split(ckpt, ds, test_split, threads);

  EvalReport report;
  report.n_p = ckpt.field.arch.n_p;
  report.runs_per_pixel = count_run(cfg.n_coarse, cfg.n_fine, cfg.n_p);
  report.flops_per_pixel = flops_estimate(ckpt.field.arch, cfg.n_p, cfg.n_coarse, cfg.n_fine);
  report.measured_runs = render.runs;
  const uint64_t pixels = static_cast<uint64_t>(ds.intrinsics.width) * ds.intrinsics.height *
                          render.views.size();
  if (report.measured_runs != pixels * static_cast<uint64_t>(report.runs_per_pixel))
    throw NumericError("eval: live run counter disagrees with the run formula (" +
                       std::to_string(report.measured_runs) + " vs " +
                       std::to_string(pixels * static_cast<uint64_t>(report.runs_per_pixel)) +
                       ")");
  report.seconds_per_image = render.seconds / static_cast<double>(render.views.size());

  double psnr_sum = 0.0, ssim_sum = 0.0;
  for (size_t i = 0; i < render.views.size(); ++i) {
    const Image8 rendered = render.images[i].quantize();
    const Image8& gt = ds.views[static_cast<size_t>(render.views[i])].image;
    EvalRow row;
    row.view = render.views[i];
    row.psnr = psnr(rendered, gt);
    row.ssim = ssim(rendered, gt);
    psnr_sum += row.psnr;
    ssim_sum += row.ssim;
    report.rows.push_back(row);
  }
  report.mean_psnr = psnr_sum / static_cast<double>(report.rows.size());
  report.mean_ssim = ssim_sum / static_cast<double>(report.rows.size());
  return report;
}

namespace {

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::string eval_report_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "view,psnr_db,ssim\n";
  for (const EvalRow& row : r.rows)
    out << row.view << "," << fmt(row.psnr, "%.4f") << "," << fmt(row.ssim, "%.6f") << "\n";
  out << "mean," << fmt(r.mean_psnr, "%.4f") << "," << fmt(r.mean_ssim, "%.6f") << "\n";
  out << "runs_per_pixel," << r.runs_per_pixel << ",\n";
  out << "flops_per_pixel," << fmt(r.flops_per_pixel, "%.1f") << ",\n";
  out << "seconds_per_image," << fmt(r.seconds_per_image, "%.4f") << ",\n";
  return out.str();
}

std::string eval_report_table(const EvalReport& r) {
  std::ostringstream out;
  char buf[128];
  out << " view     psnr_db      ssim\n";
  for (const EvalRow& row : r.rows) {
    std::snprintf(buf, sizeof(buf), "%5d  %10s  %8s\n", row.view, fmt(row.psnr, "%.4f").c_str(),
                  fmt(row.ssim, "%.6f").c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), " mean  %10s  %8s\n", fmt(r.mean_psnr, "%.4f").c_str(),
                fmt(r.mean_ssim, "%.6f").c_str());
  out << buf;
  out << "runs/pixel        " << r.runs_per_pixel << "\n";
  out << "flops/pixel       " << fmt(r.flops_per_pixel, "%.1f") << "\n";
  out << "seconds/image     " << fmt(r.seconds_per_image, "%.4f") << "\n";
  return out.str();
}

BenchRow bench_checkpoint(const Checkpoint& ckpt, const Dataset& ds, int threads, int reps) {
  const TrainConfig cfg = parse_config_text(ckpt.config_text);
  BenchRow row;
  row.n_p = ckpt.field.arch.n_p;
  row.runs_per_pixel = count_run(cfg.n_coarse, cfg.n_fine, cfg.n_p);
  row.flops_per_pixel = flops_estimate(ckpt.field.arch, cfg.n_p, cfg.n_coarse, cfg.n_fine);
  std::vector<double> seconds;
  double psnr_mean = 0.0;
  for (int rep = 0; rep < std::max(1, reps); ++rep) {
    const SplitRender render = render_split(ckpt, ds, true, threads);
    seconds.push_back(render.seconds / static_cast<double>(render.views.size()));
    if (rep == 0) {
      double acc = 0.0;
      for (size_t i = 0; i < render.views.size(); ++i)
        acc += psnr(render.images[i].quantize(),
                    ds.views[static_cast<size_t>(render.views[i])].image);
      psnr_mean = acc / static_cast<double>(render.views.size());
    }
  }
  std::sort(seconds.begin(), seconds.end());
  row.seconds_per_image = seconds[seconds.size() / 2];
  row.psnr = psnr_mean;
  return row;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "n_p,psnr_db,runs_per_pixel,flops_per_pixel,seconds_per_image\n";
  for (const BenchRow& r : rows)
    out << r.n_p << "," << fmt(r.psnr, "%.4f") << "," << r.runs_per_pixel << ","
        << fmt(r.flops_per_pixel, "%.1f") << "," << fmt(r.seconds_per_image, "%.4f") << "\n";
  return out.str();
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  char buf[160];
  out << "  n_p     psnr_db   runs/px       flops/px   seconds/image\n";
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%5d  %10s  %8lld %14s  %14s\n", r.n_p,
                  fmt(r.psnr, "%.4f").c_str(), static_cast<long long>(r.runs_per_pixel),
                  fmt(r.flops_per_pixel, "%.1f").c_str(),
                  fmt(r.seconds_per_image, "%.4f").c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace mimonerf
