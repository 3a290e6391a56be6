// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Batched coarse/fine rendering with grouped MLP evaluation. One PassEval
// holds everything a reformulated evaluation of a ray batch produced: the
// per-slot activations (kept for the reverse pass), the per-sample scattered
// records, and the per-ray composites.

#pragma once


#include "mimonerf/compositing.hpp"
#include "mimonerf/field.hpp"
#include "mimonerf/objectives.hpp"
#include "mimonerf/sampling.hpp"

namespace mimonerf {

// Resolved grouping for one (pass, reformulation): window = n_p / repeat
// real samples per invocation, repeated to fill the n_p slots.
struct LayoutPlan {
  GroupingMode mode = GroupingMode::kNeighbor;
  int width = 1;
  int repeat = 1;
  int shift = 0;
  uint64_t perm_seed = 0;  // random mode: per-ray stream root
};

inline LayoutPlan plan_for(const ReformEntry& entry, int n_p, int shift, GroupingMode mode,
                           uint64_t perm_seed) {
  LayoutPlan plan;
  plan.mode = mode;
  plan.width = entry.window(n_p);
  plan.repeat = entry.repeat;
  plan.shift = mode == GroupingMode::kRandom ? 0 : shift;
  plan.perm_seed = perm_seed;
  return plan;
}

// Shared per-pass sample grid for a contiguous ray batch. Sample s of ray r
// lives at flat index r * n + s.
template <class T>
struct PassSamples {
  int n_rays = 0;
  int n = 0;
  MatX<T> t;        // [n_rays x n]
  MatX<T> delta;    // [n_rays x n]
  MatX<T> coords;   // [n_rays*n x 3]
  MatX<T> enc_pos;  // [n_rays*n x pos_dim]
  MatX<T> enc_dir;  // [n_rays x dir_dim]
};

template <class T>
PassSamples<T> build_pass_samples(const FieldConfig& cfg, const std::vector<Ray>& rays,
                                  const std::vector<SampleSet<T>>& sets) {
  PassSamples<T> out;
  out.n_rays = static_cast<int>(rays.size());
  out.n = static_cast<int>(sets.at(0).t.size());
  out.t.resize(out.n_rays, out.n);
  out.delta.resize(out.n_rays, out.n);
  out.coords.resize(static_cast<Eigen::Index>(out.n_rays) * out.n, 3);
  MatX<T> dirs(out.n_rays, 3);
  for (int r = 0; r < out.n_rays; ++r) {
    const SampleSet<T>& s = sets[static_cast<size_t>(r)];
    if (static_cast<int>(s.t.size()) != out.n)
      throw UsageError("build_pass_samples: inconsistent sample counts");
    out.t.row(r) = s.t.transpose();
    out.delta.row(r) = s.delta.transpose();
    out.coords.middleRows(static_cast<Eigen::Index>(r) * out.n, out.n) = s.coords;
    dirs.row(r) = rays[static_cast<size_t>(r)].dir.cast<T>().transpose();
  }
  out.enc_pos = positional_encode_batch(cfg.pos_enc, out.coords);
  out.enc_dir = positional_encode_batch(cfg.dir_enc, dirs);
  return out;
}

template <class T>
struct PassEval {
  LayoutPlan plan;
  int groups_per_ray = 0;
  int rows = 0;                      // MLP invocations for the batch
  std::vector<int32_t> slot_sample;  // [rows * n_p], flat sample id or -1 (padded)
  MatX<T> act_color;                 // [rows x 3 n_p], sigmoid applied
  MatX<T> act_sigma;                 // [rows x n_p], ReLU applied
  ForwardTape<T> tape;
  bool has_tape = false;
  // Per-sample records on the shared grid (repetitions averaged).
  MatX<T> color;  // [S x 3]
  VecX<T> sigma;  // [S]
  VecX<T> alpha;  // [S]
  // Per-ray composites.
  std::vector<CompositeResult<T>> comp;
  std::vector<Vec3<T>> pixel;  // background composited
};

template <class T>
PassEval<T> evaluate_pass(const FieldConfig& cfg, const NetParams<T>& params,
                          const PassSamples<T>& samples, const LayoutPlan& plan,
                          const Vec3<T>& background, bool want_tape, RunCounter* counter,
                          CompositeMonitor* monitor, int ray_index_base = 0) {
  const int n_p = cfg.arch.n_p;
  const int n = samples.n;
  const int n_rays = samples.n_rays;
  const int enc_dim = cfg.pos_enc.output_dim();
  if (plan.width * plan.repeat != n_p)
    throw UsageError("evaluate_pass: window * repeat must equal n_p");

  PassEval<T> eval;
  eval.plan = plan;

  GroupLayout shared_layout;
  if (plan.mode == GroupingMode::kNeighbor)
    shared_layout = make_groups(n, plan.width, plan.shift, GroupingMode::kNeighbor);
  else
    shared_layout = make_groups(n, plan.width, 0, GroupingMode::kNeighbor);  // shape only
  eval.groups_per_ray = shared_layout.n_groups;
  eval.rows = n_rays * eval.groups_per_ray;
  eval.slot_sample.resize(static_cast<size_t>(eval.rows) * n_p);

  MatX<T> main_in(eval.rows, cfg.arch.main_input_dim);
  MatX<T> aux_in(eval.rows, cfg.arch.aux_input_dim);
  for (int r = 0; r < n_rays; ++r) {
    GroupLayout ray_layout;
    const GroupLayout* layout = &shared_layout;
    if (plan.mode == GroupingMode::kRandom) {
      Rng rng = make_rng(plan.perm_seed, static_cast<uint64_t>(ray_index_base + r));
      ray_layout = make_groups(n, plan.width, 0, GroupingMode::kRandom, &rng);
      layout = &ray_layout;
    }
    for (int g = 0; g < eval.groups_per_ray; ++g) {
      const int row = r * eval.groups_per_ray + g;
      for (int q = 0; q < n_p; ++q) {
        const int local = repeated_slot_sample(*layout, g, q, plan.repeat);
        const bool padded = repeated_slot_padded(*layout, g, q, plan.repeat);
        const int flat = r * n + local;
        main_in.row(row).segment(q * enc_dim, enc_dim) = samples.enc_pos.row(flat);
        eval.slot_sample[static_cast<size_t>(row) * n_p + q] = padded ? -1 : flat;
      }
      aux_in.row(row) = samples.enc_dir.row(r);
    }
  }

  MatX<T> raw = mlp_forward(cfg.arch, params, main_in, aux_in, want_tape ? &eval.tape : nullptr);
  eval.has_tape = want_tape;
  if (counter) counter->add(static_cast<uint64_t>(eval.rows));

  eval.act_color = (T(1) + (-raw.leftCols(3 * n_p).array()).exp()).inverse();
  eval.act_sigma = raw.rightCols(n_p).cwiseMax(T(0));

  const Eigen::Index S = static_cast<Eigen::Index>(n_rays) * n;
  eval.color.setZero(S, 3);
  eval.sigma.setZero(S);
  for (int row = 0; row < eval.rows; ++row) {
    for (int q = 0; q < n_p; ++q) {
      const int32_t s = eval.slot_sample[static_cast<size_t>(row) * n_p + q];
      if (s < 0) continue;
      eval.color.row(s) += eval.act_color.row(row).segment(3 * q, 3);
      eval.sigma[s] += eval.act_sigma(row, q);
    }
  }
  if (plan.repeat > 1) {
    eval.color /= static_cast<T>(plan.repeat);
    eval.sigma /= static_cast<T>(plan.repeat);
  }
  eval.alpha.resize(S);
  for (Eigen::Index s = 0; s < S; ++s)
    eval.alpha[s] = alpha_from_sigma(eval.sigma[s], samples.delta.data()[s]);

  eval.comp.resize(static_cast<size_t>(n_rays));
  eval.pixel.resize(static_cast<size_t>(n_rays));
  for (int r = 0; r < n_rays; ++r) {
    const MatX<T> colors = eval.color.middleRows(static_cast<Eigen::Index>(r) * n, n);
    const VecX<T> alphas = eval.alpha.segment(static_cast<Eigen::Index>(r) * n, n);
    eval.comp[static_cast<size_t>(r)] = composite(colors, alphas, nullptr, monitor);
    eval.pixel[static_cast<size_t>(r)] =
        composite_with_background(eval.comp[static_cast<size_t>(r)], background);
  }
  return eval;
}

// Reverse pass of evaluate_pass: given dL/d(record color) and dL/d(record
// alpha), accumulate parameter gradients. Padded slots contribute nothing.
template <class T>
void pass_backward(const FieldConfig& cfg, const NetParams<T>& params,
                   const PassSamples<T>& samples, const PassEval<T>& eval,
                   const MatX<T>& d_color, const VecX<T>& d_alpha, MlpGrads<T>* grads) {
  if (!eval.has_tape) throw UsageError("pass_backward: pass was evaluated without a tape");
  const int n_p = cfg.arch.n_p;
  const Eigen::Index S = eval.sigma.size();
  const T inv_r = T(1) / static_cast<T>(eval.plan.repeat);

  VecX<T> d_sigma(S);
  for (Eigen::Index s = 0; s < S; ++s)
    d_sigma[s] = d_sigma_from_d_alpha(d_alpha[s], samples.delta.data()[s], eval.alpha[s]);

  MatX<T> d_raw = MatX<T>::Zero(eval.rows, 4 * n_p);
  for (int row = 0; row < eval.rows; ++row) {
    for (int q = 0; q < n_p; ++q) {
      const int32_t s = eval.slot_sample[static_cast<size_t>(row) * n_p + q];
      if (s < 0) continue;
      for (int c = 0; c < 3; ++c) {
        const T a = eval.act_color(row, 3 * q + c);
        d_raw(row, 3 * q + c) = d_color(s, c) * inv_r * a * (T(1) - a);
      }
      d_raw(row, 3 * n_p + q) =
          eval.act_sigma(row, q) > T(0) ? d_sigma[s] * inv_r : T(0);
    }
  }
  mlp_backward(cfg.arch, params, eval.tape, d_raw, grads, false);
}

template <class T>
struct PassLossResult {
  T pixel_sum = T(0);  // sum over rays and reformulations of Eq-3 terms
  T cons_sum = T(0);   // sum over rays of the consistency terms
};

// Pixel + consistency losses of one pass over a ray batch, with gradients
// pushed back through the records into the field parameters. Pixel terms use
// d/dC of the squared error scaled by inv_batch; the consistency term
// applies stop-gradient semantics and is scaled by lambda * inv_batch.
// teacher_eval, when set, adds the frozen-teacher matching term instead of
// the pairwise loss (both may be active in principle; training uses one).
template <class T>
PassLossResult<T> pass_losses_and_backward(const FieldConfig& field, const NetParams<T>& params,
                                           const PassSamples<T>& samples,
                                           const std::vector<PassEval<T>>& evals,
                                           const PassEval<T>* teacher_eval,
                                           const std::vector<Vec3<T>>& gts,
                                           const std::vector<int>& repeats, T lambda, T inv_batch,
                                           const Vec3<T>& background, bool use_pixel,
                                           MlpGrads<T>* grads) {
  const int n = samples.n;
  const int n_rays = samples.n_rays;
  const size_t m_count = evals.size();
  PassLossResult<T> result;

  std::vector<MatX<T>> d_color(m_count);
  std::vector<VecX<T>> d_alpha(m_count);
  for (size_t m = 0; m < m_count; ++m) {
    d_color[m].setZero(static_cast<Eigen::Index>(n_rays) * n, 3);
    d_alpha[m].setZero(static_cast<Eigen::Index>(n_rays) * n);
  }
  MatX<T> tmp_dc(n, 3);
  VecX<T> tmp_da(n);

  for (int r = 0; r < n_rays; ++r) {
    const Eigen::Index off = static_cast<Eigen::Index>(r) * n;
    if (use_pixel) {
      const Vec3<T> gt = gts[static_cast<size_t>(r)];
      for (size_t m = 0; m < m_count; ++m) {
        const Vec3<T> pix = evals[m].pixel[static_cast<size_t>(r)];
        result.pixel_sum += pixel_loss(pix, gt);
        const Vec3<T> d_out = T(2) * inv_batch * (pix - gt);
        composite_backward<T>(evals[m].color.middleRows(off, n), evals[m].alpha.segment(off, n),
                              nullptr, background, d_out, tmp_dc, tmp_da);
        d_color[m].middleRows(off, n) += tmp_dc;
        d_alpha[m].segment(off, n) += tmp_da;
      }
    }
    if (m_count >= 2 && lambda > T(0)) {
      PerSampleRecord<T> rec;
      rec.n = n;
      rec.repeat = repeats;
      std::vector<T*> dc(m_count), da(m_count);
      for (size_t m = 0; m < m_count; ++m) {
        rec.color.push_back(evals[m].color.data() + 3 * off);
        rec.alpha.push_back(evals[m].alpha.data() + off);
        dc[m] = d_color[m].data() + 3 * off;
        da[m] = d_alpha[m].data() + off;
      }
      result.cons_sum += consistency_loss(rec);
      accumulate_consistency_grads(rec, lambda * inv_batch, dc, da);
    }
    if (teacher_eval && lambda > T(0)) {
      result.cons_sum += distill_consistency(
          evals[0].color.data() + 3 * off, evals[0].alpha.data() + off,
          teacher_eval->color.data() + 3 * off, teacher_eval->alpha.data() + off, n,
          lambda * inv_batch, d_color[0].data() + 3 * off, d_alpha[0].data() + off);
    }
  }
  if (grads)
    for (size_t m = 0; m < m_count; ++m)
      pass_backward(field, params, samples, evals[m], d_color[m], d_alpha[m], grads);
  return result;
}

// ---------------------------------------------------------------------------
// Whole-ray rendering (inference path: base formulation, no jitter).

struct RenderOptions {
  int n_coarse = 32;
  int n_fine = 32;
  GroupingMode grouping = GroupingMode::kNeighbor;
  Vec3d background = Vec3d::Ones();
  uint64_t seed = 1;
};

template <class T>
struct RayRenderResult {
  Vec3<T> coarse;
  Vec3<T> fine;
  PassEval<T> coarse_eval;
  PassEval<T> fine_eval;
  PassSamples<T> coarse_samples;
  PassSamples<T> fine_samples;
};

// Renders a contiguous batch of rays with the base formulation (s = 0,
// R = 1). stream_tag seeds the per-ray jitter-free hierarchical draws.
template <class T>
void render_batch(const FieldConfig& cfg, const NetParams<T>& coarse_params,
                  const NetParams<T>& fine_params, const std::vector<Ray>& rays,
                  const RenderOptions& opt, uint64_t stream_tag, std::vector<Vec3<T>>* coarse_out,
                  std::vector<Vec3<T>>* fine_out, RunCounter* counter = nullptr,
                  CompositeMonitor* monitor = nullptr, RayRenderResult<T>* detail = nullptr) {
  const int n_rays = static_cast<int>(rays.size());
  const Vec3<T> bg = opt.background.cast<T>();
  std::vector<SampleSet<T>> sets(rays.size());
  for (int r = 0; r < n_rays; ++r) {
    Rng rng = make_rng(opt.seed, kStreamJitter, stream_tag, static_cast<uint64_t>(r));
    sets[static_cast<size_t>(r)] =
        stratified_sample<T>(rays[static_cast<size_t>(r)], opt.n_coarse, false, rng);
  }
  PassSamples<T> coarse_samples = build_pass_samples(cfg, rays, sets);
  LayoutPlan base = plan_for(ReformEntry{}, cfg.arch.n_p, 0, opt.grouping,
                             hash_tags(opt.seed, kStreamPermute, stream_tag, 0));
  PassEval<T> coarse_eval =
      evaluate_pass(cfg, coarse_params, coarse_samples, base, bg, false, counter, monitor);

  std::vector<SampleSet<T>> fine_sets(rays.size());
  for (int r = 0; r < n_rays; ++r) {
    Rng rng = make_rng(opt.seed, kStreamHierarchical, stream_tag, static_cast<uint64_t>(r));
    const VecX<T> t = coarse_samples.t.row(r).transpose();
    const VecX<T> w = coarse_eval.comp[static_cast<size_t>(r)].weights;
    fine_sets[static_cast<size_t>(r)] =
        hierarchical_sample<T>(rays[static_cast<size_t>(r)], t, w, opt.n_fine, rng);
  }
  PassSamples<T> fine_samples = build_pass_samples(cfg, rays, fine_sets);
  LayoutPlan fine_plan = plan_for(ReformEntry{}, cfg.arch.n_p, 0, opt.grouping,
                                  hash_tags(opt.seed, kStreamPermute, stream_tag, 1));
  PassEval<T> fine_eval =
      evaluate_pass(cfg, fine_params, fine_samples, fine_plan, bg, false, counter, monitor);

  if (coarse_out)
    for (int r = 0; r < n_rays; ++r) (*coarse_out)[static_cast<size_t>(r)] = coarse_eval.pixel[static_cast<size_t>(r)];
  if (fine_out)
    for (int r = 0; r < n_rays; ++r) (*fine_out)[static_cast<size_t>(r)] = fine_eval.pixel[static_cast<size_t>(r)];
  if (detail) {
    detail->coarse = coarse_eval.pixel[0];
    detail->fine = fine_eval.pixel[0];
    detail->coarse_eval = std::move(coarse_eval);
    detail->fine_eval = std::move(fine_eval);
    detail->coarse_samples = std::move(coarse_samples);
    detail->fine_samples = std::move(fine_samples);
  }
}

// Single-ray convenience wrapper; returns pixel colors and the per-sample
// records both passes produced.
template <class T>
RayRenderResult<T> render_ray(const FieldConfig& cfg, const NetParams<T>& coarse_params,
                              const NetParams<T>& fine_params, const Ray& ray,
                              const RenderOptions& opt, uint64_t stream_tag = 0,
                              RunCounter* counter = nullptr, CompositeMonitor* monitor = nullptr) {
  RayRenderResult<T> out;
  std::vector<Ray> rays{ray};
  render_batch<T>(cfg, coarse_params, fine_params, rays, opt, stream_tag, nullptr, nullptr,
                  counter, monitor, &out);
  return out;
}

// Reference renderer: sample-wise SISO evaluation and scalar compositing,
// double precision throughout. Must agree with the grouped pipeline at
// n_p = 1; used as the equivalence oracle.
inline RayRenderResult<double> render_ray_siso_reference(const FieldConfig& cfg,
                                                         const NetParams<double>& coarse_params,
                                                         const NetParams<double>& fine_params,
                                                         const Ray& ray, const RenderOptions& opt,
                                                         uint64_t stream_tag = 0) {
  if (cfg.arch.n_p != 1) throw UsageError("siso reference: n_p must be 1");
  RayRenderResult<double> out;
  auto run_pass = [&](const NetParams<double>& params, const SampleSet<double>& s, Vec3d& pixel,
                      VecX<double>& weights) {
    const int n = static_cast<int>(s.t.size());
    MatX<double> colors(n, 3);
    VecX<double> alphas(n);
    for (int i = 0; i < n; ++i) {
      const FieldOutput<double> f =
          field_siso(cfg, params, s.coords.row(i).transpose(), ray.dir);
      colors.row(i) = f.color.transpose();
      alphas[i] = alpha_from_sigma(f.sigma, s.delta[i]);
    }
    double trans = 1.0;
    Vec3d c = Vec3d::Zero();
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
      const double w = trans * alphas[i];
      weights[i] = w;
      c += w * colors.row(i).transpose();
      trans *= 1.0 - alphas[i];
    }
    pixel = c + trans * opt.background;
  };
  Rng jitter_rng = make_rng(opt.seed, kStreamJitter, stream_tag, uint64_t(0));
  SampleSet<double> coarse = stratified_sample<double>(ray, opt.n_coarse, false, jitter_rng);
  VecX<double> coarse_weights;
  run_pass(coarse_params, coarse, out.coarse, coarse_weights);
  Rng h_rng = make_rng(opt.seed, kStreamHierarchical, stream_tag, uint64_t(0));
  SampleSet<double> fine =
      hierarchical_sample<double>(ray, coarse.t, coarse_weights, opt.n_fine, h_rng);
  VecX<double> fine_weights;
  run_pass(fine_params, fine, out.fine, fine_weights);
  return out;
}

}  // namespace mimonerf
