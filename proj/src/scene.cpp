// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include "mimonerf/scene.hpp"

#include <algorithm>

namespace mimonerf {

namespace {

double smoothstep01(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

double signed_distance(const Primitive& prim, const Vec3d& x) {
  const Vec3d local = x - prim.center;
  if (prim.kind == Primitive::Kind::kSphere) {
    return local.norm() - prim.size.x();
  }
  const Vec3d q = local.cwiseAbs() - prim.size;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

FieldSample scene_field(const ProceduralScene& scene, const Vec3d& x) {
  if (!x.allFinite()) throw NumericError("scene_field: non-finite position");
  double sigma = 0.0;
  Vec3d blended = Vec3d::Zero();
  for (const Primitive& prim : scene.primitives) {
    const double sd = signed_distance(prim, x);
    if (sd >= prim.falloff) continue;
    const double s = prim.sigma0 * smoothstep01((prim.falloff - sd) / (2.0 * prim.falloff));
    sigma += s;
    blended += s * prim.albedo;
  }
  FieldSample out;
  out.sigma = sigma;
  out.albedo = sigma > 0.0 ? Vec3d(blended / sigma) : scene.background;
  return out;
}

Vec3d oracle_render(const ProceduralScene& scene, const Ray& ray, int n_quad) {
  if (n_quad < 1) throw UsageError("oracle_render: n_quad must be >= 1");
  const double delta = (ray.t_far - ray.t_near) / n_quad;
  Vec3d color = Vec3d::Zero();
  double trans = 1.0;
  for (int i = 0; i < n_quad; ++i) {
    const double t = ray.t_near + (i + 0.5) * delta;
    const FieldSample f = scene_field(scene, ray.origin + t * ray.dir);
    if (f.sigma <= 0.0) continue;
    const double alpha = 1.0 - std::exp(-f.sigma * delta);
    color += trans * alpha * f.albedo;
    trans *= 1.0 - alpha;
    if (trans < 1e-9) break;  // residual contribution below quadrature noise
  }
  return color + trans * scene.background;
}

ProceduralScene make_scene(const std::string& name) {
  ProceduralScene scene;
  scene.name = name;
  scene.background = Vec3d::Ones();
  auto sphere = [](Vec3d c, double r, Vec3d albedo, double sigma0, double falloff) {
    Primitive p;
    p.kind = Primitive::Kind::kSphere;
    p.center = c;
    p.size = Vec3d(r, r, r);
    p.albedo = albedo;
    p.sigma0 = sigma0;
    p.falloff = falloff;
    return p;
  };
  auto box = [](Vec3d c, Vec3d half, Vec3d albedo, double sigma0, double falloff) {
    Primitive p;
    p.kind = Primitive::Kind::kBox;
    p.center = c;
    p.size = half;
    p.albedo = albedo;
    p.sigma0 = sigma0;
    p.falloff = falloff;
    return p;
  };
  if (name == "spheres3") {
    scene.primitives = {
        sphere({-0.45, -0.12, 0.00}, 0.32, {0.85, 0.25, 0.20}, 14.0, 0.09),
        sphere({0.40, -0.05, 0.25}, 0.27, {0.20, 0.70, 0.30}, 12.0, 0.09),
        sphere({0.02, 0.42, -0.30}, 0.24, {0.25, 0.35, 0.85}, 16.0, 0.08),
    };
    return scene;
  }
  if (name == "box") {
    scene.primitives = {box({0.0, 0.0, 0.0}, {0.35, 0.22, 0.30}, {0.80, 0.60, 0.20}, 12.0, 0.08)};
    return scene;
  }
  if (name == "mix") {
    scene.primitives = {
        sphere({-0.35, 0.18, 0.10}, 0.28, {0.30, 0.45, 0.85}, 14.0, 0.09),
        box({0.35, -0.20, -0.10}, {0.26, 0.18, 0.24}, {0.85, 0.55, 0.20}, 12.0, 0.08),
    };
    return scene;
  }
  std::string known;
  for (const auto& s : scene_names()) known += (known.empty() ? "" : ", ") + s;
  throw UsageError("unknown scene '" + name + "' (available: " + known + ")");
}

std::vector<std::string> scene_names() { return {"spheres3", "box", "mix"}; }

}  // namespace mimonerf
