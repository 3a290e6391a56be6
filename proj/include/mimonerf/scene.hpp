// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0
//
// Procedural ground-truth scenes: analytic soft-edged density/albedo fields
// plus a dense-quadrature reference renderer.

#pragma once

#include <string>
#include <vector>

#include "mimonerf/camera.hpp"

namespace mimonerf {

struct Primitive {
  enum class Kind { kSphere, kBox };
  Kind kind = Kind::kSphere;
  Vec3d center = Vec3d::Zero();
  Vec3d size = Vec3d::Ones();  // sphere: size.x() is the radius; box: half extents
  Vec3d albedo = Vec3d::Ones();
  double sigma0 = 10.0;   // density amplitude
  double falloff = 0.08;  // soft-edge half width
};

struct ProceduralScene {
  std::string name;
  std::vector<Primitive> primitives;
  Vec3d background = Vec3d::Ones();
};

struct FieldSample {
  Vec3d albedo;
  double sigma;
};

double signed_distance(const Primitive& prim, const Vec3d& x);

// sigma = sum over primitives of sigma0 * smoothstep across the signed
// distance band; albedo = density-weighted blend, background where sigma = 0.
FieldSample scene_field(const ProceduralScene& scene, const Vec3d& x);

// Dense midpoint quadrature of the volume rendering integral; the ground
// truth every learned or discrete renderer is compared against.
Vec3d oracle_render(const ProceduralScene& scene, const Ray& ray, int n_quad);

ProceduralScene make_scene(const std::string& name);
std::vector<std::string> scene_names();

}  // namespace mimonerf
