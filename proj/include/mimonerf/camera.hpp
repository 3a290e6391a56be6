// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "mimonerf/common.hpp"

namespace mimonerf {

struct Intrinsics {
  int width = 0;
  int height = 0;
  double focal = 0.0;  // pixels

  double cx() const { return 0.5 * width; }
  double cy() const { return 0.5 * height; }
};

// World-from-camera rigid transform. Camera looks along -z, +y is up in the
// camera frame.
struct Pose {
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Vec3d trans = Vec3d::Zero();
};

struct Ray {
  Vec3d origin = Vec3d::Zero();
  Vec3d dir = Vec3d::UnitZ();  // unit length
  double t_near = 0.0;
  double t_far = 1.0;
};

inline Pose look_at(const Vec3d& position, const Vec3d& target, const Vec3d& up) {
  Pose pose;
  const Vec3d z = (position - target).normalized();
  const Vec3d x = up.cross(z).normalized();
  const Vec3d y = z.cross(x);
  pose.rot.col(0) = x;
  pose.rot.col(1) = y;
  pose.rot.col(2) = z;
  pose.trans = position;
  return pose;
}

// Ray through the center of pixel (px, py).
inline Ray generate_ray(const Intrinsics& intr, const Pose& pose, int px, int py, double t_near,
                        double t_far) {
  if (intr.width <= 0 || intr.height <= 0 || intr.focal <= 0.0)
    throw UsageError("generate_ray: invalid intrinsics");
  Vec3d dir_cam((px + 0.5 - intr.cx()) / intr.focal, -(py + 0.5 - intr.cy()) / intr.focal, -1.0);
  Ray ray;
  ray.origin = pose.trans;
  ray.dir = (pose.rot * dir_cam.normalized()).normalized();
  ray.t_near = t_near;
  ray.t_far = t_far;
  if (!(t_near < t_far)) throw UsageError("generate_ray: t_near must be < t_far");
  return ray;
}

}  // namespace mimonerf
