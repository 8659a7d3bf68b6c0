// Copyright 2026 The warpfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "warpfuse/geometry.hpp"

#include <cmath>

#include "warpfuse/error.hpp"

namespace warpfuse {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw ContractError("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0)
    throw ContractError("intrinsics: image size must be positive");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw ContractError("intrinsics: principal point outside image");
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  RigidTransform t;
  t.rotation = m.topLeftCorner<3, 3>();
  t.translation = m.topRightCorner<3, 1>();
  return t;
}

bool RigidTransform::is_valid_rotation(double tol) const {
  const Eigen::Matrix3d should_be_identity = rotation.transpose() * rotation;
  const Eigen::Matrix3d diff =
      should_be_identity - Eigen::Matrix3d::Identity();
  if (diff.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                          const Intrinsics& k) {
  if (!(depth > 0.0)) throw ContractError("unproject: depth must be positive");
  return {(pixel.x() - k.cx) * depth / k.fx, (pixel.y() - k.cy) * depth / k.fy,
          depth};
}

Projection project(const Eigen::Vector3d& point, const Intrinsics& k) {
  if (!(point.z() > 0.0))
    throw ContractError("project: point behind camera (z <= 0)");
  Projection out;
  out.pixel = {k.fx * point.x() / point.z() + k.cx,
               k.fy * point.y() / point.z() + k.cy};
  out.depth = point.z();
  return out;
}

RigidTransform relative_transform(const RigidTransform& pose_target,
                                  const RigidTransform& pose_source) {
  return pose_source.inverse() * pose_target;
}

}  // namespace warpfuse
