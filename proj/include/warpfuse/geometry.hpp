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

#pragma once

#include <Eigen/Dense>

namespace warpfuse {

/// Pinhole camera intrinsics. Pixel coordinates are continuous with integer
/// coordinates at pixel centers, so project/unproject are exact inverses.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ContractError unless fx,fy > 0 and the principal point lies
  /// inside the image.
  void validate() const;
};

/// Rigid body transform (rotation + translation). Poses are stored
/// camera-to-world. Rotations are validated, never re-orthonormalized:
/// silently repairing a bad pose would hide registration errors upstream.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return RigidTransform{}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  /// Composition: (a * b).apply(p) == a.apply(b.apply(p)).
  RigidTransform operator*(const RigidTransform& rhs) const {
    RigidTransform out;
    out.rotation = rotation * rhs.rotation;
    out.translation = rotation * rhs.translation + translation;
    return out;
  }

  Eigen::Matrix4d matrix() const;
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  /// Orthonormal within tol elementwise and det(R) = 1 within tol.
  bool is_valid_rotation(double tol = 1e-6) const;
};

/// Pixel + depth, the result of projecting a camera-frame point.
struct Projection {
  Eigen::Vector2d pixel;
  double depth = 0.0;
};

/// Lifts pixel p at depth d (meters) into the camera frame:
/// ((px-cx)*d/fx, (py-cy)*d/fy, d). Throws ContractError when d <= 0.
Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                          const Intrinsics& k);

/// Projects a camera-frame point to a continuous pixel coordinate and its
/// depth (the z component). Throws ContractError when z <= 0 (behind camera).
Projection project(const Eigen::Vector3d& point, const Intrinsics& k);

/// Relative transform mapping target-camera coordinates into source-camera
/// coordinates: pose_source^-1 * pose_target (poses are camera-to-world).
RigidTransform relative_transform(const RigidTransform& pose_target,
                                  const RigidTransform& pose_source);

}  // namespace warpfuse
