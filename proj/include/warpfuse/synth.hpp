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

#include <array>
#include <filesystem>
#include <vector>

#include "warpfuse/frameio.hpp"

namespace warpfuse {

/// Axis-aligned box with a semantic class.
struct SceneBox {
  Eigen::Vector3d min;
  Eigen::Vector3d max;
  int class_id = 0;
};

/// Inward-looking circular camera path. Cameras sit on a circle of the given
/// radius around `center`, lifted by `height`, all looking at `center`.
/// Frames are spaced evenly over [angle_start, angle_end) (exclusive end, so
/// a full 2*pi orbit has no duplicate pose).
struct OrbitTrajectory {
  Eigen::Vector3d center = {0, 0, 0};
  double radius = 1.0;
  double height = 0.5;
  double angle_start = 0.0;
  double angle_end = 6.283185307179586;
  int frame_count = 1;
};

struct NoiseSpec {
  double color_sigma = 0.0;     // gaussian sigma added per channel
  double depth_dropout = 0.0;   // probability a depth pixel is zeroed
};

struct TextureSpec {
  enum class Type { kFlat, kChecker };
  Type type = Type::kFlat;
  double period = 0.5;     // checker cell size in meters
  double contrast = 0.6;   // albedo factor of the dark cells
};

/// A closed rectangular room (z-up) with labeled axis-aligned boxes inside,
/// rendered by exact analytic ray casting. Depth stores the camera-frame z
/// component of the hit, matching the warp equation's depth convention.
struct SceneSpec {
  Eigen::Vector3d room_min = {0, 0, 0};
  Eigen::Vector3d room_max = {6, 5, 3};
  int floor_class = 0;
  int ceiling_class = 1;
  int wall_class = 2;
  std::vector<SceneBox> boxes;
  std::vector<std::array<double, 3>> albedo;  // indexed by class id
  TextureSpec texture;
  OrbitTrajectory trajectory;
  Intrinsics intrinsics;
  NoiseSpec noise;
  std::uint64_t seed = 1;
  int num_classes = 4;

  void validate() const;  // throws ContractError on a degenerate spec
};

/// Camera-to-world pose for orbit position i (look-at with z-up world).
RigidTransform orbit_pose(const OrbitTrajectory& traj, int i);

/// Renders the full sequence with exact depth, labels, poses, and seeded
/// noise. Color and depth are quantized exactly as the on-disk formats store
/// them, so a rendered sequence is bit-identical to write + load.
SceneSequence render(const SceneSpec& spec);

/// Reads a SceneSpec from a JSON file (see docs/README for the schema).
SceneSpec load_scene_spec(const std::filesystem::path& path);

/// Desk-scale analogue of training on one dataset and adapting to a scene
/// from another: a labeled source set (variant A albedos), an unlabeled
/// target orbit (shifted variant B albedos) and a disjoint labeled eval
/// orbit of variant B.
struct DomainShiftBenchmark {
  SceneSequence source;             // labeled, variant A
  SceneSequence target;             // variant B, labels stripped
  std::vector<LabelMap> target_gt;  // held back target labels (evaluation only)
  SceneSequence eval;               // labeled, variant B, disjoint poses
};

DomainShiftBenchmark make_domain_shift_benchmark(std::uint64_t seed);

/// Writes source/, target/ (no labels), target_gt/ (flat label PNGs) and
/// eval/ under out_dir.
void write_domain_shift_benchmark(const DomainShiftBenchmark& bench,
                                  const std::filesystem::path& out_dir);

}  // namespace warpfuse
