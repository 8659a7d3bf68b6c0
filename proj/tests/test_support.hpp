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

#include <filesystem>
#include <random>
#include <string>

#include "warpfuse/frameio.hpp"
#include "warpfuse/synth.hpp"

namespace warpfuse::test {

/// Self-deleting temporary directory under the system temp path.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("warpfuse_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Intrinsics simple_intrinsics(int width = 100, int height = 100,
                                    double f = 100.0) {
  Intrinsics k;
  k.fx = f;
  k.fy = f;
  k.cx = (width - 1) / 2.0;
  k.cy = (height - 1) / 2.0;
  k.width = width;
  k.height = height;
  return k;
}

/// Frame looking straight down the world z axis at a fronto-parallel wall
/// (constant depth), with a horizontal color gradient.
inline Frame wall_frame(const Intrinsics& k, float depth_m,
                        const Eigen::Vector3d& camera_position =
                            Eigen::Vector3d::Zero()) {
  Frame frame;
  frame.intrinsics = k;
  frame.pose.translation = camera_position;
  frame.color = Field<float>(k.width, k.height, 3);
  frame.depth = Grid<float>(k.width, k.height, depth_m);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      frame.color.at(x, y, 0) = static_cast<float>(x) / k.width;
      frame.color.at(x, y, 1) = static_cast<float>(y) / k.height;
      frame.color.at(x, y, 2) = 0.25f;
    }
  }
  return frame;
}

/// Small default scene spec for warp/fusion tests (no noise).
inline SceneSpec test_scene_spec(std::uint64_t seed = 1, int frames = 8) {
  SceneSpec spec;
  spec.room_min = {0.0, 0.0, 0.0};
  spec.room_max = {6.0, 5.0, 3.0};
  spec.num_classes = 4;
  spec.albedo = {{0.55, 0.42, 0.28},
                 {0.88, 0.88, 0.84},
                 {0.35, 0.48, 0.70},
                 {0.75, 0.22, 0.20}};
  SceneBox box;
  box.min = {2.2, 1.8, 0.0};
  box.max = {3.2, 2.8, 1.2};
  box.class_id = 3;
  spec.boxes = {box};
  spec.intrinsics = simple_intrinsics(96, 72, 90.0);
  spec.trajectory.center = {3.0, 2.5, 0.8};
  spec.trajectory.radius = 1.6;
  spec.trajectory.height = 0.9;
  spec.trajectory.frame_count = frames;
  spec.seed = seed;
  return spec;
}

}  // namespace warpfuse::test
