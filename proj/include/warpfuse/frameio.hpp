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
#include <optional>
#include <vector>

#include "warpfuse/geometry.hpp"
#include "warpfuse/image.hpp"

namespace warpfuse {

/// One registered RGB-D view of a scene.
///
/// Conventions (matching the on-disk layout):
///  - color in [0,1], depth in meters with 0 = missing,
///  - pose is camera-to-world,
///  - labels optional, kIgnoreLabel = excluded pixel.
struct Frame {
  int index = 0;
  Field<float> color;  // H x W x 3
  Grid<float> depth;   // H x W
  RigidTransform pose;
  Intrinsics intrinsics;
  std::optional<LabelMap> labels;

  int width() const { return intrinsics.width; }
  int height() const { return intrinsics.height; }

  /// Throws ContractError on any broken invariant, naming this frame.
  void validate(int num_classes) const;
};

/// Ordered, registered frame sequence sharing one camera.
struct SceneSequence {
  std::vector<Frame> frames;
  int num_classes = 37;
};

/// Per-pixel class probabilities with an explicit validity mask.
/// Valid pixels hold a non-negative vector summing to 1 within 1e-5;
/// invalid pixels are all-zero.
struct ProbMap {
  Field<float> values;        // H x W x C
  Grid<std::uint8_t> valid;   // 0/1

  ProbMap() = default;
  ProbMap(int width, int height, int channels)
      : values(width, height, channels), valid(width, height, 0) {}

  int width() const { return values.width(); }
  int height() const { return values.height(); }
  int channels() const { return values.channels(); }

  void validate() const;  // throws ContractError
};

/// Argmax class per valid pixel, ties broken toward the lowest class index;
/// invalid pixels map to kIgnoreLabel.
LabelMap argmax_labels(const ProbMap& probs);

/// One-hot probabilities from a label map; kIgnoreLabel pixels are invalid.
ProbMap probmap_from_labels(const LabelMap& labels, int num_classes);

// ---------------------------------------------------------------------------
// Scene directory layout:
//   scene/intrinsics.txt       fx fy cx cy, then width height
//   scene/color/%06d.png       8-bit RGB
//   scene/depth/%06d.png       16-bit grayscale, millimeters, 0 = missing
//   scene/pose/%06d.txt        4x4 row-major camera-to-world
//   scene/label/%06d.png       optional 8-bit grayscale class ids
// ---------------------------------------------------------------------------

/// Loads a scene directory. Frames are sorted by index; depth converted to
/// meters; poses validated. limit truncates to the first N frames.
/// Throws on missing files, dimension mismatches, or invalid rotations,
/// naming the offending frame.
SceneSequence load_scene(const std::filesystem::path& dir,
                         std::optional<int> limit = std::nullopt,
                         int num_classes = 37);

/// Writes a sequence in the directory layout above (label/ only when every
/// frame carries labels).
void write_scene(const SceneSequence& seq, const std::filesystem::path& dir);

/// Frame file name for an index, e.g. 000042.
std::string frame_name(int index);

// ---------------------------------------------------------------------------
// ProbMap file format ("PMAP"): magic "PMAP", little-endian u32 version = 1,
// u32 H, u32 W, u32 C, then H*W*C float32 little-endian in (row, column,
// channel) order. Invalid pixels are stored as all-zero channels.
// ---------------------------------------------------------------------------

void write_probmap(const ProbMap& probs, const std::filesystem::path& path);
ProbMap read_probmap(const std::filesystem::path& path);

/// 8-bit grayscale label PNG, lossless round trip.
void write_label_png(const LabelMap& labels, const std::filesystem::path& path);
LabelMap read_label_png(const std::filesystem::path& path);

/// 16-bit depth PNG helpers (meters <-> millimeters).
void write_depth_png(const Grid<float>& depth_m,
                     const std::filesystem::path& path);
Grid<float> read_depth_png(const std::filesystem::path& path);

}  // namespace warpfuse
