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

#include <utility>
#include <vector>

#include "warpfuse/frameio.hpp"
#include "warpfuse/masks.hpp"
#include "warpfuse/warp.hpp"

namespace warpfuse {

/// Neighbor selection and merge configuration for pseudo-label fusion.
struct FusionConfig {
  int stride = 10;
  double min_covis = 0.3;
  int max_neighbors = 4;
  bool include_self = true;      // merge the target's own prediction
  double occl_threshold = kDefaultOcclusionThreshold;
  int boundary_radius = -1;      // -1 = default_boundary_radius(width)

  int resolved_boundary_radius(int width) const;
};

/// Overlapping views of one target frame (sequence positions), each with its
/// covisibility ratio.
struct NeighborSet {
  int target_index = 0;
  std::vector<std::pair<int, double>> neighbors;
};

/// Fraction of target depth-valid pixels whose reprojection into the source
/// view lands in bounds with positive transformed depth, usable source depth
/// and no occlusion. 0 when the target has no depth.
double covisibility(const Frame& target, const Frame& source,
                    double occl_threshold = kDefaultOcclusionThreshold);

/// Scans positions target +- stride*k and keeps frames with covisibility >=
/// min_covis, up to max_neighbors, preferring the highest covisibility; ties
/// break toward the smaller index gap, then the lower index.
NeighborSet select_neighbors(const SceneSequence& seq, int target,
                             double min_covis, int max_neighbors, int stride,
                             double occl_threshold = kDefaultOcclusionThreshold);

/// One merge contribution: a probability map restricted by a validity mask.
/// frame_index fixes the accumulation order (ascending), which makes merge
/// both permutation-invariant and bit-reproducible.
struct MergeInput {
  int frame_index = 0;
  const ProbMap* probs = nullptr;
  const ValidityMask* mask = nullptr;
};

/// Summed probabilities and their argmax labels. Pixels valid in no input
/// are kIgnoreLabel and invalid; stored probabilities are the normalized sum.
struct FusedResult {
  ProbMap probs;
  LabelMap labels;
};

FusedResult merge(std::vector<MergeInput> inputs, int width, int height,
                  int channels);

/// Warps every selected neighbor's probabilities into the target view,
/// applies occlusion/boundary masking and merges (plus the target's own
/// prediction when configured). `probs` is indexed by sequence position.
FusedResult fuse_frame(const SceneSequence& seq,
                       const std::vector<ProbMap>& probs,
                       const NeighborSet& neighbors, int target,
                       const FusionConfig& config);

/// Per-frame fused pseudo-labels for a whole sequence.
struct PseudoLabelResult {
  std::vector<LabelMap> labels;
  std::vector<ProbMap> fused;
  std::vector<NeighborSet> neighbors;
};

PseudoLabelResult pseudo_label_sequence(const SceneSequence& seq,
                                        const std::vector<ProbMap>& probs,
                                        const FusionConfig& config);

}  // namespace warpfuse
