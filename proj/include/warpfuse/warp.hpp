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

#include <span>

#include "warpfuse/frameio.hpp"
#include "warpfuse/masks.hpp"

namespace warpfuse {

inline constexpr double kDefaultOcclusionThreshold = 0.05;  // meters

/// Result of inverse-warping a source probability map into target geometry.
///
/// For every target pixel with depth d > 0 the target point is lifted,
/// transformed into the source camera and projected there; the source map is
/// bilinearly sampled at the continuous coordinate. The mask explains every
/// excluded pixel (missing depth, out of view, occluded).
struct WarpResult {
  ProbMap warped;
  Grid<float> sampled_source_depth;  // bilinear source depth, 0 if unusable
  Grid<float> transformed_depth;     // z in the source camera, 0 if no depth
  Field<double> coords;              // 2ch continuous source coords, -1 = none
  ValidityMask mask;
};

/// Bilinear sample of a C-channel field at a continuous coordinate, with the
/// exact analytic derivative of each output channel w.r.t. the coordinate.
/// Returns false (out of view) when the coordinate leaves
/// [0, W-1] x [0, H-1]; callers record that in a mask rather than throwing.
///
/// value/ddx/ddy must each hold field.channels() entries; ddx/ddy may be
/// empty spans when derivatives are not needed. Coordinates within 1e-9 of
/// an integer are snapped, so samples at pixel centers are exact copies.
bool bilinear_sample(const Field<float>& field, double x, double y,
                     std::span<double> value, std::span<double> ddx = {},
                     std::span<double> ddy = {});

/// Warps source probabilities into the target view using target depth.
/// Sampled probability vectors are renormalized to sum 1; single-pixel
/// footprints (integer coordinates) are copied bit-exactly. Pixels whose
/// source footprint touches missing depth are marked NO_DEPTH; a source
/// depth differing from the transformed depth by more than occl_threshold
/// marks OCCLUDED.
WarpResult inverse_warp(const Frame& source, const ProbMap& source_probs,
                        const Frame& target,
                        double occl_threshold = kDefaultOcclusionThreshold);

/// Resamples the source color image along a previously computed warp
/// (bilinear); pixels invalid in the warp are zero.
Field<float> sample_color(const Field<float>& source_color,
                          const WarpResult& warp);

/// Nearest-neighbor label lookup along a previously computed warp; pixels
/// invalid in the warp map to kIgnoreLabel.
LabelMap sample_labels_nearest(const LabelMap& source_labels,
                               const WarpResult& warp);

/// Forward z-buffer splat, the independent verification oracle for
/// inverse_warp. Every source pixel with depth is lifted, transformed into
/// the target camera and splatted onto the nearest target pixel, keeping the
/// smallest depth. Deliberately self-contained: it composes and applies the
/// 4x4 pose algebra directly instead of reusing the projection helpers that
/// the inverse path is built on.
struct SplatResult {
  LabelMap labels;               // kIgnoreLabel where uncovered
  Grid<std::uint8_t> covered;    // 0/1
  Grid<float> depth;             // z-buffer contents, 0 where uncovered
};

SplatResult forward_splat_oracle(const Frame& source,
                                 const LabelMap& source_labels,
                                 const Frame& target);

}  // namespace warpfuse
