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

#include <initializer_list>
#include <span>

#include "warpfuse/frameio.hpp"
#include "warpfuse/image.hpp"

namespace warpfuse {

/// Why a pixel is excluded from consistency terms. The numeric order is the
/// composition precedence: when several reasons apply, the smallest nonzero
/// code wins.
enum class Reason : std::uint8_t {
  kValid = 0,
  kNoDepth = 1,
  kOutOfView = 2,
  kOccluded = 3,
  kBoundary = 4,
  kInconsistent = 5,
};

/// Per-pixel validity with a reason code per invalid pixel.
/// Invariant: valid(x,y) <=> reason == kValid.
struct ValidityMask {
  Grid<std::uint8_t> reason;

  ValidityMask() = default;
  explicit ValidityMask(Grid<std::uint8_t> reasons) : reason(std::move(reasons)) {}

  static ValidityMask all_valid(int width, int height) {
    return ValidityMask(Grid<std::uint8_t>(width, height, 0));
  }

  int width() const { return reason.width(); }
  int height() const { return reason.height(); }

  bool valid(int x, int y) const {
    return reason.at(x, y) == static_cast<std::uint8_t>(Reason::kValid);
  }
  Reason reason_at(int x, int y) const {
    return static_cast<Reason>(reason.at(x, y));
  }
  void set(int x, int y, Reason r) {
    reason.at(x, y) = static_cast<std::uint8_t>(r);
  }

  int valid_count() const {
    int n = 0;
    for (const std::uint8_t r : reason.raw()) n += (r == 0);
    return n;
  }
};

/// Flags pixels within Chebyshev distance <= radius of a label change
/// (1 = near a boundary, to be ignored). radius 0 flags nothing.
Grid<std::uint8_t> boundary_mask(const LabelMap& labels, int radius);

/// Default boundary radius: 8 px at 640 wide, scaled with image width.
int default_boundary_radius(int width);

/// 1 where both maps are valid, their argmax labels agree, and the pixel is
/// not boundary-flagged. Gates the photometric term.
Grid<std::uint8_t> depth_consistency_mask(const ProbMap& student,
                                          const ProbMap& teacher_warped,
                                          const Grid<std::uint8_t>& boundary);

/// Logical AND of validity; invalid reasons combine by precedence
/// (NO_DEPTH > OUT_OF_VIEW > OCCLUDED > BOUNDARY > INCONSISTENT).
ValidityMask compose(std::span<const ValidityMask* const> masks);
ValidityMask compose(const ValidityMask& a, const ValidityMask& b);

/// ValidityMask from a flag grid: pixels with flag != 0 take `reason`,
/// the rest are valid.
ValidityMask mask_from_flags(const Grid<std::uint8_t>& flags, Reason reason);

}  // namespace warpfuse
