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

#include <cstdint>
#include <vector>

#include "warpfuse/image.hpp"

namespace warpfuse {

/// C x C confusion counts (row = ground truth, column = prediction), plus a
/// reserved extra column for predictions equal to kIgnoreLabel: a pseudo-label
/// that abstains on a pixel with valid ground truth counts as an error, never
/// as an excluded pixel.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes);

  /// counts[gt[p]][pred[p]] += 1 for every non-ignored gt pixel.
  /// Out-of-range labels raise ContractError.
  void accumulate(const LabelMap& gt, const LabelMap& pred);

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  /// pred may be num_classes() to address the reserved abstain column.
  std::uint64_t at(int gt, int pred) const;
  std::uint64_t& at(int gt, int pred);

  std::uint64_t total() const;
  int num_classes() const { return num_classes_; }

 private:
  int num_classes_ = 0;
  std::vector<std::uint64_t> counts_;  // C rows x (C + 1) columns
};

/// The four standard segmentation scores. Classes absent from the ground
/// truth are excluded from the mean_acc and mIoU averages.
struct SegmentationMetrics {
  double pix_acc = 0.0;
  double mean_acc = 0.0;
  double miou = 0.0;
  double fwiou = 0.0;
};

/// Throws ContractError on an empty matrix.
SegmentationMetrics segmentation_metrics(const ConfusionMatrix& cm);

/// Root mean square depth error over pixels with gt > 0.
/// Throws ContractError when no pixel is valid.
double depth_rms(const Grid<float>& pred, const Grid<float>& gt);

}  // namespace warpfuse
