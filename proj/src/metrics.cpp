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

#include "warpfuse/metrics.hpp"

#include <cmath>

#include "warpfuse/error.hpp"

namespace warpfuse {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * (num_classes + 1), 0) {
  if (num_classes <= 0)
    throw ContractError("confusion matrix: num_classes must be positive");
}

std::uint64_t ConfusionMatrix::at(int gt, int pred) const {
  return counts_[static_cast<std::size_t>(gt) * (num_classes_ + 1) + pred];
}

std::uint64_t& ConfusionMatrix::at(int gt, int pred) {
  return counts_[static_cast<std::size_t>(gt) * (num_classes_ + 1) + pred];
}

void ConfusionMatrix::accumulate(const LabelMap& gt, const LabelMap& pred) {
  if (!gt.same_size(pred))
    throw ContractError("confusion matrix: gt/pred dimension mismatch");
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::uint8_t g = gt.raw()[i];
    if (g == kIgnoreLabel) continue;
    if (g >= num_classes_)
      throw ContractError("confusion matrix: gt label out of range");
    const std::uint8_t p = pred.raw()[i];
    if (p == kIgnoreLabel) {
      ++at(g, num_classes_);  // abstained prediction: reserved error column
      continue;
    }
    if (p >= num_classes_)
      throw ContractError("confusion matrix: predicted label out of range");
    ++at(g, p);
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_)
    throw ContractError("confusion matrix: class count mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i)
    counts_[i] += other.counts_[i];
  return *this;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (const std::uint64_t v : counts_) sum += v;
  return sum;
}

SegmentationMetrics segmentation_metrics(const ConfusionMatrix& cm) {
  const int c = cm.num_classes();
  const std::uint64_t total = cm.total();
  if (c == 0 || total == 0)
    throw ContractError("segmentation_metrics: empty confusion matrix");

  std::vector<std::uint64_t> row(static_cast<std::size_t>(c), 0);
  std::vector<std::uint64_t> col(static_cast<std::size_t>(c), 0);
  std::uint64_t diag = 0;
  for (int g = 0; g < c; ++g) {
    for (int p = 0; p <= c; ++p) row[g] += cm.at(g, p);
    for (int p = 0; p < c; ++p) col[p] += cm.at(g, p);
    diag += cm.at(g, g);
  }

  SegmentationMetrics m;
  m.pix_acc = static_cast<double>(diag) / static_cast<double>(total);
  int present = 0;
  double acc_sum = 0.0, iou_sum = 0.0, fw_sum = 0.0;
  for (int g = 0; g < c; ++g) {
    if (row[g] == 0) continue;  // absent from gt: excluded from the averages
    ++present;
    const double tp = static_cast<double>(cm.at(g, g));
    acc_sum += tp / static_cast<double>(row[g]);
    const double denom = static_cast<double>(row[g] + col[g]) - tp;
    const double iou = denom > 0.0 ? tp / denom : 0.0;
    iou_sum += iou;
    fw_sum += (static_cast<double>(row[g]) / static_cast<double>(total)) * iou;
  }
  m.mean_acc = acc_sum / present;
  m.miou = iou_sum / present;
  m.fwiou = fw_sum;
  return m;
}

double depth_rms(const Grid<float>& pred, const Grid<float>& gt) {
  if (!pred.same_size(gt)) throw ContractError("depth_rms: dimension mismatch");
  std::uint64_t count = 0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!(gt.raw()[i] > 0.0f)) continue;
    const double diff = static_cast<double>(pred.raw()[i]) - gt.raw()[i];
    sum_sq += diff * diff;
    ++count;
  }
  if (count == 0) throw ContractError("depth_rms: no valid ground truth");
  return std::sqrt(sum_sq / static_cast<double>(count));
}

}  // namespace warpfuse
