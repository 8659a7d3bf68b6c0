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

#include <functional>
#include <vector>

#include "warpfuse/image.hpp"
#include "warpfuse/masks.hpp"

namespace warpfuse {

/// Per-class loss weights from median frequency balancing. Classes absent
/// from the labeled set carry weight 0 (excluded from the median).
struct ClassWeights {
  std::vector<double> weights;

  static ClassWeights uniform(int num_classes) {
    return ClassWeights{std::vector<double>(num_classes, 1.0)};
  }
};

/// freq_c = (pixels of class c) / (labeled pixels in images where class c
/// appears); weight_c = median(present-class freqs) / freq_c.
ClassWeights median_freq_weights(const std::vector<const LabelMap*>& label_maps,
                                 int num_classes);

/// A scalar loss with the count of pixels it averaged over.
struct ScalarLoss {
  double value = 0.0;
  int valid_count = 0;
};

/// Mean over non-ignored pixels of w[y] * -log softmax(z)[y]. grad (optional)
/// receives d loss / d logits, same shape as logits.
ScalarLoss weighted_cross_entropy(const Field<double>& logits,
                                  const LabelMap& labels,
                                  const ClassWeights& weights,
                                  Field<double>* grad = nullptr);

/// Unweighted cross-entropy of the student against fused teacher labels over
/// mask-valid pixels. The teacher is a constant: no gradient flows to it.
ScalarLoss consistency_loss(const Field<double>& student_logits,
                            const LabelMap& teacher_labels,
                            const ValidityMask& mask,
                            Field<double>* grad = nullptr);

/// Mean absolute depth difference over gt > 0; subgradient sign(pred - gt).
ScalarLoss depth_l1(const Grid<double>& pred, const Grid<double>& gt,
                    Grid<double>* grad = nullptr);

/// Photometric + structure-similarity loss over masked pixels:
///   alpha * (1 - SSIM)/2 + (1 - alpha) * |I - I'|,
/// alpha = 0.85, SSIM on 3x3 mean-pooled windows (clamped at borders) with
/// stabilizers C1 = 1e-4, C2 = 9e-4. grad_warped (optional) receives the
/// gradient w.r.t. the warped values.
ScalarLoss photometric_ssim_loss(const Field<double>& target,
                                 const Field<double>& warped,
                                 const Grid<std::uint8_t>& mask,
                                 Field<double>* grad_warped = nullptr);

inline constexpr double kSsimAlpha = 0.85;
inline constexpr double kSsimC1 = 1e-4;
inline constexpr double kSsimC2 = 9e-4;

/// Combined objective report: total = l_s + lambda * l_g, and when the depth
/// terms are enabled, depth_total = l_ds + lambda_d * l_dg.
struct LossReport {
  double total = 0.0;
  double l_s = 0.0;
  double l_g = 0.0;
  double l_ds = 0.0;
  double l_dg = 0.0;
  double depth_total = 0.0;
  double lambda = 0.0;
  double lambda_d = 0.0;
  bool depth_enabled = false;
  int count_s = 0;
  int count_g = 0;
  int count_ds = 0;
  int count_dg = 0;
};

LossReport total_loss(const ScalarLoss& l_s, const ScalarLoss& l_g,
                      double lambda);
LossReport total_loss(const ScalarLoss& l_s, const ScalarLoss& l_g,
                      double lambda, const ScalarLoss& l_ds,
                      const ScalarLoss& l_dg, double lambda_d);

/// Compares an analytic gradient against central finite differences of f at
/// `point`, probing up to max_probes randomly chosen coordinates.
struct GradCheckReport {
  double max_rel_error = 0.0;
  int probes = 0;
};

GradCheckReport gradcheck(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& point, const std::vector<double>& analytic,
    double step, int max_probes, std::uint64_t seed);

}  // namespace warpfuse
