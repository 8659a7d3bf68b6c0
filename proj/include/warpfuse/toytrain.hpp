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
#include <vector>

#include "warpfuse/frameio.hpp"
#include "warpfuse/fusion.hpp"
#include "warpfuse/losses.hpp"

namespace warpfuse {

/// Feature dimension of the per-pixel linear segmenter:
/// (r, g, b, x/W, y/H, 1).
inline constexpr int kToyFeatureDim = 6;

/// Per-pixel linear softmax segmenter plus the frozen teacher copy of its
/// parameters. The snapshot is refreshed exactly at iteration multiples of
/// the snapshot period.
struct ToyModel {
  Eigen::MatrixXd weights;           // C x F
  Eigen::MatrixXd snapshot_weights;  // C x F, teacher parameters
  std::int64_t iteration = 0;

  int num_classes() const { return static_cast<int>(weights.rows()); }
  int feature_dim() const { return static_cast<int>(weights.cols()); }
};

/// Zero-initialized model (uniform initial probabilities, deterministic).
ToyModel make_model(int num_classes);

struct TrainConfig {
  double lambda = 1.0;
  int snapshot_period = 100;
  double learning_rate = 0.5;
  int iterations = 0;
  std::uint64_t seed = 0;
  FusionConfig fusion;
  bool mirror_labeled = true;  // horizontal mirroring of the labeled set

  void validate() const;
};

Field<double> featurize(const Frame& frame);

/// Horizontally mirrored copy (color, depth, labels flipped).
Frame mirror_frame(const Frame& frame);

struct ForwardResult {
  Field<double> logits;
  ProbMap probs;
};

ForwardResult forward(const Eigen::MatrixXd& weights,
                      const Field<double>& features);
/// Student prediction for a frame (softmax probabilities, all pixels valid).
ProbMap predict(const ToyModel& model, const Frame& frame);
/// Teacher prediction using the snapshot parameters.
ProbMap predict_snapshot(const ToyModel& model, const Frame& frame);

/// Inputs of one combined-objective gradient evaluation. The fused teacher
/// labels are data here, not a differentiable path: the gradient can only
/// depend on the snapshot through them, so perturbing snapshot_weights at
/// fixed fused labels must leave the update unchanged.
struct StepInput {
  const Field<double>* labeled_features = nullptr;
  const LabelMap* labeled_labels = nullptr;
  const ClassWeights* class_weights = nullptr;
  double lambda = 0.0;
  const Field<double>* target_features = nullptr;  // consistency term inputs;
  const LabelMap* fused_labels = nullptr;          // all three null when the
  const ValidityMask* fused_mask = nullptr;        // term is inactive
};

/// d(L_S + lambda * L_G)/dW at the model's current weights.
Eigen::MatrixXd objective_gradient(const ToyModel& model, const StepInput& in,
                                   LossReport* report = nullptr);

struct IterationLog {
  int iteration = 0;
  double l_s = 0.0;
  double l_g = 0.0;
  double total = 0.0;
  int count_s = 0;
  int count_g = 0;
  bool snapshot_refreshed = false;
};

struct TrainResult {
  ToyModel model;
  std::vector<IterationLog> log;
};

/// Gradient descent on the supervised term only. Deterministic given the
/// config; bit-identical to the semi-supervised trainer at lambda = 0.
TrainResult train_supervised(const SceneSequence& labeled,
                             const TrainConfig& config);

/// Full semi-supervised loop: supervised term on the labeled set plus the
/// geometric consistency term on the unlabeled target sequence, with the
/// teacher snapshot refreshed every snapshot_period iterations. The
/// consistency term activates after the first refresh, once the teacher
/// reflects a supervised-trained model rather than the zero initialization.
TrainResult train_semisupervised(const SceneSequence& labeled,
                                 const SceneSequence& target,
                                 const TrainConfig& config);

// Model file: magic "TOYM", little-endian u32 num_classes, u32 feature_dim,
// then C*F float32 weights row-major (class-major).
void write_model(const ToyModel& model, const std::filesystem::path& path);
ToyModel read_model(const std::filesystem::path& path);

void write_training_log(const std::vector<IterationLog>& log,
                        const std::filesystem::path& path);

}  // namespace warpfuse
