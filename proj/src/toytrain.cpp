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

#include "warpfuse/toytrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "warpfuse/error.hpp"

namespace warpfuse {

namespace {

using FeatureMatrix =
    Eigen::Matrix<double, kToyFeatureDim, Eigen::Dynamic>;

// The channel-interleaved Field layout is exactly a column-major
// (channels x pixels) matrix, so forward passes and weight gradients are
// single GEMMs.
Eigen::Map<const FeatureMatrix> as_matrix(const Field<double>& features) {
  return Eigen::Map<const FeatureMatrix>(
      features.data(), kToyFeatureDim,
      static_cast<Eigen::Index>(features.size() / kToyFeatureDim));
}

Eigen::Map<const Eigen::MatrixXd> as_matrix(const Field<double>& field,
                                            int rows) {
  return Eigen::Map<const Eigen::MatrixXd>(
      field.data(), rows, static_cast<Eigen::Index>(field.size() / rows));
}

ForwardResult forward_impl(const Eigen::MatrixXd& weights,
                           const Field<double>& features) {
  const int w = features.width(), h = features.height();
  const int c = static_cast<int>(weights.rows());
  ForwardResult out;
  out.logits = Field<double>(w, h, c);
  Eigen::Map<Eigen::MatrixXd> logits_map(
      out.logits.data(), c, static_cast<Eigen::Index>(w) * h);
  logits_map.noalias() = weights * as_matrix(features);

  out.probs = ProbMap(w, h, c);
  std::fill(out.probs.valid.raw().begin(), out.probs.valid.raw().end(), 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* z = out.logits.at(x, y);
      double zmax = z[0];
      for (int i = 1; i < c; ++i) zmax = std::max(zmax, z[i]);
      double sum = 0.0;
      float* p = out.probs.values.at(x, y);
      for (int i = 0; i < c; ++i) {
        const double e = std::exp(z[i] - zmax);
        p[i] = static_cast<float>(e);
        sum += e;
      }
      for (int i = 0; i < c; ++i)
        p[i] = static_cast<float>(p[i] / sum);
    }
  }
  return out;
}

ValidityMask mask_from_probmap_validity(const ProbMap& probs) {
  Grid<std::uint8_t> invalid(probs.width(), probs.height(), 0);
  for (std::size_t i = 0; i < invalid.size(); ++i)
    invalid.raw()[i] = probs.valid.raw()[i] ? 0 : 1;
  return mask_from_flags(invalid, Reason::kOutOfView);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("model file: truncated header");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

// Shared trainer. `target` may be null (supervised only). The two public
// entry points both run through here so a lambda = 0 run is bit-identical to
// the supervised trainer by construction.
TrainResult train_core(const SceneSequence& labeled,
                       const SceneSequence* target,
                       const TrainConfig& config) {
  config.validate();
  if (labeled.frames.empty())
    throw ContractError("train: labeled set is empty");
  for (const Frame& f : labeled.frames)
    if (!f.labels)
      throw ContractError("train: labeled frame without labels");

  const int num_classes = labeled.num_classes;
  const bool use_consistency =
      config.lambda != 0.0 && target != nullptr && !target->frames.empty();

  // Mirrored copies interleave with their originals in the round-robin.
  std::vector<Frame> train_frames;
  for (const Frame& f : labeled.frames) {
    train_frames.push_back(f);
    if (config.mirror_labeled) train_frames.push_back(mirror_frame(f));
  }
  const int n_labeled = static_cast<int>(train_frames.size());

  std::vector<const LabelMap*> label_ptrs;
  for (const Frame& f : train_frames) label_ptrs.push_back(&*f.labels);
  const ClassWeights class_weights =
      median_freq_weights(label_ptrs, num_classes);

  std::vector<Field<double>> labeled_features;
  labeled_features.reserve(train_frames.size());
  for (const Frame& f : train_frames) labeled_features.push_back(featurize(f));

  // Target-side state: features and neighbor sets are pure geometry and are
  // computed once; teacher probabilities and fused labels are tied to the
  // snapshot and live in caches flushed on every refresh.
  int n_target = 0;
  std::vector<Field<double>> target_features;
  std::vector<NeighborSet> neighbor_sets;
  std::vector<ProbMap> teacher_probs;
  std::vector<char> teacher_ready;
  std::vector<FusedResult> fused;
  std::vector<char> fused_ready;
  std::vector<ValidityMask> fused_masks;
  if (use_consistency) {
    n_target = static_cast<int>(target->frames.size());
    target_features.reserve(target->frames.size());
    for (const Frame& f : target->frames)
      target_features.push_back(featurize(f));
    neighbor_sets.resize(target->frames.size());
    for (int i = 0; i < n_target; ++i)
      neighbor_sets[i] = select_neighbors(
          *target, i, config.fusion.min_covis, config.fusion.max_neighbors,
          config.fusion.stride, config.fusion.occl_threshold);
    teacher_probs.resize(target->frames.size());
    teacher_ready.assign(target->frames.size(), 0);
    fused.resize(target->frames.size());
    fused_ready.assign(target->frames.size(), 0);
    fused_masks.resize(target->frames.size());
  }

  ToyModel model = make_model(num_classes);
  TrainResult result;
  result.log.reserve(static_cast<std::size_t>(config.iterations));

  for (int it = 0; it < config.iterations; ++it) {
    bool refreshed = false;
    if (it % config.snapshot_period == 0) {
      model.snapshot_weights = model.weights;
      refreshed = true;
      std::fill(teacher_ready.begin(), teacher_ready.end(), 0);
      std::fill(fused_ready.begin(), fused_ready.end(), 0);
    }

    const int li = it % n_labeled;
    StepInput step;
    step.labeled_features = &labeled_features[li];
    step.labeled_labels = &*train_frames[li].labels;
    step.class_weights = &class_weights;
    step.lambda = config.lambda;

    // The consistency term starts after the first refresh so the teacher is
    // a supervised-trained model, not the zero initialization whose uniform
    // argmax would collapse onto class 0.
    const int ti = use_consistency ? it % n_target : 0;
    if (use_consistency && it >= config.snapshot_period) {
      if (!fused_ready[ti]) {
        for (const auto& [nbr, covis] : neighbor_sets[ti].neighbors) {
          (void)covis;
          if (!teacher_ready[nbr]) {
            teacher_probs[nbr] =
                forward_impl(model.snapshot_weights, target_features[nbr])
                    .probs;
            teacher_ready[nbr] = 1;
          }
        }
        if (config.fusion.include_self && !teacher_ready[ti]) {
          teacher_probs[ti] =
              forward_impl(model.snapshot_weights, target_features[ti]).probs;
          teacher_ready[ti] = 1;
        }
        fused[ti] = fuse_frame(*target, teacher_probs, neighbor_sets[ti], ti,
                               config.fusion);
        fused_masks[ti] = mask_from_probmap_validity(fused[ti].probs);
        fused_ready[ti] = 1;
      }
      step.target_features = &target_features[ti];
      step.fused_labels = &fused[ti].labels;
      step.fused_mask = &fused_masks[ti];
    }

    LossReport report;
    const Eigen::MatrixXd grad = objective_gradient(model, step, &report);
    if (!std::isfinite(report.total) || !grad.allFinite())
      throw ContractError("train: diverged at iteration " +
                          std::to_string(it));
    model.weights -= config.learning_rate * grad;
    model.iteration = it + 1;

    IterationLog entry;
    entry.iteration = it;
    entry.l_s = report.l_s;
    entry.l_g = report.l_g;
    entry.total = report.total;
    entry.count_s = report.count_s;
    entry.count_g = report.count_g;
    entry.snapshot_refreshed = refreshed;
    result.log.push_back(entry);
  }

  result.model = std::move(model);
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (snapshot_period < 1)
    throw ContractError("train config: snapshot_period must be >= 1");
  if (!(learning_rate > 0.0))
    throw ContractError("train config: learning_rate must be positive");
  if (iterations < 0)
    throw ContractError("train config: iterations must be >= 0");
}

ToyModel make_model(int num_classes) {
  if (num_classes <= 0)
    throw ContractError("make_model: num_classes must be positive");
  ToyModel model;
  model.weights = Eigen::MatrixXd::Zero(num_classes, kToyFeatureDim);
  model.snapshot_weights = model.weights;
  return model;
}

Field<double> featurize(const Frame& frame) {
  const int w = frame.width(), h = frame.height();
  Field<double> out(w, h, kToyFeatureDim);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double* f = out.at(x, y);
      const float* rgb = frame.color.at(x, y);
      f[0] = rgb[0];
      f[1] = rgb[1];
      f[2] = rgb[2];
      f[3] = static_cast<double>(x) / w;
      f[4] = static_cast<double>(y) / h;
      f[5] = 1.0;
    }
  }
  return out;
}

Frame mirror_frame(const Frame& frame) {
  Frame out = frame;
  const int w = frame.width(), h = frame.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int mx = w - 1 - x;
      for (int c = 0; c < 3; ++c)
        out.color.at(x, y, c) = frame.color.at(mx, y, c);
      out.depth.at(x, y) = frame.depth.at(mx, y);
      if (frame.labels) out.labels->at(x, y) = frame.labels->at(mx, y);
    }
  }
  return out;
}

ForwardResult forward(const Eigen::MatrixXd& weights,
                      const Field<double>& features) {
  if (features.channels() != kToyFeatureDim ||
      weights.cols() != kToyFeatureDim)
    throw ContractError("forward: feature dimension mismatch");
  return forward_impl(weights, features);
}

ProbMap predict(const ToyModel& model, const Frame& frame) {
  return forward_impl(model.weights, featurize(frame)).probs;
}

ProbMap predict_snapshot(const ToyModel& model, const Frame& frame) {
  return forward_impl(model.snapshot_weights, featurize(frame)).probs;
}

Eigen::MatrixXd objective_gradient(const ToyModel& model, const StepInput& in,
                                   LossReport* report) {
  if (!in.labeled_features || !in.labeled_labels || !in.class_weights)
    throw ContractError("objective_gradient: supervised inputs missing");
  const int c = model.num_classes();

  ForwardResult fl = forward_impl(model.weights, *in.labeled_features);
  Field<double> grad_s;
  const ScalarLoss l_s = weighted_cross_entropy(fl.logits, *in.labeled_labels,
                                                *in.class_weights, &grad_s);
  Eigen::MatrixXd weight_grad =
      as_matrix(grad_s, c) * as_matrix(*in.labeled_features).transpose();

  ScalarLoss l_g;
  if (in.target_features && in.fused_labels && in.fused_mask) {
    ForwardResult ft = forward_impl(model.weights, *in.target_features);
    Field<double> grad_g;
    l_g = consistency_loss(ft.logits, *in.fused_labels, *in.fused_mask,
                           &grad_g);
    weight_grad.noalias() +=
        in.lambda *
        (as_matrix(grad_g, c) * as_matrix(*in.target_features).transpose());
  }

  if (report) *report = total_loss(l_s, l_g, in.lambda);
  return weight_grad;
}

TrainResult train_supervised(const SceneSequence& labeled,
                             const TrainConfig& config) {
  return train_core(labeled, nullptr, config);
}

TrainResult train_semisupervised(const SceneSequence& labeled,
                                 const SceneSequence& target,
                                 const TrainConfig& config) {
  for (const Frame& f : target.frames) {
    bool any_depth = false;
    for (const float d : f.depth.raw()) any_depth = any_depth || d > 0.0f;
    if (!any_depth)
      throw ContractError("train: target frame " + std::to_string(f.index) +
                          " has no depth");
  }
  return train_core(labeled, &target, config);
}

void write_model(const ToyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write model file: " + path.string());
  out.write("TOYM", 4);
  write_u32_le(out, static_cast<std::uint32_t>(model.num_classes()));
  write_u32_le(out, static_cast<std::uint32_t>(model.feature_dim()));
  for (int r = 0; r < model.num_classes(); ++r) {
    for (int col = 0; col < model.feature_dim(); ++col) {
      const float v = static_cast<float>(model.weights(r, col));
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
  if (!out) throw FormatError("short write: " + path.string());
}

ToyModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "TOYM", 4) != 0)
    throw FormatError("model file: bad magic in " + path.string());
  const std::uint32_t c = read_u32_le(in);
  const std::uint32_t f = read_u32_le(in);
  if (c == 0 || c > 254 || f != kToyFeatureDim)
    throw FormatError("model file: implausible dimensions in " +
                      path.string());
  ToyModel model = make_model(static_cast<int>(c));
  for (std::uint32_t r = 0; r < c; ++r) {
    for (std::uint32_t col = 0; col < f; ++col) {
      float v = 0.0f;
      in.read(reinterpret_cast<char*>(&v), 4);
      if (!in) throw FormatError("model file: truncated weights");
      model.weights(r, col) = v;
    }
  }
  model.snapshot_weights = model.weights;
  return model;
}

void write_training_log(const std::vector<IterationLog>& log,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write training log: " + path.string());
  out << "iteration,l_s,count_s,l_g,count_g,total,snapshot_refreshed\n";
  char buf[160];
  for (const IterationLog& e : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%d,%.17g,%d,%.17g,%d\n",
                  e.iteration, e.l_s, e.count_s, e.l_g, e.count_g, e.total,
                  e.snapshot_refreshed ? 1 : 0);
    out << buf;
  }
}

}  // namespace warpfuse
