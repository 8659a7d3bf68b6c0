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

#include <doctest.h>

#include <cmath>
#include <fstream>

#include "warpfuse/error.hpp"
#include "warpfuse/metrics.hpp"
#include "warpfuse/synth.hpp"
#include "warpfuse/toytrain.hpp"
#include "test_support.hpp"

using namespace warpfuse;

namespace {

// Two-class frames separable by color: left half dark red (class 0), right
// half bright blue (class 1).
SceneSequence separable_sequence(int n_frames) {
  const Intrinsics k = test::simple_intrinsics(48, 36, 60.0);
  SceneSequence seq;
  seq.num_classes = 2;
  for (int i = 0; i < n_frames; ++i) {
    Frame frame = test::wall_frame(k, 2.0f);
    frame.index = i;
    frame.labels = LabelMap(k.width, k.height);
    for (int y = 0; y < k.height; ++y) {
      for (int x = 0; x < k.width; ++x) {
        const bool left = x < k.width / 2;
        frame.color.at(x, y, 0) = left ? 0.8f : 0.1f;
        frame.color.at(x, y, 1) = 0.2f;
        frame.color.at(x, y, 2) = left ? 0.1f : 0.9f;
        frame.labels->at(x, y) = left ? 0 : 1;
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

double accuracy(const ToyModel& model, const SceneSequence& seq) {
  ConfusionMatrix cm(seq.num_classes);
  for (const Frame& frame : seq.frames)
    cm.accumulate(*frame.labels, argmax_labels(predict(model, frame)));
  return segmentation_metrics(cm).pix_acc;
}

double eval_miou(const ToyModel& model, const SceneSequence& seq) {
  ConfusionMatrix cm(seq.num_classes);
  for (const Frame& frame : seq.frames)
    cm.accumulate(*frame.labels, argmax_labels(predict(model, frame)));
  return segmentation_metrics(cm).miou;
}

}  // namespace

TEST_SUITE_BEGIN("toytrain");

TEST_CASE("featurize hand values") {
  const Intrinsics k = test::simple_intrinsics(32, 24, 40.0);
  Frame frame = test::wall_frame(k, 1.0f);
  for (int c = 0; c < 3; ++c) {
    frame.color.at(0, 0, c) = 0.0f;
    frame.color.at(31, 23, c) = 1.0f;
  }
  const Field<double> features = featurize(frame);
  const double* origin = features.at(0, 0);
  for (int i = 0; i < 5; ++i) CHECK(origin[i] == 0.0);
  CHECK(origin[5] == 1.0);

  const double* corner = features.at(31, 23);
  CHECK(corner[0] == 1.0);
  CHECK(corner[1] == 1.0);
  CHECK(corner[2] == 1.0);
  CHECK(corner[3] == doctest::Approx(31.0 / 32.0));
  CHECK(corner[4] == doctest::Approx(23.0 / 24.0));
  CHECK(corner[5] == 1.0);

  for (const double v : features.raw()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("forward pass") {
  const Intrinsics k = test::simple_intrinsics(8, 6, 10.0);
  const Frame frame = test::wall_frame(k, 1.0f);
  const Field<double> features = featurize(frame);

  SUBCASE("zero weights give uniform probabilities") {
    const ToyModel model = make_model(5);
    const ForwardResult fwd = forward(model.weights, features);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 8; ++x)
        for (int c = 0; c < 5; ++c)
          CHECK(fwd.probs.values.at(x, y, c) == doctest::Approx(0.2));
  }

  SUBCASE("softmax is shift invariant") {
    ToyModel model = make_model(3);
    model.weights.setRandom();
    const ForwardResult base = forward(model.weights, features);
    Eigen::MatrixXd shifted = model.weights;
    shifted.row(0).array() += 3.0;
    shifted.row(1).array() += 3.0;
    shifted.row(2).array() += 3.0;
    const ForwardResult moved = forward(shifted, features);
    for (std::size_t i = 0; i < base.probs.values.size(); ++i)
      CHECK(moved.probs.values.raw()[i] ==
            doctest::Approx(base.probs.values.raw()[i]).epsilon(1e-6));
  }

  SUBCASE("hand softmax: logits (1, 0)") {
    // Row 0 picks out the red channel; a pixel with r = 1 gives logits (1, 0).
    ToyModel model = make_model(2);
    model.weights(0, 0) = 1.0;
    Frame red = frame;
    red.color.at(2, 2, 0) = 1.0f;
    const ForwardResult fwd = forward(model.weights, featurize(red));
    CHECK(fwd.logits.at(2, 2, 0) == doctest::Approx(1.0));
    CHECK(fwd.logits.at(2, 2, 1) == doctest::Approx(0.0));
    CHECK(fwd.probs.values.at(2, 2, 0) == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(fwd.probs.values.at(2, 2, 1) == doctest::Approx(0.2689).epsilon(1e-4));
  }
}

TEST_CASE("supervised training") {
  const SceneSequence labeled = separable_sequence(2);

  SUBCASE("zero iterations return the initial model") {
    TrainConfig config;
    config.iterations = 0;
    const TrainResult result = train_supervised(labeled, config);
    CHECK(result.model.weights.isZero());
    CHECK(result.log.empty());
  }

  SUBCASE("separable labels reach 0.99 accuracy within 500 iterations") {
    TrainConfig config;
    config.iterations = 500;
    const TrainResult result = train_supervised(labeled, config);
    CHECK(accuracy(result.model, labeled) >= 0.99);
  }

  SUBCASE("same seed twice is bit-identical") {
    TrainConfig config;
    config.iterations = 50;
    config.seed = 12;
    const TrainResult a = train_supervised(labeled, config);
    const TrainResult b = train_supervised(labeled, config);
    CHECK(a.model.weights == b.model.weights);
  }

  SUBCASE("supervised loss is non-increasing over 100-iteration windows") {
    TrainConfig config;
    config.iterations = 400;
    const TrainResult result = train_supervised(labeled, config);
    double previous = 1e300;
    for (int window = 0; window < 4; ++window) {
      double mean = 0.0;
      for (int i = 0; i < 100; ++i) mean += result.log[window * 100 + i].l_s;
      mean /= 100.0;
      CHECK(mean <= previous + 1e-9);
      previous = mean;
    }
  }

  SUBCASE("unlabeled frames are rejected") {
    SceneSequence unlabeled = labeled;
    unlabeled.frames[0].labels.reset();
    TrainConfig config;
    config.iterations = 1;
    CHECK_THROWS_AS(train_supervised(unlabeled, config), ContractError);
  }
}

TEST_CASE("mirroring augmentation") {
  const SceneSequence labeled = separable_sequence(1);
  const Frame mirrored = mirror_frame(labeled.frames[0]);
  const int w = mirrored.width();
  for (int y = 0; y < mirrored.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      CHECK(mirrored.color.at(x, y, 0) ==
            labeled.frames[0].color.at(w - 1 - x, y, 0));
      CHECK(mirrored.labels->at(x, y) ==
            labeled.frames[0].labels->at(w - 1 - x, y));
    }
  }
}

TEST_CASE("semi-supervised loop") {
  const DomainShiftBenchmark bench = make_domain_shift_benchmark(3);

  SUBCASE("lambda 0 is bit-identical to the supervised trainer") {
    TrainConfig config;
    config.iterations = 120;
    config.lambda = 0.0;
    const TrainResult semi =
        train_semisupervised(bench.source, bench.target, config);
    const TrainResult supervised = train_supervised(bench.source, config);
    CHECK(semi.model.weights == supervised.model.weights);
    CHECK(semi.model.snapshot_weights == supervised.model.snapshot_weights);
  }

  SUBCASE("snapshot period 1 stays finite (teacher = current student)") {
    // Tiny setup: trim the target to keep per-iteration fusion cheap.
    SceneSequence target = bench.target;
    target.frames.resize(6);
    TrainConfig config;
    config.iterations = 8;
    config.snapshot_period = 1;
    config.fusion.stride = 1;
    config.fusion.max_neighbors = 2;
    const TrainResult result =
        train_semisupervised(bench.source, target, config);
    CHECK(result.model.weights.allFinite());
    for (const IterationLog& entry : result.log) {
      CHECK(std::isfinite(entry.total));
      CHECK(entry.snapshot_refreshed);
    }
  }

  SUBCASE("teacher-constant: snapshot perturbation does not change the update") {
    const SceneSequence labeled = separable_sequence(1);
    TrainConfig config;
    config.iterations = 30;
    const TrainResult warm = train_supervised(labeled, config);

    ToyModel model = warm.model;
    const Field<double> labeled_features = featurize(labeled.frames[0]);
    const Field<double> target_features = featurize(labeled.frames[0]);
    LabelMap fused(48, 36, 0);
    const ValidityMask mask = ValidityMask::all_valid(48, 36);
    const ClassWeights weights = ClassWeights::uniform(2);

    StepInput step;
    step.labeled_features = &labeled_features;
    step.labeled_labels = &*labeled.frames[0].labels;
    step.class_weights = &weights;
    step.lambda = 1.0;
    step.target_features = &target_features;
    step.fused_labels = &fused;
    step.fused_mask = &mask;

    const Eigen::MatrixXd base = objective_gradient(model, step);
    model.snapshot_weights.array() += 17.3;  // wild perturbation
    const Eigen::MatrixXd perturbed = objective_gradient(model, step);
    CHECK(base == perturbed);  // exactly zero sensitivity
  }
}

TEST_CASE("domain gap exists for the supervised baseline") {
  const DomainShiftBenchmark bench = make_domain_shift_benchmark(1);
  TrainConfig config;
  config.iterations = 300;
  const TrainResult result = train_supervised(bench.source, config);
  const double source_miou = eval_miou(result.model, bench.source);
  const double shifted_miou = eval_miou(result.model, bench.eval);
  CHECK(shifted_miou < source_miou);
}

TEST_CASE("model file round trip") {
  test::TempDir tmp("model");
  ToyModel model = make_model(4);
  model.weights.setRandom();
  const auto path = tmp.path() / "model.toym";
  write_model(model, path);
  const ToyModel loaded = read_model(path);
  CHECK(loaded.num_classes() == 4);
  CHECK(loaded.feature_dim() == kToyFeatureDim);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < kToyFeatureDim; ++c)
      CHECK(loaded.weights(r, c) ==
            static_cast<double>(static_cast<float>(model.weights(r, c))));

  // Second write: byte-identical file.
  const auto path2 = tmp.path() / "model2.toym";
  write_model(loaded, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)),
                            std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(b)),
                            std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);

  SUBCASE("bad magic raises") {
    const auto bad = tmp.path() / "bad.toym";
    std::ofstream out(bad, std::ios::binary);
    out << "NOPE1234567890";
    out.close();
    CHECK_THROWS_AS(read_model(bad), FormatError);
  }
}

TEST_SUITE_END();
