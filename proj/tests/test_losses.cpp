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

#include "warpfuse/error.hpp"
#include "warpfuse/losses.hpp"
#include "warpfuse/rng.hpp"

using namespace warpfuse;

namespace {

Field<double> random_logits(int w, int h, int c, std::uint64_t seed) {
  Rng rng(seed);
  Field<double> logits(w, h, c);
  for (auto& v : logits.raw()) v = rng.uniform(-2.0, 2.0);
  return logits;
}

LabelMap random_labels(int w, int h, int c, std::uint64_t seed,
                       double ignore_fraction = 0.15) {
  Rng rng(seed);
  LabelMap labels(w, h);
  for (auto& l : labels.raw())
    l = rng.uniform() < ignore_fraction
            ? kIgnoreLabel
            : static_cast<std::uint8_t>(rng.uniform_int(c));
  return labels;
}

}  // namespace

TEST_SUITE_BEGIN("losses");

TEST_CASE("median frequency weights") {
  SUBCASE("0.75 / 0.25 split") {
    LabelMap labels(4, 1);
    labels.at(0, 0) = 0;
    labels.at(1, 0) = 0;
    labels.at(2, 0) = 0;
    labels.at(3, 0) = 1;
    const ClassWeights w = median_freq_weights({&labels}, 2);
    CHECK(w.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(w.weights[1] == doctest::Approx(2.0).epsilon(1e-9));
  }

  SUBCASE("equal frequencies give unit weights") {
    LabelMap labels(6, 1);
    for (int x = 0; x < 6; ++x)
      labels.at(x, 0) = static_cast<std::uint8_t>(x / 2);
    const ClassWeights w = median_freq_weights({&labels}, 3);
    for (const double v : w.weights) CHECK(v == doctest::Approx(1.0));
  }

  SUBCASE("absent class gets weight zero and is excluded from the median") {
    LabelMap labels(4, 1);
    labels.at(0, 0) = 0;
    labels.at(1, 0) = 0;
    labels.at(2, 0) = 0;
    labels.at(3, 0) = 1;
    const ClassWeights w = median_freq_weights({&labels}, 3);
    CHECK(w.weights[2] == 0.0);
    CHECK(w.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(w.weights[1] == doctest::Approx(2.0).epsilon(1e-9));
  }

  SUBCASE("duplicating every image leaves weights unchanged") {
    const LabelMap a = random_labels(9, 7, 3, 5);
    const LabelMap b = random_labels(9, 7, 3, 6);
    const ClassWeights once = median_freq_weights({&a, &b}, 3);
    const ClassWeights twice = median_freq_weights({&a, &b, &a, &b}, 3);
    for (int c = 0; c < 3; ++c)
      CHECK(once.weights[c] == doctest::Approx(twice.weights[c]).epsilon(1e-12));
  }

  SUBCASE("no labeled pixels raises") {
    LabelMap labels(3, 3, kIgnoreLabel);
    CHECK_THROWS_AS(median_freq_weights({&labels}, 2), ContractError);
  }
}

TEST_CASE("weighted cross-entropy hand values") {
  Field<double> logits(1, 1, 2, 0.0);
  LabelMap labels(1, 1, 0);
  ClassWeights w{{2.0, 2.0}};

  Field<double> grad;
  const ScalarLoss loss = weighted_cross_entropy(logits, labels, w, &grad);
  CHECK(loss.value == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));
  CHECK(loss.value == doctest::Approx(1.3863).epsilon(1e-4));
  CHECK(grad.at(0, 0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(grad.at(0, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("large correct margin drives the loss to zero") {
    logits.at(0, 0, 0) = 50.0;
    const ScalarLoss confident =
        weighted_cross_entropy(logits, labels, w, nullptr);
    CHECK(confident.value < 1e-9);
  }

  SUBCASE("all-ignored labels give zero loss and gradient") {
    labels.at(0, 0) = kIgnoreLabel;
    const ScalarLoss empty = weighted_cross_entropy(logits, labels, w, &grad);
    CHECK(empty.value == 0.0);
    CHECK(empty.valid_count == 0);
    for (const double g : grad.raw()) CHECK(g == 0.0);
  }
}

TEST_CASE("consistency loss hand values") {
  Field<double> logits(1, 1, 2, 0.0);
  LabelMap teacher(1, 1, 0);
  ValidityMask mask = ValidityMask::all_valid(1, 1);

  Field<double> grad;
  const ScalarLoss loss = consistency_loss(logits, teacher, mask, &grad);
  CHECK(loss.value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(grad.at(0, 0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(grad.at(0, 0, 1) == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("agreement with a large margin is near zero") {
    logits.at(0, 0, 0) = 40.0;
    CHECK(consistency_loss(logits, teacher, mask, nullptr).value < 1e-9);
  }

  SUBCASE("empty mask gives zero") {
    mask.set(0, 0, Reason::kOccluded);
    const ScalarLoss empty = consistency_loss(logits, teacher, mask, &grad);
    CHECK(empty.value == 0.0);
    for (const double g : grad.raw()) CHECK(g == 0.0);
  }

  SUBCASE("ignored teacher label gives zero") {
    teacher.at(0, 0) = kIgnoreLabel;
    const ScalarLoss empty = consistency_loss(logits, teacher, mask, nullptr);
    CHECK(empty.value == 0.0);
    CHECK(empty.valid_count == 0);
  }
}

TEST_CASE("weighted CE with unit weights equals unweighted CE") {
  const Field<double> logits = random_logits(8, 6, 4, 44);
  const LabelMap labels = random_labels(8, 6, 4, 45);
  const ScalarLoss weighted = weighted_cross_entropy(
      logits, labels, ClassWeights::uniform(4), nullptr);
  const ScalarLoss unweighted = consistency_loss(
      logits, labels, ValidityMask::all_valid(8, 6), nullptr);
  CHECK(weighted.value == unweighted.value);
  CHECK(weighted.valid_count == unweighted.valid_count);
}

TEST_CASE("cross-entropy gradient sums to zero over classes") {
  const Field<double> logits = random_logits(6, 5, 5, 7);
  const LabelMap labels = random_labels(6, 5, 5, 8);
  ClassWeights w{{0.5, 1.0, 2.0, 1.5, 0.25}};
  Field<double> grad;
  weighted_cross_entropy(logits, labels, w, &grad);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 6; ++x) {
      double sum = 0.0;
      for (int c = 0; c < 5; ++c) sum += grad.at(x, y, c);
      CHECK(std::abs(sum) < 1e-12);
    }
  }
}

TEST_CASE("depth L1 hand values") {
  Grid<double> gt(2, 1);
  gt.at(0, 0) = 1.0;
  gt.at(1, 0) = 4.0;
  Grid<double> pred(2, 1);
  pred.at(0, 0) = 1.0;
  pred.at(1, 0) = 2.0;

  Grid<double> grad;
  const ScalarLoss loss = depth_l1(pred, gt, &grad);
  CHECK(loss.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(grad.at(1, 0) == doctest::Approx(-0.5).epsilon(1e-12));

  CHECK(depth_l1(gt, gt, nullptr).value == 0.0);

  const Grid<double> zeros(2, 1, 0.0);
  const ScalarLoss empty = depth_l1(pred, zeros, nullptr);
  CHECK(empty.value == 0.0);
  CHECK(empty.valid_count == 0);
}

TEST_CASE("photometric SSIM loss hand values") {
  SUBCASE("identical images give zero") {
    Rng rng(2);
    Field<double> img(8, 8, 3);
    for (auto& v : img.raw()) v = rng.uniform(0.0, 1.0);
    const Grid<std::uint8_t> mask(8, 8, 1);
    const ScalarLoss loss = photometric_ssim_loss(img, img, mask, nullptr);
    CHECK(loss.value == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("constant 0 vs constant 1") {
    const Field<double> black(6, 6, 3, 0.0);
    const Field<double> white(6, 6, 3, 1.0);
    const Grid<std::uint8_t> mask(6, 6, 1);
    const ScalarLoss loss = photometric_ssim_loss(black, white, mask, nullptr);
    // SSIM collapses to C1/(1 + C1); the L1 term contributes 1 per pixel.
    const double expected =
        kSsimAlpha * 0.5 * (1.0 - kSsimC1 / (1.0 + kSsimC1)) +
        (1.0 - kSsimAlpha);
    CHECK(expected == doctest::Approx(0.5749575).epsilon(1e-6));
    CHECK(loss.value == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("empty mask gives zero") {
    const Field<double> a(4, 4, 3, 0.2);
    const Field<double> b(4, 4, 3, 0.8);
    const Grid<std::uint8_t> mask(4, 4, 0);
    CHECK(photometric_ssim_loss(a, b, mask, nullptr).value == 0.0);
  }
}

TEST_CASE("total loss composition") {
  const ScalarLoss l_s{1.0, 10};
  const ScalarLoss l_g{0.5, 20};
  const LossReport base = total_loss(l_s, l_g, 1.0);
  CHECK(base.total == doctest::Approx(1.5));
  CHECK(base.count_s == 10);
  CHECK(base.count_g == 20);

  const LossReport supervised_only = total_loss(l_s, l_g, 0.0);
  CHECK(supervised_only.total == l_s.value);

  const ScalarLoss l_ds{0.2, 5};
  const ScalarLoss l_dg{0.3, 5};
  const LossReport with_depth = total_loss(l_s, l_g, 1.0, l_ds, l_dg, 0.1);
  CHECK(with_depth.depth_total == doctest::Approx(0.23).epsilon(1e-12));
  CHECK(with_depth.total == doctest::Approx(1.5));
}

TEST_CASE("gradient checks against finite differences") {
  const double step = 1e-4;

  SUBCASE("weighted cross-entropy") {
    const Field<double> logits = random_logits(8, 6, 4, 100);
    const LabelMap labels = random_labels(8, 6, 4, 101);
    ClassWeights w{{0.5, 1.5, 2.0, 0.8}};
    Field<double> grad;
    weighted_cross_entropy(logits, labels, w, &grad);
    const auto f = [&](const std::vector<double>& v) {
      Field<double> probe = logits;
      probe.raw() = v;
      return weighted_cross_entropy(probe, labels, w, nullptr).value;
    };
    const GradCheckReport rep =
        gradcheck(f, logits.raw(), grad.raw(), step, 120, 9);
    CHECK(rep.max_rel_error <= 1e-4);
  }

  SUBCASE("consistency loss") {
    const Field<double> logits = random_logits(8, 6, 4, 200);
    const LabelMap labels = random_labels(8, 6, 4, 201);
    ValidityMask mask = ValidityMask::all_valid(8, 6);
    Rng rng(202);
    for (auto& r : mask.reason.raw())
      if (rng.uniform() < 0.3) r = static_cast<std::uint8_t>(Reason::kOccluded);
    Field<double> grad;
    consistency_loss(logits, labels, mask, &grad);
    const auto f = [&](const std::vector<double>& v) {
      Field<double> probe = logits;
      probe.raw() = v;
      return consistency_loss(probe, labels, mask, nullptr).value;
    };
    const GradCheckReport rep =
        gradcheck(f, logits.raw(), grad.raw(), step, 120, 10);
    CHECK(rep.max_rel_error <= 1e-4);
  }

  SUBCASE("depth L1 off the kink") {
    Rng rng(300);
    Grid<double> gt(10, 8);
    Grid<double> pred(10, 8);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 10; ++x) {
        gt.at(x, y) = rng.uniform(1.0, 3.0);
        const double offset = rng.uniform(0.1, 0.5);
        pred.at(x, y) = gt.at(x, y) + (rng.uniform() < 0.5 ? offset : -offset);
      }
    }
    Grid<double> grad;
    depth_l1(pred, gt, &grad);
    const auto f = [&](const std::vector<double>& v) {
      Grid<double> probe = pred;
      probe.raw() = v;
      return depth_l1(probe, gt, nullptr).value;
    };
    const GradCheckReport rep =
        gradcheck(f, pred.raw(), grad.raw(), step, 80, 11);
    CHECK(rep.max_rel_error <= 1e-4);
  }

  SUBCASE("photometric SSIM w.r.t. warped values") {
    Rng rng(400);
    Field<double> target(10, 8, 3);
    Field<double> warped(10, 8, 3);
    for (std::size_t i = 0; i < target.size(); ++i) {
      target.raw()[i] = rng.uniform(0.15, 0.55);
      const double offset = rng.uniform(0.1, 0.35);
      warped.raw()[i] = target.raw()[i] + offset;  // stays off the L1 kink
    }
    Grid<std::uint8_t> mask(10, 8, 0);
    for (auto& m : mask.raw()) m = rng.uniform() < 0.7 ? 1 : 0;
    Field<double> grad;
    photometric_ssim_loss(target, warped, mask, &grad);
    const auto f = [&](const std::vector<double>& v) {
      Field<double> probe = warped;
      probe.raw() = v;
      return photometric_ssim_loss(target, probe, mask, nullptr).value;
    };
    const GradCheckReport rep =
        gradcheck(f, warped.raw(), grad.raw(), step, 150, 12);
    CHECK(rep.max_rel_error <= 1e-3);
  }
}

TEST_SUITE_END();
