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

#include <fstream>

#include "warpfuse/error.hpp"
#include "warpfuse/frameio.hpp"
#include "warpfuse/png_io.hpp"
#include "warpfuse/rng.hpp"
#include "warpfuse/synth.hpp"
#include "test_support.hpp"

using namespace warpfuse;

namespace {

ProbMap random_probmap(int w, int h, int c, std::uint64_t seed,
                       double invalid_fraction = 0.1) {
  Rng rng(seed);
  ProbMap probs(w, h, c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (rng.uniform() < invalid_fraction) continue;
      float* v = probs.values.at(x, y);
      float sum = 0.0f;
      for (int i = 0; i < c; ++i) {
        v[i] = static_cast<float>(rng.uniform(0.01, 1.0));
        sum += v[i];
      }
      for (int i = 0; i < c; ++i) v[i] /= sum;
      // Force an exact unit sum in float so the invariant holds bit-wise.
      float partial = 0.0f;
      for (int i = 0; i + 1 < c; ++i) partial += v[i];
      v[c - 1] = 1.0f - partial;
      probs.valid.at(x, y) = 1;
    }
  }
  return probs;
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE_BEGIN("frameio");

TEST_CASE("probmap round trip is bit identical") {
  test::TempDir tmp("pmap");
  const ProbMap original = random_probmap(17, 13, 5, 99);
  const auto path = tmp.path() / "map.pmap";
  write_probmap(original, path);
  const ProbMap loaded = read_probmap(path);
  CHECK(loaded.values == original.values);
  CHECK(loaded.valid == original.valid);

  // Write the loaded map again: files must match byte for byte.
  const auto path2 = tmp.path() / "map2.pmap";
  write_probmap(loaded, path2);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("probmap file size is header plus payload") {
  test::TempDir tmp("pmap_size");
  ProbMap probs(2, 2, 3);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) {
      probs.values.at(x, y, 0) = 1.0f;
      probs.valid.at(x, y) = 1;
    }
  const auto path = tmp.path() / "small.pmap";
  write_probmap(probs, path);
  CHECK(std::filesystem::file_size(path) == 20 + 2 * 2 * 3 * 4);
}

TEST_CASE("probmap bad magic and truncation") {
  test::TempDir tmp("pmap_bad");
  const auto path = tmp.path() / "bad.pmap";
  {
    std::ofstream out(path, std::ios::binary);
    out << "XXXX";
    const std::uint32_t rest[4] = {1, 2, 2, 3};
    out.write(reinterpret_cast<const char*>(rest), sizeof(rest));
  }
  CHECK_THROWS_AS(read_probmap(path), FormatError);

  const ProbMap probs = random_probmap(4, 4, 2, 5);
  const auto good = tmp.path() / "good.pmap";
  write_probmap(probs, good);
  const auto truncated = tmp.path() / "truncated.pmap";
  {
    const std::vector<char> bytes = slurp(good);
    std::ofstream out(truncated, std::ios::binary);
    out.write(bytes.data(),
              static_cast<std::streamsize>(bytes.size() - 10));
  }
  CHECK_THROWS_AS(read_probmap(truncated), FormatError);
}

TEST_CASE("label png round trip") {
  test::TempDir tmp("label");
  LabelMap labels(9, 7, 0);
  Rng rng(3);
  for (auto& l : labels.raw())
    l = rng.uniform() < 0.2 ? kIgnoreLabel
                            : static_cast<std::uint8_t>(rng.uniform_int(37));
  const auto path = tmp.path() / "labels.png";
  write_label_png(labels, path);
  CHECK(read_label_png(path) == labels);
}

TEST_CASE("depth png millimeter conversion") {
  test::TempDir tmp("depth");
  Grid<std::uint16_t> mm(3, 2, 0);
  mm.at(1, 0) = 2500;  // 2.5 m
  mm.at(2, 1) = 1;     // 1 mm
  const auto path = tmp.path() / "depth.png";
  write_png_gray16(mm, path);
  const Grid<float> meters = read_depth_png(path);
  CHECK(meters.at(1, 0) == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(meters.at(0, 0) == 0.0f);
  CHECK(meters.at(2, 1) == doctest::Approx(0.001).epsilon(1e-6));
}

TEST_CASE("scene write/load round trip and determinism") {
  test::TempDir tmp("scene");
  SceneSpec spec = test::test_scene_spec(42, 4);
  spec.noise.color_sigma = 0.02;
  spec.noise.depth_dropout = 0.05;
  const SceneSequence rendered = render(spec);
  write_scene(rendered, tmp.path() / "scene");

  const SceneSequence a = load_scene(tmp.path() / "scene", std::nullopt,
                                     spec.num_classes);
  const SceneSequence b = load_scene(tmp.path() / "scene", std::nullopt,
                                     spec.num_classes);
  REQUIRE(a.frames.size() == rendered.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    CHECK(a.frames[i].color == rendered.frames[i].color);
    CHECK(a.frames[i].depth == rendered.frames[i].depth);
    CHECK(*a.frames[i].labels == *rendered.frames[i].labels);
    CHECK(a.frames[i].color == b.frames[i].color);
    CHECK((a.frames[i].pose.matrix() - rendered.frames[i].pose.matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  SUBCASE("limit truncates") {
    const SceneSequence limited =
        load_scene(tmp.path() / "scene", 2, spec.num_classes);
    CHECK(limited.frames.size() == 2);
    CHECK(limited.frames[0].index == 0);
    CHECK(limited.frames[1].index == 1);
  }
}

TEST_CASE("load error names the offending frame") {
  test::TempDir tmp("badpose");
  const SceneSpec spec = test::test_scene_spec(1, 2);
  write_scene(render(spec), tmp.path() / "scene");
  {
    // det(R) = -1: mirror the x axis.
    std::ofstream out(tmp.path() / "scene" / "pose" / "000001.txt");
    out << "-1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";
  }
  try {
    load_scene(tmp.path() / "scene");
    FAIL("expected a load error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("frame 1") != std::string::npos);
  }
}

TEST_CASE("missing file raises") {
  test::TempDir tmp("missing");
  const SceneSpec spec = test::test_scene_spec(1, 2);
  write_scene(render(spec), tmp.path() / "scene");
  std::filesystem::remove(tmp.path() / "scene" / "depth" / "000001.png");
  CHECK_THROWS_AS(load_scene(tmp.path() / "scene"), FormatError);
}

TEST_CASE("argmax labels and one-hot probmaps") {
  ProbMap probs(2, 1, 3);
  probs.values.at(0, 0, 0) = 0.2f;
  probs.values.at(0, 0, 1) = 0.5f;
  probs.values.at(0, 0, 2) = 0.3f;
  probs.valid.at(0, 0) = 1;
  // (1, 0) stays invalid.
  const LabelMap labels = argmax_labels(probs);
  CHECK(labels.at(0, 0) == 1);
  CHECK(labels.at(1, 0) == kIgnoreLabel);

  const ProbMap onehot = probmap_from_labels(labels, 3);
  CHECK(onehot.values.at(0, 0, 1) == 1.0f);
  CHECK(onehot.valid.at(1, 0) == 0);
  CHECK_NOTHROW(onehot.validate());
}

TEST_CASE("probmap invariant validation") {
  ProbMap probs(1, 1, 2);
  probs.values.at(0, 0, 0) = 0.7f;
  probs.values.at(0, 0, 1) = 0.4f;  // sums to 1.1
  probs.valid.at(0, 0) = 1;
  CHECK_THROWS_AS(probs.validate(), ContractError);

  probs.values.at(0, 0, 1) = 0.3f;
  CHECK_NOTHROW(probs.validate());

  probs.valid.at(0, 0) = 0;  // invalid pixels must be all-zero
  CHECK_THROWS_AS(probs.validate(), ContractError);
}

TEST_SUITE_END();
