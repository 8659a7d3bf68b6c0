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

#include "warpfuse/frameio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "warpfuse/error.hpp"
#include "warpfuse/png_io.hpp"

namespace warpfuse {

namespace {

constexpr char kProbMapMagic[4] = {'P', 'M', 'A', 'P'};
constexpr std::uint32_t kProbMapVersion = 1;

std::string frame_tag(int index) {
  return "frame " + std::to_string(index);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("probmap: truncated header");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

static_assert(sizeof(float) == 4, "float32 storage assumed");

RigidTransform read_pose_file(const std::filesystem::path& path, int index) {
  std::ifstream in(path);
  if (!in)
    throw FormatError("missing pose file for " + frame_tag(index) + ": " +
                      path.string());
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (!(in >> m(r, c)))
        throw FormatError("pose file for " + frame_tag(index) +
                          " does not hold 16 numbers");
  const Eigen::RowVector4d bottom = m.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9)
    throw ContractError("pose of " + frame_tag(index) +
                        " has a non-rigid bottom row");
  RigidTransform pose = RigidTransform::from_matrix(m);
  if (!pose.is_valid_rotation())
    throw ContractError("pose of " + frame_tag(index) +
                        " has an invalid rotation (not orthonormal with "
                        "det +1 within 1e-6)");
  return pose;
}

void write_pose_file(const RigidTransform& pose,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write pose file: " + path.string());
  const Eigen::Matrix4d m = pose.matrix();
  char buf[64];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << buf << (c == 3 ? "\n" : " ");
    }
  }
}

Intrinsics read_intrinsics_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("missing intrinsics file: " + path.string());
  Intrinsics k;
  if (!(in >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height))
    throw FormatError("intrinsics file must hold fx fy cx cy width height: " +
                      path.string());
  k.validate();
  return k;
}

void write_intrinsics_file(const Intrinsics& k,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write intrinsics file: " + path.string());
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n%d %d\n", k.fx,
                k.fy, k.cx, k.cy, k.width, k.height);
  out << buf;
}

}  // namespace

std::string frame_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  return buf;
}

void Frame::validate(int num_classes) const {
  intrinsics.validate();
  const std::string tag = frame_tag(index);
  if (color.width() != intrinsics.width ||
      color.height() != intrinsics.height || color.channels() != 3)
    throw ContractError(tag + ": color dimensions do not match intrinsics");
  if (depth.width() != intrinsics.width ||
      depth.height() != intrinsics.height)
    throw ContractError(tag + ": depth dimensions do not match intrinsics");
  if (!pose.is_valid_rotation())
    throw ContractError(tag + ": pose rotation invalid");
  for (const float v : depth.raw())
    if (!(v >= 0.0f) || !std::isfinite(v))
      throw ContractError(tag + ": depth must be finite and >= 0");
  for (const float v : color.raw())
    if (!(v >= 0.0f && v <= 1.0f))
      throw ContractError(tag + ": color must lie in [0,1]");
  if (labels) {
    if (!labels->same_size(depth))
      throw ContractError(tag + ": label dimensions do not match intrinsics");
    for (const std::uint8_t l : labels->raw())
      if (l != kIgnoreLabel && l >= num_classes)
        throw ContractError(tag + ": label id out of range");
  }
}

void ProbMap::validate() const {
  if (valid.width() != values.width() || valid.height() != values.height())
    throw ContractError("probmap: valid mask dimensions mismatch");
  const int w = width(), h = height(), c = channels();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float* v = values.at(x, y);
      if (valid.at(x, y)) {
        double sum = 0.0;
        for (int i = 0; i < c; ++i) {
          if (!(v[i] >= 0.0f))
            throw ContractError("probmap: negative probability");
          sum += v[i];
        }
        if (std::abs(sum - 1.0) > 1e-5)
          throw ContractError("probmap: valid pixel does not sum to 1");
      } else {
        for (int i = 0; i < c; ++i)
          if (v[i] != 0.0f)
            throw ContractError("probmap: invalid pixel holds nonzero values");
      }
    }
  }
}

LabelMap argmax_labels(const ProbMap& probs) {
  LabelMap out(probs.width(), probs.height(), kIgnoreLabel);
  const int c = probs.channels();
  for (int y = 0; y < probs.height(); ++y) {
    for (int x = 0; x < probs.width(); ++x) {
      if (!probs.valid.at(x, y)) continue;
      const float* v = probs.values.at(x, y);
      int best = 0;
      for (int i = 1; i < c; ++i)
        if (v[i] > v[best]) best = i;  // strict: ties keep the lowest index
      out.at(x, y) = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

ProbMap probmap_from_labels(const LabelMap& labels, int num_classes) {
  ProbMap out(labels.width(), labels.height(), num_classes);
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const std::uint8_t l = labels.at(x, y);
      if (l == kIgnoreLabel) continue;
      if (l >= num_classes)
        throw ContractError("probmap_from_labels: label id out of range");
      out.values.at(x, y, l) = 1.0f;
      out.valid.at(x, y) = 1;
    }
  }
  return out;
}

SceneSequence load_scene(const std::filesystem::path& dir,
                         std::optional<int> limit, int num_classes) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw FormatError("scene directory does not exist: " + dir.string());

  const Intrinsics intrinsics = read_intrinsics_file(dir / "intrinsics.txt");

  const fs::path color_dir = dir / "color";
  if (!fs::is_directory(color_dir))
    throw FormatError("scene has no color directory: " + color_dir.string());
  std::vector<int> indices;
  for (const auto& entry : fs::directory_iterator(color_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png")
      continue;
    try {
      indices.push_back(std::stoi(entry.path().stem().string()));
    } catch (const std::exception&) {
      throw FormatError("unexpected file in color directory: " +
                        entry.path().string());
    }
  }
  std::sort(indices.begin(), indices.end());
  if (limit && static_cast<int>(indices.size()) > *limit)
    indices.resize(static_cast<std::size_t>(*limit));

  const bool has_labels = fs::is_directory(dir / "label");

  SceneSequence seq;
  seq.num_classes = num_classes;
  seq.frames.reserve(indices.size());
  for (const int index : indices) {
    const std::string name = frame_name(index);
    Frame frame;
    frame.index = index;
    frame.intrinsics = intrinsics;

    const Field<std::uint8_t> rgb = read_png_rgb8(color_dir / (name + ".png"));
    frame.color = Field<float>(rgb.width(), rgb.height(), 3);
    for (std::size_t i = 0; i < rgb.size(); ++i)
      frame.color.raw()[i] = static_cast<float>(rgb.raw()[i]) / 255.0f;

    frame.depth = read_depth_png(dir / "depth" / (name + ".png"));
    frame.pose = read_pose_file(dir / "pose" / (name + ".txt"), index);

    if (has_labels) {
      const fs::path label_path = dir / "label" / (name + ".png");
      if (fs::exists(label_path)) frame.labels = read_label_png(label_path);
    }
    frame.validate(num_classes);
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

void write_scene(const SceneSequence& seq, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "color");
  fs::create_directories(dir / "depth");
  fs::create_directories(dir / "pose");
  const bool all_labeled =
      !seq.frames.empty() &&
      std::all_of(seq.frames.begin(), seq.frames.end(),
                  [](const Frame& f) { return f.labels.has_value(); });
  if (all_labeled) fs::create_directories(dir / "label");

  if (!seq.frames.empty())
    write_intrinsics_file(seq.frames.front().intrinsics,
                          dir / "intrinsics.txt");

  for (const Frame& frame : seq.frames) {
    const std::string name = frame_name(frame.index);
    Field<std::uint8_t> rgb(frame.color.width(), frame.color.height(), 3);
    for (std::size_t i = 0; i < rgb.size(); ++i) {
      const float v = frame.color.raw()[i];
      rgb.raw()[i] = static_cast<std::uint8_t>(
          std::lround(std::min(1.0f, std::max(0.0f, v)) * 255.0f));
    }
    write_png_rgb8(rgb, dir / "color" / (name + ".png"));
    write_depth_png(frame.depth, dir / "depth" / (name + ".png"));
    write_pose_file(frame.pose, dir / "pose" / (name + ".txt"));
    if (all_labeled) write_label_png(*frame.labels, dir / "label" / (name + ".png"));
  }
}

void write_probmap(const ProbMap& probs, const std::filesystem::path& path) {
  probs.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write probmap: " + path.string());
  out.write(kProbMapMagic, 4);
  write_u32(out, kProbMapVersion);
  write_u32(out, static_cast<std::uint32_t>(probs.height()));
  write_u32(out, static_cast<std::uint32_t>(probs.width()));
  write_u32(out, static_cast<std::uint32_t>(probs.channels()));
  out.write(reinterpret_cast<const char*>(probs.values.data()),
            static_cast<std::streamsize>(probs.values.size() * 4));
  if (!out) throw FormatError("short write: " + path.string());
}

ProbMap read_probmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open probmap: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kProbMapMagic, 4) != 0)
    throw FormatError("probmap: bad magic in " + path.string());
  const std::uint32_t version = read_u32(in);
  if (version != kProbMapVersion)
    throw FormatError("probmap: unsupported version " +
                      std::to_string(version));
  const std::uint32_t h = read_u32(in);
  const std::uint32_t w = read_u32(in);
  const std::uint32_t c = read_u32(in);
  if (w == 0 || h == 0 || c == 0 || w > 1u << 20 || h > 1u << 20 ||
      c > 1u << 16)
    throw FormatError("probmap: implausible dimensions in " + path.string());
  ProbMap probs(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  in.read(reinterpret_cast<char*>(probs.values.data()),
          static_cast<std::streamsize>(probs.values.size() * 4));
  if (in.gcount() !=
      static_cast<std::streamsize>(probs.values.size() * 4))
    throw FormatError("probmap: truncated payload in " + path.string());
  for (int y = 0; y < probs.height(); ++y) {
    for (int x = 0; x < probs.width(); ++x) {
      const float* v = probs.values.at(x, y);
      bool any = false;
      for (int i = 0; i < probs.channels(); ++i) any = any || v[i] != 0.0f;
      probs.valid.at(x, y) = any ? 1 : 0;
    }
  }
  probs.validate();
  return probs;
}

void write_label_png(const LabelMap& labels,
                     const std::filesystem::path& path) {
  write_png_gray8(labels, path);
}

LabelMap read_label_png(const std::filesystem::path& path) {
  return read_png_gray8(path);
}

void write_depth_png(const Grid<float>& depth_m,
                     const std::filesystem::path& path) {
  Grid<std::uint16_t> mm(depth_m.width(), depth_m.height());
  for (std::size_t i = 0; i < depth_m.size(); ++i) {
    const double v = std::lround(static_cast<double>(depth_m.raw()[i]) * 1000.0);
    mm.raw()[i] = static_cast<std::uint16_t>(
        std::min(65535.0, std::max(0.0, v)));
  }
  write_png_gray16(mm, path);
}

Grid<float> read_depth_png(const std::filesystem::path& path) {
  const Grid<std::uint16_t> mm = read_png_gray16(path);
  Grid<float> out(mm.width(), mm.height());
  for (std::size_t i = 0; i < mm.size(); ++i)
    out.raw()[i] = static_cast<float>(mm.raw()[i]) / 1000.0f;
  return out;
}

}  // namespace warpfuse
