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

#include "warpfuse/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpfuse/error.hpp"
#include "warpfuse/parallel.hpp"

namespace warpfuse {

namespace {

constexpr double kSnapEps = 1e-9;

// Bilinear footprint after snapping near-integer coordinates. Weights of
// exactly zero drop the corresponding pixels from the footprint, so integer
// coordinates touch a single pixel and holes next to it do not leak in.
struct Footprint {
  int x0, y0, x1, y1;
  double wx, wy;  // fraction toward x1 / y1
};

inline Footprint make_footprint(double x, double y, int width, int height) {
  double rx = std::round(x);
  double ry = std::round(y);
  if (std::abs(x - rx) < kSnapEps) x = rx;
  if (std::abs(y - ry) < kSnapEps) y = ry;
  Footprint f;
  f.x0 = static_cast<int>(std::floor(x));
  f.y0 = static_cast<int>(std::floor(y));
  f.wx = x - f.x0;
  f.wy = y - f.y0;
  // Right/bottom edge: coordinate W-1 lands on the last pixel with weight 0.
  f.x1 = f.wx == 0.0 ? f.x0 : std::min(f.x0 + 1, width - 1);
  f.y1 = f.wy == 0.0 ? f.y0 : std::min(f.y0 + 1, height - 1);
  return f;
}

inline bool in_bounds(double x, double y, int width, int height) {
  return x >= 0.0 && x <= width - 1 && y >= 0.0 && y <= height - 1;
}

}  // namespace

bool bilinear_sample(const Field<float>& field, double x, double y,
                     std::span<double> value, std::span<double> ddx,
                     std::span<double> ddy) {
  const int w = field.width(), h = field.height(), c = field.channels();
  if (!in_bounds(x, y, w, h)) return false;
  const Footprint f = make_footprint(x, y, w, h);
  const float* v00 = field.at(f.x0, f.y0);
  const float* v10 = field.at(f.x1, f.y0);
  const float* v01 = field.at(f.x0, f.y1);
  const float* v11 = field.at(f.x1, f.y1);
  for (int i = 0; i < c; ++i) {
    const double top = (1.0 - f.wx) * v00[i] + f.wx * v10[i];
    const double bottom = (1.0 - f.wx) * v01[i] + f.wx * v11[i];
    value[i] = (1.0 - f.wy) * top + f.wy * bottom;
    if (!ddx.empty())
      ddx[i] = (1.0 - f.wy) * (v10[i] - v00[i]) + f.wy * (v11[i] - v01[i]);
    if (!ddy.empty())
      ddy[i] = (1.0 - f.wx) * (v01[i] - v00[i]) + f.wx * (v11[i] - v10[i]);
  }
  return true;
}

WarpResult inverse_warp(const Frame& source, const ProbMap& source_probs,
                        const Frame& target, double occl_threshold) {
  const int w = target.width(), h = target.height();
  if (source.width() != w || source.height() != h)
    throw ContractError("inverse_warp: source and target dimensions differ");
  if (source_probs.width() != w || source_probs.height() != h)
    throw ContractError("inverse_warp: probmap dimensions differ from frames");
  const int channels = source_probs.channels();

  WarpResult out;
  out.warped = ProbMap(w, h, channels);
  out.sampled_source_depth = Grid<float>(w, h, 0.0f);
  out.transformed_depth = Grid<float>(w, h, 0.0f);
  out.coords = Field<double>(w, h, 2, -1.0);
  out.mask = ValidityMask::all_valid(w, h);

  const RigidTransform rel = relative_transform(target.pose, source.pose);
  const Intrinsics& tk = target.intrinsics;
  const Intrinsics& sk = source.intrinsics;

  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double d = target.depth.at(x, y);
      if (!(d > 0.0)) {
        out.mask.set(x, y, Reason::kNoDepth);
        continue;
      }
      // p' = K T d K^-1 p, spelled out per component.
      const Eigen::Vector3d point_target((x - tk.cx) * d / tk.fx,
                                         (y - tk.cy) * d / tk.fy, d);
      const Eigen::Vector3d point_source = rel.apply(point_target);
      out.transformed_depth.at(x, y) = static_cast<float>(point_source.z());
      if (!(point_source.z() > 0.0)) {
        out.mask.set(x, y, Reason::kOutOfView);
        continue;
      }
      const double sx = sk.fx * point_source.x() / point_source.z() + sk.cx;
      const double sy = sk.fy * point_source.y() / point_source.z() + sk.cy;
      out.coords.at(x, y, 0) = sx;
      out.coords.at(x, y, 1) = sy;
      if (!in_bounds(sx, sy, w, h)) {
        out.mask.set(x, y, Reason::kOutOfView);
        continue;
      }

      const Footprint f = make_footprint(sx, sy, w, h);
      const float d00 = source.depth.at(f.x0, f.y0);
      const float d10 = source.depth.at(f.x1, f.y0);
      const float d01 = source.depth.at(f.x0, f.y1);
      const float d11 = source.depth.at(f.x1, f.y1);
      // Interpolating across a depth hole would fabricate geometry, so any
      // missing depth inside the footprint disqualifies the pixel.
      if (d00 <= 0.0f || d10 <= 0.0f || d01 <= 0.0f || d11 <= 0.0f) {
        out.mask.set(x, y, Reason::kNoDepth);
        continue;
      }
      const double src_depth =
          (1.0 - f.wy) * ((1.0 - f.wx) * d00 + f.wx * d10) +
          f.wy * ((1.0 - f.wx) * d01 + f.wx * d11);
      out.sampled_source_depth.at(x, y) = static_cast<float>(src_depth);
      if (std::abs(src_depth - point_source.z()) > occl_threshold) {
        out.mask.set(x, y, Reason::kOccluded);
        continue;
      }

      const bool single_pixel = f.wx == 0.0 && f.wy == 0.0;
      if (single_pixel) {
        if (!source_probs.valid.at(f.x0, f.y0)) {
          out.mask.set(x, y, Reason::kOutOfView);
          continue;
        }
        const float* src = source_probs.values.at(f.x0, f.y0);
        float* dst = out.warped.values.at(x, y);
        std::copy(src, src + channels, dst);  // exact copy, no renorm
      } else {
        // Zero-weight rows/columns collapse onto x0/y0 in the footprint, so
        // this only inspects pixels that actually contribute.
        const bool all_valid = source_probs.valid.at(f.x0, f.y0) &&
                               source_probs.valid.at(f.x1, f.y0) &&
                               source_probs.valid.at(f.x0, f.y1) &&
                               source_probs.valid.at(f.x1, f.y1);
        if (!all_valid) {
          out.mask.set(x, y, Reason::kOutOfView);
          continue;
        }
        const float* p00 = source_probs.values.at(f.x0, f.y0);
        const float* p10 = source_probs.values.at(f.x1, f.y0);
        const float* p01 = source_probs.values.at(f.x0, f.y1);
        const float* p11 = source_probs.values.at(f.x1, f.y1);
        double sum = 0.0;
        float* dst = out.warped.values.at(x, y);
        for (int i = 0; i < channels; ++i) {
          const double top = (1.0 - f.wx) * p00[i] + f.wx * p10[i];
          const double bottom = (1.0 - f.wx) * p01[i] + f.wx * p11[i];
          const double v = (1.0 - f.wy) * top + f.wy * bottom;
          dst[i] = static_cast<float>(v);
          sum += v;
        }
        if (!(sum > 0.0)) {
          std::fill(dst, dst + channels, 0.0f);
          out.mask.set(x, y, Reason::kOutOfView);
          continue;
        }
        for (int i = 0; i < channels; ++i)
          dst[i] = static_cast<float>(dst[i] / sum);
      }
      out.warped.valid.at(x, y) = 1;
    }
  });
  return out;
}

Field<float> sample_color(const Field<float>& source_color,
                          const WarpResult& warp) {
  const int w = warp.mask.width(), h = warp.mask.height();
  if (source_color.width() != w || source_color.height() != h)
    throw ContractError("sample_color: dimension mismatch");
  Field<float> out(w, h, source_color.channels(), 0.0f);
  std::vector<double> value(static_cast<std::size_t>(source_color.channels()));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!warp.mask.valid(x, y)) continue;
      if (!bilinear_sample(source_color, warp.coords.at(x, y, 0),
                           warp.coords.at(x, y, 1), value))
        continue;
      for (int c = 0; c < source_color.channels(); ++c)
        out.at(x, y, c) = static_cast<float>(value[c]);
    }
  }
  return out;
}

LabelMap sample_labels_nearest(const LabelMap& source_labels,
                               const WarpResult& warp) {
  const int w = warp.mask.width(), h = warp.mask.height();
  if (source_labels.width() != w || source_labels.height() != h)
    throw ContractError("sample_labels_nearest: dimension mismatch");
  LabelMap out(w, h, kIgnoreLabel);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!warp.mask.valid(x, y)) continue;
      const int sx = static_cast<int>(std::lround(warp.coords.at(x, y, 0)));
      const int sy = static_cast<int>(std::lround(warp.coords.at(x, y, 1)));
      if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
      out.at(x, y) = source_labels.at(sx, sy);
    }
  }
  return out;
}

SplatResult forward_splat_oracle(const Frame& source,
                                 const LabelMap& source_labels,
                                 const Frame& target) {
  const int w = source.width(), h = source.height();
  if (target.width() != w || target.height() != h)
    throw ContractError("forward_splat_oracle: dimension mismatch");
  if (source_labels.width() != w || source_labels.height() != h)
    throw ContractError("forward_splat_oracle: label dimension mismatch");

  // Self-contained pose algebra: target_cam <- world <- source_cam.
  const Eigen::Matrix3d rs = source.pose.rotation;
  const Eigen::Vector3d ts = source.pose.translation;
  const Eigen::Matrix3d rt_inv = target.pose.rotation.transpose();
  const Eigen::Vector3d tt = target.pose.translation;

  SplatResult out;
  out.labels = LabelMap(w, h, kIgnoreLabel);
  out.covered = Grid<std::uint8_t>(w, h, 0);
  out.depth = Grid<float>(w, h, 0.0f);
  Grid<float> zbuf(w, h, std::numeric_limits<float>::infinity());

  const Intrinsics& sk = source.intrinsics;
  const Intrinsics& tk = target.intrinsics;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = source.depth.at(x, y);
      if (!(d > 0.0)) continue;
      const Eigen::Vector3d cam_src((x - sk.cx) * d / sk.fx,
                                    (y - sk.cy) * d / sk.fy, d);
      const Eigen::Vector3d world = rs * cam_src + ts;
      const Eigen::Vector3d cam_tgt = rt_inv * (world - tt);
      if (!(cam_tgt.z() > 0.0)) continue;
      const double px = tk.fx * cam_tgt.x() / cam_tgt.z() + tk.cx;
      const double py = tk.fy * cam_tgt.y() / cam_tgt.z() + tk.cy;
      const int ix = static_cast<int>(std::floor(px + 0.5));
      const int iy = static_cast<int>(std::floor(py + 0.5));
      if (ix < 0 || ix >= w || iy < 0 || iy >= h) continue;
      const float z = static_cast<float>(cam_tgt.z());
      if (z < zbuf.at(ix, iy)) {
        zbuf.at(ix, iy) = z;
        out.labels.at(ix, iy) = source_labels.at(x, y);
        out.covered.at(ix, iy) = 1;
        out.depth.at(ix, iy) = z;
      }
    }
  }
  return out;
}

}  // namespace warpfuse
