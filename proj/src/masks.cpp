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

#include "warpfuse/masks.hpp"

#include <algorithm>
#include <cmath>

#include "warpfuse/error.hpp"

namespace warpfuse {

namespace {

// Sliding min/max over a 1-D window of half-width r, d lines at a time.
// A window holds a single label iff its min equals its max, which is all
// boundary_mask needs; this keeps the pass separable and O(H*W*r).
void minmax_lines(const Grid<std::uint8_t>& min_in,
                  const Grid<std::uint8_t>& max_in, int radius, bool rows,
                  Grid<std::uint8_t>* min_out, Grid<std::uint8_t>* max_out) {
  const int w = min_in.width(), h = min_in.height();
  const int n = rows ? w : h;
  const int lines = rows ? h : w;
  for (int line = 0; line < lines; ++line) {
    for (int i = 0; i < n; ++i) {
      const int lo = std::max(0, i - radius);
      const int hi = std::min(n - 1, i + radius);
      std::uint8_t mn = 255, mx = 0;
      for (int j = lo; j <= hi; ++j) {
        const int x = rows ? j : line;
        const int y = rows ? line : j;
        mn = std::min(mn, min_in.at(x, y));
        mx = std::max(mx, max_in.at(x, y));
      }
      const int x = rows ? i : line;
      const int y = rows ? line : i;
      min_out->at(x, y) = mn;
      max_out->at(x, y) = mx;
    }
  }
}

}  // namespace

Grid<std::uint8_t> boundary_mask(const LabelMap& labels, int radius) {
  if (radius < 0) throw ContractError("boundary_mask: radius must be >= 0");
  Grid<std::uint8_t> out(labels.width(), labels.height(), 0);
  if (radius == 0) return out;

  Grid<std::uint8_t> row_min(labels.width(), labels.height());
  Grid<std::uint8_t> row_max(labels.width(), labels.height());
  minmax_lines(labels, labels, radius, /*rows=*/true, &row_min, &row_max);
  Grid<std::uint8_t> win_min(labels.width(), labels.height());
  Grid<std::uint8_t> win_max(labels.width(), labels.height());
  minmax_lines(row_min, row_max, radius, /*rows=*/false, &win_min, &win_max);

  for (std::size_t i = 0; i < out.size(); ++i)
    out.raw()[i] = win_min.raw()[i] != win_max.raw()[i] ? 1 : 0;
  return out;
}

int default_boundary_radius(int width) {
  return static_cast<int>(std::lround(8.0 * width / 640.0));
}

Grid<std::uint8_t> depth_consistency_mask(const ProbMap& student,
                                          const ProbMap& teacher_warped,
                                          const Grid<std::uint8_t>& boundary) {
  if (student.width() != teacher_warped.width() ||
      student.height() != teacher_warped.height() ||
      student.channels() != teacher_warped.channels())
    throw ContractError("depth_consistency_mask: dimension mismatch");
  if (boundary.width() != student.width() ||
      boundary.height() != student.height())
    throw ContractError("depth_consistency_mask: boundary dimension mismatch");

  const LabelMap student_labels = argmax_labels(student);
  const LabelMap teacher_labels = argmax_labels(teacher_warped);
  Grid<std::uint8_t> out(student.width(), student.height(), 0);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const bool ok = student.valid.at(x, y) && teacher_warped.valid.at(x, y) &&
                      student_labels.at(x, y) == teacher_labels.at(x, y) &&
                      boundary.at(x, y) == 0;
      out.at(x, y) = ok ? 1 : 0;
    }
  }
  return out;
}

ValidityMask compose(std::span<const ValidityMask* const> masks) {
  if (masks.empty()) throw ContractError("compose: no masks given");
  const int w = masks.front()->width(), h = masks.front()->height();
  for (const ValidityMask* m : masks)
    if (m->width() != w || m->height() != h)
      throw ContractError("compose: mask dimension mismatch");

  ValidityMask out = ValidityMask::all_valid(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t best = 0;  // 0 = valid; otherwise smallest code wins
      for (const ValidityMask* m : masks) {
        const std::uint8_t r = m->reason.at(x, y);
        if (r != 0 && (best == 0 || r < best)) best = r;
      }
      out.reason.at(x, y) = best;
    }
  }
  return out;
}

ValidityMask compose(const ValidityMask& a, const ValidityMask& b) {
  const ValidityMask* masks[] = {&a, &b};
  return compose(std::span<const ValidityMask* const>(masks, 2));
}

ValidityMask mask_from_flags(const Grid<std::uint8_t>& flags, Reason reason) {
  ValidityMask out = ValidityMask::all_valid(flags.width(), flags.height());
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags.raw()[i]) out.reason.raw()[i] = static_cast<std::uint8_t>(reason);
  return out;
}

}  // namespace warpfuse
