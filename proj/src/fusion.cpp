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

#include "warpfuse/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "warpfuse/error.hpp"
#include "warpfuse/parallel.hpp"

namespace warpfuse {

int FusionConfig::resolved_boundary_radius(int width) const {
  return boundary_radius >= 0 ? boundary_radius
                              : default_boundary_radius(width);
}

double covisibility(const Frame& target, const Frame& source,
                    double occl_threshold) {
  // Reuses the warp geometry with a throwaway uniform probmap; visibility is
  // decided by the mask alone.
  ProbMap uniform(source.width(), source.height(), 1);
  std::fill(uniform.values.raw().begin(), uniform.values.raw().end(), 1.0f);
  std::fill(uniform.valid.raw().begin(), uniform.valid.raw().end(), 1);
  const WarpResult warped =
      inverse_warp(source, uniform, target, occl_threshold);

  int depth_valid = 0;
  int visible = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (!(target.depth.at(x, y) > 0.0f)) continue;
      ++depth_valid;
      if (warped.mask.valid(x, y)) ++visible;
    }
  }
  if (depth_valid == 0) return 0.0;
  return static_cast<double>(visible) / depth_valid;
}

NeighborSet select_neighbors(const SceneSequence& seq, int target,
                             double min_covis, int max_neighbors, int stride,
                             double occl_threshold) {
  const int n = static_cast<int>(seq.frames.size());
  if (target < 0 || target >= n)
    throw ContractError("select_neighbors: target index out of range");
  if (stride < 1) throw ContractError("select_neighbors: stride must be >= 1");

  struct Candidate {
    int index;
    double covis;
    int gap;
  };
  std::vector<Candidate> candidates;
  for (int k = 1;; ++k) {
    const int lo = target - stride * k;
    const int hi = target + stride * k;
    if (lo < 0 && hi >= n) break;
    for (const int idx : {lo, hi}) {
      if (idx < 0 || idx >= n || idx == target) continue;
      const double c =
          covisibility(seq.frames[target], seq.frames[idx], occl_threshold);
      if (c >= min_covis) candidates.push_back({idx, c, stride * k});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.covis != b.covis) return a.covis > b.covis;
              if (a.gap != b.gap) return a.gap < b.gap;
              return a.index < b.index;
            });
  if (static_cast<int>(candidates.size()) > max_neighbors)
    candidates.resize(static_cast<std::size_t>(std::max(0, max_neighbors)));

  NeighborSet out;
  out.target_index = target;
  for (const Candidate& c : candidates)
    out.neighbors.emplace_back(c.index, c.covis);
  return out;
}

FusedResult merge(std::vector<MergeInput> inputs, int width, int height,
                  int channels) {
  for (const MergeInput& in : inputs) {
    if (in.probs->width() != width || in.probs->height() != height ||
        in.probs->channels() != channels)
      throw ContractError("merge: probmap dimension mismatch");
    if (in.mask->width() != width || in.mask->height() != height)
      throw ContractError("merge: mask dimension mismatch");
  }
  // Fixed ascending-index accumulation keeps the float sums identical under
  // any input permutation.
  std::stable_sort(inputs.begin(), inputs.end(),
                   [](const MergeInput& a, const MergeInput& b) {
                     return a.frame_index < b.frame_index;
                   });

  FusedResult out;
  out.probs = ProbMap(width, height, channels);
  out.labels = LabelMap(width, height, kIgnoreLabel);
  std::vector<double> sum(static_cast<std::size_t>(channels));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::fill(sum.begin(), sum.end(), 0.0);
      int contributors = 0;
      for (const MergeInput& in : inputs) {
        if (!in.mask->valid(x, y) || !in.probs->valid.at(x, y)) continue;
        const float* v = in.probs->values.at(x, y);
        for (int c = 0; c < channels; ++c) sum[c] += v[c];
        ++contributors;
      }
      if (contributors == 0) continue;
      int best = 0;
      double total = sum[0];
      for (int c = 1; c < channels; ++c) {
        if (sum[c] > sum[best]) best = c;  // ties keep the lowest index
        total += sum[c];
      }
      out.labels.at(x, y) = static_cast<std::uint8_t>(best);
      out.probs.valid.at(x, y) = 1;
      float* dst = out.probs.values.at(x, y);
      for (int c = 0; c < channels; ++c)
        dst[c] = static_cast<float>(sum[c] / total);
    }
  }
  return out;
}

FusedResult fuse_frame(const SceneSequence& seq,
                       const std::vector<ProbMap>& probs,
                       const NeighborSet& neighbors, int target,
                       const FusionConfig& config) {
  if (probs.size() != seq.frames.size())
    throw ContractError("fuse_frame: one probmap per frame required");
  const Frame& target_frame = seq.frames[static_cast<std::size_t>(target)];
  const int w = target_frame.width(), h = target_frame.height();
  const int channels = probs[static_cast<std::size_t>(target)].channels();
  const int radius = config.resolved_boundary_radius(w);

  // Keep warped maps and masks alive for the merge.
  std::vector<ProbMap> warped_store;
  std::vector<ValidityMask> mask_store;
  warped_store.reserve(neighbors.neighbors.size());
  mask_store.reserve(neighbors.neighbors.size() + 1);

  for (const auto& [nbr, covis] : neighbors.neighbors) {
    (void)covis;
    const Frame& src = seq.frames[static_cast<std::size_t>(nbr)];
    const ProbMap& src_probs = probs[static_cast<std::size_t>(nbr)];
    WarpResult wr = inverse_warp(src, src_probs, target_frame,
                                 config.occl_threshold);
    // Boundary exclusion is computed on the teacher's own argmax in the
    // source view, then carried to the target with nearest-neighbor lookup.
    const Grid<std::uint8_t> src_boundary =
        boundary_mask(argmax_labels(src_probs), radius);
    const LabelMap flags = sample_labels_nearest(src_boundary, wr);
    ValidityMask composed = wr.mask;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (composed.valid(x, y) && flags.at(x, y) == 1)
          composed.set(x, y, Reason::kBoundary);
    warped_store.push_back(std::move(wr.warped));
    mask_store.push_back(std::move(composed));
  }

  if (config.include_self) {
    // The target's own prediction is not warped, so it enters without
    // boundary exclusion, gated only by its probmap validity.
    const ProbMap& self = probs[static_cast<std::size_t>(target)];
    Grid<std::uint8_t> invalid(w, h, 0);
    for (std::size_t i = 0; i < invalid.size(); ++i)
      invalid.raw()[i] = self.valid.raw()[i] ? 0 : 1;
    mask_store.push_back(mask_from_flags(invalid, Reason::kNoDepth));
  }

  std::vector<MergeInput> inputs;
  for (std::size_t i = 0; i < neighbors.neighbors.size(); ++i)
    inputs.push_back({neighbors.neighbors[i].first, &warped_store[i],
                      &mask_store[i]});
  if (config.include_self)
    inputs.push_back({target, &probs[static_cast<std::size_t>(target)],
                      &mask_store.back()});

  return merge(std::move(inputs), w, h, channels);
}

PseudoLabelResult pseudo_label_sequence(const SceneSequence& seq,
                                        const std::vector<ProbMap>& probs,
                                        const FusionConfig& config) {
  if (probs.size() != seq.frames.size())
    throw ContractError("pseudo_label_sequence: one probmap per frame required");
  const int n = static_cast<int>(seq.frames.size());
  PseudoLabelResult out;
  out.labels.resize(static_cast<std::size_t>(n));
  out.fused.resize(static_cast<std::size_t>(n));
  out.neighbors.resize(static_cast<std::size_t>(n));
  parallel_for(0, n, [&](int i) {
    out.neighbors[i] = select_neighbors(seq, i, config.min_covis,
                                        config.max_neighbors, config.stride,
                                        config.occl_threshold);
    FusedResult fused = fuse_frame(seq, probs, out.neighbors[i], i, config);
    out.labels[i] = std::move(fused.labels);
    out.fused[i] = std::move(fused.probs);
  });
  return out;
}

}  // namespace warpfuse
