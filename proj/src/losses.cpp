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

#include "warpfuse/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "warpfuse/error.hpp"
#include "warpfuse/rng.hpp"

namespace warpfuse {

namespace {

// Stable softmax into `probs` (C entries); returns log-sum-exp offset pieces
// needed for -log p[y] = lse - z[y].
void softmax(const double* z, int c, double* probs, double* lse_out) {
  double zmax = z[0];
  for (int i = 1; i < c; ++i) zmax = std::max(zmax, z[i]);
  double sum = 0.0;
  for (int i = 0; i < c; ++i) {
    probs[i] = std::exp(z[i] - zmax);
    sum += probs[i];
  }
  for (int i = 0; i < c; ++i) probs[i] /= sum;
  *lse_out = zmax + std::log(sum);
}

}  // namespace

ClassWeights median_freq_weights(const std::vector<const LabelMap*>& label_maps,
                                 int num_classes) {
  if (num_classes <= 0)
    throw ContractError("median_freq_weights: num_classes must be positive");
  std::vector<std::uint64_t> class_pixels(
      static_cast<std::size_t>(num_classes), 0);
  std::vector<std::uint64_t> pixels_where_present(
      static_cast<std::size_t>(num_classes), 0);
  std::uint64_t total_labeled = 0;

  std::vector<std::uint8_t> present(static_cast<std::size_t>(num_classes));
  for (const LabelMap* map : label_maps) {
    std::fill(present.begin(), present.end(), 0);
    std::uint64_t labeled_in_image = 0;
    for (const std::uint8_t l : map->raw()) {
      if (l == kIgnoreLabel) continue;
      if (l >= num_classes)
        throw ContractError("median_freq_weights: label id out of range");
      ++class_pixels[l];
      ++labeled_in_image;
      present[l] = 1;
    }
    total_labeled += labeled_in_image;
    for (int c = 0; c < num_classes; ++c)
      if (present[c]) pixels_where_present[c] += labeled_in_image;
  }
  if (total_labeled == 0)
    throw ContractError("median_freq_weights: no labeled pixels");

  std::vector<double> freqs;
  std::vector<double> freq_per_class(static_cast<std::size_t>(num_classes),
                                     0.0);
  for (int c = 0; c < num_classes; ++c) {
    if (class_pixels[c] == 0) continue;  // absent: weight 0, not in median
    freq_per_class[c] = static_cast<double>(class_pixels[c]) /
                        static_cast<double>(pixels_where_present[c]);
    freqs.push_back(freq_per_class[c]);
  }
  std::sort(freqs.begin(), freqs.end());
  const std::size_t n = freqs.size();
  const double median = n % 2 == 1
                            ? freqs[n / 2]
                            : 0.5 * (freqs[n / 2 - 1] + freqs[n / 2]);

  ClassWeights out;
  out.weights.assign(static_cast<std::size_t>(num_classes), 0.0);
  for (int c = 0; c < num_classes; ++c)
    if (freq_per_class[c] > 0.0) out.weights[c] = median / freq_per_class[c];
  return out;
}

ScalarLoss weighted_cross_entropy(const Field<double>& logits,
                                  const LabelMap& labels,
                                  const ClassWeights& weights,
                                  Field<double>* grad) {
  const int w = logits.width(), h = logits.height(), c = logits.channels();
  if (labels.width() != w || labels.height() != h)
    throw ContractError("weighted_cross_entropy: label dimension mismatch");
  if (static_cast<int>(weights.weights.size()) != c)
    throw ContractError("weighted_cross_entropy: weight count mismatch");
  if (grad) *grad = Field<double>(w, h, c, 0.0);

  int count = 0;
  for (const std::uint8_t l : labels.raw()) count += (l != kIgnoreLabel);

  ScalarLoss out;
  out.valid_count = count;
  if (count == 0) return out;

  std::vector<double> probs(static_cast<std::size_t>(c));
  double loss = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t label = labels.at(x, y);
      if (label == kIgnoreLabel) continue;
      if (label >= c)
        throw ContractError("weighted_cross_entropy: label id out of range");
      const double* z = logits.at(x, y);
      double lse = 0.0;
      softmax(z, c, probs.data(), &lse);
      const double wy = weights.weights[label];
      loss += wy * (lse - z[label]);
      if (grad) {
        double* g = grad->at(x, y);
        for (int i = 0; i < c; ++i)
          g[i] = wy * (probs[i] - (i == label ? 1.0 : 0.0)) / count;
      }
    }
  }
  out.value = loss / count;
  return out;
}

ScalarLoss consistency_loss(const Field<double>& student_logits,
                            const LabelMap& teacher_labels,
                            const ValidityMask& mask, Field<double>* grad) {
  const int w = student_logits.width(), h = student_logits.height();
  const int c = student_logits.channels();
  if (teacher_labels.width() != w || teacher_labels.height() != h)
    throw ContractError("consistency_loss: label dimension mismatch");
  if (mask.width() != w || mask.height() != h)
    throw ContractError("consistency_loss: mask dimension mismatch");
  if (grad) *grad = Field<double>(w, h, c, 0.0);

  int count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.valid(x, y) && teacher_labels.at(x, y) != kIgnoreLabel)
        ++count;

  ScalarLoss out;
  out.valid_count = count;
  if (count == 0) return out;

  std::vector<double> probs(static_cast<std::size_t>(c));
  double loss = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.valid(x, y)) continue;
      const std::uint8_t label = teacher_labels.at(x, y);
      if (label == kIgnoreLabel) continue;
      if (label >= c)
        throw ContractError("consistency_loss: teacher label out of range");
      const double* z = student_logits.at(x, y);
      double lse = 0.0;
      softmax(z, c, probs.data(), &lse);
      loss += lse - z[label];
      if (grad) {
        double* g = grad->at(x, y);
        for (int i = 0; i < c; ++i)
          g[i] = (probs[i] - (i == label ? 1.0 : 0.0)) / count;
      }
    }
  }
  out.value = loss / count;
  return out;
}

ScalarLoss depth_l1(const Grid<double>& pred, const Grid<double>& gt,
                    Grid<double>* grad) {
  if (!pred.same_size(gt))
    throw ContractError("depth_l1: dimension mismatch");
  if (grad) *grad = Grid<double>(pred.width(), pred.height(), 0.0);

  int count = 0;
  for (const double v : gt.raw()) count += (v > 0.0);
  ScalarLoss out;
  out.valid_count = count;
  if (count == 0) return out;  // loss 0 by convention

  double loss = 0.0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!(gt.at(x, y) > 0.0)) continue;
      const double diff = pred.at(x, y) - gt.at(x, y);
      loss += std::abs(diff);
      if (grad)
        grad->at(x, y) = (diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0) / count;
    }
  }
  out.value = loss / count;
  return out;
}

ScalarLoss photometric_ssim_loss(const Field<double>& target,
                                 const Field<double>& warped,
                                 const Grid<std::uint8_t>& mask,
                                 Field<double>* grad_warped) {
  const int w = target.width(), h = target.height(), c = target.channels();
  if (!warped.same_size(target))
    throw ContractError("photometric_ssim_loss: image dimension mismatch");
  if (mask.width() != w || mask.height() != h)
    throw ContractError("photometric_ssim_loss: mask dimension mismatch");
  if (grad_warped) *grad_warped = Field<double>(w, h, c, 0.0);

  int count = 0;
  for (const std::uint8_t m : mask.raw()) count += (m != 0);
  ScalarLoss out;
  out.valid_count = count;
  if (count == 0) return out;

  const double norm = 1.0 / (static_cast<double>(count) * c);
  double loss = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      const int x_lo = std::max(0, x - 1), x_hi = std::min(w - 1, x + 1);
      const int y_lo = std::max(0, y - 1), y_hi = std::min(h - 1, y + 1);
      const int n = (x_hi - x_lo + 1) * (y_hi - y_lo + 1);
      for (int ch = 0; ch < c; ++ch) {
        // 3x3 mean-pooled window statistics (clamped at image borders).
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int wy = y_lo; wy <= y_hi; ++wy) {
          for (int wx = x_lo; wx <= x_hi; ++wx) {
            const double a = target.at(wx, wy, ch);
            const double b = warped.at(wx, wy, ch);
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
          }
        }
        const double mu_x = sx / n, mu_y = sy / n;
        const double var_x = sxx / n - mu_x * mu_x;
        const double var_y = syy / n - mu_y * mu_y;
        const double cov = sxy / n - mu_x * mu_y;
        const double a1 = 2.0 * mu_x * mu_y + kSsimC1;
        const double a2 = 2.0 * cov + kSsimC2;
        const double b1 = mu_x * mu_x + mu_y * mu_y + kSsimC1;
        const double b2 = var_x + var_y + kSsimC2;
        const double ssim = (a1 * a2) / (b1 * b2);

        const double l1 =
            std::abs(target.at(x, y, ch) - warped.at(x, y, ch));
        loss += kSsimAlpha * 0.5 * (1.0 - ssim) + (1.0 - kSsimAlpha) * l1;

        if (grad_warped) {
          // d ssim / d (mu_y, var_y, cov), then chain to each window pixel.
          const double d_mu = 2.0 * mu_x * a2 / (b1 * b2) -
                              ssim * 2.0 * mu_y / b1;
          const double d_var = -ssim / b2;
          const double d_cov = 2.0 * a1 / (b1 * b2);
          const double scale = -kSsimAlpha * 0.5 * norm;
          for (int wy = y_lo; wy <= y_hi; ++wy) {
            for (int wx = x_lo; wx <= x_hi; ++wx) {
              const double a = target.at(wx, wy, ch);
              const double b = warped.at(wx, wy, ch);
              const double d_ssim_db =
                  (d_mu + d_var * 2.0 * (b - mu_y) + d_cov * (a - mu_x)) / n;
              grad_warped->at(wx, wy, ch) += scale * d_ssim_db;
            }
          }
          const double diff = warped.at(x, y, ch) - target.at(x, y, ch);
          grad_warped->at(x, y, ch) +=
              (1.0 - kSsimAlpha) * norm *
              (diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0);
        }
      }
    }
  }
  out.value = loss * norm;
  return out;
}

LossReport total_loss(const ScalarLoss& l_s, const ScalarLoss& l_g,
                      double lambda) {
  LossReport rep;
  rep.l_s = l_s.value;
  rep.l_g = l_g.value;
  rep.lambda = lambda;
  rep.total = l_s.value + lambda * l_g.value;
  rep.count_s = l_s.valid_count;
  rep.count_g = l_g.valid_count;
  return rep;
}

LossReport total_loss(const ScalarLoss& l_s, const ScalarLoss& l_g,
                      double lambda, const ScalarLoss& l_ds,
                      const ScalarLoss& l_dg, double lambda_d) {
  LossReport rep = total_loss(l_s, l_g, lambda);
  rep.depth_enabled = true;
  rep.l_ds = l_ds.value;
  rep.l_dg = l_dg.value;
  rep.lambda_d = lambda_d;
  rep.depth_total = l_ds.value + lambda_d * l_dg.value;
  rep.count_ds = l_ds.valid_count;
  rep.count_dg = l_dg.valid_count;
  return rep;
}

GradCheckReport gradcheck(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& point, const std::vector<double>& analytic,
    double step, int max_probes, std::uint64_t seed) {
  if (point.size() != analytic.size())
    throw ContractError("gradcheck: gradient size mismatch");
  const int n = static_cast<int>(point.size());

  std::vector<int> indices(static_cast<std::size_t>(n));
  std::iota(indices.begin(), indices.end(), 0);
  if (n > max_probes) {
    Rng rng(seed);
    for (int i = 0; i < max_probes; ++i) {
      const int j = i + rng.uniform_int(n - i);
      std::swap(indices[i], indices[j]);
    }
    indices.resize(static_cast<std::size_t>(max_probes));
  }

  GradCheckReport rep;
  rep.probes = static_cast<int>(indices.size());
  std::vector<double> x = point;
  for (const int i : indices) {
    const double keep = x[i];
    x[i] = keep + step;
    const double f_plus = f(x);
    x[i] = keep - step;
    const double f_minus = f(x);
    x[i] = keep;
    const double numeric = (f_plus - f_minus) / (2.0 * step);
    const double denom =
        std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
    rep.max_rel_error =
        std::max(rep.max_rel_error, std::abs(numeric - analytic[i]) / denom);
  }
  return rep;
}

}  // namespace warpfuse
