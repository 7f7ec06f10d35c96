// langid/loss.h

// Copyright 2026  The langid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LANGID_LOSS_H_
#define LANGID_LOSS_H_

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "langid/manifest.h"
#include "langid/nn/layers.h"

namespace langid {

/// Per-class weights w_x = N / N_x, or all ones for the equal-weight mode.
struct ClassWeights {
  std::map<std::string, double> w;

  /// Weights in the order of `labels`; every label must be present.
  std::vector<double> Aligned(const std::vector<std::string> &labels) const;
};

/// w_x = N / N_x over `labels` (defaults to the labels seen in the
/// manifest). Fails when a class has no samples.
ClassWeights ComputeClassWeights(const Manifest &m,
                                 const std::vector<std::string> &labels = {});
ClassWeights EqualClassWeights(const std::vector<std::string> &labels);

enum class LossKind { kCeEqual, kCeWeighted, kAam };
LossKind ParseLossKind(const std::string &s);
std::string LossKindName(LossKind k);

struct AamConfig {
  double scale = 30.0;
  double margin = 0.01;  // radians

  void Validate() const {
    Check(scale > 0.0, "AAM scale must be positive");
    Check(margin >= 0.0 && margin < std::numbers::pi / 2, "AAM margin must be in [0, pi/2)");
  }
};

/// Weight-normalized cross-entropy:
///   sum_i w[y_i] * -log softmax(z_i)[y_i] / sum_i w[y_i].
/// Writes the exact gradient with respect to the logits when requested.
template <typename T>
T WeightedCrossEntropy(const Frames<T> &logits, const std::vector<int> &labels,
                       const std::vector<double> &weights, Frames<T> *dlogits = nullptr) {
  Check(static_cast<int>(labels.size()) == logits.n, "label count ", labels.size(),
        " != batch size ", logits.n);
  Check(static_cast<int>(weights.size()) == logits.c, "weight count ", weights.size(),
        " != class count ", logits.c);
  double wsum = 0.0;
  for (int y : labels) {
    if (y < 0 || y >= logits.c) Fail("unknown label index ", y);
    wsum += weights[y];
  }
  Check(wsum > 0.0, "sum of class weights is zero");
  Frames<T> p = SoftmaxRows(logits);
  double loss = 0.0;
  if (dlogits) *dlogits = Frames<T>(logits.n, logits.c);
  for (int i = 0; i < logits.n; ++i) {
    const int y = labels[i];
    const T *z = logits.row(i);
    // log-softmax via log-sum-exp for accuracy at confident predictions.
    T m = *std::max_element(z, z + logits.c);
    double s = 0.0;
    for (int j = 0; j < logits.c; ++j) s += std::exp(static_cast<double>(z[j] - m));
    const double nll = -(static_cast<double>(z[y] - m) - std::log(s));
    loss += weights[y] * nll;
    if (dlogits) {
      const T scale = static_cast<T>(weights[y] / wsum);
      for (int j = 0; j < logits.c; ++j)
        dlogits->at(i, j) = scale * (p.at(i, j) - (j == y ? T(1) : T(0)));
    }
  }
  return static_cast<T>(loss / wsum);
}

/// Additive angular margin loss on L2-normalized embeddings (batch x D) and
/// class vectors (columns of a D x n matrix). Target logit s*cos(theta_y + m)
/// while theta_y + m <= pi, else the linear fallback s*(cos theta_y - m sin m');
/// other classes s*cos(theta_j). Mean cross-entropy over the batch.
template <typename T>
T AamLoss(const Frames<T> &emb, const std::vector<int> &labels, const T *class_w,
          int n_classes, const AamConfig &cfg, Frames<T> *demb = nullptr,
          std::vector<T> *dclass_w = nullptr) {
  cfg.Validate();
  const int dim = emb.c;
  Check(static_cast<int>(labels.size()) == emb.n, "label count != batch size");
  Frames<T> cosines = CosineHead<T>::Forward(class_w, dim, n_classes, T(1), emb, nullptr);
  const double s = cfg.scale, m = cfg.margin;
  const double th = std::cos(std::numbers::pi - m);
  const double mm = std::sin(std::numbers::pi - m) * m;
  Frames<T> dcos(emb.n, n_classes);
  double loss = 0.0;
  std::vector<double> z(n_classes);
  for (int i = 0; i < emb.n; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= n_classes) Fail("unknown label index ", y);
    double dphi = 1.0;
    for (int j = 0; j < n_classes; ++j) {
      double c = std::clamp(static_cast<double>(cosines.at(i, j)), -1.0, 1.0);
      if (j != y) {
        z[j] = s * c;
        continue;
      }
      if (c > th) {
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - c * c));
        z[j] = s * (c * std::cos(m) - sin_t * std::sin(m));
        dphi = std::cos(m) + (sin_t > 1e-12 ? c * std::sin(m) / sin_t : 0.0);
      } else {
        z[j] = s * (c - mm);
      }
    }
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    loss += -(z[y] - zmax - std::log(sum));
    for (int j = 0; j < n_classes; ++j) {
      const double pj = std::exp(z[j] - zmax) / sum;
      const double dz = (pj - (j == y ? 1.0 : 0.0)) / emb.n;
      dcos.at(i, j) = static_cast<T>(s * dz * (j == y ? dphi : 1.0));
    }
  }
  if (demb || dclass_w) {
    std::vector<T> gw(static_cast<size_t>(dim) * n_classes, T(0));
    Frames<T> de = CosineHead<T>::BackwardCos(class_w, gw.data(), dim, n_classes, emb, dcos);
    if (demb) *demb = std::move(de);
    if (dclass_w) *dclass_w = std::move(gw);
  }
  return static_cast<T>(loss / emb.n);
}

}  // namespace langid

#endif  // LANGID_LOSS_H_
