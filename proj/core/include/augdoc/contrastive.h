// Copyright 2026 The augdoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Contrastive objectives over a batch of (document, augmented document)
// embedding pairs. Batches are N x d matrices, one row per document.

#ifndef AUGDOC_CONTRASTIVE_H_
#define AUGDOC_CONTRASTIVE_H_

#include <string_view>

#include <Eigen/Dense>

#include "augdoc/random.h"

namespace augdoc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Framework { kSimClr, kSimSiam };

std::string_view framework_name(Framework f);
Framework parse_framework(std::string_view name);

enum class PredictorActivation { kRelu, kNone };

struct ContrastiveConfig {
  Framework framework = Framework::kSimClr;
  double tau = 1.0;
  double lambda = 1.0;
  int predictor_hidden = 64;
  // Literal stop-gradient placement: D(h, sg(z~)) + D(h~, sg(z)). The
  // predictor receives no gradient in this mode.
  bool simsiam_as_printed = false;

  void validate() const;
};

// affine(d -> hidden) -> batch norm -> activation -> affine(hidden -> d).
struct PredictorWeights {
  Matrix w1;  // hidden x d
  Vector b1;
  Vector gamma;
  Vector beta;
  Vector running_mean;
  Vector running_var;
  Matrix w2;  // d x hidden
  Vector b2;
  PredictorActivation activation = PredictorActivation::kRelu;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  int dim() const { return static_cast<int>(w1.cols()); }
  int hidden() const { return static_cast<int>(w1.rows()); }

  // Uniform(+-1/sqrt(fan_in)) affine layers, unit scale, zero shift,
  // running statistics (0, 1).
  static PredictorWeights init(int dim, int hidden, Rng& rng);
  bool all_finite() const;
  bool operator==(const PredictorWeights& o) const;
};

struct PredictorGrad {
  Matrix w1;
  Vector b1;
  Vector gamma;
  Vector beta;
  Matrix w2;
  Vector b2;

  static PredictorGrad zeros_like(const PredictorWeights& w);
  PredictorGrad& operator+=(const PredictorGrad& o);
  PredictorGrad& operator*=(double s);
};

enum class PredictorMode { kTrain, kEval };

// Intermediate values kept for the backward pass and the running-statistic
// update.
struct PredictorCache {
  PredictorMode mode = PredictorMode::kTrain;
  Matrix input;      // N x d
  Matrix normalized;  // N x hidden, (pre - mean) / std
  Matrix bn_out;     // N x hidden
  Vector mean;       // batch (train) or running (eval) statistics
  Vector var;        // biased batch variance in train mode
};

// Train mode normalizes with batch statistics and needs N >= 2 (DataError
// otherwise). Does not touch the running statistics; see
// update_running_stats.
Matrix predictor_forward(const Matrix& h, const PredictorWeights& w, PredictorMode mode,
                         PredictorCache* cache = nullptr);

// Accumulates parameter gradients into `grad` and returns dL/dinput.
Matrix predictor_backward(const Matrix& grad_out, const PredictorWeights& w,
                          const PredictorCache& cache, PredictorGrad& grad);

// Exponential moving average of the batch statistics in a train-mode cache.
// Variance is stored unbiased.
void update_running_stats(PredictorWeights& w, const PredictorCache& cache);

// x.y / (|x||y|). DataError on a zero-norm argument.
double cosine_similarity(const Vector& x, const Vector& y);

struct PairLoss {
  double loss = 0.0;           // summed over the batch
  Vector per_sample;           // N
  Matrix grad_h;               // N x d
  Matrix grad_h_aug;           // N x d
};

// Sum over i of -log softmax_k(cos(h_i, h~_k) / tau)[i]. The positive pair is
// part of the denominator. Requires N >= 2 and no zero rows.
PairLoss nt_xent_loss(const Matrix& h, const Matrix& h_aug, double tau);

struct SimSiamLoss {
  double loss = 0.0;
  Vector per_sample;
  Matrix grad_h;      // through live branches only
  Matrix grad_h_aug;
  PredictorGrad predictor;
  PredictorCache cache;      // forward pass of h
  PredictorCache cache_aug;  // forward pass of h~
};

// Per-sample loss 1/2 D(z_i, sg(target_aug_i)) + 1/2 D(z~_i, sg(target_i)),
// z = predictor(input), D the negative cosine. Targets are constants: no
// gradient is reported for them.
SimSiamLoss simsiam_loss_split(const Matrix& input, const Matrix& input_aug, const Matrix& target,
                               const Matrix& target_aug, const PredictorWeights& w);

// Standard orientation: predictor branch live, plain embeddings stopped.
SimSiamLoss simsiam_loss(const Matrix& h, const Matrix& h_aug, const PredictorWeights& w);

// Literal orientation: 1/2 D(h_i, sg(z~_i)) + 1/2 D(h~_i, sg(z_i)).
SimSiamLoss simsiam_loss_as_printed(const Matrix& h, const Matrix& h_aug,
                                    const PredictorWeights& w);

// l_d + lambda * l_c. ConfigError if lambda < 0.
double combined_loss(double backbone_loss, double contrastive_loss, double lambda);

}  // namespace augdoc

#endif  // AUGDOC_CONTRASTIVE_H_
