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

// Adam with lazy, column-sparse updates for the embedding matrices and dense
// updates for the predictor.

#ifndef AUGDOC_OPTIMIZER_H_
#define AUGDOC_OPTIMIZER_H_

#include <cstdint>
#include <optional>
#include <span>

#include "augdoc/contrastive.h"
#include "augdoc/encoder.h"

namespace augdoc {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct PredictorMoments {
  PredictorGrad m;
  PredictorGrad v;
};

struct OptimizerState {
  std::int64_t step = 0;  // completed steps
  Matrix m_u, v_u;
  Matrix m_v, v_v;
  PredictorMoments predictor;

  static OptimizerState zeros_like(const ModelParams& params);
  bool operator==(const OptimizerState& o) const;
};

struct ModelGradients {
  ColumnGradient u;
  ColumnGradient v;
  std::optional<PredictorGrad> predictor;  // absent: predictor not updated
};

// Elementwise Adam on n values. `step` is the 1-based step index used for
// bias correction.
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::int64_t step, const AdamConfig& config);

// One optimizer step: only touched columns of U and V (and their moments)
// change; the predictor is updated densely when its gradient is present.
void optimizer_step(ModelParams& params, const ModelGradients& grads, OptimizerState& state,
                    const AdamConfig& config);

}  // namespace augdoc

#endif  // AUGDOC_OPTIMIZER_H_
