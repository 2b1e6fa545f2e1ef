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

#include "augdoc/optimizer.h"

#include <cmath>

#include "augdoc/errors.h"

namespace augdoc {
namespace {

template <typename Dense>
std::span<double> whole(Dense& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <typename Dense>
std::span<const double> whole_const(const Dense& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

void column_step(Matrix& param, const ColumnGradient& grad, Matrix& m, Matrix& v,
                 std::int64_t step, const AdamConfig& config) {
  const auto d = static_cast<std::size_t>(param.rows());
  for (WordId w : grad.touched()) {
    adam_update({param.col(w).data(), d}, {grad.values().col(w).data(), d},
                {m.col(w).data(), d}, {v.col(w).data(), d}, step, config);
  }
}

}  // namespace

OptimizerState OptimizerState::zeros_like(const ModelParams& params) {
  OptimizerState s;
  s.m_u = Matrix::Zero(params.u.rows(), params.u.cols());
  s.v_u = s.m_u;
  s.m_v = Matrix::Zero(params.v.rows(), params.v.cols());
  s.v_v = s.m_v;
  s.predictor.m = PredictorGrad::zeros_like(params.predictor);
  s.predictor.v = PredictorGrad::zeros_like(params.predictor);
  return s;
}

bool OptimizerState::operator==(const OptimizerState& o) const {
  const auto same = [](const PredictorGrad& a, const PredictorGrad& b) {
    return a.w1 == b.w1 && a.b1 == b.b1 && a.gamma == b.gamma && a.beta == b.beta &&
           a.w2 == b.w2 && a.b2 == b.b2;
  };
  return step == o.step && m_u == o.m_u && v_u == o.v_u && m_v == o.m_v && v_v == o.v_v &&
         same(predictor.m, o.predictor.m) && same(predictor.v, o.predictor.v);
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::int64_t step, const AdamConfig& config) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw DataError("adam_update: shape mismatch");
  }
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    param[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void optimizer_step(ModelParams& params, const ModelGradients& grads, OptimizerState& state,
                    const AdamConfig& config) {
  if (grads.u.values().rows() != params.u.rows() || grads.u.values().cols() != params.u.cols() ||
      grads.v.values().rows() != params.v.rows() || grads.v.values().cols() != params.v.cols()) {
    throw DataError("optimizer_step: gradient shape does not match parameters");
  }
  const std::int64_t step = ++state.step;
  column_step(params.u, grads.u, state.m_u, state.v_u, step, config);
  column_step(params.v, grads.v, state.m_v, state.v_v, step, config);
  if (grads.predictor) {
    auto& p = params.predictor;
    const auto& g = *grads.predictor;
    auto& m = state.predictor.m;
    auto& v = state.predictor.v;
    adam_update(whole(p.w1), whole_const(g.w1), whole(m.w1), whole(v.w1), step, config);
    adam_update(whole(p.b1), whole_const(g.b1), whole(m.b1), whole(v.b1), step, config);
    adam_update(whole(p.gamma), whole_const(g.gamma), whole(m.gamma), whole(v.gamma), step,
                config);
    adam_update(whole(p.beta), whole_const(g.beta), whole(m.beta), whole(v.beta), step, config);
    adam_update(whole(p.w2), whole_const(g.w2), whole(m.w2), whole(v.w2), step, config);
    adam_update(whole(p.b2), whole_const(g.b2), whole(m.b2), whole(v.b2), step, config);
  }
}

}  // namespace augdoc
