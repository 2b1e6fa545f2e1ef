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

#include "augdoc/contrastive.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "augdoc/errors.h"

namespace augdoc {
namespace {

void check_pair_batch(const Matrix& h, const Matrix& h_aug, const char* who) {
  if (h.rows() != h_aug.rows() || h.cols() != h_aug.cols()) {
    throw DataError(std::string(who) + ": view shapes differ");
  }
  if (h.rows() < 2) throw DataError(std::string(who) + ": batch needs at least 2 pairs");
}

Vector row_norms(const Matrix& m, const char* who) {
  Vector n = m.rowwise().norm();
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0)) throw DataError(std::string(who) + ": zero-norm embedding row");
  }
  return n;
}

// d cos(x, y) / dx.
Vector cosine_grad_x(const Vector& x, const Vector& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  const double c = x.dot(y) / (nx * ny);
  return y / (nx * ny) - c * x / (nx * nx);
}

Matrix activate(const Matrix& bn_out, PredictorActivation act) {
  if (act == PredictorActivation::kRelu) return bn_out.cwiseMax(0.0);
  return bn_out;
}

}  // namespace

std::string_view framework_name(Framework f) {
  return f == Framework::kSimClr ? "simclr" : "simsiam";
}

Framework parse_framework(std::string_view name) {
  if (name == "simclr") return Framework::kSimClr;
  if (name == "simsiam") return Framework::kSimSiam;
  throw ConfigError("unknown contrastive framework '" + std::string(name) + "'");
}

void ContrastiveConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be a positive number");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (predictor_hidden < 1) throw ConfigError("predictor_hidden must be >= 1");
}

PredictorWeights PredictorWeights::init(int dim, int hidden, Rng& rng) {
  PredictorWeights w;
  const auto fill = [&](auto& m, double bound) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
  };
  const double b_in = 1.0 / std::sqrt(static_cast<double>(dim));
  const double b_hidden = 1.0 / std::sqrt(static_cast<double>(hidden));
  w.w1.resize(hidden, dim);
  w.b1.resize(hidden);
  w.w2.resize(dim, hidden);
  w.b2.resize(dim);
  fill(w.w1, b_in);
  fill(w.b1, b_in);
  fill(w.w2, b_hidden);
  fill(w.b2, b_hidden);
  w.gamma = Vector::Ones(hidden);
  w.beta = Vector::Zero(hidden);
  w.running_mean = Vector::Zero(hidden);
  w.running_var = Vector::Ones(hidden);
  return w;
}

bool PredictorWeights::all_finite() const {
  return w1.allFinite() && b1.allFinite() && gamma.allFinite() && beta.allFinite() &&
         running_mean.allFinite() && running_var.allFinite() && w2.allFinite() &&
         b2.allFinite() && (running_var.array() > 0.0).all();
}

bool PredictorWeights::operator==(const PredictorWeights& o) const {
  return w1 == o.w1 && b1 == o.b1 && gamma == o.gamma && beta == o.beta &&
         running_mean == o.running_mean && running_var == o.running_var && w2 == o.w2 &&
         b2 == o.b2 && activation == o.activation;
}

PredictorGrad PredictorGrad::zeros_like(const PredictorWeights& w) {
  PredictorGrad g;
  g.w1 = Matrix::Zero(w.w1.rows(), w.w1.cols());
  g.b1 = Vector::Zero(w.b1.size());
  g.gamma = Vector::Zero(w.gamma.size());
  g.beta = Vector::Zero(w.beta.size());
  g.w2 = Matrix::Zero(w.w2.rows(), w.w2.cols());
  g.b2 = Vector::Zero(w.b2.size());
  return g;
}

PredictorGrad& PredictorGrad::operator+=(const PredictorGrad& o) {
  w1 += o.w1;
  b1 += o.b1;
  gamma += o.gamma;
  beta += o.beta;
  w2 += o.w2;
  b2 += o.b2;
  return *this;
}

PredictorGrad& PredictorGrad::operator*=(double s) {
  w1 *= s;
  b1 *= s;
  gamma *= s;
  beta *= s;
  w2 *= s;
  b2 *= s;
  return *this;
}

Matrix predictor_forward(const Matrix& h, const PredictorWeights& w, PredictorMode mode,
                         PredictorCache* cache) {
  if (h.cols() != w.dim()) throw DataError("predictor: input width does not match weights");
  const Eigen::Index n = h.rows();
  if (mode == PredictorMode::kTrain && n < 2) {
    throw DataError("predictor: train mode needs a batch of at least 2");
  }
  Matrix pre = h * w.w1.transpose();
  pre.rowwise() += w.b1.transpose();

  Vector mean;
  Vector var;
  if (mode == PredictorMode::kTrain) {
    mean = pre.colwise().mean().transpose();
    var = (pre.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
  } else {
    mean = w.running_mean;
    var = w.running_var;
  }
  const Vector inv_std = (var.array() + w.bn_eps).rsqrt().matrix();
  Matrix normalized = (pre.rowwise() - mean.transpose()) * inv_std.asDiagonal();
  Matrix bn_out = normalized * w.gamma.asDiagonal();
  bn_out.rowwise() += w.beta.transpose();

  Matrix z = activate(bn_out, w.activation) * w.w2.transpose();
  z.rowwise() += w.b2.transpose();

  if (cache != nullptr) {
    cache->mode = mode;
    cache->input = h;
    cache->normalized = std::move(normalized);
    cache->bn_out = std::move(bn_out);
    cache->mean = std::move(mean);
    cache->var = std::move(var);
  }
  return z;
}

Matrix predictor_backward(const Matrix& grad_out, const PredictorWeights& w,
                          const PredictorCache& cache, PredictorGrad& grad) {
  const auto n = static_cast<double>(grad_out.rows());
  const Matrix act = activate(cache.bn_out, w.activation);
  grad.w2 += grad_out.transpose() * act;
  grad.b2 += grad_out.colwise().sum().transpose();

  Matrix d_bn = grad_out * w.w2;
  if (w.activation == PredictorActivation::kRelu) {
    d_bn = d_bn.cwiseProduct((cache.bn_out.array() > 0.0).cast<double>().matrix());
  }
  grad.gamma += d_bn.cwiseProduct(cache.normalized).colwise().sum().transpose();
  grad.beta += d_bn.colwise().sum().transpose();

  const Matrix d_norm = d_bn * w.gamma.asDiagonal();
  const Vector inv_std = (cache.var.array() + w.bn_eps).rsqrt().matrix();
  Matrix d_pre;
  if (cache.mode == PredictorMode::kTrain) {
    const Eigen::RowVectorXd sum_d = d_norm.colwise().sum();
    const Eigen::RowVectorXd sum_dx = d_norm.cwiseProduct(cache.normalized).colwise().sum();
    Matrix t = n * d_norm;
    t.rowwise() -= sum_d;
    t -= cache.normalized * sum_dx.asDiagonal();
    d_pre = t * (inv_std / n).asDiagonal();
  } else {
    d_pre = d_norm * inv_std.asDiagonal();
  }
  grad.w1 += d_pre.transpose() * cache.input;
  grad.b1 += d_pre.colwise().sum().transpose();
  return d_pre * w.w1;
}

void update_running_stats(PredictorWeights& w, const PredictorCache& cache) {
  if (cache.mode != PredictorMode::kTrain) return;
  const auto n = static_cast<double>(cache.input.rows());
  const Vector unbiased = cache.var * (n / (n - 1.0));
  w.running_mean = (1.0 - w.bn_momentum) * w.running_mean + w.bn_momentum * cache.mean;
  w.running_var = (1.0 - w.bn_momentum) * w.running_var + w.bn_momentum * unbiased;
}

double cosine_similarity(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DataError("cosine_similarity: length mismatch");
  const double nx = x.norm();
  const double ny = y.norm();
  if (!(nx > 0.0) || !(ny > 0.0)) throw DataError("cosine_similarity: zero-norm vector");
  return std::clamp(x.dot(y) / (nx * ny), -1.0, 1.0);
}

PairLoss nt_xent_loss(const Matrix& h, const Matrix& h_aug, double tau) {
  check_pair_batch(h, h_aug, "nt_xent_loss");
  if (!(tau > 0.0)) throw ConfigError("nt_xent_loss: tau must be positive");
  const Eigen::Index n = h.rows();
  const Vector norm_a = row_norms(h, "nt_xent_loss");
  const Vector norm_b = row_norms(h_aug, "nt_xent_loss");
  const Matrix a = norm_a.cwiseInverse().asDiagonal() * h;
  const Matrix b = norm_b.cwiseInverse().asDiagonal() * h_aug;

  // Transposed logits (column i holds row i), overwritten in place by
  // dL/dlogits = softmax - onehot. Columns keep the per-row work contiguous.
  Matrix g = (b * a.transpose()) / tau;
  PairLoss out;
  out.per_sample.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto col = g.col(i);
    const double m = col.maxCoeff();
    const double lse = m + std::log((col.array() - m).exp().sum());
    out.per_sample[i] = lse - col(i);
    col = (col.array() - lse).exp();
    col(i) -= 1.0;
  }
  out.loss = out.per_sample.sum();

  const Matrix d_a = (g.transpose() * b) / tau;
  const Matrix d_b = (g * a) / tau;
  // Back through row normalization: (I - u u^T) / |x|.
  const auto project = [](const Matrix& unit, const Matrix& d, const Vector& norms) {
    Matrix r = d - (d.cwiseProduct(unit).rowwise().sum()).asDiagonal() * unit;
    return Matrix(norms.cwiseInverse().asDiagonal() * r);
  };
  out.grad_h = project(a, d_a, norm_a);
  out.grad_h_aug = project(b, d_b, norm_b);
  return out;
}

SimSiamLoss simsiam_loss_split(const Matrix& input, const Matrix& input_aug, const Matrix& target,
                               const Matrix& target_aug, const PredictorWeights& w) {
  check_pair_batch(input, input_aug, "simsiam_loss");
  if (target.rows() != input.rows() || target_aug.rows() != input.rows() ||
      target.cols() != input.cols() || target_aug.cols() != input.cols()) {
    throw DataError("simsiam_loss: target shapes differ from inputs");
  }
  row_norms(target, "simsiam_loss");
  row_norms(target_aug, "simsiam_loss");
  SimSiamLoss out;
  const Matrix z = predictor_forward(input, w, PredictorMode::kTrain, &out.cache);
  const Matrix z_aug = predictor_forward(input_aug, w, PredictorMode::kTrain, &out.cache_aug);
  row_norms(z, "simsiam_loss");
  row_norms(z_aug, "simsiam_loss");

  const Eigen::Index n = input.rows();
  out.per_sample.resize(n);
  Matrix d_z(n, z.cols());
  Matrix d_z_aug(n, z.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector zi = z.row(i).transpose();
    const Vector zai = z_aug.row(i).transpose();
    const Vector ti = target.row(i).transpose();
    const Vector tai = target_aug.row(i).transpose();
    out.per_sample[i] = -0.5 * cosine_similarity(zi, tai) - 0.5 * cosine_similarity(zai, ti);
    d_z.row(i) = -0.5 * cosine_grad_x(zi, tai).transpose();
    d_z_aug.row(i) = -0.5 * cosine_grad_x(zai, ti).transpose();
  }
  out.loss = out.per_sample.sum();
  out.predictor = PredictorGrad::zeros_like(w);
  out.grad_h = predictor_backward(d_z, w, out.cache, out.predictor);
  out.grad_h_aug = predictor_backward(d_z_aug, w, out.cache_aug, out.predictor);
  return out;
}

SimSiamLoss simsiam_loss(const Matrix& h, const Matrix& h_aug, const PredictorWeights& w) {
  return simsiam_loss_split(h, h_aug, h, h_aug, w);
}

SimSiamLoss simsiam_loss_as_printed(const Matrix& h, const Matrix& h_aug,
                                    const PredictorWeights& w) {
  check_pair_batch(h, h_aug, "simsiam_loss");
  row_norms(h, "simsiam_loss");
  row_norms(h_aug, "simsiam_loss");
  SimSiamLoss out;
  const Matrix z = predictor_forward(h, w, PredictorMode::kTrain, &out.cache);
  const Matrix z_aug = predictor_forward(h_aug, w, PredictorMode::kTrain, &out.cache_aug);
  row_norms(z, "simsiam_loss");
  row_norms(z_aug, "simsiam_loss");

  const Eigen::Index n = h.rows();
  out.per_sample.resize(n);
  out.grad_h.resize(n, h.cols());
  out.grad_h_aug.resize(n, h.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector hi = h.row(i).transpose();
    const Vector hai = h_aug.row(i).transpose();
    const Vector zi = z.row(i).transpose();
    const Vector zai = z_aug.row(i).transpose();
    out.per_sample[i] = -0.5 * cosine_similarity(hi, zai) - 0.5 * cosine_similarity(hai, zi);
    out.grad_h.row(i) = -0.5 * cosine_grad_x(hi, zai).transpose();
    out.grad_h_aug.row(i) = -0.5 * cosine_grad_x(hai, zi).transpose();
  }
  out.loss = out.per_sample.sum();
  out.predictor = PredictorGrad::zeros_like(w);
  return out;
}

double combined_loss(double backbone_loss, double contrastive_loss, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  return backbone_loss + lambda * contrastive_loss;
}

}  // namespace augdoc
