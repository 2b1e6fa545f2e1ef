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

#include "augdoc/encoder.h"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "augdoc/errors.h"
#include "augdoc/parallel.h"

namespace augdoc {
namespace {

constexpr std::size_t kChunkDocs = 16;

// log(1 + exp(x)) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector column_mean(std::span<const WordId> ids, const Matrix& u) {
  Vector acc = Vector::Zero(u.rows());
  for (WordId w : ids) acc += u.col(w);
  if (!ids.empty()) acc /= static_cast<double>(ids.size());
  return acc;
}

Vector dropout_mask(int dim, double rate, Rng& rng) {
  Vector mask(dim);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (int i = 0; i < dim; ++i) mask[i] = uniform01(rng) < rate ? 0.0 : keep_scale;
  return mask;
}

}  // namespace

ModelParams ModelParams::init(int dim, std::size_t vocab_size, int predictor_hidden,
                              std::uint64_t seed) {
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
  ModelParams p;
  const auto v = static_cast<Eigen::Index>(vocab_size);
  p.u.resize(dim, v);
  Rng rng = derive_stream(seed, StreamTag::kInit);
  const double bound = 0.5 / dim;
  for (Eigen::Index j = 0; j < v; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) p.u(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
  }
  p.v = Matrix::Zero(dim, v);
  Rng prng = derive_stream(seed, StreamTag::kPredictorInit);
  p.predictor = PredictorWeights::init(dim, predictor_hidden, prng);
  return p;
}

void BackboneOptions::validate() const {
  if (window < 1) throw ConfigError("window must be >= 1");
  if (negatives < 1) throw ConfigError("negatives must be >= 1");
  if (doc_sample < 1) throw ConfigError("doc_sample must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(subsample >= 0.0)) throw ConfigError("subsample must be >= 0");
}

NoiseSampler NoiseSampler::unigram(std::span<const std::int64_t> freq, double power) {
  if (freq.empty()) throw DataError("noise distribution over an empty vocabulary");
  NoiseSampler s;
  s.cdf_.resize(freq.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    acc += std::pow(static_cast<double>(freq[i]), power);
    s.cdf_[i] = acc;
  }
  for (double& c : s.cdf_) c /= acc;
  s.cdf_.back() = 1.0;
  return s;
}

NoiseSampler NoiseSampler::uniform(std::size_t vocab_size) {
  std::vector<std::int64_t> ones(vocab_size, 1);
  return unigram(ones, 1.0);
}

WordId NoiseSampler::sample(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<WordId>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                      static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
}

double NoiseSampler::probability(WordId w) const {
  const auto i = static_cast<std::size_t>(w);
  return i == 0 ? cdf_[0] : cdf_[i] - cdf_[i - 1];
}

Eigen::Map<Vector> SparseColumns::column(WordId w) {
  auto [it, inserted] = slot_.try_emplace(w, order_.size());
  if (inserted) {
    order_.push_back(w);
    values_.resize(values_.size() + static_cast<std::size_t>(dim_), 0.0);
  }
  return {values_.data() + it->second * static_cast<std::size_t>(dim_), dim_};
}

void SparseColumns::clear() {
  order_.clear();
  values_.clear();
  slot_.clear();
}

Matrix SparseColumns::to_dense(std::size_t vocab_size) const {
  Matrix m = Matrix::Zero(dim_, static_cast<Eigen::Index>(vocab_size));
  for (std::size_t s = 0; s < order_.size(); ++s) m.col(order_[s]) = column_at(s);
  return m;
}

ColumnGradient::ColumnGradient(int dim, std::size_t vocab_size)
    : values_(Matrix::Zero(dim, static_cast<Eigen::Index>(vocab_size))),
      touched_(vocab_size, 0) {}

void ColumnGradient::add(const SparseColumns& sparse, double scale) {
  const auto& cols = sparse.columns();
  for (std::size_t s = 0; s < cols.size(); ++s) {
    const WordId w = cols[s];
    values_.col(w) += scale * sparse.column_at(s);
    if (!touched_[static_cast<std::size_t>(w)]) {
      touched_[static_cast<std::size_t>(w)] = 1;
      touched_list_.push_back(w);
    }
  }
}

void ColumnGradient::add_column(WordId w, const Vector& g, double scale) {
  values_.col(w) += scale * g;
  if (!touched_[static_cast<std::size_t>(w)]) {
    touched_[static_cast<std::size_t>(w)] = 1;
    touched_list_.push_back(w);
  }
}

void ColumnGradient::add_concurrent(const SparseColumns& sparse) {
  const auto& cols = sparse.columns();
  const Eigen::Index d = values_.rows();
  for (std::size_t s = 0; s < cols.size(); ++s) {
    const WordId w = cols[s];
    const auto src = sparse.column_at(s);
    double* dst = values_.col(w).data();
    for (Eigen::Index i = 0; i < d; ++i) {
      std::atomic_ref<double>(dst[i]).fetch_add(src[i], std::memory_order_relaxed);
    }
    std::atomic_ref<unsigned char>(touched_[static_cast<std::size_t>(w)])
        .store(1, std::memory_order_relaxed);
  }
}

void ColumnGradient::finalize_touched() {
  touched_list_.clear();
  for (std::size_t w = 0; w < touched_.size(); ++w) {
    if (touched_[w]) touched_list_.push_back(static_cast<WordId>(w));
  }
}

void ColumnGradient::clear() {
  for (WordId w : touched_list_) {
    values_.col(w).setZero();
    touched_[static_cast<std::size_t>(w)] = 0;
  }
  touched_list_.clear();
}

Vector embed_document(const SparseBow& bow, const Matrix& u) {
  if (bow.total <= 0) throw DataError("embed_document: empty document");
  Vector acc = Vector::Zero(u.rows());
  for (std::size_t j = 0; j < bow.indices.size(); ++j) {
    const auto col = u.col(bow.indices[j]);
    for (std::int32_t c = 0; c < bow.values[j]; ++c) acc += col;
  }
  return acc / static_cast<double>(bow.total);
}

Vector embed_tokens(std::span<const WordId> tokens, const Matrix& u) {
  return embed_document(to_bow(tokens, static_cast<std::size_t>(u.cols())), u);
}

Matrix embed_documents(std::span<const TokenizedDocument> docs, const Matrix& u, int threads) {
  Matrix out(static_cast<Eigen::Index>(docs.size()), u.rows());
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = embed_tokens(docs[i].tokens, u).transpose();
  });
  return out;
}

std::vector<TrainingWindow> sample_windows(const TokenizedDocument& doc, int window,
                                           int doc_sample_size, Rng& rng) {
  if (window < 1 || doc_sample_size < 1) {
    throw ConfigError("sample_windows: window and doc_sample_size must be >= 1");
  }
  const auto n = static_cast<std::ptrdiff_t>(doc.tokens.size());
  std::vector<TrainingWindow> out;
  out.reserve(doc.tokens.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    TrainingWindow win;
    win.target = doc.tokens[static_cast<std::size_t>(t)];
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, t - window);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, t + window);
    for (std::ptrdiff_t c = lo; c <= hi; ++c) {
      if (c != t) win.context.push_back(doc.tokens[static_cast<std::size_t>(c)]);
    }
    win.doc_sample.resize(static_cast<std::size_t>(doc_sample_size));
    for (auto& s : win.doc_sample) {
      s = doc.tokens[uniform_index(rng, doc.tokens.size())];
    }
    out.push_back(std::move(win));
  }
  return out;
}

double softmax_probability(WordId target, std::span<const WordId> context,
                           std::span<const WordId> doc_sample, const ModelParams& params) {
  if (context.empty() && doc_sample.empty()) {
    throw DataError("softmax_probability: empty context and empty document sample");
  }
  if (target < 0 || static_cast<std::size_t>(target) >= params.vocab_size()) {
    throw DataError("softmax_probability: target outside vocabulary");
  }
  const Vector s = column_mean(context, params.u) + column_mean(doc_sample, params.u);
  const Vector scores = params.v.transpose() * s;
  const double m = scores.maxCoeff();
  const double z = (scores.array() - m).exp().sum();
  return std::exp(scores[target] - m) / z;
}

double negsample_loss_grad(const TrainingWindow& win, const ModelParams& params, int negatives,
                           const NoiseSampler& noise, Rng& rng, SparseColumns& du,
                           SparseColumns& dv, double dropout) {
  if (win.context.empty() && win.doc_sample.empty()) {
    throw DataError("negsample_loss_grad: window has neither context nor document sample");
  }
  const int d = params.dim();
  const Vector ctx = column_mean(win.context, params.u);
  const Vector h = column_mean(win.doc_sample, params.u);
  Vector mask_ctx;
  Vector mask_h;
  Vector s;
  if (dropout > 0.0) {
    mask_ctx = dropout_mask(d, dropout, rng);
    mask_h = dropout_mask(d, dropout, rng);
    s = mask_ctx.cwiseProduct(ctx) + mask_h.cwiseProduct(h);
  } else {
    s = ctx + h;
  }

  Vector grad_s = Vector::Zero(d);
  const auto score_word = [&](WordId w, bool positive) {
    const auto vw = params.v.col(w);
    const double score = vw.dot(s);
    double loss;
    double g;
    if (positive) {
      loss = softplus(-score);
      g = sigmoid(score) - 1.0;
    } else {
      loss = softplus(score);
      g = sigmoid(score);
    }
    dv.column(w) += g * s;
    grad_s += g * vw;
    return loss;
  };

  double loss = score_word(win.target, true);
  for (int j = 0; j < negatives; ++j) loss += score_word(noise.sample(rng), false);

  if (!win.context.empty()) {
    Vector g_ctx = grad_s / static_cast<double>(win.context.size());
    if (dropout > 0.0) g_ctx = g_ctx.cwiseProduct(mask_ctx);
    for (WordId c : win.context) du.column(c) += g_ctx;
  }
  if (!win.doc_sample.empty()) {
    Vector g_h = grad_s / static_cast<double>(win.doc_sample.size());
    if (dropout > 0.0) g_h = g_h.cwiseProduct(mask_h);
    for (WordId w : win.doc_sample) du.column(w) += g_h;
  }
  return loss;
}

WindowLoss negsample_loss_grad(const TrainingWindow& win, const ModelParams& params,
                               int negatives, const NoiseSampler& noise, Rng& rng,
                               double dropout) {
  WindowLoss out{0.0, SparseColumns(params.dim()), SparseColumns(params.dim())};
  out.loss = negsample_loss_grad(win, params, negatives, noise, rng, out.du, out.dv, dropout);
  return out;
}

Rng backbone_stream(std::uint64_t seed, std::int64_t epoch, std::int64_t doc_id) {
  return derive_stream(seed, StreamTag::kBackbone,
                       {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(doc_id)});
}

namespace {

struct ChunkResult {
  double loss = 0.0;
  std::int64_t windows = 0;
  SparseColumns du;
  SparseColumns dv;
};

void run_chunk(std::span<const TokenizedDocument* const> docs, const ModelParams& params,
               const BackboneOptions& options, const NoiseSampler& noise,
               std::span<const double> keep_probability, std::uint64_t seed, std::int64_t epoch,
               ChunkResult& out) {
  for (const TokenizedDocument* doc : docs) {
    Rng rng = backbone_stream(seed, epoch, doc->doc_id);
    const auto windows = sample_windows(*doc, options.window, options.doc_sample, rng);
    for (const auto& win : windows) {
      if (!keep_probability.empty() &&
          uniform01(rng) >= keep_probability[static_cast<std::size_t>(win.target)]) {
        continue;
      }
      out.loss += negsample_loss_grad(win, params, options.negatives, noise, rng, out.du, out.dv,
                                      options.dropout);
      ++out.windows;
    }
  }
}

}  // namespace

BackboneBatch batch_backbone_loss(std::span<const TokenizedDocument* const> batch,
                                  const ModelParams& params, const BackboneOptions& options,
                                  const NoiseSampler& noise, std::uint64_t seed,
                                  std::int64_t epoch, ColumnGradient& du, ColumnGradient& dv,
                                  int threads, bool deterministic,
                                  std::span<const double> keep_probability) {
  if (batch.empty()) throw DataError("batch_backbone_loss: empty batch");
  options.validate();
  const std::size_t chunks = (batch.size() + kChunkDocs - 1) / kChunkDocs;
  const auto chunk_docs = [&](std::size_t c) {
    const std::size_t lo = c * kChunkDocs;
    return batch.subspan(lo, std::min(kChunkDocs, batch.size() - lo));
  };

  BackboneBatch result;
  if (deterministic) {
    // Waves of `threads` chunks; each wave is reduced in chunk order.
    const std::size_t wave = static_cast<std::size_t>(std::max(threads, 1));
    std::vector<ChunkResult> slots(std::min(wave, chunks));
    for (std::size_t first = 0; first < chunks; first += wave) {
      const std::size_t count = std::min(wave, chunks - first);
      parallel_for(count, threads, [&](std::size_t k) {
        ChunkResult& r = slots[k];
        r.loss = 0.0;
        r.windows = 0;
        r.du = SparseColumns(params.dim());
        r.dv = SparseColumns(params.dim());
        run_chunk(chunk_docs(first + k), params, options, noise, keep_probability, seed, epoch,
                  r);
      });
      for (std::size_t k = 0; k < count; ++k) {
        result.loss += slots[k].loss;
        result.windows += slots[k].windows;
        du.add(slots[k].du);
        dv.add(slots[k].dv);
      }
    }
  } else {
    std::vector<double> losses(chunks, 0.0);
    std::vector<std::int64_t> windows(chunks, 0);
    parallel_for(chunks, threads, [&](std::size_t c) {
      ChunkResult r{0.0, 0, SparseColumns(params.dim()), SparseColumns(params.dim())};
      run_chunk(chunk_docs(c), params, options, noise, keep_probability, seed, epoch, r);
      du.add_concurrent(r.du);
      dv.add_concurrent(r.dv);
      losses[c] = r.loss;
      windows[c] = r.windows;
    });
    du.finalize_touched();
    dv.finalize_touched();
    for (std::size_t c = 0; c < chunks; ++c) {
      result.loss += losses[c];
      result.windows += windows[c];
    }
  }
  return result;
}

std::vector<double> keep_probabilities(std::span<const std::int64_t> freq, double threshold) {
  std::vector<double> keep(freq.size(), 1.0);
  if (threshold <= 0.0) return keep;
  double total = 0.0;
  for (auto f : freq) total += static_cast<double>(f);
  for (std::size_t i = 0; i < freq.size(); ++i) {
    const double ratio = static_cast<double>(freq[i]) / (threshold * total);
    keep[i] = std::min(1.0, (std::sqrt(ratio) + 1.0) / ratio);
  }
  return keep;
}

}  // namespace augdoc
