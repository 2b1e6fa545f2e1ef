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

// Averaged-word-embedding document encoder and its CBOW-with-document
// training objective.
//
// A document embedding is the count-weighted mean of its word columns in U.
// Training predicts each target word from s = mean(U[context]) + h, where h is
// the mean over a random sample of the document's words, scored against the
// output columns of V with negative sampling.

#ifndef AUGDOC_ENCODER_H_
#define AUGDOC_ENCODER_H_

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "augdoc/contrastive.h"
#include "augdoc/corpus.h"
#include "augdoc/random.h"

namespace augdoc {

struct ModelParams {
  Matrix u;  // d x v, word embeddings (one column per word)
  Matrix v;  // d x v, output projections
  PredictorWeights predictor;

  int dim() const { return static_cast<int>(u.rows()); }
  std::size_t vocab_size() const { return static_cast<std::size_t>(u.cols()); }
  bool all_finite() const { return u.allFinite() && v.allFinite() && predictor.all_finite(); }
  bool operator==(const ModelParams& o) const {
    return u == o.u && v == o.v && predictor == o.predictor;
  }

  // U ~ Uniform(-0.5/d, 0.5/d), V = 0. The predictor draws from its own
  // stream so its presence never shifts the embedding initialization.
  static ModelParams init(int dim, std::size_t vocab_size, int predictor_hidden,
                          std::uint64_t seed);
};

struct TrainingWindow {
  WordId target = 0;
  std::vector<WordId> context;     // up to `window` neighbours each side
  std::vector<WordId> doc_sample;  // words drawn from the whole document
};

struct BackboneOptions {
  int window = 6;
  int negatives = 5;
  int doc_sample = 5;
  double dropout = 0.0;  // inverted dropout on the context mean and h
  double subsample = 0.0;  // word2vec-style target subsampling, 0 = off

  void validate() const;
};

// Draws from a fixed discrete distribution over word ids by inverse CDF.
class NoiseSampler {
 public:
  // P(w) proportional to freq(w)^power.
  static NoiseSampler unigram(std::span<const std::int64_t> freq, double power = 0.75);
  static NoiseSampler uniform(std::size_t vocab_size);

  WordId sample(Rng& rng) const;
  double probability(WordId w) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

// Column-sparse gradient accumulator for a d x v matrix.
class SparseColumns {
 public:
  explicit SparseColumns(int dim = 0) : dim_(dim) {}

  // Returns the column for w, zero-initialized on first touch.
  Eigen::Map<Vector> column(WordId w);
  const std::vector<WordId>& columns() const { return order_; }
  Eigen::Map<const Vector> column_at(std::size_t slot) const {
    return {values_.data() + slot * static_cast<std::size_t>(dim_), dim_};
  }
  bool contains(WordId w) const { return slot_.count(w) != 0; }
  int dim() const { return dim_; }
  void clear();

  Matrix to_dense(std::size_t vocab_size) const;

 private:
  int dim_;
  std::vector<WordId> order_;
  std::vector<double> values_;
  std::unordered_map<WordId, std::size_t> slot_;
};

// Dense gradient with a touched-column index, used per mini-batch.
class ColumnGradient {
 public:
  ColumnGradient() = default;
  ColumnGradient(int dim, std::size_t vocab_size);

  void add(const SparseColumns& sparse, double scale = 1.0);
  void add_column(WordId w, const Vector& g, double scale = 1.0);
  // Thread-safe accumulation without locks (relaxed atomic adds).
  void add_concurrent(const SparseColumns& sparse);
  // Clears only touched columns.
  void clear();
  // Rebuilds the touched list from the flags after add_concurrent.
  void finalize_touched();

  const Matrix& values() const { return values_; }
  Matrix& values() { return values_; }
  const std::vector<WordId>& touched() const { return touched_list_; }
  bool is_touched(WordId w) const { return touched_[static_cast<std::size_t>(w)] != 0; }

 private:
  Matrix values_;
  std::vector<unsigned char> touched_;
  std::vector<WordId> touched_list_;
};

// h = (1/T) U x: count-weighted mean of the document's columns. Columns are
// accumulated one token at a time in ascending id order. DataError when
// bow.total == 0.
Vector embed_document(const SparseBow& bow, const Matrix& u);
Vector embed_tokens(std::span<const WordId> tokens, const Matrix& u);

// Embeds every document (rows of the result, in order).
Matrix embed_documents(std::span<const TokenizedDocument> docs, const Matrix& u, int threads = 1);

// One window per target position. The doc sample is drawn uniformly with
// replacement, fresh for each window.
std::vector<TrainingWindow> sample_windows(const TokenizedDocument& doc, int window,
                                           int doc_sample_size, Rng& rng);

// Full-softmax probability of `target`. Reference path, not used in training.
// DataError when both context and doc_sample are empty.
double softmax_probability(WordId target, std::span<const WordId> context,
                           std::span<const WordId> doc_sample, const ModelParams& params);

// Negative-sampling loss for one window, accumulating gradients into du/dv.
// loss = -log sig(v_t.s) - sum_j log sig(-v_nj.s). Negatives that equal the
// target are kept.
double negsample_loss_grad(const TrainingWindow& win, const ModelParams& params, int negatives,
                           const NoiseSampler& noise, Rng& rng, SparseColumns& du,
                           SparseColumns& dv, double dropout = 0.0);

struct WindowLoss {
  double loss = 0.0;
  SparseColumns du;
  SparseColumns dv;
};
WindowLoss negsample_loss_grad(const TrainingWindow& win, const ModelParams& params,
                               int negatives, const NoiseSampler& noise, Rng& rng,
                               double dropout = 0.0);

// Per-document random stream used by the backbone for (epoch, doc).
Rng backbone_stream(std::uint64_t seed, std::int64_t epoch, std::int64_t doc_id);

struct BackboneBatch {
  double loss = 0.0;
  std::int64_t windows = 0;
};

// Sums the window losses of every document in `batch`, accumulating into
// du/dv (which must be sized d x v). Documents are processed in fixed chunks
// reduced in batch order, so with `deterministic` the result does not depend
// on `threads`. Without it, chunks add into the gradient concurrently.
// A non-empty `keep_probability` (per word id) enables target subsampling.
BackboneBatch batch_backbone_loss(std::span<const TokenizedDocument* const> batch,
                                  const ModelParams& params, const BackboneOptions& options,
                                  const NoiseSampler& noise, std::uint64_t seed,
                                  std::int64_t epoch, ColumnGradient& du, ColumnGradient& dv,
                                  int threads = 1, bool deterministic = true,
                                  std::span<const double> keep_probability = {});

// word2vec keep probability min(1, (sqrt(f/(t*N)) + 1) * t*N/f) per word.
std::vector<double> keep_probabilities(std::span<const std::int64_t> freq, double threshold);

}  // namespace augdoc

#endif  // AUGDOC_ENCODER_H_
