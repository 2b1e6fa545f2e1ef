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

// Evaluation of frozen embeddings: multinomial logistic regression and
// k-means with normalized mutual information, plus embedding file I/O.

#ifndef AUGDOC_EVAL_H_
#define AUGDOC_EVAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "augdoc/contrastive.h"
#include "augdoc/corpus.h"
#include "augdoc/encoder.h"

namespace augdoc {

struct EmbeddingSet {
  std::vector<std::int64_t> doc_ids;
  Matrix vectors;  // n x d, row i belongs to doc_ids[i]

  std::size_t size() const { return doc_ids.size(); }
  int dim() const { return static_cast<int>(vectors.cols()); }
  // DataError unless rows == ids and every entry is finite.
  void validate() const;
  // Row index of a document id, if present.
  std::optional<std::size_t> find(std::int64_t doc_id) const;
};

// Embeds every document in the corpus with U.
EmbeddingSet embed_corpus(const LabeledCorpus& corpus, const ModelParams& params, int threads = 1);

enum class EmbeddingFormat { kText, kBinary };

// Text: a "n d" header line, then "doc_id v1 ... vd" per row with 17
// significant digits. Binary: "AUGDEMB1", u32 version, u64 n, u32 d, n i64
// ids, n*d f64 row-major, u64 FNV-1a checksum; little-endian.
void export_embeddings(const EmbeddingSet& set, const std::string& path, EmbeddingFormat format);
// Detects the format from the leading bytes.
EmbeddingSet import_embeddings(const std::string& path);

// `doc_id<TAB>label` and `doc_id<TAB>train|test|unlabeled` side files.
void write_labels(const LabeledCorpus& corpus, const std::string& path);
void write_splits(const LabeledCorpus& corpus, const std::string& path);
std::unordered_map<std::int64_t, std::string> read_labels(const std::string& path);
std::unordered_map<std::int64_t, Split> read_splits(const std::string& path);

struct LogisticOptions {
  double c = 1.0;  // inverse regularization strength: C * sum CE + 1/2 |W|^2
  int max_iterations = 500;
  double gradient_tolerance = 1e-5;
};

struct LogisticRegression {
  Matrix weights;  // K x d
  Vector bias;     // K, not regularized
  int iterations = 0;

  int classes() const { return static_cast<int>(weights.rows()); }
  int dim() const { return static_cast<int>(weights.cols()); }
  std::vector<int> predict(const Matrix& x) const;
};

// Objective and gradient at packed parameters theta = [vec(W) (col-major), b]
// for K = num_classes. Exposed for gradient checking.
double logistic_objective(std::span<const double> theta, const Matrix& x,
                          std::span<const int> labels, int num_classes, double c,
                          std::span<double> gradient = {});

// Labels are class ids in [0, K). DataError when fewer than two distinct
// classes are present or the shapes disagree.
LogisticRegression fit_logistic_regression(const Matrix& x, std::span<const int> labels,
                                           const LogisticOptions& options = {});

double classification_error(const LogisticRegression& model, const Matrix& x,
                            std::span<const int> labels);
double classification_accuracy(const LogisticRegression& model, const Matrix& x,
                               std::span<const int> labels);

struct KMeansResult {
  std::vector<int> assignment;
  Matrix centroids;  // k x d
  double inertia = 0.0;
  // Inertia after each assignment step of the winning restart.
  std::vector<double> inertia_trace;
};

// k-means++ seeding then Lloyd iterations; the restart with the lowest
// inertia wins (earliest on ties). Restarts run in parallel with their own
// streams, so the result depends only on the seed. DataError if k < 1 or
// k > n.
KMeansResult kmeans_cluster(const Matrix& x, int k, std::uint64_t seed, int restarts = 10,
                            int max_iterations = 300, int threads = 1);

// I(a;b) / sqrt(H(a) H(b)). 1 when both labelings are constant, 0 when only
// one is. DataError on a length mismatch or empty input.
double nmi(std::span<const int> a, std::span<const int> b);

struct EvalReport {
  std::string task;    // "classify" or "cluster"
  std::string metric;  // e.g. "error_rate", "nmi"
  double value = 0.0;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

}  // namespace augdoc

#endif  // AUGDOC_EVAL_H_
