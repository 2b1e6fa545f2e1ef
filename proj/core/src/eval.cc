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

#include "augdoc/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <ceres/ceres.h>

#include "augdoc/errors.h"
#include "augdoc/parallel.h"
#include "augdoc/random.h"
#include "binary_io.h"

namespace augdoc {
namespace {

constexpr std::string_view kEmbeddingMagic = "AUGDEMB1";
constexpr std::uint32_t kEmbeddingVersion = 1;

void check_labels(const Matrix& x, std::span<const int> labels, int num_classes) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw DataError("label count does not match the number of rows");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw DataError("label out of range");
  }
}

class LogisticCost final : public ceres::FirstOrderFunction {
 public:
  LogisticCost(const Matrix& x, std::span<const int> labels, int k, double c)
      : x_(x), labels_(labels), k_(k), c_(c) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const auto n = static_cast<std::size_t>(NumParameters());
    *cost = logistic_objective({parameters, n}, x_, labels_, k_, c_,
                               gradient ? std::span<double>(gradient, n) : std::span<double>());
    return std::isfinite(*cost);
  }
  int NumParameters() const override { return k_ * static_cast<int>(x_.cols()) + k_; }

 private:
  const Matrix& x_;
  std::span<const int> labels_;
  int k_;
  double c_;
};

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::int64_t parse_id(const std::string& s, const std::string& path, std::size_t line) {
  std::size_t pos = 0;
  std::int64_t id = 0;
  try {
    id = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (s.empty() || pos != s.size()) throw ParseError(path, line, "invalid doc_id '" + s + "'");
  return id;
}

// Reads `doc_id<TAB>value` lines.
std::vector<std::pair<std::int64_t, std::string>> read_side_file(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::pair<std::int64_t, std::string>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path, n, "missing TAB separator");
    out.emplace_back(parse_id(line.substr(0, tab), path, n), line.substr(tab + 1));
  }
  return out;
}

double squared_distance(const Matrix& x, Eigen::Index i, const Matrix& c, Eigen::Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

struct Assignment {
  double inertia = 0.0;
  bool changed = false;
};

Assignment assign(const Matrix& x, const Matrix& centroids, std::vector<int>& labels) {
  Assignment a;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = squared_distance(x, i, centroids, 0);
    for (Eigen::Index j = 1; j < centroids.rows(); ++j) {
      const double dist = squared_distance(x, i, centroids, j);
      if (dist < best_d) {
        best_d = dist;
        best = static_cast<int>(j);
      }
    }
    auto& slot = labels[static_cast<std::size_t>(i)];
    a.changed = a.changed || slot != best;
    slot = best;
    a.inertia += best_d;
  }
  return a;
}

Matrix plus_plus_seeds(const Matrix& x, int k, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  Matrix c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(uniform_index(rng, n)));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(x, static_cast<Eigen::Index>(i), c, j - 1));
      total += nearest[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double r = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(uniform_index(rng, n));
    }
    c.row(j) = x.row(static_cast<Eigen::Index>(pick));
  }
  return c;
}

KMeansResult lloyd(const Matrix& x, int k, Rng& rng, int max_iterations) {
  KMeansResult r;
  r.centroids = plus_plus_seeds(x, k, rng);
  r.assignment.assign(static_cast<std::size_t>(x.rows()), -1);
  for (int it = 0; it < max_iterations; ++it) {
    const Assignment a = assign(x, r.centroids, r.assignment);
    r.inertia = a.inertia;
    r.inertia_trace.push_back(a.inertia);
    if (!a.changed) break;
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int j = r.assignment[static_cast<std::size_t>(i)];
      sums.row(j) += x.row(i);
      ++counts[static_cast<std::size_t>(j)];
    }
    // An empty cluster keeps its previous centroid.
    for (int j = 0; j < k; ++j) {
      const auto cnt = counts[static_cast<std::size_t>(j)];
      if (cnt > 0) r.centroids.row(j) = sums.row(j) / static_cast<double>(cnt);
    }
  }
  return r;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

std::vector<int> compact(std::span<const int> labels, int& classes) {
  std::unordered_map<int, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = ids.try_emplace(l, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  classes = static_cast<int>(ids.size());
  return out;
}

}  // namespace

void EmbeddingSet::validate() const {
  if (static_cast<std::size_t>(vectors.rows()) != doc_ids.size()) {
    throw DataError("embedding rows do not match the number of ids");
  }
  if (!vectors.allFinite()) throw DataError("embeddings contain non-finite values");
}

std::optional<std::size_t> EmbeddingSet::find(std::int64_t doc_id) const {
  const auto it = std::find(doc_ids.begin(), doc_ids.end(), doc_id);
  if (it == doc_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - doc_ids.begin());
}

EmbeddingSet embed_corpus(const LabeledCorpus& corpus, const ModelParams& params, int threads) {
  EmbeddingSet s;
  s.doc_ids.reserve(corpus.documents.size());
  for (const auto& d : corpus.documents) s.doc_ids.push_back(d.doc_id);
  s.vectors = embed_documents(corpus.documents, params.u, threads);
  return s;
}

void export_embeddings(const EmbeddingSet& set, const std::string& path, EmbeddingFormat format) {
  set.validate();
  if (format == EmbeddingFormat::kBinary) {
    internal::ByteWriter w;
    w.bytes(kEmbeddingMagic);
    w.u32(kEmbeddingVersion);
    w.u64(set.size());
    w.u32(static_cast<std::uint32_t>(set.dim()));
    for (auto id : set.doc_ids) w.i64(id);
    w.matrix(set.vectors);
    w.seal();
    internal::write_file_atomic(path, w.data());
    return;
  }
  auto out = open_out(path);
  out.precision(17);
  out << set.size() << ' ' << set.dim() << '\n';
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << set.doc_ids[i];
    for (Eigen::Index j = 0; j < set.vectors.cols(); ++j) {
      out << ' ' << set.vectors(static_cast<Eigen::Index>(i), j);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

EmbeddingSet import_embeddings(const std::string& path) {
  const std::string bytes = internal::read_file(path);
  EmbeddingSet s;
  if (std::string_view(bytes).substr(0, kEmbeddingMagic.size()) == kEmbeddingMagic) {
    internal::ByteReader r(bytes);
    r.verify_seal();
    r.bytes(kEmbeddingMagic.size());
    if (r.u32() != kEmbeddingVersion) {
      throw CheckpointError(CheckpointError::Kind::kVersionMismatch,
                            "unsupported embedding file version in " + path);
    }
    const std::uint64_t n = r.u64();
    const std::uint32_t d = r.u32();
    if (r.remaining() != n * 8 + n * d * 8) {
      internal::ByteReader::corrupt("embedding payload size does not match header in " + path);
    }
    s.doc_ids.resize(n);
    for (auto& id : s.doc_ids) id = r.i64();
    s.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    r.matrix(s.vectors);
    return s;
  }

  std::istringstream in(bytes);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(path, 1, "missing 'n d' header");
  std::istringstream header(line);
  std::int64_t n = -1;
  std::int64_t d = -1;
  if (!(header >> n >> d) || n < 0 || d < 0) throw ParseError(path, 1, "malformed 'n d' header");
  s.doc_ids.resize(static_cast<std::size_t>(n));
  s.vectors.resize(n, d);
  for (std::int64_t i = 0; i < n; ++i) {
    ++line_no;
    if (!std::getline(in, line)) throw ParseError(path, line_no, "fewer rows than the header says");
    std::istringstream row(line);
    if (!(row >> s.doc_ids[static_cast<std::size_t>(i)])) {
      throw ParseError(path, line_no, "missing doc_id");
    }
    for (std::int64_t j = 0; j < d; ++j) {
      if (!(row >> s.vectors(i, j))) throw ParseError(path, line_no, "too few values");
    }
    std::string extra;
    if (row >> extra) throw ParseError(path, line_no, "too many values");
  }
  return s;
}

void write_labels(const LabeledCorpus& corpus, const std::string& path) {
  auto out = open_out(path);
  for (const auto& d : corpus.documents) {
    if (d.label) out << d.doc_id << '\t' << corpus.label_names[static_cast<std::size_t>(*d.label)] << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_splits(const LabeledCorpus& corpus, const std::string& path) {
  auto out = open_out(path);
  for (const auto& d : corpus.documents) out << d.doc_id << '\t' << split_name(d.split) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::unordered_map<std::int64_t, std::string> read_labels(const std::string& path) {
  std::unordered_map<std::int64_t, std::string> out;
  for (auto& [id, label] : read_side_file(path)) {
    if (label.empty()) throw ParseError(path, 0, "empty label for doc " + std::to_string(id));
    out[id] = std::move(label);
  }
  return out;
}

std::unordered_map<std::int64_t, Split> read_splits(const std::string& path) {
  std::unordered_map<std::int64_t, Split> out;
  for (auto& [id, split] : read_side_file(path)) {
    try {
      out[id] = parse_split(split);
    } catch (const Error& e) {
      throw ParseError(path, 0, "doc " + std::to_string(id) + ": " + e.what());
    }
  }
  return out;
}

std::vector<int> LogisticRegression::predict(const Matrix& x) const {
  if (x.cols() != weights.cols()) throw DataError("feature dimension does not match the model");
  const Matrix scores = (x * weights.transpose()).rowwise() + bias.transpose();
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index arg = 0;
    scores.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

double logistic_objective(std::span<const double> theta, const Matrix& x,
                          std::span<const int> labels, int num_classes, double c,
                          std::span<double> gradient) {
  const auto k = static_cast<Eigen::Index>(num_classes);
  const Eigen::Index d = x.cols();
  if (theta.size() != static_cast<std::size_t>(k * d + k)) {
    throw DataError("logistic_objective: parameter vector has the wrong size");
  }
  check_labels(x, labels, num_classes);
  const Eigen::Map<const Matrix> w(theta.data(), k, d);
  const Eigen::Map<const Vector> b(theta.data() + k * d, k);

  Matrix p = (x * w.transpose()).rowwise() + b.transpose();  // n x K scores
  double loss = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    const double z = p.row(i).sum();
    const int y = labels[static_cast<std::size_t>(i)];
    loss += std::log(z) - (std::log(p(i, y)));
    p.row(i) /= z;
    p(i, y) -= 1.0;  // p now holds softmax - onehot
  }
  if (!gradient.empty()) {
    if (gradient.size() != theta.size()) throw DataError("logistic_objective: gradient size");
    Eigen::Map<Matrix> gw(gradient.data(), k, d);
    Eigen::Map<Vector> gb(gradient.data() + k * d, k);
    gw = c * (p.transpose() * x) + w;
    gb = c * p.colwise().sum().transpose();
  }
  return c * loss + 0.5 * w.squaredNorm();
}

LogisticRegression fit_logistic_regression(const Matrix& x, std::span<const int> labels,
                                           const LogisticOptions& options) {
  if (labels.empty()) throw DataError("no training examples");
  if (!(options.c > 0.0)) throw ConfigError("regularization C must be > 0");
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  check_labels(x, labels, k);
  std::vector<int> seen(static_cast<std::size_t>(k), 0);
  for (int y : labels) seen[static_cast<std::size_t>(y)] = 1;
  if (std::count(seen.begin(), seen.end(), 1) < 2) {
    throw DataError("logistic regression needs at least two classes; found one");
  }

  const auto d = static_cast<int>(x.cols());
  std::vector<double> theta(static_cast<std::size_t>(k * d + k), 0.0);
  ceres::GradientProblem problem(new LogisticCost(x, labels, k, options.c));
  ceres::GradientProblemSolver::Options opts;
  opts.line_search_direction_type = ceres::LBFGS;
  opts.max_num_iterations = options.max_iterations;
  opts.gradient_tolerance = options.gradient_tolerance;
  opts.function_tolerance = 1e-16;
  opts.parameter_tolerance = 1e-16;
  opts.logging_type = ceres::SILENT;
  opts.minimizer_progress_to_stdout = false;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(opts, problem, theta.data(), &summary);

  LogisticRegression model;
  model.weights = Eigen::Map<const Matrix>(theta.data(), k, d);
  model.bias = Eigen::Map<const Vector>(theta.data() + static_cast<std::ptrdiff_t>(k) * d, k);
  model.iterations = static_cast<int>(summary.iterations.size());
  return model;
}

double classification_error(const LogisticRegression& model, const Matrix& x,
                            std::span<const int> labels) {
  return 1.0 - classification_accuracy(model, x, labels);
}

double classification_accuracy(const LogisticRegression& model, const Matrix& x,
                               std::span<const int> labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw DataError("label count does not match the number of rows");
  }
  if (labels.empty()) throw DataError("no test examples");
  const auto pred = model.predict(x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

KMeansResult kmeans_cluster(const Matrix& x, int k, std::uint64_t seed, int restarts,
                            int max_iterations, int threads) {
  if (k < 1) throw DataError("k must be >= 1");
  if (k > x.rows()) {
    throw DataError("k = " + std::to_string(k) + " exceeds the number of points (" +
                    std::to_string(x.rows()) + ")");
  }
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  std::vector<KMeansResult> runs(static_cast<std::size_t>(restarts));
  parallel_for(runs.size(), threads, [&](std::size_t r) {
    Rng rng = derive_stream(seed, StreamTag::kKMeans, {static_cast<std::uint64_t>(r)});
    runs[r] = lloyd(x, k, rng, max_iterations);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  return std::move(runs[best]);
}

double nmi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("nmi: labelings have different lengths");
  if (a.empty()) throw DataError("nmi: empty labelings");
  int ka = 0;
  int kb = 0;
  const auto ca = compact(a, ka);
  const auto cb = compact(b, kb);
  if (ka == 1 && kb == 1) return 1.0;
  if (ka == 1 || kb == 1) return 0.0;

  const auto n = static_cast<double>(a.size());
  std::vector<double> joint(static_cast<std::size_t>(ka * kb), 0.0);
  std::vector<double> pa(static_cast<std::size_t>(ka), 0.0);
  std::vector<double> pb(static_cast<std::size_t>(kb), 0.0);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    joint[static_cast<std::size_t>(ca[i] * kb + cb[i])] += 1.0;
    pa[static_cast<std::size_t>(ca[i])] += 1.0;
    pb[static_cast<std::size_t>(cb[i])] += 1.0;
  }
  // Terms are summed in sorted order so that nmi(a, b) == nmi(b, a) exactly.
  std::vector<double> terms;
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const double c = joint[static_cast<std::size_t>(i * kb + j)];
      if (c > 0.0) {
        terms.push_back((c / n) * std::log(c * n / (pa[static_cast<std::size_t>(i)] *
                                                    pb[static_cast<std::size_t>(j)])));
      }
    }
  }
  std::sort(terms.begin(), terms.end());
  double mi = 0.0;
  for (double t : terms) mi += t;
  const double denom = std::sqrt(entropy(pa, n) * entropy(pb, n));
  return std::clamp(mi / denom, 0.0, 1.0);
}

}  // namespace augdoc
