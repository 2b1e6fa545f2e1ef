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

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "augdoc/errors.h"
#include "augdoc/eval.h"
#include "synthetic.h"

namespace augdoc {
namespace {

// Independent reference: entropies and mutual information from joint counts.
double reference_nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
    pab[{a[i], b[i]}] += 1.0 / n;
  }
  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (auto [k, p] : pa) ha -= p * std::log(p);
  for (auto [k, p] : pb) hb -= p * std::log(p);
  for (auto [k, p] : pab) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  return mi / std::sqrt(ha * hb);
}

double inertia_of(const Matrix& x, const std::vector<int>& assign, int k) {
  Matrix c = Matrix::Zero(k, x.cols());
  std::vector<int> count(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    c.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
    ++count[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
  }
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    if (count[static_cast<std::size_t>(j)] > 0) c.row(j) /= count[static_cast<std::size_t>(j)];
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    total += (x.row(i) - c.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return total;
}

Matrix two_clouds(Rng& rng, int per_cloud, double offset, std::vector<int>& labels) {
  Matrix x(2 * per_cloud, 2);
  labels.clear();
  for (int i = 0; i < 2 * per_cloud; ++i) {
    const int c = i < per_cloud ? 0 : 1;
    x(i, 0) = (c == 0 ? -offset : offset) + (uniform01(rng) - 0.5);
    x(i, 1) = (uniform01(rng) - 0.5);
    labels.push_back(c);
  }
  return x;
}

TEST(Logistic, SeparableTwoClassesFitPerfectly) {
  Rng rng(1);
  std::vector<int> y;
  const Matrix x = two_clouds(rng, 30, 3.0, y);
  const auto model = fit_logistic_regression(x, y);
  EXPECT_EQ(classification_error(model, x, y), 0.0);
}

TEST(Logistic, RandomLabelsGiveChanceError) {
  double total = 0.0;
  constexpr int kSeeds = 20;
  for (int s = 0; s < kSeeds; ++s) {
    Rng rng(100 + static_cast<std::uint64_t>(s));
    const Matrix xtr = testing::random_matrix(200, 5, rng);
    const Matrix xte = testing::random_matrix(200, 5, rng);
    std::vector<int> ytr(200), yte(200);
    for (auto& v : ytr) v = static_cast<int>(uniform_index(rng, 2));
    for (auto& v : yte) v = static_cast<int>(uniform_index(rng, 2));
    total += classification_error(fit_logistic_regression(xtr, ytr), xte, yte);
  }
  EXPECT_NEAR(total / kSeeds, 0.5, 0.05);
}

TEST(Logistic, ObjectiveMatchesDirectFormula) {
  Rng rng(2);
  const int n = 7, d = 3, k = 4;
  const Matrix x = testing::random_matrix(n, d, rng);
  const std::vector<int> y{0, 1, 2, 3, 1, 2, 0};
  const Vector theta = testing::random_matrix(k * d + k, 1, rng);
  const double c = 0.7;
  double expected = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> s(k);
    for (int j = 0; j < k; ++j) {
      s[static_cast<std::size_t>(j)] = theta(k * d + j);
      for (int f = 0; f < d; ++f) s[static_cast<std::size_t>(j)] += theta(f * k + j) * x(i, f);
    }
    double z = 0.0;
    for (double v : s) z += std::exp(v);
    expected += -c * std::log(std::exp(s[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])]) / z);
  }
  for (int j = 0; j < k * d; ++j) expected += 0.5 * theta(j) * theta(j);
  EXPECT_NEAR(logistic_objective({theta.data(), static_cast<std::size_t>(theta.size())}, x, y, k,
                                 c),
              expected, 1e-12);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 9, d = 4, k = 3;
    const Matrix x = testing::random_matrix(n, d, rng, 2.0);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(uniform_index(rng, k));
    const Vector theta = testing::random_matrix(k * d + k, 1, rng);
    Vector grad(theta.size());
    logistic_objective({theta.data(), static_cast<std::size_t>(theta.size())}, x, y, k, 1.3,
                       {grad.data(), static_cast<std::size_t>(grad.size())});
    const auto f = [&](const Vector& t) {
      return logistic_objective({t.data(), static_cast<std::size_t>(t.size())}, x, y, k, 1.3);
    };
    EXPECT_LT(testing::relative_error(grad, testing::central_difference(f, theta)), 1e-5);
  }
}

TEST(Logistic, ConvergesToStationaryPoint) {
  Rng rng(4);
  std::vector<int> y;
  const Matrix x = two_clouds(rng, 40, 0.3, y);
  const auto model = fit_logistic_regression(x, y);
  Vector theta(model.weights.size() + model.bias.size());
  theta << model.weights.reshaped(), model.bias;
  Vector grad(theta.size());
  logistic_objective({theta.data(), static_cast<std::size_t>(theta.size())}, x, y, 2, 1.0,
                     {grad.data(), static_cast<std::size_t>(grad.size())});
  EXPECT_LT(grad.norm(), 1e-5);
  EXPECT_LE(model.iterations, 500);
}

TEST(Logistic, SingleClassIsAnError) {
  const Matrix x = Matrix::Ones(3, 2);
  const std::vector<int> y{1, 1, 1};
  EXPECT_THROW(fit_logistic_regression(x, y), DataError);
}

TEST(ClassificationError, AllRightAndAllWrong) {
  LogisticRegression m;
  m.weights = Matrix::Identity(2, 2);
  m.bias = Vector::Zero(2);
  Matrix x(3, 2);
  x << 1, 0, 0, 1, 2, 0;
  const std::vector<int> right{0, 1, 0}, wrong{1, 0, 1};
  EXPECT_EQ(classification_error(m, x, right), 0.0);
  EXPECT_EQ(classification_error(m, x, wrong), 1.0);
}

TEST(ClassificationError, ComplementsAccuracyExactly) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    LogisticRegression m;
    m.weights = testing::random_matrix(3, 4, rng);
    m.bias = testing::random_matrix(3, 1, rng);
    const Matrix x = testing::random_matrix(37, 4, rng);
    std::vector<int> y(37);
    for (auto& v : y) v = static_cast<int>(uniform_index(rng, 3));
    EXPECT_EQ(classification_error(m, x, y) + classification_accuracy(m, x, y), 1.0);
  }
}

TEST(Eval, EmbeddingsAreNotMutated) {
  Rng rng(6);
  std::vector<int> y;
  const Matrix x = two_clouds(rng, 20, 2.0, y);
  const Matrix copy = x;
  fit_logistic_regression(x, y);
  kmeans_cluster(x, 2, 1);
  EXPECT_EQ(x, copy);
}

TEST(KMeans, SeparatedClouds) {
  Rng rng(7);
  std::vector<int> y;
  const Matrix x = two_clouds(rng, 50, 10.0, y);
  const auto r = kmeans_cluster(x, 2, 3);
  EXPECT_EQ(nmi(r.assignment, y), 1.0);
}

TEST(KMeans, SingleCluster) {
  Rng rng(8);
  const Matrix x = testing::random_matrix(10, 3, rng);
  const auto r = kmeans_cluster(x, 1, 1);
  EXPECT_EQ(r.assignment, std::vector<int>(10, 0));
  EXPECT_TRUE(r.centroids.row(0).isApprox(x.colwise().mean(), 1e-12));
}

TEST(KMeans, MatchesExhaustiveBestPartition) {
  Matrix x(6, 1);
  x << 0, 0.1, 0.2, 10, 10.1, 10.2;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_assign;
  for (int mask = 1; mask < (1 << 6) - 1; ++mask) {
    std::vector<int> a(6);
    for (int i = 0; i < 6; ++i) a[static_cast<std::size_t>(i)] = (mask >> i) & 1;
    const double in = inertia_of(x, a, 2);
    if (in < best) {
      best = in;
      best_assign = a;
    }
  }
  const auto r = kmeans_cluster(x, 2, 11);
  EXPECT_NEAR(r.inertia, best, 1e-12);
  EXPECT_EQ(nmi(r.assignment, best_assign), 1.0);
}

TEST(KMeans, InertiaNeverIncreases) {
  Rng rng(9);
  const Matrix x = testing::random_matrix(300, 4, rng);
  const auto r = kmeans_cluster(x, 6, 5, 3);
  ASSERT_GE(r.inertia_trace.size(), 2u);
  for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
    EXPECT_LE(r.inertia_trace[i], r.inertia_trace[i - 1] * (1.0 + 1e-12));
  }
  EXPECT_NEAR(r.inertia, inertia_of(x, r.assignment, 6), 1e-9);
}

TEST(KMeans, DeterministicForSeedAndThreads) {
  Rng rng(10);
  const Matrix x = testing::random_matrix(200, 3, rng);
  const auto a = kmeans_cluster(x, 4, 42, 8, 300, 1);
  const auto b = kmeans_cluster(x, 4, 42, 8, 300, 4);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.inertia, b.inertia);
}

TEST(KMeans, TooManyClusters) {
  EXPECT_THROW(kmeans_cluster(Matrix::Ones(3, 2), 4, 1), DataError);
  EXPECT_THROW(kmeans_cluster(Matrix::Ones(3, 2), 0, 1), DataError);
}

TEST(Nmi, IdenticalAndPermuted) {
  const std::vector<int> a{0, 0, 1, 1, 2, 2}, b{2, 2, 0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(nmi(a, a), 1.0);
  EXPECT_DOUBLE_EQ(nmi(a, b), 1.0);
}

TEST(Nmi, MatchesReference) {
  const std::vector<int> a{0, 0, 1, 1}, b{0, 1, 1, 1};
  EXPECT_NEAR(nmi(a, b), reference_nmi(a, b), 1e-15);
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> x(40), y(40);
    for (auto& v : x) v = static_cast<int>(uniform_index(rng, 4));
    for (auto& v : y) v = static_cast<int>(uniform_index(rng, 3));
    EXPECT_NEAR(nmi(x, y), reference_nmi(x, y), 1e-12);
    EXPECT_EQ(nmi(x, y), nmi(y, x));
  }
}

TEST(Nmi, DegenerateCases) {
  const std::vector<int> c{3, 3, 3}, d{1, 1, 1}, v{0, 1, 2};
  EXPECT_EQ(nmi(c, d), 1.0);
  EXPECT_EQ(nmi(c, v), 0.0);
  EXPECT_EQ(nmi(v, c), 0.0);
  EXPECT_THROW(nmi(c, std::vector<int>{1, 2}), DataError);
}

EmbeddingSet sample_set() {
  Rng rng(12);
  EmbeddingSet s;
  s.doc_ids = {0, 5, 2, 9};
  s.vectors = testing::random_matrix(4, 3, rng, 1e3);
  s.vectors(1, 1) = 1.0 / 3.0;
  return s;
}

TEST(Embeddings, TextRoundTrip) {
  const auto s = sample_set();
  const auto path = testing::temp_path("emb.txt");
  export_embeddings(s, path, EmbeddingFormat::kText);
  const auto r = import_embeddings(path);
  EXPECT_EQ(r.doc_ids, s.doc_ids);
  EXPECT_TRUE(r.vectors.isApprox(s.vectors, 1e-6));
  EXPECT_LE((r.vectors - s.vectors).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Embeddings, BinaryRoundTripIsBitIdentical) {
  const auto s = sample_set();
  const auto path = testing::temp_path("emb.bin");
  export_embeddings(s, path, EmbeddingFormat::kBinary);
  const auto r = import_embeddings(path);
  EXPECT_EQ(r.doc_ids, s.doc_ids);
  EXPECT_EQ(r.vectors, s.vectors);
}

TEST(Embeddings, EmptySetIsHeaderOnly) {
  EmbeddingSet s;
  s.vectors = Matrix(0, 5);
  const auto path = testing::temp_path("empty.txt");
  export_embeddings(s, path, EmbeddingFormat::kText);
  std::ifstream in(path);
  const std::string content((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(content, "0 5\n");
  EXPECT_EQ(import_embeddings(path).size(), 0u);
}

TEST(Embeddings, MalformedTextNamesLine) {
  const auto path = testing::temp_path("bad_emb.txt");
  std::ofstream(path) << "2 2\n0 1 2\n1 3\n";
  try {
    import_embeddings(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(import_embeddings("/nonexistent/emb.txt"), IoError);
}

TEST(Embeddings, CorpusEmbeddingAndSideFiles) {
  const auto corpus = testing::two_topic_corpus({.docs_per_topic = 10});
  const auto params = ModelParams::init(5, corpus.vocab.size(), 0, 3);
  const auto set = embed_corpus(corpus, params);
  ASSERT_EQ(set.size(), corpus.documents.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(set.vectors.row(static_cast<Eigen::Index>(i)).transpose(),
              embed_tokens(corpus.documents[i].tokens, params.u));
  }
  const auto lp = testing::temp_path("labels.tsv");
  const auto sp = testing::temp_path("splits.tsv");
  write_labels(corpus, lp);
  write_splits(corpus, sp);
  const auto labels = read_labels(lp);
  const auto splits = read_splits(sp);
  for (const auto& d : corpus.documents) {
    EXPECT_EQ(labels.at(d.doc_id), corpus.label_names[static_cast<std::size_t>(*d.label)]);
    EXPECT_EQ(splits.at(d.doc_id), d.split);
  }
}

}  // namespace
}  // namespace augdoc
