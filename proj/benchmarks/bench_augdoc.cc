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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "augdoc/augment.h"
#include "augdoc/contrastive.h"
#include "augdoc/corpus.h"
#include "augdoc/encoder.h"
#include "augdoc/trainer.h"

namespace augdoc {
namespace {

// Zipf-ish random documents over `vocab` words.
LabeledCorpus random_corpus(int docs, int vocab, int length, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RawDocument> raw;
  for (int i = 0; i < docs; ++i) {
    RawDocument d;
    d.label = i % 2 == 0 ? "even" : "odd";
    d.split = Split::kTrain;
    for (int t = 0; t < length; ++t) {
      const double u = uniform01(rng);
      d.tokens.push_back("w" + std::to_string(static_cast<int>(vocab * u * u)));
    }
    raw.push_back(std::move(d));
  }
  return make_corpus(raw, nullptr, 1);
}

Matrix random_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (auto& x : m.reshaped()) x = uniform01(rng) - 0.5;
  return m;
}

void BM_EmbedDocuments(benchmark::State& state) {
  const auto corpus = random_corpus(static_cast<int>(state.range(0)), 5000, 100, 1);
  const auto params = ModelParams::init(100, corpus.vocab.size(), 0, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(embed_documents(corpus.documents, params.u));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EmbedDocuments)->Arg(256)->Arg(4096);

void BM_BatchBackboneLoss(benchmark::State& state) {
  const auto corpus = random_corpus(256, 5000, 100, 2);
  Rng rng(3);
  auto params = ModelParams::init(100, corpus.vocab.size(), 0, 1);
  for (auto& x : params.v.reshaped()) x = 0.01 * (uniform01(rng) - 0.5);
  std::vector<const TokenizedDocument*> batch;
  for (const auto& d : corpus.documents) batch.push_back(&d);
  const auto noise = NoiseSampler::unigram(corpus.vocab.frequencies());
  const BackboneOptions options{.window = 6, .negatives = 5, .doc_sample = 5, .dropout = 0.3};
  ColumnGradient du(100, corpus.vocab.size()), dv(100, corpus.vocab.size());
  const int threads = static_cast<int>(state.range(0));
  std::int64_t windows = 0;
  for (auto _ : state) {
    du.clear();
    dv.clear();
    windows += batch_backbone_loss(batch, params, options, noise, 1, 0, du, dv, threads).windows;
  }
  state.SetItemsProcessed(windows);
}
BENCHMARK(BM_BatchBackboneLoss)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_NtXentLoss(benchmark::State& state) {
  const Matrix h = random_rows(state.range(0), 100, 4);
  const Matrix ha = random_rows(state.range(0), 100, 5);
  for (auto _ : state) benchmark::DoNotOptimize(nt_xent_loss(h, ha, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NtXentLoss)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_SimSiamLoss(benchmark::State& state) {
  const Matrix h = random_rows(state.range(0), 100, 6);
  const Matrix ha = random_rows(state.range(0), 100, 7);
  Rng rng(8);
  const auto w = PredictorWeights::init(100, 64, rng);
  for (auto _ : state) benchmark::DoNotOptimize(simsiam_loss(h, ha, w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimSiamLoss)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_SynonymAugment(benchmark::State& state) {
  const auto corpus = random_corpus(512, 2000, 100, 9);
  AugmentationLexicon lex(corpus.vocab);
  for (WordId w = 0; w + 1 < static_cast<WordId>(corpus.vocab.size()); w += 2) {
    const WordId other[] = {w + 1};
    lex.add_synonyms(w, other);
  }
  lex.mark_loaded(true, false, false);
  Rng rng(10);
  for (auto _ : state) {
    for (const auto& d : corpus.documents) {
      benchmark::DoNotOptimize(augment(d, {.kind = AugmentKind::kWordNet}, lex, rng));
    }
  }
  state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_SynonymAugment);

void BM_TrainEpoch(benchmark::State& state) {
  const auto corpus = random_corpus(1024, 3000, 80, 11);
  AugmentationLexicon lex(corpus.vocab);
  lex.mark_loaded(true, false, false);
  TrainConfig c;
  c.dim = 50;
  c.batch_size = 256;
  c.epochs = 1 << 20;
  c.patience = 0;
  c.augment.kind = AugmentKind::kWordNet;
  c.lambda = static_cast<double>(state.range(0));
  Trainer t(corpus, &lex, c);
  for (auto _ : state) benchmark::DoNotOptimize(t.run_epoch());
}
BENCHMARK(BM_TrainEpoch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace augdoc

BENCHMARK_MAIN();
