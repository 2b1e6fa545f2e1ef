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
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "augdoc/errors.h"
#include "augdoc/eval.h"
#include "augdoc/trainer.h"
#include "synthetic.h"

namespace augdoc {
namespace {

struct Synthetic {
  LabeledCorpus corpus;
  AugmentationLexicon lexicon;

  explicit Synthetic(testing::TwoTopicOptions options = {})
      : corpus(testing::two_topic_corpus(options)), lexicon(testing::two_topic_lexicon(corpus)) {
    // Antonym phrases inside each topic so the default strategy has a table.
    for (WordId w = 0; w < static_cast<WordId>(corpus.vocab.size()); w += 3) {
      const std::string& word = corpus.vocab.word(w);
      const auto other =
          corpus.vocab.find(word.substr(0, 1) + std::to_string((std::stoi(word.substr(1)) + 25) %
                                                               options.words_per_topic));
      if (other) lexicon.add_antonym(w, {*other, *other});
    }
    lexicon.mark_loaded(true, true, false);
  }
};

TrainConfig small_config() {
  TrainConfig c;
  c.dim = 12;
  c.batch_size = 16;
  c.learning_rate = 0.01;
  c.epochs = 3;
  c.patience = 0;
  c.backbone.window = 3;
  c.backbone.negatives = 3;
  c.backbone.doc_sample = 3;
  c.augment.kind = AugmentKind::kWordNet;
  c.predictor_hidden = 8;
  return c;
}

std::string trained_bytes(const Synthetic& s, const TrainConfig& c,
                          const AugmentationLexicon* lex) {
  Trainer t(s.corpus, lex, c);
  t.run();
  return serialize_checkpoint(t.checkpoint());
}

TEST(Trainer, LambdaZeroMatchesDisabledContrastiveBranch) {
  const Synthetic s({.docs_per_topic = 40});
  TrainConfig zero = small_config();
  zero.lambda = 0.0;
  TrainConfig off = small_config();
  off.contrastive_enabled = false;
  EXPECT_EQ(trained_bytes(s, zero, &s.lexicon), trained_bytes(s, off, nullptr));
}

TEST(Trainer, LambdaZeroIgnoresAugmentation) {
  const Synthetic s({.docs_per_topic = 40});
  TrainConfig a = small_config();
  a.lambda = 0.0;
  TrainConfig b = a;
  b.augment.kind = AugmentKind::kAntonym;
  b.augment.antonym_probability = 1.0;
  b.augment_cache_views = 3;
  TrainConfig c = a;
  c.augment_enabled = false;
  const auto ref = trained_bytes(s, a, &s.lexicon);
  EXPECT_EQ(ref, trained_bytes(s, b, &s.lexicon));
  EXPECT_EQ(ref, trained_bytes(s, c, nullptr));
}

TEST(Trainer, RepeatedRunsAreByteIdentical) {
  const Synthetic s({.docs_per_topic = 40});
  for (auto fw : {Framework::kSimClr, Framework::kSimSiam}) {
    TrainConfig c = small_config();
    c.framework = fw;
    EXPECT_EQ(trained_bytes(s, c, &s.lexicon), trained_bytes(s, c, &s.lexicon));
  }
}

TEST(Trainer, ThreadCountDoesNotChangeResults) {
  const Synthetic s({.docs_per_topic = 40});
  for (auto fw : {Framework::kSimClr, Framework::kSimSiam}) {
    TrainConfig one = small_config();
    one.framework = fw;
    TrainConfig four = one;
    four.threads = 4;
    EXPECT_EQ(trained_bytes(s, one, &s.lexicon), trained_bytes(s, four, &s.lexicon));
  }
}

TEST(Trainer, DifferentSeedsDiffer) {
  const Synthetic s({.docs_per_topic = 20});
  TrainConfig a = small_config();
  TrainConfig b = a;
  b.seed = 2;
  EXPECT_NE(trained_bytes(s, a, &s.lexicon), trained_bytes(s, b, &s.lexicon));
}

TEST(Trainer, StepsPerEpochIsCeilNOverBatch) {
  const Synthetic s({.docs_per_topic = 50});  // 100 documents
  for (std::int64_t batch : {1, 7, 16, 100, 4096}) {
    TrainConfig c = small_config();
    c.batch_size = batch;
    c.epochs = 2;
    c.lambda = batch == 1 ? 0.0 : 1.0;
    Trainer t(s.corpus, &s.lexicon, c);
    const auto epochs = t.run();
    const std::int64_t expected = (100 + batch - 1) / batch;
    for (const auto& e : epochs) EXPECT_EQ(e.steps, expected) << "batch " << batch;
    EXPECT_EQ(t.optimizer().step, 2 * expected);
    EXPECT_EQ(static_cast<std::int64_t>(t.steps().size()), 2 * expected);
  }
}

TEST(Trainer, TrailingSingleDocumentBatchSkipsPairLoss) {
  const Synthetic s({.docs_per_topic = 50});
  TrainConfig c = small_config();
  c.batch_size = 33;  // 100 = 3 * 33 + 1
  c.epochs = 1;
  Trainer t(s.corpus, &s.lexicon, c);
  t.run();
  ASSERT_EQ(t.steps().size(), 4u);
  EXPECT_EQ(t.steps().back().batch_docs, 1);
  EXPECT_EQ(t.steps().back().contrastive_loss, 0.0);
  EXPECT_GT(t.steps().front().contrastive_loss, 0.0);
}

TEST(Trainer, DefaultConfigBackboneOnlyLossFalls) {
  const Synthetic s;
  TrainConfig c;
  c.lambda = 0.0;
  c.epochs = 5;
  c.patience = 0;
  Trainer t(s.corpus, &s.lexicon, c);
  const auto epochs = t.run();
  for (const auto& st : t.steps()) EXPECT_TRUE(std::isfinite(st.backbone_loss));
  for (std::size_t e = 1; e < epochs.size(); ++e) {
    EXPECT_LT(epochs[e].mean_backbone_loss, epochs[e - 1].mean_backbone_loss) << "epoch " << e;
  }
}

TEST(Trainer, DefaultConfigJointLossTrace) {
  // With the pair loss on, the first update moves U along the contrastive
  // gradient only (V is still zero), so the backbone mean can tick up once
  // before it falls.
  const Synthetic s;
  TrainConfig c;
  c.epochs = 5;
  c.patience = 0;
  Trainer t(s.corpus, &s.lexicon, c);
  const auto epochs = t.run();
  for (const auto& st : t.steps()) {
    EXPECT_TRUE(std::isfinite(st.backbone_loss));
    EXPECT_TRUE(std::isfinite(st.contrastive_loss));
  }
  for (std::size_t e = 2; e < epochs.size(); ++e) {
    EXPECT_LT(epochs[e].mean_backbone_loss, epochs[e - 1].mean_backbone_loss) << "epoch " << e;
  }
  EXPECT_LT(epochs.back().mean_backbone_loss, epochs.front().mean_backbone_loss);
}

TEST(Trainer, SyntheticTopicsSeparate) {
  const Synthetic s;
  TrainConfig c;
  c.augment.kind = AugmentKind::kWordNet;
  Trainer t(s.corpus, &s.lexicon, c);
  t.run();
  const auto emb = embed_corpus(s.corpus, t.params());
  std::vector<int> labels;
  for (const auto& d : s.corpus.documents) labels.push_back(*d.label);
  const auto sep = testing::topic_separation(emb.vectors, labels);
  EXPECT_GT(sep.within, sep.across);
}

TEST(Trainer, ResumeMatchesUninterruptedRun) {
  const Synthetic s({.docs_per_topic = 30});
  for (auto fw : {Framework::kSimClr, Framework::kSimSiam}) {
    TrainConfig c = small_config();
    c.framework = fw;
    c.epochs = 4;
    Trainer full(s.corpus, &s.lexicon, c);
    full.run();

    TrainConfig first_half = c;
    first_half.epochs = 2;
    Trainer a(s.corpus, &s.lexicon, first_half);
    a.run();
    const auto path = testing::temp_path("resume.ckpt");
    save_checkpoint(path, a.checkpoint());

    Trainer b(s.corpus, &s.lexicon, c);
    b.restore(load_checkpoint(path, s.corpus.vocab.hash()));
    EXPECT_EQ(b.epoch(), 2);
    b.run();
    EXPECT_EQ(serialize_checkpoint(b.checkpoint()), serialize_checkpoint(full.checkpoint()));
  }
}

TEST(Trainer, RestoreRejectsMismatches) {
  const Synthetic s({.docs_per_topic = 10});
  TrainConfig c = small_config();
  c.epochs = 1;
  Trainer a(s.corpus, &s.lexicon, c);
  a.run();
  auto ckpt = a.checkpoint();

  TrainConfig other = c;
  other.tau = 0.5;
  Trainer b(s.corpus, &s.lexicon, other);
  EXPECT_THROW(b.restore(ckpt), ConfigError);

  ckpt.vocab_hash ^= 1;
  Trainer d(s.corpus, &s.lexicon, c);
  EXPECT_THROW(d.restore(ckpt), CheckpointError);
}

TEST(Trainer, ConfigErrorsSurfaceBeforeTraining) {
  const Synthetic s({.docs_per_topic = 10});
  TrainConfig c = small_config();
  EXPECT_THROW(Trainer(s.corpus, nullptr, c), ConfigError);
  AugmentationLexicon synonyms_only = testing::two_topic_lexicon(s.corpus);
  c.augment.kind = AugmentKind::kAntonym;
  EXPECT_THROW(Trainer(s.corpus, &synonyms_only, c), ConfigError);
  c.augment.kind = AugmentKind::kBackTranslation;
  EXPECT_THROW(Trainer(s.corpus, &s.lexicon, c), ConfigError);

  const auto bad = [&](auto mutate) {
    TrainConfig x = small_config();
    mutate(x);
    EXPECT_THROW(Trainer(s.corpus, &s.lexicon, x), ConfigError);
  };
  bad([](TrainConfig& x) { x.dim = 0; });
  bad([](TrainConfig& x) { x.batch_size = 0; });
  bad([](TrainConfig& x) { x.batch_size = 1; });
  bad([](TrainConfig& x) { x.learning_rate = 0.0; });
  bad([](TrainConfig& x) { x.backbone.dropout = 1.0; });
  bad([](TrainConfig& x) { x.tau = 0.0; });
  bad([](TrainConfig& x) { x.lambda = -1.0; });
  bad([](TrainConfig& x) { x.augment_enabled = false; });
  bad([](TrainConfig& x) { x.augment.antonym_probability = 2.0; });
  bad([](TrainConfig& x) { x.epochs = 0; });
  bad([](TrainConfig& x) { x.threads = 0; });
}

TEST(Trainer, NonFiniteLossAborts) {
  const Synthetic s({.docs_per_topic = 20});
  TrainConfig c = small_config();
  c.learning_rate = 1e300;
  c.epochs = 5;
  Trainer t(s.corpus, &s.lexicon, c);
  try {
    t.run();
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("epoch"), std::string::npos);
    EXPECT_NE(what.find("lambda"), std::string::npos);
  }
}

TEST(Trainer, PlateauStopsEarly) {
  // A vanishing step size leaves the loss flat, so the plateau rule fires.
  const Synthetic s({.docs_per_topic = 10});
  TrainConfig c = small_config();
  c.lambda = 0.0;
  c.learning_rate = 1e-300;
  c.epochs = 20;
  c.patience = 2;
  Trainer t(s.corpus, nullptr, c);
  const auto epochs = t.run();
  EXPECT_EQ(epochs.size(), 3u);
  EXPECT_TRUE(epochs.back().stopped_early);
  EXPECT_TRUE(t.finished());

  c.patience = 0;
  c.epochs = 6;
  Trainer never(s.corpus, nullptr, c);
  EXPECT_EQ(never.run().size(), 6u);
}

TEST(Trainer, SimSiamTrainsPredictor) {
  const Synthetic s({.docs_per_topic = 20});
  TrainConfig c = small_config();
  c.framework = Framework::kSimSiam;
  Trainer t(s.corpus, &s.lexicon, c);
  const auto init = ModelParams::init(c.dim, s.corpus.vocab.size(), c.predictor_hidden, c.seed);
  t.run();
  EXPECT_NE(t.params().predictor.w1, init.predictor.w1);
  EXPECT_NE(t.params().predictor.running_mean, init.predictor.running_mean);
  EXPECT_TRUE(t.params().all_finite());

  c.simsiam_as_printed = true;
  Trainer p(s.corpus, &s.lexicon, c);
  p.run();
  EXPECT_EQ(p.params().predictor.w1, init.predictor.w1);
  EXPECT_EQ(p.params().predictor.w2, init.predictor.w2);
  EXPECT_NE(p.params().u, init.u);
}

TEST(Trainer, CachedViewsCycle) {
  const Synthetic s({.docs_per_topic = 10});
  TrainConfig c = small_config();
  c.augment_cache_views = 2;
  Trainer t(s.corpus, &s.lexicon, c);
  const auto& doc = s.corpus.documents[3];
  std::vector<std::vector<WordId>> seen;
  for (std::int64_t e = 0; e < 30; ++e) {
    const auto v = t.augmented_view(doc, e).tokens;
    if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
  }
  EXPECT_LE(seen.size(), 2u);
  t.run();
  EXPECT_TRUE(t.params().all_finite());
}

TEST(Trainer, FreshViewsVaryByEpoch) {
  const Synthetic s({.docs_per_topic = 10});
  Trainer t(s.corpus, &s.lexicon, small_config());
  const auto& doc = s.corpus.documents[3];
  EXPECT_EQ(t.augmented_view(doc, 4).tokens, t.augmented_view(doc, 4).tokens);
  EXPECT_NE(t.augmented_view(doc, 4).tokens, t.augmented_view(doc, 5).tokens);
}

TEST(TrainConfig, DefaultsFollowTheReferenceSettings) {
  const TrainConfig c;
  EXPECT_EQ(c.dim, 100);
  EXPECT_EQ(c.batch_size, 4096);
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.backbone.dropout, 0.3);
  EXPECT_EQ(c.tau, 1.0);
  EXPECT_EQ(c.predictor_hidden, 64);
  EXPECT_EQ(c.epochs, 20);
  EXPECT_EQ(c.patience, 3);
}

TEST(TrainConfig, Presets) {
  struct Row {
    const char* name;
    int window, negatives;
    AugmentKind aug;
    int sample;
  };
  const Row rows[] = {{"r8", 6, 5, AugmentKind::kAntonym, 5},
                      {"r52", 10, 5, AugmentKind::kAntonym, 10},
                      {"mr", 10, 5, AugmentKind::kWordNet, 5},
                      {"ohsumed", 10, 7, AugmentKind::kWordNet, 7},
                      {"20news", 8, 5, AugmentKind::kWordNet, 5},
                      {"imdb", 4, 5, AugmentKind::kPpdb, 15}};
  for (const auto& r : rows) {
    TrainConfig c;
    c.apply_preset(r.name);
    EXPECT_EQ(c.backbone.window, r.window) << r.name;
    EXPECT_EQ(c.backbone.negatives, r.negatives) << r.name;
    EXPECT_EQ(c.augment.kind, r.aug) << r.name;
    EXPECT_EQ(c.backbone.doc_sample, r.sample) << r.name;
  }
  TrainConfig c;
  EXPECT_THROW(c.apply_preset("ag_news"), ConfigError);
}

TEST(TrainConfig, TextRoundTrip) {
  TrainConfig a = small_config();
  a.learning_rate = 0.3;
  a.tau = 0.1;
  a.framework = Framework::kSimSiam;
  a.augment_enabled = false;
  a.lambda = 0.0;
  TrainConfig b;
  for (const auto& [k, v] : a.entries()) b.set(k, v);
  EXPECT_EQ(a.to_text(), b.to_text());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.to_text().find("lr=0.3\n"), std::string::npos);
  EXPECT_THROW(b.set("learning_rate", "1"), ConfigError);
  EXPECT_THROW(b.set("dim", "ten"), ConfigError);
  EXPECT_THROW(b.set("contrastive", "maybe"), ConfigError);
}

TEST(TrainConfig, HashIgnoresRunLengthAndThreads) {
  TrainConfig a = small_config();
  TrainConfig b = a;
  b.threads = 8;
  b.epochs = 50;
  b.patience = 7;
  EXPECT_EQ(a.hash(), b.hash());
  b.tau = 0.2;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(TrainConfig, HashCollapsesInactiveBranch) {
  TrainConfig a = small_config();
  a.lambda = 0.0;
  TrainConfig b = small_config();
  b.contrastive_enabled = false;
  b.tau = 0.3;
  b.augment.kind = AugmentKind::kPpdb;
  EXPECT_EQ(a.hash(), b.hash());
}

}  // namespace
}  // namespace augdoc
