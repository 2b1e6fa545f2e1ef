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

// Mini-batch training of the backbone jointly with the contrastive branch.
//
// Each epoch shuffles the documents and walks them in batches of N. A batch
// contributes the summed window loss of every document plus lambda times the
// contrastive loss between each document and one augmented view of it. One
// optimizer step is taken per batch.

#ifndef AUGDOC_TRAINER_H_
#define AUGDOC_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "augdoc/augment.h"
#include "augdoc/checkpoint.h"
#include "augdoc/contrastive.h"
#include "augdoc/corpus.h"
#include "augdoc/encoder.h"
#include "augdoc/optimizer.h"

namespace augdoc {

struct TrainConfig {
  int dim = 100;
  BackboneOptions backbone{.window = 6, .negatives = 5, .doc_sample = 5, .dropout = 0.3};
  std::int64_t batch_size = 4096;
  double learning_rate = 1e-3;
  int epochs = 20;
  int patience = 3;  // epochs without relative improvement of 1e-4; 0 = never stop early

  double lambda = 1.0;
  double tau = 1.0;
  Framework framework = Framework::kSimClr;
  int predictor_hidden = 64;
  PredictorActivation predictor_activation = PredictorActivation::kRelu;
  bool simsiam_as_printed = false;
  AugmentStrategy augment{.kind = AugmentKind::kAntonym};
  bool augment_enabled = true;  // false: aug=none
  int augment_cache_views = 0;  // 0: fresh view every epoch; K: cycle K views per document
  // Off: the contrastive branch is never built, whatever lambda says.
  bool contrastive_enabled = true;

  std::uint64_t seed = 1;
  int threads = 1;
  bool deterministic = true;

  static constexpr double kPlateauTolerance = 1e-4;

  bool contrastive_active() const { return contrastive_enabled && lambda > 0.0; }

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Window, negatives, augmentation and doc sample for a named dataset.
  void apply_preset(std::string_view name);
  static std::vector<std::string> preset_names();

  // Flat key=value view. Keys match the `set` keys.
  std::vector<std::pair<std::string, std::string>> entries() const;
  // ConfigError for an unknown key or a malformed value.
  void set(std::string_view key, std::string_view value);
  std::string to_text() const;

  // Hash of every field that can change the trained parameters. Thread
  // count, epoch budget and patience are excluded, and contrastive-only
  // fields are collapsed when the branch is inactive.
  std::uint64_t hash() const;

  ContrastiveConfig contrastive() const;
};

struct StepStats {
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  std::int64_t batch_docs = 0;
  double backbone_loss = 0.0;     // summed over windows
  double contrastive_loss = 0.0;  // summed over documents
  std::int64_t windows = 0;
};

struct EpochStats {
  std::int64_t epoch = 0;  // 0-based index of the epoch just completed
  std::int64_t steps = 0;
  std::int64_t windows = 0;
  double backbone_loss = 0.0;
  double contrastive_loss = 0.0;
  double mean_backbone_loss = 0.0;  // per window
  bool stopped_early = false;
};

class Trainer {
 public:
  // `lexicon` may be null when the contrastive branch is inactive. Validates
  // the configuration and the lexicon before any parameter is touched.
  Trainer(const LabeledCorpus& corpus, const AugmentationLexicon* lexicon, TrainConfig config);

  // Continues from a checkpoint written by a run with the same config hash
  // and vocabulary.
  void restore(Checkpoint ckpt);

  EpochStats run_epoch();
  // Runs epochs until the budget is spent or the plateau rule fires.
  std::vector<EpochStats> run(const std::function<void(const EpochStats&)>& on_epoch = {});

  bool finished() const;
  std::int64_t epoch() const { return epoch_; }
  const ModelParams& params() const { return params_; }
  const OptimizerState& optimizer() const { return optimizer_; }
  const TrainConfig& config() const { return config_; }
  const std::vector<StepStats>& steps() const { return steps_; }
  std::int64_t missing_paraphrases() const { return counters_.missing_paraphrases.load(); }
  Checkpoint checkpoint() const;

  // The view used for `doc` in `epoch`.
  TokenizedDocument augmented_view(const TokenizedDocument& doc, std::int64_t epoch) const;

 private:
  StepStats step(std::span<const TokenizedDocument* const> batch);
  double contrastive_step(std::span<const TokenizedDocument* const> batch);
  void scatter(const TokenizedDocument& doc, const Eigen::Ref<const Vector>& grad, double scale);

  const LabeledCorpus* corpus_;
  const AugmentationLexicon* lexicon_;
  TrainConfig config_;
  NoiseSampler noise_;
  std::vector<double> keep_;
  ModelParams params_;
  OptimizerState optimizer_;
  ModelGradients grads_;
  std::int64_t epoch_ = 0;
  EarlyStopState early_stop_;
  std::vector<StepStats> steps_;
  std::vector<std::vector<TokenizedDocument>> cached_views_;
  mutable AugmentCounters counters_;
};

// Convenience wrapper: constructs a Trainer and runs it to completion.
ModelParams train(const LabeledCorpus& corpus, const AugmentationLexicon* lexicon,
                  const TrainConfig& config);

}  // namespace augdoc

#endif  // AUGDOC_TRAINER_H_
