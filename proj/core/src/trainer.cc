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

#include "augdoc/trainer.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "augdoc/errors.h"
#include "augdoc/hash.h"
#include "augdoc/parallel.h"

namespace augdoc {
namespace {

struct Preset {
  std::string_view name;
  int window;
  int negatives;
  AugmentKind augment;
  int doc_sample;
};

constexpr Preset kPresets[] = {
    {"r8", 6, 5, AugmentKind::kAntonym, 5},      {"r52", 10, 5, AugmentKind::kAntonym, 10},
    {"mr", 10, 5, AugmentKind::kWordNet, 5},     {"ohsumed", 10, 7, AugmentKind::kWordNet, 7},
    {"20news", 8, 5, AugmentKind::kWordNet, 5},  {"imdb", 4, 5, AugmentKind::kPpdb, 15},
};

// Shortest text that reads back to the same double.
std::string fmt_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  return parse_number<double>(key, value);
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(value) + "'");
}

std::string_view bool_name(bool b) { return b ? "true" : "false"; }

std::string_view activation_name(PredictorActivation a) {
  return a == PredictorActivation::kRelu ? "relu" : "none";
}

bool all_finite_columns(const ColumnGradient& g) {
  for (WordId w : g.touched()) {
    if (!g.values().col(w).allFinite()) return false;
  }
  return true;
}

}  // namespace

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  backbone.validate();
  if (batch_size < 1) throw ConfigError("batch must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("lr must be a positive number");
  }
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (augment_cache_views < 0) throw ConfigError("aug_cache_views must be >= 0");
  contrastive().validate();
  augment.validate();
  if (contrastive_active()) {
    if (!augment_enabled) throw ConfigError("lambda > 0 requires an augmentation strategy (aug != none)");
    if (batch_size < 2) throw ConfigError("the contrastive branch needs batch >= 2");
  }
}

void TrainConfig::apply_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) {
      backbone.window = p.window;
      backbone.negatives = p.negatives;
      backbone.doc_sample = p.doc_sample;
      augment.kind = p.augment;
      augment_enabled = true;
      return;
    }
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> TrainConfig::preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

std::vector<std::pair<std::string, std::string>> TrainConfig::entries() const {
  const AugmentStrategy& s = augment;
  return {
      {"dim", std::to_string(dim)},
      {"window", std::to_string(backbone.window)},
      {"negatives", std::to_string(backbone.negatives)},
      {"doc_sample", std::to_string(backbone.doc_sample)},
      {"dropout", fmt_double(backbone.dropout)},
      {"subsample", fmt_double(backbone.subsample)},
      {"batch", std::to_string(batch_size)},
      {"lr", fmt_double(learning_rate)},
      {"epochs", std::to_string(epochs)},
      {"patience", std::to_string(patience)},
      {"lambda", fmt_double(lambda)},
      {"tau", fmt_double(tau)},
      {"framework", std::string(framework_name(framework))},
      {"predictor_hidden", std::to_string(predictor_hidden)},
      {"predictor_activation", std::string(activation_name(predictor_activation))},
      {"simsiam_as_printed", std::string(bool_name(simsiam_as_printed))},
      {"aug", augment_enabled ? std::string(augment_kind_name(augment.kind)) : "none"},
      {"antonym_p", fmt_double(s.antonym_probability)},
      {"uninformative_threshold", std::to_string(s.uninformative_threshold)},
      {"aug_cache_views", std::to_string(augment_cache_views)},
      {"contrastive", std::string(bool_name(contrastive_enabled))},
      {"seed", std::to_string(seed)},
      {"threads", std::to_string(threads)},
      {"deterministic", std::string(bool_name(deterministic))},
  };
}

void TrainConfig::set(std::string_view key, std::string_view value) {
  if (key == "dim") {
    dim = parse_number<int>(key, value);
  } else if (key == "window") {
    backbone.window = parse_number<int>(key, value);
  } else if (key == "negatives") {
    backbone.negatives = parse_number<int>(key, value);
  } else if (key == "doc_sample") {
    backbone.doc_sample = parse_number<int>(key, value);
  } else if (key == "dropout") {
    backbone.dropout = parse_real(key, value);
  } else if (key == "subsample") {
    backbone.subsample = parse_real(key, value);
  } else if (key == "batch") {
    batch_size = parse_number<std::int64_t>(key, value);
  } else if (key == "lr") {
    learning_rate = parse_real(key, value);
  } else if (key == "epochs") {
    epochs = parse_number<int>(key, value);
  } else if (key == "patience") {
    patience = parse_number<int>(key, value);
  } else if (key == "lambda") {
    lambda = parse_real(key, value);
  } else if (key == "tau") {
    tau = parse_real(key, value);
  } else if (key == "framework") {
    framework = parse_framework(value);
  } else if (key == "predictor_hidden") {
    predictor_hidden = parse_number<int>(key, value);
  } else if (key == "predictor_activation") {
    if (value == "relu") {
      predictor_activation = PredictorActivation::kRelu;
    } else if (value == "none") {
      predictor_activation = PredictorActivation::kNone;
    } else {
      throw ConfigError("predictor_activation must be relu or none");
    }
  } else if (key == "simsiam_as_printed") {
    simsiam_as_printed = parse_bool(key, value);
  } else if (key == "aug") {
    if (value == "none") {
      augment_enabled = false;
    } else {
      augment.kind = parse_augment_kind(value);
      augment_enabled = true;
    }
  } else if (key == "antonym_p") {
    augment.antonym_probability = parse_real(key, value);
  } else if (key == "uninformative_threshold") {
    augment.uninformative_threshold = parse_number<std::int64_t>(key, value);
  } else if (key == "aug_cache_views") {
    augment_cache_views = parse_number<int>(key, value);
  } else if (key == "contrastive") {
    contrastive_enabled = parse_bool(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    threads = parse_number<int>(key, value);
  } else if (key == "deterministic") {
    deterministic = parse_bool(key, value);
  } else if (key == "preset") {
    apply_preset(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t TrainConfig::hash() const {
  TrainConfig c = *this;
  c.threads = 1;
  c.epochs = 1;
  c.patience = 0;
  if (!c.contrastive_active()) {
    const TrainConfig defaults;
    c.lambda = 0.0;
    c.contrastive_enabled = false;
    c.tau = defaults.tau;
    c.framework = defaults.framework;
    c.simsiam_as_printed = false;
    c.augment = defaults.augment;
    c.augment_enabled = false;
    c.augment_cache_views = 0;
  }
  Fnv1a h;
  for (const auto& [k, v] : c.entries()) {
    h.update(k);
    h.update("=");
    h.update(v);
    h.update("\n");
  }
  return h.digest();
}

ContrastiveConfig TrainConfig::contrastive() const {
  return {.framework = framework,
          .tau = tau,
          .lambda = lambda,
          .predictor_hidden = predictor_hidden,
          .simsiam_as_printed = simsiam_as_printed};
}

Trainer::Trainer(const LabeledCorpus& corpus, const AugmentationLexicon* lexicon,
                 TrainConfig config)
    : corpus_(&corpus), lexicon_(lexicon), config_(std::move(config)) {
  config_.validate();
  if (corpus.documents.empty()) throw DataError("cannot train on an empty corpus");
  if (corpus.vocab.size() == 0) throw DataError("cannot train with an empty vocabulary");
  if (config_.contrastive_active()) {
    if (lexicon_ == nullptr) throw ConfigError("the contrastive branch needs an augmentation lexicon");
    require_table(*lexicon_, config_.augment.kind);
  }
  noise_ = NoiseSampler::unigram(corpus.vocab.frequencies());
  if (config_.backbone.subsample > 0.0) {
    keep_ = keep_probabilities(corpus.vocab.frequencies(), config_.backbone.subsample);
  }
  params_ = ModelParams::init(config_.dim, corpus.vocab.size(), config_.predictor_hidden,
                              config_.seed);
  params_.predictor.activation = config_.predictor_activation;
  optimizer_ = OptimizerState::zeros_like(params_);
  grads_.u = ColumnGradient(config_.dim, corpus.vocab.size());
  grads_.v = ColumnGradient(config_.dim, corpus.vocab.size());

  if (config_.contrastive_active() && config_.augment_cache_views > 0) {
    const auto& docs = corpus.documents;
    cached_views_.resize(docs.size());
    parallel_for(docs.size(), config_.threads, [&](std::size_t i) {
      auto& views = cached_views_[i];
      views.reserve(static_cast<std::size_t>(config_.augment_cache_views));
      for (int j = 0; j < config_.augment_cache_views; ++j) {
        Rng rng = derive_stream(config_.seed, StreamTag::kAugmentCache,
                                {static_cast<std::uint64_t>(docs[i].doc_id),
                                 static_cast<std::uint64_t>(j)});
        views.push_back(augment(docs[i], config_.augment, *lexicon_, rng, &counters_));
      }
    });
  }
}

void Trainer::restore(Checkpoint ckpt) {
  if (ckpt.vocab_hash != corpus_->vocab.hash()) {
    throw CheckpointError(CheckpointError::Kind::kVocabularyMismatch,
                          "checkpoint was trained with a different vocabulary");
  }
  if (ckpt.config_hash != config_.hash()) {
    throw ConfigError("checkpoint was written with a different training configuration");
  }
  if (ckpt.params.dim() != config_.dim || ckpt.params.vocab_size() != corpus_->vocab.size()) {
    throw ConfigError("checkpoint dimensions do not match the configuration");
  }
  params_ = std::move(ckpt.params);
  optimizer_ = std::move(ckpt.optimizer);
  epoch_ = ckpt.epoch;
  early_stop_ = ckpt.early_stop;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.params = params_;
  c.optimizer = optimizer_;
  c.config_hash = config_.hash();
  c.vocab_hash = corpus_->vocab.hash();
  c.seed = config_.seed;
  c.epoch = epoch_;
  c.early_stop = early_stop_;
  return c;
}

bool Trainer::finished() const { return early_stop_.stopped || epoch_ >= config_.epochs; }

TokenizedDocument Trainer::augmented_view(const TokenizedDocument& doc,
                                          std::int64_t epoch) const {
  if (!config_.augment_enabled || lexicon_ == nullptr) {
    throw ConfigError("no augmentation strategy configured");
  }
  Rng rng = derive_stream(config_.seed, StreamTag::kAugment,
                          {static_cast<std::uint64_t>(epoch),
                           static_cast<std::uint64_t>(doc.doc_id)});
  if (!cached_views_.empty()) {
    const auto& views = cached_views_[static_cast<std::size_t>(doc.doc_id)];
    return views[static_cast<std::size_t>(uniform_index(rng, views.size()))];
  }
  return augment(doc, config_.augment, *lexicon_, rng, &counters_);
}

void Trainer::scatter(const TokenizedDocument& doc, const Eigen::Ref<const Vector>& grad,
                      double scale) {
  const SparseBow bow = to_bow(doc.tokens, params_.vocab_size());
  const double inv_t = scale / static_cast<double>(bow.total);
  const Vector g = grad;
  for (std::size_t j = 0; j < bow.indices.size(); ++j) {
    grads_.u.add_column(bow.indices[j], g, inv_t * bow.values[j]);
  }
}

double Trainer::contrastive_step(std::span<const TokenizedDocument* const> batch) {
  const std::size_t n = batch.size();
  const int d = config_.dim;
  std::vector<TokenizedDocument> views(n);
  Matrix h(static_cast<Eigen::Index>(n), d);
  Matrix h_aug(static_cast<Eigen::Index>(n), d);
  parallel_for(n, config_.threads, [&](std::size_t i) {
    views[i] = augmented_view(*batch[i], epoch_);
    const auto r = static_cast<Eigen::Index>(i);
    h.row(r) = embed_tokens(batch[i]->tokens, params_.u).transpose();
    h_aug.row(r) = embed_tokens(views[i].tokens, params_.u).transpose();
  });

  const double lambda = config_.lambda;
  Matrix grad_h;
  Matrix grad_h_aug;
  double loss = 0.0;
  if (config_.framework == Framework::kSimClr) {
    PairLoss pl = nt_xent_loss(h, h_aug, config_.tau);
    loss = pl.loss;
    grad_h = std::move(pl.grad_h);
    grad_h_aug = std::move(pl.grad_h_aug);
  } else {
    SimSiamLoss sl = config_.simsiam_as_printed
                         ? simsiam_loss_as_printed(h, h_aug, params_.predictor)
                         : simsiam_loss(h, h_aug, params_.predictor);
    loss = sl.loss;
    grad_h = std::move(sl.grad_h);
    grad_h_aug = std::move(sl.grad_h_aug);
    if (!config_.simsiam_as_printed) {
      sl.predictor *= lambda;
      grads_.predictor = std::move(sl.predictor);
    }
    update_running_stats(params_.predictor, sl.cache);
    update_running_stats(params_.predictor, sl.cache_aug);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    scatter(*batch[i], grad_h.row(r).transpose(), lambda);
    scatter(views[i], grad_h_aug.row(r).transpose(), lambda);
  }
  return loss;
}

StepStats Trainer::step(std::span<const TokenizedDocument* const> batch) {
  grads_.u.clear();
  grads_.v.clear();
  grads_.predictor.reset();

  StepStats s;
  s.epoch = epoch_;
  s.batch_docs = static_cast<std::int64_t>(batch.size());
  const BackboneBatch bb =
      batch_backbone_loss(batch, params_, config_.backbone, noise_, config_.seed, epoch_, grads_.u,
                          grads_.v, config_.threads, config_.deterministic, keep_);
  s.backbone_loss = bb.loss;
  s.windows = bb.windows;
  // A trailing batch of one document has no negatives for the pair loss.
  if (config_.contrastive_active() && batch.size() >= 2) {
    s.contrastive_loss = contrastive_step(batch);
  }

  const bool finite = std::isfinite(s.backbone_loss) && std::isfinite(s.contrastive_loss) &&
                      all_finite_columns(grads_.u) && all_finite_columns(grads_.v) &&
                      (!grads_.predictor || (grads_.predictor->w1.allFinite() &&
                                             grads_.predictor->w2.allFinite()));
  if (!finite) {
    std::ostringstream os;
    os << "non-finite loss or gradient at epoch " << epoch_ << ", step "
       << optimizer_.step + 1 << " (backbone loss " << s.backbone_loss << ", contrastive loss "
       << s.contrastive_loss << ", lr " << config_.learning_rate << ", lambda " << config_.lambda
       << ", tau " << config_.tau << ")";
    throw TrainingError(os.str());
  }

  optimizer_step(params_, grads_, optimizer_, AdamConfig{.learning_rate = config_.learning_rate});
  s.step = optimizer_.step;
  return s;
}

EpochStats Trainer::run_epoch() {
  if (finished()) throw TrainingError("training already finished");
  const auto& docs = corpus_->documents;
  std::vector<const TokenizedDocument*> order(docs.size());
  std::transform(docs.begin(), docs.end(), order.begin(), [](const auto& d) { return &d; });
  Rng rng = derive_stream(config_.seed, StreamTag::kShuffle, {static_cast<std::uint64_t>(epoch_)});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }

  EpochStats e;
  e.epoch = epoch_;
  const auto batch = static_cast<std::size_t>(config_.batch_size);
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const std::size_t len = std::min(batch, order.size() - start);
    const StepStats s = step(std::span(order).subspan(start, len));
    steps_.push_back(s);
    ++e.steps;
    e.windows += s.windows;
    e.backbone_loss += s.backbone_loss;
    e.contrastive_loss += s.contrastive_loss;
  }
  e.mean_backbone_loss = e.windows > 0 ? e.backbone_loss / static_cast<double>(e.windows) : 0.0;

  if (e.mean_backbone_loss < early_stop_.best_loss * (1.0 - TrainConfig::kPlateauTolerance)) {
    early_stop_.best_loss = e.mean_backbone_loss;
    early_stop_.stall = 0;
  } else {
    ++early_stop_.stall;
  }
  if (config_.patience > 0 && early_stop_.stall >= config_.patience) early_stop_.stopped = true;
  e.stopped_early = early_stop_.stopped;
  ++epoch_;
  return e;
}

std::vector<EpochStats> Trainer::run(const std::function<void(const EpochStats&)>& on_epoch) {
  std::vector<EpochStats> out;
  while (!finished()) {
    out.push_back(run_epoch());
    if (on_epoch) on_epoch(out.back());
  }
  return out;
}

ModelParams train(const LabeledCorpus& corpus, const AugmentationLexicon* lexicon,
                  const TrainConfig& config) {
  Trainer t(corpus, lexicon, config);
  t.run();
  return t.params();
}

}  // namespace augdoc
