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

#include "cli.h"

#include <algorithm>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "augdoc/augment.h"
#include "augdoc/checkpoint.h"
#include "augdoc/corpus.h"
#include "augdoc/errors.h"
#include "augdoc/eval.h"
#include "augdoc/trainer.h"

namespace augdoc::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T to_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !in.eof()) {
    throw ConfigError("invalid value for " + key + ": '" + value + "'");
  }
  return out;
}

// One subcommand: every value-bearing flag maps to a config key, so a config
// file can set anything a flag can.
class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& description)
      : app_(parent.add_subcommand(name, description)), name_(name) {
    app_->add_option("--config", config_path_,
                     "Flat key=value file; flags given on the command line win over it");
  }

  CLI::App* app() const { return app_; }
  const std::string& name() const { return name_; }

  void option(const std::string& key, const std::string& flags, const std::string& help) {
    Entry& e = entries_.emplace_back();
    e.key = key;
    e.option = app_->add_option(flags, e.value, help);
  }
  void flag(const std::string& key, const std::string& flag, const std::string& help) {
    Entry& e = entries_.emplace_back();
    e.key = key;
    e.option = app_->add_flag(flag + "{true}", e.value, help);
  }

  // Merges the config file (if any) with the flags that were given.
  void resolve() {
    values_.clear();
    if (!config_path_.empty()) {
      for (auto& [k, v] : read_config_file(config_path_)) {
        if (!knows(k)) {
          throw ConfigError("config file " + config_path_ + ": key '" + k +
                            "' is not accepted by " + name_);
        }
        values_[k] = v;
      }
    }
    for (const auto& e : entries_) {
      if (e.option->count() > 0) values_[e.key] = e.value;
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
  }
  std::string require(const std::string& key) const {
    if (auto v = get(key)) return *v;
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    throw UsageError(name_ + ": --" + flag + " is required\nRun with --help for more information.");
  }
  template <typename T>
  T number(const std::string& key, T fallback) const {
    if (auto v = get(key)) return to_number<T>(key, *v);
    return fallback;
  }
  bool boolean(const std::string& key) const {
    const auto v = get(key);
    if (!v) return false;
    if (*v == "true" || *v == "1" || *v == "on" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "off" || *v == "no") return false;
    throw ConfigError("invalid boolean for " + key + ": '" + *v + "'");
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  struct Entry {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
  };

  bool knows(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.key == key; });
  }

  CLI::App* app_;
  std::string name_;
  std::string config_path_;
  std::deque<Entry> entries_;  // stable addresses for CLI11 bindings
  std::map<std::string, std::string> values_;
};

void add_common(Command& c, bool with_threads) {
  c.option("seed", "--seed", "Random seed (default 1)");
  if (with_threads) c.option("threads", "--threads", "Worker threads (default 1)");
  c.flag("quiet", "--quiet", "Suppress progress output (the resolved config is still printed)");
}

void add_corpus(Command& c) {
  c.option("corpus", "--corpus", "Training corpus, one `label<TAB>text` document per line");
  c.option("test_corpus", "--test-corpus", "Test corpus in the same format (optional)");
  c.option("vocab", "--vocab", "Vocabulary file (`word<TAB>freq`); built from the corpora if absent");
  c.option("min_count", "--min-count", "Minimum word frequency when building a vocabulary (default 10)");
}

void echo(std::ostream& err, const std::string& command,
          const std::vector<std::pair<std::string, std::string>>& entries) {
  err << "# augdoc " << command << " resolved configuration\n";
  for (const auto& [k, v] : entries) err << k << "=" << v << "\n";
  err.flush();
}

std::vector<std::pair<std::string, std::string>> corpus_entries(const Command& c) {
  return {{"corpus", c.get_or("corpus", "")},
          {"test_corpus", c.get_or("test_corpus", "")},
          {"vocab", c.get_or("vocab", "")},
          {"min_count", c.get_or("min_count", "10")}};
}

LabeledCorpus load_corpus(const Command& c) {
  CorpusSources src;
  src.train_path = c.require("corpus");
  src.test_path = c.get_or("test_corpus", "");
  const auto min_count = c.number<std::int64_t>("min_count", 10);
  if (auto path = c.get("vocab")) {
    const Vocabulary vocab = Vocabulary::load(*path);
    return load_labeled_corpus(src, &vocab, vocab.min_count());
  }
  return load_labeled_corpus(src, nullptr, min_count);
}

std::string lexicon_file(const std::string& dir, const std::string& name) {
  const auto path = (std::filesystem::path(dir) / name).string();
  if (!std::filesystem::exists(path)) throw IoError("lexicon file not found: " + path);
  return path;
}

// Loads only the table the strategy needs.
AugmentationLexicon load_strategy_lexicon(AugmentKind kind, const std::optional<std::string>& dir,
                                          const Vocabulary& vocab) {
  if (!dir) {
    throw ConfigError("augmentation '" + std::string(augment_kind_name(kind)) +
                      "' needs --lexicon-dir");
  }
  std::string syn, ant, para;
  switch (kind) {
    case AugmentKind::kWordNet:
    case AugmentKind::kUninformative:
      syn = lexicon_file(*dir, "synonyms_wordnet.tsv");
      break;
    case AugmentKind::kPpdb:
      syn = lexicon_file(*dir, "synonyms_ppdb.tsv");
      break;
    case AugmentKind::kAntonym:
      ant = lexicon_file(*dir, "antonyms.tsv");
      break;
    case AugmentKind::kBackTranslation:
      para = lexicon_file(*dir, "paraphrases.tsv");
      break;
  }
  return load_lexicon(syn, ant, para, vocab);
}

std::string join_words(const TokenizedDocument& doc, const Vocabulary& vocab) {
  std::string s;
  for (WordId w : doc.tokens) {
    if (!s.empty()) s += ' ';
    s += vocab.word(w);
  }
  return s;
}

void emit_report(std::ostream& out, const EvalReport& r) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : r.config) config[k] = v;
  nlohmann::json j = {{"task", r.task},       {"metric", r.metric},
                      {"value", r.value},     {"config", config},
                      {"seed", r.seed},       {"wall_clock_seconds", r.wall_seconds}};
  out << j.dump() << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Labels for the embedding rows, as ids into the sorted label names. Rows
// without a label get -1.
std::vector<int> row_labels(const EmbeddingSet& set,
                            const std::unordered_map<std::int64_t, std::string>& labels,
                            std::vector<std::string>& names) {
  std::set<std::string> distinct;
  for (const auto& [id, l] : labels) distinct.insert(l);
  names.assign(distinct.begin(), distinct.end());
  std::vector<int> out(set.size(), -1);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto it = labels.find(set.doc_ids[i]);
    if (it == labels.end()) continue;
    out[i] = static_cast<int>(std::lower_bound(names.begin(), names.end(), it->second) -
                              names.begin());
  }
  return out;
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

// ---- subcommands ----

void setup_build_vocab(Command& c) {
  add_corpus(c);
  c.option("out", "--out", "Where to write the vocabulary");
  add_common(c, false);
}

int run_build_vocab(const Command& c, std::ostream& out, std::ostream& err) {
  c.require("corpus");
  const std::string path = c.require("out");
  auto entries = corpus_entries(c);
  entries.emplace_back("out", path);
  entries.emplace_back("seed", c.get_or("seed", "1"));
  echo(err, "build-vocab", entries);
  const LabeledCorpus corpus = load_corpus(c);
  corpus.vocab.save(path);
  out << "vocabulary of " << corpus.vocab.size() << " words written to " << path << "\n";
  return kOk;
}

void setup_augment_preview(Command& c) {
  add_corpus(c);
  c.option("doc_id", "--doc-id", "Document to augment (default 0)");
  c.option("aug", "--aug", "Strategy: wordnet, ppdb, antonym, uninformative, backtranslation");
  c.option("count", "-n,--count", "Number of augmented views to print (default 3)");
  c.option("lexicon_dir", "--lexicon-dir", "Directory holding the lexicon TSV files");
  c.option("antonym_p", "--antonym-p", "Per-token antonym replacement probability (default 0.15)");
  c.option("uninformative_threshold", "--uninformative-threshold",
           "Frequency below which a word counts as uninformative (default 10)");
  add_common(c, false);
}

int run_augment_preview(const Command& c, std::ostream& out, std::ostream& err) {
  c.require("corpus");
  AugmentStrategy strategy;
  strategy.kind = parse_augment_kind(c.require("aug"));
  strategy.antonym_probability = c.number<double>("antonym_p", strategy.antonym_probability);
  strategy.uninformative_threshold =
      c.number<std::int64_t>("uninformative_threshold", strategy.uninformative_threshold);
  strategy.validate();
  const auto doc_id = c.number<std::int64_t>("doc_id", 0);
  const auto count = c.number<int>("count", 3);
  const auto seed = c.number<std::uint64_t>("seed", 1);
  if (count < 0) throw ConfigError("--count must be >= 0");

  auto entries = corpus_entries(c);
  entries.insert(entries.end(), {{"doc_id", std::to_string(doc_id)},
                                 {"aug", std::string(augment_kind_name(strategy.kind))},
                                 {"count", std::to_string(count)},
                                 {"lexicon_dir", c.get_or("lexicon_dir", "")},
                                 {"antonym_p", c.get_or("antonym_p", "0.15")},
                                 {"uninformative_threshold", c.get_or("uninformative_threshold", "10")},
                                 {"seed", std::to_string(seed)}});
  echo(err, "augment-preview", entries);

  const LabeledCorpus corpus = load_corpus(c);
  if (doc_id < 0 || static_cast<std::size_t>(doc_id) >= corpus.documents.size()) {
    throw DataError("--doc-id " + std::to_string(doc_id) + " is out of range (corpus has " +
                    std::to_string(corpus.documents.size()) + " documents)");
  }
  const auto lexicon = load_strategy_lexicon(strategy.kind, c.get("lexicon_dir"), corpus.vocab);
  const auto& doc = corpus.documents[static_cast<std::size_t>(doc_id)];
  AugmentCounters counters;
  out << "original\t" << join_words(doc, corpus.vocab) << "\n";
  for (int i = 0; i < count; ++i) {
    // Same stream the trainer uses for this document in epoch i.
    Rng rng = derive_stream(seed, StreamTag::kAugment,
                            {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(doc_id)});
    const auto view = augment(doc, strategy, lexicon, rng, &counters);
    out << "view " << i << "\t" << join_words(view, corpus.vocab) << "\n";
  }
  if (counters.missing_paraphrases.load() > 0) {
    err << "note: no paraphrase for document " << doc_id << "; the original was used\n";
  }
  return kOk;
}

// Config keys that map straight onto TrainConfig::set.
const std::vector<std::pair<std::string, std::string>>& train_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"dim", "Embedding dimension (default 100)"},
      {"window", "Context words on each side of the target (preset r8: 6)"},
      {"negatives", "Negative samples per target (preset r8: 5)"},
      {"doc_sample", "Words sampled from the document per window (preset r8: 5)"},
      {"dropout", "Dropout on the context mean and document vector while training (default 0.3)"},
      {"subsample", "Frequent-word target subsampling threshold, 0 = off (default 0)"},
      {"batch", "Documents per mini-batch (default 4096)"},
      {"lr", "Adam learning rate (default 1e-3)"},
      {"epochs", "Maximum number of epochs (default 20)"},
      {"patience", "Stop after this many epochs without improvement, 0 = never (default 3)"},
      {"lambda", "Weight of the contrastive loss; 0 gives the backbone alone (default 1)"},
      {"tau", "NT-Xent temperature (default 1)"},
      {"framework", "Contrastive framework: simclr or simsiam (default simclr)"},
      {"predictor_hidden", "SimSiam predictor hidden width (default 64)"},
      {"predictor_activation", "SimSiam predictor activation: relu or none (default relu)"},
      {"aug", "Augmentation: wordnet, ppdb, antonym, uninformative, backtranslation, none"},
      {"antonym_p", "Per-token antonym replacement probability (default 0.15)"},
      {"uninformative_threshold",
       "Frequency below which a word counts as uninformative (default 10)"},
      {"aug_cache_views",
       "Precompute this many views per document and cycle them, 0 = fresh each epoch (default 0)"},
      {"contrastive", "Build the contrastive branch at all: true or false (default true)"},
      {"seed", "Random seed (default 1)"},
      {"threads", "Worker threads (default 1)"},
  };
  return keys;
}

void setup_train(Command& c) {
  add_corpus(c);
  c.option("preset", "--preset", "Dataset preset: r8, r52, mr, ohsumed, 20news, imdb");
  for (const auto& [key, help] : train_keys()) {
    if (key == "seed" || key == "threads") continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    c.option(key, flag, help);
  }
  c.flag("deterministic", "--deterministic",
         "Thread-count independent results (default true; --deterministic=false for fast mode)");
  c.flag("simsiam_as_printed", "--simsiam-as-printed",
         "Stop gradients through both predictor outputs (ablation)");
  c.option("lexicon_dir", "--lexicon-dir", "Directory holding the lexicon TSV files");
  c.option("checkpoint_out", "--checkpoint-out", "Checkpoint path, rewritten after every epoch");
  c.option("resume", "--resume", "Continue from this checkpoint");
  add_common(c, true);
}

int run_train(const Command& c, std::ostream& out, std::ostream& err) {
  c.require("corpus");
  TrainConfig config;
  if (auto preset = c.get("preset")) config.apply_preset(*preset);
  for (const auto& [key, help] : train_keys()) {
    if (auto v = c.get(key)) config.set(key, *v);
  }
  if (auto v = c.get("deterministic")) config.set("deterministic", *v);
  if (auto v = c.get("simsiam_as_printed")) config.set("simsiam_as_printed", *v);
  config.validate();
  const std::string ckpt_path = c.require("checkpoint_out");
  const bool quiet = c.boolean("quiet");

  auto entries = corpus_entries(c);
  if (auto preset = c.get("preset")) entries.emplace_back("preset", *preset);
  for (auto& e : config.entries()) entries.push_back(std::move(e));
  entries.emplace_back("lexicon_dir", c.get_or("lexicon_dir", ""));
  entries.emplace_back("checkpoint_out", ckpt_path);
  entries.emplace_back("resume", c.get_or("resume", ""));
  echo(err, "train", entries);

  const LabeledCorpus corpus = load_corpus(c);
  std::optional<AugmentationLexicon> lexicon;
  if (config.contrastive_active()) {
    lexicon = load_strategy_lexicon(config.augment.kind, c.get("lexicon_dir"), corpus.vocab);
  }
  if (!quiet) {
    err << "corpus: " << corpus.documents.size() << " documents (" << corpus.count(Split::kTrain)
        << " train, " << corpus.count(Split::kTest) << " test), vocabulary " << corpus.vocab.size()
        << " words\n";
  }

  Trainer trainer(corpus, lexicon ? &*lexicon : nullptr, config);
  if (auto resume = c.get("resume")) {
    trainer.restore(load_checkpoint(*resume, corpus.vocab.hash()));
    if (!quiet) err << "resumed from " << *resume << " at epoch " << trainer.epoch() << "\n";
  }
  const auto start = std::chrono::steady_clock::now();
  trainer.run([&](const EpochStats& e) {
    save_checkpoint(ckpt_path, trainer.checkpoint());
    if (quiet) return;
    err << "epoch " << e.epoch + 1 << "/" << config.epochs << " steps=" << e.steps
        << " backbone_loss_per_window=" << e.mean_backbone_loss
        << " contrastive_loss=" << e.contrastive_loss
        << (e.stopped_early ? " (plateau, stopping)" : "") << "\n";
  });
  if (trainer.steps().empty()) save_checkpoint(ckpt_path, trainer.checkpoint());
  if (trainer.missing_paraphrases() > 0 && !quiet) {
    err << "note: " << trainer.missing_paraphrases()
        << " augmented views fell back to the original document (no paraphrase)\n";
  }
  out << "trained " << trainer.epoch() << " epochs (" << trainer.optimizer().step
      << " steps) in " << seconds_since(start) << " s; checkpoint written to " << ckpt_path
      << "\n";
  return kOk;
}

void setup_embed(Command& c) {
  add_corpus(c);
  c.option("checkpoint", "--checkpoint", "Trained checkpoint");
  c.option("out", "--out", "Where to write the embeddings");
  c.option("format", "--format", "Embedding file format: text or binary (default text)");
  c.option("labels_out", "--labels-out", "Also write `doc_id<TAB>label` for labeled documents");
  c.option("split_out", "--split-out", "Also write `doc_id<TAB>train|test` for every document");
  add_common(c, true);
}

int run_embed(const Command& c, std::ostream& out, std::ostream& err) {
  c.require("corpus");
  const std::string ckpt_path = c.require("checkpoint");
  const std::string path = c.require("out");
  const std::string format_name = c.get_or("format", "text");
  EmbeddingFormat format;
  if (format_name == "text") {
    format = EmbeddingFormat::kText;
  } else if (format_name == "binary") {
    format = EmbeddingFormat::kBinary;
  } else {
    throw ConfigError("--format must be text or binary");
  }
  const int threads = c.number<int>("threads", 1);
  if (threads < 1) throw ConfigError("--threads must be >= 1");

  auto entries = corpus_entries(c);
  entries.insert(entries.end(), {{"checkpoint", ckpt_path},
                                 {"out", path},
                                 {"format", format_name},
                                 {"labels_out", c.get_or("labels_out", "")},
                                 {"split_out", c.get_or("split_out", "")},
                                 {"seed", c.get_or("seed", "1")},
                                 {"threads", std::to_string(threads)}});
  echo(err, "embed", entries);

  const LabeledCorpus corpus = load_corpus(c);
  const Checkpoint ckpt = load_checkpoint(ckpt_path, corpus.vocab.hash());
  const EmbeddingSet set = embed_corpus(corpus, ckpt.params, threads);
  export_embeddings(set, path, format);
  if (auto p = c.get("labels_out")) write_labels(corpus, *p);
  if (auto p = c.get("split_out")) write_splits(corpus, *p);
  out << "embedded " << set.size() << " documents (d=" << set.dim() << ") to " << path << "\n";
  return kOk;
}

void setup_eval_classify(Command& c) {
  c.option("embeddings", "--embeddings", "Embedding file (text or binary)");
  c.option("labels", "--labels", "`doc_id<TAB>label` file");
  c.option("split", "--split", "`doc_id<TAB>train|test` file");
  c.option("c", "--c",
           "Inverse L2 strength C in C*sum(cross-entropy) + |W|^2/2; larger C means weaker "
           "regularization (default 1.0)");
  add_common(c, false);
}

int run_eval_classify(const Command& c, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  LogisticOptions options;
  options.c = c.number<double>("c", 1.0);
  if (!(options.c > 0.0)) throw ConfigError("--c must be > 0");
  const auto seed = c.number<std::uint64_t>("seed", 1);
  std::vector<std::pair<std::string, std::string>> entries = {
      {"embeddings", c.require("embeddings")},
      {"labels", c.require("labels")},
      {"split", c.require("split")},
      {"c", c.get_or("c", "1.0")},
      {"seed", std::to_string(seed)}};
  echo(err, "eval-classify", entries);

  const EmbeddingSet set = import_embeddings(entries[0].second);
  set.validate();
  const auto labels = read_labels(entries[1].second);
  const auto splits = read_splits(entries[2].second);
  std::vector<std::string> names;
  const auto y = row_labels(set, labels, names);
  std::vector<std::size_t> train_rows, test_rows;
  std::vector<int> y_train, y_test;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto s = splits.find(set.doc_ids[i]);
    if (y[i] < 0 || s == splits.end()) continue;
    if (s->second == Split::kTrain) {
      train_rows.push_back(i);
      y_train.push_back(y[i]);
    } else if (s->second == Split::kTest) {
      test_rows.push_back(i);
      y_test.push_back(y[i]);
    }
  }
  if (train_rows.empty() || test_rows.empty()) {
    throw DataError("eval-classify needs labeled documents in both the train and test splits");
  }
  const auto model = fit_logistic_regression(select_rows(set.vectors, train_rows), y_train, options);
  const Matrix x_test = select_rows(set.vectors, test_rows);
  EvalReport report;
  report.task = "classify";
  report.metric = "error_rate";
  report.value = classification_error(model, x_test, y_test);
  report.config = entries;
  report.config.emplace_back("train_documents", std::to_string(train_rows.size()));
  report.config.emplace_back("test_documents", std::to_string(test_rows.size()));
  report.config.emplace_back("classes", std::to_string(names.size()));
  report.seed = seed;
  report.wall_seconds = seconds_since(start);
  emit_report(out, report);
  return kOk;
}

void setup_eval_cluster(Command& c) {
  c.option("embeddings", "--embeddings", "Embedding file (text or binary)");
  c.option("labels", "--labels", "`doc_id<TAB>label` file");
  c.option("k", "--k", "Number of clusters (default: number of distinct labels)");
  c.option("restarts", "--restarts", "k-means restarts, best inertia wins (default 10)");
  add_common(c, true);
}

int run_eval_cluster(const Command& c, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const std::string emb_path = c.require("embeddings");
  const std::string label_path = c.require("labels");
  const auto seed = c.number<std::uint64_t>("seed", 1);
  const int restarts = c.number<int>("restarts", 10);
  const int threads = c.number<int>("threads", 1);
  if (threads < 1) throw ConfigError("--threads must be >= 1");

  const EmbeddingSet set = import_embeddings(emb_path);
  set.validate();
  const auto labels = read_labels(label_path);
  std::vector<std::string> names;
  const auto y = row_labels(set, labels, names);
  std::vector<std::size_t> rows;
  std::vector<int> truth;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (y[i] < 0) continue;
    rows.push_back(i);
    truth.push_back(y[i]);
  }
  const int k = c.number<int>("k", static_cast<int>(names.size()));
  std::vector<std::pair<std::string, std::string>> entries = {
      {"embeddings", emb_path},       {"labels", label_path},
      {"k", std::to_string(k)},       {"restarts", std::to_string(restarts)},
      {"seed", std::to_string(seed)}, {"threads", std::to_string(threads)}};
  echo(err, "eval-cluster", entries);
  if (rows.empty()) throw DataError("no embedding row has a label");

  const auto result = kmeans_cluster(select_rows(set.vectors, rows), k, seed, restarts, 300, threads);
  EvalReport report;
  report.task = "cluster";
  report.metric = "nmi";
  report.value = nmi(result.assignment, truth);
  report.config = entries;
  report.config.emplace_back("documents", std::to_string(rows.size()));
  report.config.emplace_back("inertia", std::to_string(result.inertia));
  report.seed = seed;
  report.wall_seconds = seconds_since(start);
  emit_report(out, report);
  return kOk;
}

int report_error(std::ostream& err, const char* kind, const std::exception& e, int code) {
  err << "augdoc: error [" << kind << "]: " << e.what() << "\n";
  return code;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(n) + ": expected key=value");
    }
    const std::string key = normalize_key(trim(std::string_view(body).substr(0, eq)));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(n) + ": empty key");
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"augdoc: document embeddings trained with contrastive augmentation"};
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "Print help for every subcommand and flag, then exit");
  app.require_subcommand(1);

  Command build_vocab(app, "build-vocab", "Build and save a vocabulary from corpus files");
  Command preview(app, "augment-preview", "Print sampled augmentations of one document");
  Command train(app, "train", "Train document embeddings");
  Command embed(app, "embed", "Embed every document with a trained checkpoint");
  Command classify(app, "eval-classify", "Logistic-regression test error (JSON line on stdout)");
  Command cluster(app, "eval-cluster", "k-means NMI against the labels (JSON line on stdout)");
  setup_build_vocab(build_vocab);
  setup_augment_preview(preview);
  setup_train(train);
  setup_embed(embed);
  setup_eval_classify(classify);
  setup_eval_cluster(cluster);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const std::pair<Command*, int (*)(const Command&, std::ostream&, std::ostream&)> table[] = {
      {&build_vocab, run_build_vocab}, {&preview, run_augment_preview},
      {&train, run_train},             {&embed, run_embed},
      {&classify, run_eval_classify},  {&cluster, run_eval_cluster},
  };
  try {
    for (auto& [command, fn] : table) {
      if (command->app()->parsed()) {
        command->resolve();
        return fn(*command, out, err);
      }
    }
    err << "augdoc: no subcommand given\n";
    return kUsage;
  } catch (const UsageError& e) {
    return report_error(err, "usage", e, kUsage);
  } catch (const IoError& e) {
    return report_error(err, "missing file", e, kMissingFile);
  } catch (const ConfigError& e) {
    return report_error(err, "config", e, kConfigConflict);
  } catch (const ParseError& e) {
    return report_error(err, "parse", e, kDataError);
  } catch (const CheckpointError& e) {
    return report_error(err, "checkpoint", e, kDataError);
  } catch (const DataError& e) {
    return report_error(err, "data", e, kDataError);
  } catch (const TrainingError& e) {
    return report_error(err, "training", e, kTrainingFailed);
  } catch (const std::exception& e) {
    return report_error(err, "internal", e, kInternal);
  }
}

}  // namespace augdoc::cli
