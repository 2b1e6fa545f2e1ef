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

// Corpus ingestion: tokenization, vocabulary, token-id documents and their
// bag-of-words count vectors.

#ifndef AUGDOC_CORPUS_H_
#define AUGDOC_CORPUS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace augdoc {

using WordId = std::int32_t;

enum class Split { kTrain, kTest, kUnlabeled };

std::string_view split_name(Split split);
// Accepts "train", "test", "unlabeled". Throws ConfigError otherwise.
Split parse_split(std::string_view name);

struct TokenizerConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
};

// Splits on Unicode whitespace, lowercases ASCII letters and strips leading
// and trailing punctuation from each token. Tokens that are pure punctuation
// vanish. Invalid UTF-8 bytes are kept as-is.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& rules = {});

class Vocabulary {
 public:
  Vocabulary() = default;
  // `words` in id order. Throws DataError on duplicates or freq < min_count.
  Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> freq,
             std::int64_t min_count = 1);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::int64_t freq(WordId id) const { return freq_.at(static_cast<std::size_t>(id)); }
  std::optional<WordId> find(std::string_view word) const;
  bool contains(WordId id) const { return id >= 0 && static_cast<std::size_t>(id) < size(); }

  std::span<const std::string> words() const { return words_; }
  std::span<const std::int64_t> frequencies() const { return freq_; }
  std::int64_t min_count() const { return min_count_; }

  // Content hash over (word, freq) pairs in id order.
  std::uint64_t hash() const;

  // `word<TAB>frequency` per line, ordered by id.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && freq_ == other.freq_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::int64_t> freq_;
  std::unordered_map<std::string, WordId> id_of_;
  std::int64_t min_count_ = 1;
};

// Keeps words with corpus frequency >= min_count. Ids follow descending
// frequency, ties broken lexicographically, so the result does not depend on
// document order. Throws DataError if nothing survives, ConfigError if
// min_count < 1.
Vocabulary build_vocab(std::span<const std::vector<std::string>> docs, std::int64_t min_count);

struct TokenizedDocument {
  std::int64_t doc_id = 0;
  std::vector<WordId> tokens;
  std::optional<int> label;
  Split split = Split::kUnlabeled;

  std::size_t length() const { return tokens.size(); }
};

// Sparse count vector: indices strictly increasing, values > 0,
// total == sum(values) == document length.
struct SparseBow {
  std::vector<WordId> indices;
  std::vector<std::int32_t> values;
  std::int64_t total = 0;
};

// Throws DataError on an empty sequence or an id outside [0, vocab_size).
SparseBow to_bow(std::span<const WordId> tokens, std::size_t vocab_size);
SparseBow to_bow(const TokenizedDocument& doc, const Vocabulary& vocab);

// Maps strings to ids, dropping out-of-vocabulary tokens.
std::vector<WordId> to_ids(std::span<const std::string> tokens, const Vocabulary& vocab);

struct RawDocument {
  std::string label;  // empty when unlabeled
  std::vector<std::string> tokens;
  Split split = Split::kTrain;
  std::size_t line = 0;
};

// Reads the `label<TAB>text` line format. Blank lines are skipped; a line
// without a tab is a ParseError naming the line.
std::vector<RawDocument> read_corpus_file(const std::string& path, Split split,
                                          const TokenizerConfig& rules = {});

struct CorpusSources {
  std::string train_path;
  std::string test_path;  // optional
  std::string unlabeled_path;  // optional
};

struct LabeledCorpus {
  Vocabulary vocab;
  std::vector<std::string> label_names;  // label id -> name, sorted
  std::vector<TokenizedDocument> documents;  // doc_id == index

  std::size_t count(Split split) const;
  std::optional<int> label_id(std::string_view name) const;
};

// Loads train (+ optional test / unlabeled) files. Without a vocabulary, one
// is built over all documents of every split (transductive setting). OOV
// tokens are dropped; a document left empty is a DataError naming its line.
LabeledCorpus load_labeled_corpus(const CorpusSources& sources, const Vocabulary* vocab,
                                  std::int64_t min_count = 10,
                                  const TokenizerConfig& rules = {});
LabeledCorpus load_labeled_corpus(const std::string& path, const Vocabulary* vocab,
                                  std::int64_t min_count = 10);

// Builds a corpus from in-memory documents. Used by loaders and tests.
LabeledCorpus make_corpus(std::span<const RawDocument> raw, const Vocabulary* vocab,
                          std::int64_t min_count, const std::string& origin = "<memory>");

}  // namespace augdoc

#endif  // AUGDOC_CORPUS_H_
