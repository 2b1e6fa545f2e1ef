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

// Stochastic document augmentation over a vocabulary-constrained lexicon.
//
// Every strategy only ever emits ids that the lexicon verified against the
// vocabulary at load time, so augmented documents stay in-vocabulary.

#ifndef AUGDOC_AUGMENT_H_
#define AUGDOC_AUGMENT_H_

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "augdoc/corpus.h"
#include "augdoc/random.h"

namespace augdoc {

enum class AugmentKind { kWordNet, kPpdb, kAntonym, kUninformative, kBackTranslation };

std::string_view augment_kind_name(AugmentKind kind);
// Throws ConfigError on an unknown name.
AugmentKind parse_augment_kind(std::string_view name);

struct AugmentStrategy {
  AugmentKind kind = AugmentKind::kWordNet;
  double antonym_probability = 0.15;        // per eligible token, in [0, 1]
  std::int64_t uninformative_threshold = 10;  // >= 1

  void validate() const;
};

class AugmentationLexicon {
 public:
  AugmentationLexicon() = default;
  // Empty lexicon over `vocab`: every word is its own only synonym, no
  // antonyms, no paraphrases. No table counts as loaded.
  explicit AugmentationLexicon(const Vocabulary& vocab);

  // Every table marked loaded but trivial; every strategy is then the
  // identity on documents.
  static AugmentationLexicon identity(const Vocabulary& vocab);

  std::size_t vocab_size() const { return synonyms_.size(); }
  std::int64_t freq(WordId w) const { return freq_[static_cast<std::size_t>(w)]; }

  // Candidate set for w. Always non-empty and starts with w itself.
  std::span<const WordId> synonyms(WordId w) const {
    return synonyms_[static_cast<std::size_t>(w)];
  }
  // Negated phrases for w, e.g. "strong" -> {[not, impotent]}. Empty if none.
  std::span<const std::vector<WordId>> antonyms(WordId w) const;
  const std::vector<WordId>* paraphrase(std::int64_t doc_id) const;

  // Appends candidates (deduplicated, self kept first). Ids must be valid.
  void add_synonyms(WordId w, std::span<const WordId> candidates);
  void add_antonym(WordId w, std::vector<WordId> phrase);
  void set_paraphrase(std::int64_t doc_id, std::vector<WordId> tokens);

  bool has_synonym_table() const { return synonym_table_loaded_; }
  bool has_antonym_table() const { return antonym_table_loaded_; }
  bool has_paraphrase_table() const { return paraphrase_table_loaded_; }
  void mark_loaded(bool synonyms, bool antonyms, bool paraphrases);

  // Number of words with at least one candidate besides themselves.
  std::size_t synonym_entries() const;
  std::size_t antonym_entries() const { return antonyms_.size(); }
  std::size_t paraphrase_entries() const { return paraphrases_.size(); }

 private:
  std::vector<std::vector<WordId>> synonyms_;
  std::unordered_map<WordId, std::vector<std::vector<WordId>>> antonyms_;
  std::unordered_map<std::int64_t, std::vector<WordId>> paraphrases_;
  std::vector<std::int64_t> freq_;
  bool synonym_table_loaded_ = false;
  bool antonym_table_loaded_ = false;
  bool paraphrase_table_loaded_ = false;
};

// Counters for fallbacks that are not errors.
struct AugmentCounters {
  std::atomic<std::int64_t> missing_paraphrases{0};
};

// Loads the TSV tables; an empty path leaves that table unloaded. Entries
// whose head word or any candidate/phrase token is out of vocabulary are
// filtered (candidates individually, antonym phrases as a whole). A
// paraphrase that tokenizes to nothing in-vocabulary is a DataError.
AugmentationLexicon load_lexicon(const std::string& synonym_path, const std::string& antonym_path,
                                 const std::string& paraphrase_path, const Vocabulary& vocab);

// Each token is independently replaced by a uniform draw from its candidate
// set (which includes the token itself). Length preserved.
TokenizedDocument synonym_replace(const TokenizedDocument& doc, const AugmentationLexicon& lex,
                                  Rng& rng);

// Each token with an antonym entry is, with probability p, replaced by one of
// its negated phrases (uniform if several).
TokenizedDocument antonym_negate(const TokenizedDocument& doc, const AugmentationLexicon& lex,
                                 Rng& rng, double p);

// Deterministic: tokens with freq < threshold become their most frequent
// candidate (lowest id on ties). Length preserved.
TokenizedDocument uninformative_replace(const TokenizedDocument& doc,
                                        const AugmentationLexicon& lex,
                                        std::int64_t threshold);

// Precomputed paraphrase for doc.doc_id, or doc itself when there is none
// (counted in counters->missing_paraphrases).
TokenizedDocument backtranslate_lookup(const TokenizedDocument& doc,
                                       const AugmentationLexicon& lex,
                                       AugmentCounters* counters = nullptr);

// Dispatches on strategy.kind. Throws ConfigError if the strategy's table was
// never loaded.
TokenizedDocument augment(const TokenizedDocument& doc, const AugmentStrategy& strategy,
                          const AugmentationLexicon& lex, Rng& rng,
                          AugmentCounters* counters = nullptr);

// Throws ConfigError unless `lex` can serve `kind`.
void require_table(const AugmentationLexicon& lex, AugmentKind kind);

}  // namespace augdoc

#endif  // AUGDOC_AUGMENT_H_
