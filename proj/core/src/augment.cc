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

#include "augdoc/augment.h"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "augdoc/errors.h"

namespace augdoc {
namespace {

template <typename Fn>
void for_each_tsv_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(path, lineno, "expected key<TAB>value");
    }
    fn(lineno, std::string_view(line).substr(0, tab), std::string_view(line).substr(tab + 1));
  }
}

TokenizedDocument with_tokens(const TokenizedDocument& doc, std::vector<WordId> tokens) {
  TokenizedDocument out;
  out.doc_id = doc.doc_id;
  out.tokens = std::move(tokens);
  out.label = doc.label;
  out.split = doc.split;
  return out;
}

}  // namespace

std::string_view augment_kind_name(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::kWordNet: return "wordnet";
    case AugmentKind::kPpdb: return "ppdb";
    case AugmentKind::kAntonym: return "antonym";
    case AugmentKind::kUninformative: return "uninformative";
    case AugmentKind::kBackTranslation: return "backtranslation";
  }
  return "wordnet";
}

AugmentKind parse_augment_kind(std::string_view name) {
  for (AugmentKind k : {AugmentKind::kWordNet, AugmentKind::kPpdb, AugmentKind::kAntonym,
                        AugmentKind::kUninformative, AugmentKind::kBackTranslation}) {
    if (augment_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown augmentation strategy '" + std::string(name) + "'");
}

void AugmentStrategy::validate() const {
  if (!(antonym_probability >= 0.0 && antonym_probability <= 1.0)) {
    throw ConfigError("antonym replacement probability must lie in [0, 1]");
  }
  if (uninformative_threshold < 1) {
    throw ConfigError("uninformative frequency threshold must be >= 1");
  }
}

AugmentationLexicon::AugmentationLexicon(const Vocabulary& vocab)
    : freq_(vocab.frequencies().begin(), vocab.frequencies().end()) {
  synonyms_.resize(vocab.size());
  for (std::size_t w = 0; w < vocab.size(); ++w) synonyms_[w] = {static_cast<WordId>(w)};
}

AugmentationLexicon AugmentationLexicon::identity(const Vocabulary& vocab) {
  AugmentationLexicon lex(vocab);
  lex.mark_loaded(true, true, true);
  return lex;
}

std::span<const std::vector<WordId>> AugmentationLexicon::antonyms(WordId w) const {
  auto it = antonyms_.find(w);
  if (it == antonyms_.end()) return {};
  return it->second;
}

const std::vector<WordId>* AugmentationLexicon::paraphrase(std::int64_t doc_id) const {
  auto it = paraphrases_.find(doc_id);
  return it == paraphrases_.end() ? nullptr : &it->second;
}

void AugmentationLexicon::add_synonyms(WordId w, std::span<const WordId> candidates) {
  auto& list = synonyms_.at(static_cast<std::size_t>(w));
  for (WordId c : candidates) {
    if (c < 0 || static_cast<std::size_t>(c) >= synonyms_.size()) {
      throw DataError("synonym candidate id outside vocabulary");
    }
    if (std::find(list.begin(), list.end(), c) == list.end()) list.push_back(c);
  }
}

void AugmentationLexicon::add_antonym(WordId w, std::vector<WordId> phrase) {
  if (phrase.empty()) throw DataError("empty antonym phrase");
  for (WordId c : phrase) {
    if (c < 0 || static_cast<std::size_t>(c) >= synonyms_.size()) {
      throw DataError("antonym phrase id outside vocabulary");
    }
  }
  antonyms_[w].push_back(std::move(phrase));
}

void AugmentationLexicon::set_paraphrase(std::int64_t doc_id, std::vector<WordId> tokens) {
  if (tokens.empty()) throw DataError("empty paraphrase for document " + std::to_string(doc_id));
  paraphrases_[doc_id] = std::move(tokens);
}

void AugmentationLexicon::mark_loaded(bool synonyms, bool antonyms, bool paraphrases) {
  synonym_table_loaded_ = synonym_table_loaded_ || synonyms;
  antonym_table_loaded_ = antonym_table_loaded_ || antonyms;
  paraphrase_table_loaded_ = paraphrase_table_loaded_ || paraphrases;
}

std::size_t AugmentationLexicon::synonym_entries() const {
  return static_cast<std::size_t>(
      std::count_if(synonyms_.begin(), synonyms_.end(), [](const auto& c) { return c.size() > 1; }));
}

AugmentationLexicon load_lexicon(const std::string& synonym_path, const std::string& antonym_path,
                                 const std::string& paraphrase_path, const Vocabulary& vocab) {
  AugmentationLexicon lex(vocab);

  if (!synonym_path.empty()) {
    for_each_tsv_line(synonym_path, [&](std::size_t, std::string_view head, std::string_view rest) {
      auto w = vocab.find(head);
      if (!w) return;
      std::vector<WordId> cands;
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        auto comma = rest.find(',', pos);
        if (comma == std::string_view::npos) comma = rest.size();
        std::string_view cand = rest.substr(pos, comma - pos);
        while (!cand.empty() && cand.front() == ' ') cand.remove_prefix(1);
        while (!cand.empty() && cand.back() == ' ') cand.remove_suffix(1);
        if (auto id = vocab.find(cand)) cands.push_back(*id);
        pos = comma + 1;
      }
      lex.add_synonyms(*w, cands);
    });
  }

  if (!antonym_path.empty()) {
    for_each_tsv_line(antonym_path, [&](std::size_t, std::string_view head, std::string_view rest) {
      auto w = vocab.find(head);
      if (!w) return;
      const auto words = tokenize(rest);
      if (words.empty()) return;
      std::vector<WordId> phrase;
      for (const auto& t : words) {
        auto id = vocab.find(t);
        if (!id) return;  // the phrase is used whole or not at all
        phrase.push_back(*id);
      }
      lex.add_antonym(*w, std::move(phrase));
    });
  }

  if (!paraphrase_path.empty()) {
    for_each_tsv_line(paraphrase_path,
                      [&](std::size_t lineno, std::string_view key, std::string_view text) {
      std::int64_t doc_id = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), doc_id);
      if (ec != std::errc() || ptr != key.data() + key.size()) {
        throw ParseError(paraphrase_path, lineno, "bad document id");
      }
      auto ids = to_ids(tokenize(text), vocab);
      if (ids.empty()) {
        throw DataError(paraphrase_path + ":" + std::to_string(lineno) +
                        ": paraphrase is empty after dropping out-of-vocabulary tokens");
      }
      lex.set_paraphrase(doc_id, std::move(ids));
    });
  }

  lex.mark_loaded(!synonym_path.empty(), !antonym_path.empty(), !paraphrase_path.empty());
  return lex;
}

TokenizedDocument synonym_replace(const TokenizedDocument& doc, const AugmentationLexicon& lex,
                                  Rng& rng) {
  std::vector<WordId> out;
  out.reserve(doc.tokens.size());
  for (WordId w : doc.tokens) {
    const auto cands = lex.synonyms(w);
    out.push_back(cands.size() == 1 ? cands[0] : cands[uniform_index(rng, cands.size())]);
  }
  return with_tokens(doc, std::move(out));
}

TokenizedDocument antonym_negate(const TokenizedDocument& doc, const AugmentationLexicon& lex,
                                 Rng& rng, double p) {
  std::vector<WordId> out;
  out.reserve(doc.tokens.size() + 4);
  for (WordId w : doc.tokens) {
    const auto phrases = lex.antonyms(w);
    if (!phrases.empty() && uniform01(rng) < p) {
      const auto& phrase =
          phrases.size() == 1 ? phrases[0] : phrases[uniform_index(rng, phrases.size())];
      out.insert(out.end(), phrase.begin(), phrase.end());
    } else {
      out.push_back(w);
    }
  }
  return with_tokens(doc, std::move(out));
}

TokenizedDocument uninformative_replace(const TokenizedDocument& doc,
                                        const AugmentationLexicon& lex,
                                        std::int64_t threshold) {
  std::vector<WordId> out;
  out.reserve(doc.tokens.size());
  for (WordId w : doc.tokens) {
    if (lex.freq(w) >= threshold) {
      out.push_back(w);
      continue;
    }
    WordId best = w;
    for (WordId c : lex.synonyms(w)) {
      if (lex.freq(c) > lex.freq(best) || (lex.freq(c) == lex.freq(best) && c < best)) best = c;
    }
    out.push_back(best);
  }
  return with_tokens(doc, std::move(out));
}

TokenizedDocument backtranslate_lookup(const TokenizedDocument& doc,
                                       const AugmentationLexicon& lex,
                                       AugmentCounters* counters) {
  if (const auto* para = lex.paraphrase(doc.doc_id)) return with_tokens(doc, *para);
  if (counters != nullptr) counters->missing_paraphrases.fetch_add(1, std::memory_order_relaxed);
  return doc;
}

void require_table(const AugmentationLexicon& lex, AugmentKind kind) {
  bool ok = false;
  switch (kind) {
    case AugmentKind::kWordNet:
    case AugmentKind::kPpdb:
    case AugmentKind::kUninformative:
      ok = lex.has_synonym_table();
      break;
    case AugmentKind::kAntonym:
      ok = lex.has_antonym_table();
      break;
    case AugmentKind::kBackTranslation:
      ok = lex.has_paraphrase_table();
      break;
  }
  if (!ok) {
    throw ConfigError("augmentation '" + std::string(augment_kind_name(kind)) +
                      "' requested but its lexicon table was not loaded");
  }
}

TokenizedDocument augment(const TokenizedDocument& doc, const AugmentStrategy& strategy,
                          const AugmentationLexicon& lex, Rng& rng, AugmentCounters* counters) {
  require_table(lex, strategy.kind);
  switch (strategy.kind) {
    case AugmentKind::kWordNet:
    case AugmentKind::kPpdb:
      return synonym_replace(doc, lex, rng);
    case AugmentKind::kAntonym:
      return antonym_negate(doc, lex, rng, strategy.antonym_probability);
    case AugmentKind::kUninformative:
      return uninformative_replace(doc, lex, strategy.uninformative_threshold);
    case AugmentKind::kBackTranslation:
      return backtranslate_lookup(doc, lex, counters);
  }
  throw ConfigError("unknown augmentation strategy");
}

}  // namespace augdoc
