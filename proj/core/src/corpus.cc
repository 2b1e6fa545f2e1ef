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

#include "augdoc/corpus.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include "augdoc/errors.h"
#include "augdoc/hash.h"

namespace augdoc {
namespace {

struct CodePoint {
  char32_t value;
  std::size_t size;  // bytes consumed
};

// Decodes one UTF-8 sequence at s[pos]. Malformed bytes decode as a single
// byte with value 0xFFFD so they are never whitespace or punctuation.
CodePoint decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (pos + len > s.size()) return {0xFFFD, 1};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

bool is_unicode_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  // Latin-1 punctuation, General Punctuation, CJK symbols.
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
             (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011);
  }
}

void finish_token(std::string& tok, const TokenizerConfig& rules,
                  std::vector<std::string>& out) {
  if (tok.empty()) return;
  std::string_view view = tok;
  if (rules.strip_punctuation) {
    // Leading.
    while (!view.empty()) {
      const CodePoint cp = decode_utf8(view, 0);
      if (!is_punctuation(cp.value)) break;
      view.remove_prefix(cp.size);
    }
    // Trailing: walk back to the start of the last code point.
    while (!view.empty()) {
      std::size_t start = view.size() - 1;
      while (start > 0 && (static_cast<unsigned char>(view[start]) & 0xC0) == 0x80) --start;
      const CodePoint cp = decode_utf8(view, start);
      if (start + cp.size != view.size() || !is_punctuation(cp.value)) break;
      view.remove_suffix(cp.size);
    }
  }
  if (!view.empty()) {
    std::string word(view);
    if (rules.lowercase) {
      for (char& ch : word) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
      }
    }
    out.push_back(std::move(word));
  }
  tok.clear();
}

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kUnlabeled: return "unlabeled";
  }
  return "unlabeled";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  if (name == "unlabeled") return Split::kUnlabeled;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& rules) {
  std::vector<std::string> out;
  std::string tok;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const CodePoint cp = decode_utf8(text, pos);
    if (is_unicode_space(cp.value)) {
      finish_token(tok, rules, out);
    } else {
      tok.append(text.substr(pos, cp.size));
    }
    pos += cp.size;
  }
  finish_token(tok, rules, out);
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> freq,
                       std::int64_t min_count)
    : words_(std::move(words)), freq_(std::move(freq)), min_count_(min_count) {
  if (words_.size() != freq_.size()) {
    throw DataError("vocabulary: words and frequencies differ in length");
  }
  id_of_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (freq_[i] < min_count_) {
      throw DataError("vocabulary: word '" + words_[i] + "' has frequency below min_count");
    }
    if (!id_of_.emplace(words_[i], static_cast<WordId>(i)).second) {
      throw DataError("vocabulary: duplicate word '" + words_[i] + "'");
    }
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = id_of_.find(std::string(word));
  if (it == id_of_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::hash() const {
  Fnv1a h;
  h.update_u64(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    h.update(words_[i]);
    h.update_u64(static_cast<std::uint64_t>(freq_[i]));
  }
  return h.digest();
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i] << '\t' << freq_[i] << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary file '" + path + "'");
  std::vector<std::string> words;
  std::vector<std::int64_t> freq;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(path, lineno, "expected word<TAB>frequency");
    }
    std::int64_t f = 0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, f);
    if (ec != std::errc() || ptr != last || f < 1) {
      throw ParseError(path, lineno, "bad frequency");
    }
    words.push_back(line.substr(0, tab));
    freq.push_back(f);
  }
  const std::int64_t min_count =
      freq.empty() ? 1 : *std::min_element(freq.begin(), freq.end());
  try {
    return Vocabulary(std::move(words), std::move(freq), min_count);
  } catch (const DataError& e) {
    throw ParseError(path, 0, e.what());
  }
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> docs, std::int64_t min_count) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& doc : docs) {
    for (const auto& w : doc) ++counts[w];
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [w, c] : counts) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  if (kept.empty()) {
    throw DataError("empty vocabulary: no word occurs at least " + std::to_string(min_count) +
                    " times");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<std::int64_t> freq;
  words.reserve(kept.size());
  freq.reserve(kept.size());
  for (auto& [w, c] : kept) {
    words.push_back(std::move(w));
    freq.push_back(c);
  }
  return Vocabulary(std::move(words), std::move(freq), min_count);
}

SparseBow to_bow(std::span<const WordId> tokens, std::size_t vocab_size) {
  if (tokens.empty()) throw DataError("to_bow: empty document");
  std::vector<WordId> sorted(tokens.begin(), tokens.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0 || static_cast<std::size_t>(sorted.back()) >= vocab_size) {
    throw DataError("to_bow: token id outside vocabulary");
  }
  SparseBow bow;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    bow.indices.push_back(sorted[i]);
    bow.values.push_back(static_cast<std::int32_t>(j - i));
    i = j;
  }
  bow.total = static_cast<std::int64_t>(tokens.size());
  return bow;
}

SparseBow to_bow(const TokenizedDocument& doc, const Vocabulary& vocab) {
  return to_bow(doc.tokens, vocab.size());
}

std::vector<WordId> to_ids(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<WordId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto id = vocab.find(t)) ids.push_back(*id);
  }
  return ids;
}

std::vector<RawDocument> read_corpus_file(const std::string& path, Split split,
                                          const TokenizerConfig& rules) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path, lineno, "missing TAB between label and text");
    }
    RawDocument doc;
    doc.label = line.substr(0, tab);
    doc.tokens = tokenize(std::string_view(line).substr(tab + 1), rules);
    doc.split = split;
    doc.line = lineno;
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::size_t LabeledCorpus::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      documents.begin(), documents.end(), [&](const auto& d) { return d.split == split; }));
}

std::optional<int> LabeledCorpus::label_id(std::string_view name) const {
  auto it = std::lower_bound(label_names.begin(), label_names.end(), name);
  if (it == label_names.end() || *it != name) return std::nullopt;
  return static_cast<int>(it - label_names.begin());
}

LabeledCorpus make_corpus(std::span<const RawDocument> raw, const Vocabulary* vocab,
                          std::int64_t min_count, const std::string& origin) {
  LabeledCorpus corpus;
  if (vocab != nullptr) {
    corpus.vocab = *vocab;
  } else {
    std::vector<std::vector<std::string>> token_lists;
    token_lists.reserve(raw.size());
    for (const auto& d : raw) token_lists.push_back(d.tokens);
    corpus.vocab = build_vocab(token_lists, min_count);
  }
  std::set<std::string> labels;
  for (const auto& d : raw) {
    if (!d.label.empty()) labels.insert(d.label);
  }
  corpus.label_names.assign(labels.begin(), labels.end());

  corpus.documents.reserve(raw.size());
  for (const auto& d : raw) {
    TokenizedDocument doc;
    doc.doc_id = static_cast<std::int64_t>(corpus.documents.size());
    doc.tokens = to_ids(d.tokens, corpus.vocab);
    if (doc.tokens.empty()) {
      throw DataError(origin + " (" + std::string(split_name(d.split)) + " line " +
                      std::to_string(d.line) +
                      "): document is empty after dropping out-of-vocabulary tokens");
    }
    if (!d.label.empty()) doc.label = corpus.label_id(d.label);
    doc.split = d.split;
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

LabeledCorpus load_labeled_corpus(const CorpusSources& sources, const Vocabulary* vocab,
                                  std::int64_t min_count, const TokenizerConfig& rules) {
  if (sources.train_path.empty()) throw ConfigError("corpus: a training file is required");
  std::vector<RawDocument> raw = read_corpus_file(sources.train_path, Split::kTrain, rules);
  const auto append = [&](const std::string& path, Split split) {
    if (path.empty()) return;
    auto more = read_corpus_file(path, split, rules);
    raw.insert(raw.end(), std::make_move_iterator(more.begin()),
               std::make_move_iterator(more.end()));
  };
  append(sources.test_path, Split::kTest);
  append(sources.unlabeled_path, Split::kUnlabeled);
  return make_corpus(raw, vocab, min_count, "corpus");
}

LabeledCorpus load_labeled_corpus(const std::string& path, const Vocabulary* vocab,
                                  std::int64_t min_count) {
  return load_labeled_corpus(CorpusSources{path, {}, {}}, vocab, min_count);
}

}  // namespace augdoc
