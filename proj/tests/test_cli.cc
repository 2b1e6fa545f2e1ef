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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "augdoc/checkpoint.h"
#include "augdoc/trainer.h"
#include "cli.h"
#include "synthetic.h"

namespace augdoc {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kData = AUGDOC_TEST_DATA_DIR;
const std::string kLexicons = AUGDOC_LEXICON_DIR;
const std::string kTrain = kData + "/mini_train.txt";
const std::string kTest = kData + "/mini_test.txt";

std::vector<std::string> corpus_flags() {
  return {"--corpus", kTrain, "--test-corpus", kTest, "--min-count", "2"};
}

// Flags in `extra` replace the defaults of the same name.
std::vector<std::string> train_args(const std::string& ckpt,
                                    std::vector<std::string> extra = {}) {
  std::vector<std::string> a{"train"};
  for (auto& f : corpus_flags()) a.push_back(f);
  for (auto& f : std::vector<std::string>{"--preset", "r8", "--lexicon-dir", kLexicons, "--dim",
                                          "8", "--batch", "16", "--epochs", "2",
                                          "--checkpoint-out", ckpt, "--quiet"}) {
    a.push_back(f);
  }
  for (std::size_t i = 0; i + 1 < extra.size(); i += 2) {
    const auto it = std::find(a.begin(), a.end(), extra[i]);
    if (it != a.end()) {
      *(it + 1) = extra[i + 1];
    } else {
      a.push_back(extra[i]);
      a.push_back(extra[i + 1]);
    }
  }
  return a;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// key=value lines following the resolved-configuration banner.
std::string echoed_config(const std::string& err) {
  std::istringstream in(err);
  std::string line, out;
  bool inside = false;
  while (std::getline(in, line)) {
    if (line.rfind("# augdoc", 0) == 0) {
      inside = true;
      continue;
    }
    if (inside) {
      if (line.find('=') == std::string::npos) break;
      out += line + "\n";
    }
  }
  return out;
}

TEST(Cli, MissingCorpusIsUsageError) {
  EXPECT_EQ(cli({"train", "--checkpoint-out", "x"}).code, cli::kUsage);
  EXPECT_EQ(cli({"build-vocab", "--out", "x"}).code, cli::kUsage);
  EXPECT_EQ(cli({"augment-preview", "--aug", "wordnet"}).code, cli::kUsage);
  const auto r = cli({"train", "--preset", "r8"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("--corpus"), std::string::npos);
}

TEST(Cli, UnknownFlagAndSubcommand) {
  EXPECT_EQ(cli({"train", "--corpus", kTrain, "--bogus", "1"}).code, cli::kUsage);
  EXPECT_EQ(cli({"fit"}).code, cli::kUsage);
  EXPECT_EQ(cli({}).code, cli::kUsage);
}

TEST(Cli, MissingFileExitCode) {
  const auto r = cli({"build-vocab", "--corpus", "/nonexistent/train.txt", "--out", "v.tsv"});
  EXPECT_EQ(r.code, cli::kMissingFile);
  EXPECT_NE(r.err.find("augdoc: error"), std::string::npos);
}

TEST(Cli, ConfigConflictExitCode) {
  const auto ckpt = testing::temp_path("conflict.ckpt");
  EXPECT_EQ(cli(train_args(ckpt, {"--aug", "none", "--lambda", "1"})).code,
            cli::kConfigConflict);
  EXPECT_EQ(cli(train_args(ckpt, {"--tau", "0"})).code, cli::kConfigConflict);
  EXPECT_EQ(cli(train_args(ckpt, {"--preset", "ag_news"})).code, cli::kConfigConflict);
  EXPECT_EQ(cli(train_args(ckpt, {"--aug", "backtranslation", "--lexicon-dir", "/nonexistent"}))
                .code,
            cli::kMissingFile);
}

TEST(Cli, DataErrorExitCode) {
  const auto bad = testing::temp_path("bad_corpus.txt");
  std::ofstream(bad) << "earn\tfine words here\nno tab on this line\n";
  EXPECT_EQ(cli({"build-vocab", "--corpus", bad, "--min-count", "1", "--out",
                 testing::temp_path("v.tsv")})
                .code,
            cli::kDataError);
  const auto corrupt = testing::temp_path("corrupt.ckpt");
  std::ofstream(corrupt) << "AUGDCKPT garbage";
  std::vector<std::string> args{"embed"};
  for (auto& f : corpus_flags()) args.push_back(f);
  for (auto& f : std::vector<std::string>{"--checkpoint", corrupt, "--out",
                                          testing::temp_path("e.txt")}) {
    args.push_back(f);
  }
  EXPECT_EQ(cli(args).code, cli::kDataError);
}

TEST(Cli, DivergenceExitCode) {
  const auto r = cli(train_args(testing::temp_path("nan.ckpt"), {"--lr", "1e300", "--epochs",
                                                                 "5"}));
  EXPECT_EQ(r.code, cli::kTrainingFailed);
  EXPECT_NE(r.err.find("epoch"), std::string::npos);
}

TEST(Cli, HelpListsEveryFlag) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, cli::kOk);
  const std::string help = r.out + r.err;
  for (const char* sub : {"build-vocab", "augment-preview", "train", "embed", "eval-classify",
                          "eval-cluster"}) {
    EXPECT_NE(help.find(sub), std::string::npos) << sub;
  }
  // Every flag literal in the front end's source must be documented.
  const std::string src = read_all(AUGDOC_CLI_SOURCE);
  ASSERT_FALSE(src.empty());
  const std::regex flag("\"(-[a-z],)?(--[a-z][a-z0-9-]*)");
  std::set<std::string> flags;
  for (auto it = std::sregex_iterator(src.begin(), src.end(), flag); it != std::sregex_iterator();
       ++it) {
    flags.insert((*it)[2]);
  }
  EXPECT_GT(flags.size(), 30u);
  for (const auto& f : flags) {
    EXPECT_TRUE(std::regex_search(help, std::regex(f + "[ ={,]|" + f + "$"))) << f;
  }
  for (const char* f : {"--corpus", "--preset", "--dim", "--window", "--negatives",
                        "--doc-sample", "--batch", "--lr", "--epochs", "--lambda", "--tau",
                        "--framework", "--aug", "--lexicon-dir", "--seed", "--threads",
                        "--deterministic", "--checkpoint-out", "--doc-id", "--count",
                        "--embeddings", "--labels", "--split", "--k", "--config", "--quiet"}) {
    EXPECT_NE(help.find(f), std::string::npos) << f;
  }
}

TEST(Cli, SubcommandHelp) {
  const auto r = cli({"train", "--help"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE((r.out + r.err).find("--checkpoint-out"), std::string::npos);
}

TEST(Cli, PresetTrainingEchoesTableSettings) {
  const auto ckpt = testing::temp_path("preset.ckpt");
  const auto r = cli(train_args(ckpt, {"--aug", "antonym", "--lambda", "1.0"}));
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto cfg = echoed_config(r.err);
  for (const char* kv : {"window=6\n", "negatives=5\n", "doc_sample=5\n", "aug=antonym\n",
                         "lambda=1\n", "seed=1\n"}) {
    EXPECT_NE(cfg.find(kv), std::string::npos) << kv;
  }
  EXPECT_TRUE(fs::exists(ckpt));
}

TEST(Cli, EchoedConfigReproducesRun) {
  const auto a = testing::temp_path("echo_a.ckpt");
  const auto r = cli(train_args(a, {"--seed", "7", "--tau", "0.5"}));
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto file = testing::temp_path("echo.cfg");
  std::ofstream(file) << echoed_config(r.err);
  const auto b = testing::temp_path("echo_b.ckpt");
  const auto r2 = cli({"train", "--config", file, "--checkpoint-out", b});
  ASSERT_EQ(r2.code, cli::kOk) << r2.err;
  EXPECT_EQ(read_all(a), read_all(b));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto file = testing::temp_path("override.cfg");
  std::ofstream(file) << "# comment\ncorpus=" << kTrain << "\nmin-count=2\ndim=8\nbatch=16\n"
                      << "epochs=1\nlambda=0\ntau=0.25\n";
  const auto r = cli({"train", "--config", file, "--dim", "6", "--checkpoint-out",
                      testing::temp_path("override.ckpt"), "--quiet"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto cfg = echoed_config(r.err);
  EXPECT_NE(cfg.find("dim=6\n"), std::string::npos);
  EXPECT_NE(cfg.find("tau=0.25\n"), std::string::npos);

  std::ofstream(file, std::ios::app) << "no_such_key=3\n";
  EXPECT_EQ(cli({"train", "--config", file, "--checkpoint-out", "x"}).code,
            cli::kConfigConflict);
}

TEST(Cli, AugmentPreviewMatchesTrainerViews) {
  const auto r = cli({"augment-preview", "--corpus", kTrain, "--test-corpus", kTest,
                      "--min-count", "2", "--doc-id", "0", "--aug", "wordnet", "-n", "3",
                      "--lexicon-dir", kLexicons, "--seed", "4"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::istringstream lines(r.out);
  std::vector<std::string> got;
  for (std::string l; std::getline(lines, l);) got.push_back(l);
  ASSERT_EQ(got.size(), 4u);
  EXPECT_EQ(got[0].rfind("original\t", 0), 0u);

  const auto corpus = load_labeled_corpus(CorpusSources{kTrain, kTest, {}}, nullptr, 2);
  const auto lex = load_lexicon(kLexicons + "/synonyms_wordnet.tsv", "", "", corpus.vocab);
  TrainConfig c;
  c.augment.kind = AugmentKind::kWordNet;
  c.seed = 4;
  const Trainer t(corpus, &lex, c);
  for (int i = 0; i < 3; ++i) {
    const auto view = t.augmented_view(corpus.documents[0], i);
    std::string text;
    for (WordId w : view.tokens) text += (text.empty() ? "" : " ") + corpus.vocab.word(w);
    EXPECT_EQ(got[static_cast<std::size_t>(i) + 1], "view " + std::to_string(i) + "\t" + text);
  }
}

TEST(Cli, EndToEndPipeline) {
  const auto vocab = testing::temp_path("pipe_vocab.tsv");
  std::vector<std::string> bv{"build-vocab"};
  for (auto& f : corpus_flags()) bv.push_back(f);
  bv.push_back("--out");
  bv.push_back(vocab);
  ASSERT_EQ(cli(bv).code, cli::kOk);

  const auto ckpt = testing::temp_path("pipe.ckpt");
  auto tr = train_args(ckpt, {"--vocab", vocab, "--epochs", "3", "--lr", "0.01"});
  const auto trained = cli(tr);
  ASSERT_EQ(trained.code, cli::kOk) << trained.err;

  // Resuming past the end with a larger epoch budget continues training.
  auto more = train_args(ckpt, {"--vocab", vocab, "--epochs", "4", "--lr", "0.01", "--resume",
                                ckpt});
  ASSERT_EQ(cli(more).code, cli::kOk);
  EXPECT_EQ(load_checkpoint(ckpt).epoch, 4);

  const auto emb = testing::temp_path("pipe_emb.bin");
  const auto labels = testing::temp_path("pipe_labels.tsv");
  const auto split = testing::temp_path("pipe_split.tsv");
  std::vector<std::string> em{"embed"};
  for (auto& f : corpus_flags()) em.push_back(f);
  for (auto& f : std::vector<std::string>{"--vocab", vocab, "--checkpoint", ckpt, "--out", emb,
                                          "--format", "binary", "--labels-out", labels,
                                          "--split-out", split}) {
    em.push_back(f);
  }
  ASSERT_EQ(cli(em).code, cli::kOk);

  const auto cls = cli({"eval-classify", "--embeddings", emb, "--labels", labels, "--split",
                        split, "--quiet"});
  ASSERT_EQ(cls.code, cli::kOk) << cls.err;
  const auto report = nlohmann::json::parse(cls.out);
  EXPECT_EQ(report["task"], "classify");
  const double err_rate = report["value"];
  EXPECT_GE(err_rate, 0.0);
  EXPECT_LE(err_rate, 1.0);
  for (const char* key : {"metric", "config", "seed", "wall_clock_seconds"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }

  const auto clu = cli({"eval-cluster", "--embeddings", emb, "--labels", labels, "--quiet"});
  ASSERT_EQ(clu.code, cli::kOk) << clu.err;
  const auto creport = nlohmann::json::parse(clu.out);
  EXPECT_EQ(creport["task"], "cluster");
  EXPECT_EQ(creport["metric"], "nmi");
  const double nmi = creport["value"];
  EXPECT_GE(nmi, 0.0);
  EXPECT_LE(nmi, 1.0);
}

TEST(Cli, VocabularyMismatchOnEmbed) {
  const auto ckpt = testing::temp_path("vm.ckpt");
  ASSERT_EQ(cli(train_args(ckpt)).code, cli::kOk);
  const auto r = cli({"embed", "--corpus", kTrain, "--min-count", "1", "--checkpoint", ckpt,
                      "--out", testing::temp_path("vm.txt")});
  EXPECT_EQ(r.code, cli::kDataError);
}

}  // namespace
}  // namespace augdoc
