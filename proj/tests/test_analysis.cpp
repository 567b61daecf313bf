/* Copyright 2026 The negsent Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "negsent/analysis.hpp"

namespace negsent {
namespace {

using F = HeurFlag;

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

CueLexicon small_lexicon() {
  CueLexicon lex;
  lex.add({"not"});
  lex.add({"n't"});
  lex.add({"no"});
  lex.add({"by", "no", "means"});
  return lex;
}

TEST(HeurTag, CueToNextPunctuation) {
  const auto flags = heur_tag(words("not good at all ."), small_lexicon());
  EXPECT_EQ(flags, (std::vector<F>{F::kCue, F::kInScope, F::kInScope, F::kInScope, F::kOut}));
  EXPECT_EQ(heur_flag_ids(words("not good at all ."), small_lexicon()),
            (std::vector<int>{0, 1, 1, 1, 0}));
}

TEST(HeurTag, NoCueAndEmptyScope) {
  EXPECT_EQ(heur_tag(words("a fine film ."), small_lexicon()), std::vector<F>(4, F::kOut));
  EXPECT_EQ(heur_flag_ids(words("a fine film ."), small_lexicon()), std::vector<int>(4, 0));
  EXPECT_EQ(heur_tag(words("no , really"), small_lexicon()),
            (std::vector<F>{F::kCue, F::kOut, F::kOut}));
}

TEST(HeurTag, GreedyLongestMatchCaseInsensitive) {
  const auto flags = heur_tag(words("By No Means bad ; fine"), small_lexicon());
  EXPECT_EQ(flags, (std::vector<F>{F::kCue, F::kCue, F::kCue, F::kInScope, F::kOut, F::kOut}));
  // A cue inside another cue's scope stays a cue and opens its own scope.
  EXPECT_EQ(heur_tag(words("not bad , is n't it"), small_lexicon()),
            (std::vector<F>{F::kCue, F::kInScope, F::kOut, F::kOut, F::kCue, F::kInScope}));
}

TEST(CueLexicon, BuiltFromAnnotationsAndFileRoundTrip) {
  NegSentence s;
  s.tokens = words("Neither good nor Bad");
  s.instances = {{{0, 2}, {1, 3}}};
  NegSentence t;
  t.tokens = words("it is n't");
  t.instances = {{{1, 2}, {0}}};
  const auto lex = build_cue_lexicon({s, t});
  EXPECT_TRUE(lex.contains({"neither"}));
  EXPECT_TRUE(lex.contains({"nor"}));
  EXPECT_TRUE(lex.contains({"is", "n't"}));
  EXPECT_EQ(lex.size(), 3u);
  std::ostringstream out;
  write_cue_lexicon(out, lex);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_cue_lexicon(in).entries(), lex.entries());
  std::istringstream empty("\n");
  EXPECT_THROW(parse_cue_lexicon(empty), ParseError);
}

TEST(SilverSplit, PartitionsByCuePresence) {
  std::vector<SentimentExample> data;
  for (const char* s : {"not good", "great", "no way", "fine ."}) {
    data.push_back({words(s), 1, Granularity::kBinary, Unit::kSentence});
  }
  const auto split = silver_split(data, small_lexicon());
  EXPECT_EQ(split.negated.size(), 2u);
  EXPECT_EQ(split.non_negated.size(), 2u);
  EXPECT_EQ(split.negated[1].tokens, words("no way"));
  const auto empty = silver_split({}, small_lexicon());
  EXPECT_TRUE(empty.negated.empty() && empty.non_negated.empty());
}

TEST(Subsample, SubsetSizeAndDeterminism) {
  std::vector<int> data(50);
  for (int i = 0; i < 50; ++i) data[i] = i * 10;
  const auto a = subsample(data, 10, 1);
  EXPECT_EQ(a.size(), 10u);
  EXPECT_EQ(a, subsample(data, 10, 1));
  EXPECT_NE(a, subsample(data, 10, 2));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));  // original order kept
  for (int v : a) EXPECT_EQ(v % 10, 0);
  EXPECT_EQ(subsample(data, 50, 3), data);
  EXPECT_THROW(subsample(data, 51, 1), UsageError);
  EXPECT_THROW(subsample(data, 0, 1), UsageError);
}

TEST(Subsample, SentencesKeepAnnotations) {
  std::vector<NegSentence> corpus;
  for (int i = 0; i < 30; ++i) {
    NegSentence s;
    s.tokens = {"t" + std::to_string(i), "x"};
    s.instances = {{{0}, {1}}};
    corpus.push_back(s);
  }
  for (const auto& s : subsample(corpus, 10, 1)) {
    const int i = std::stoi(s.tokens[0].substr(1));
    EXPECT_EQ(s.instances.size(), corpus[static_cast<std::size_t>(i)].instances.size());
    EXPECT_EQ(to_bio(s), to_bio(corpus[static_cast<std::size_t>(i)]));
  }
}

TEST(Combine, ConcatenatesAndKeepsProvenance) {
  NegSentence a;
  a.tokens = {"a"};
  a.corpus = CorpusId::kSfu;
  NegSentence b;
  b.tokens = {"b"};
  b.corpus = CorpusId::kCd;
  const auto c = combine_corpora({a, a}, {b});
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].corpus, CorpusId::kSfu);
  EXPECT_EQ(c[2].corpus, CorpusId::kCd);
  EXPECT_EQ(combine_corpora({a}, {}).size(), 1u);
}

TEST(FilterLabels, FigureSequenceCuesOnly) {
  using L = NegLabel;
  const TagSequence fig{L::kO, L::kO, L::kBCue, L::kBScope, L::kIScope, L::kO,
                        L::kO, L::kO, L::kBCue, L::kICue,   L::kBScope, L::kO};
  const TagSequence cues{L::kO, L::kO, L::kBCue, L::kO, L::kO, L::kO,
                         L::kO, L::kO, L::kBCue, L::kICue, L::kO, L::kO};
  EXPECT_EQ(filter_labels(fig, LabelFilter::kCuesOnly), cues);
  EXPECT_EQ(filter_labels(cues, LabelFilter::kCuesOnly), cues);
  const auto scopes = filter_labels(fig, LabelFilter::kScopesOnly);
  EXPECT_TRUE(bio_well_formed(scopes));
  EXPECT_EQ(filter_labels(scopes, LabelFilter::kScopesOnly), scopes);
  EXPECT_EQ(filter_labels(fig, LabelFilter::kBoth), fig);
  EXPECT_EQ(filter_labels(TagSequence(3, L::kO), LabelFilter::kCuesOnly), TagSequence(3, L::kO));
}

TEST(DatasetStats, EntropyAndKurtosis) {
  const auto single = dataset_stats({{"O", "O", "O"}});
  EXPECT_EQ(single.entropy, 0.0);
  EXPECT_TRUE(std::isnan(single.kurtosis));
  const auto half = dataset_stats({{"A", "B"}, {"A", "B"}});
  EXPECT_NEAR(half.entropy, std::log(2.0), 1e-12);
  EXPECT_EQ(half.counts.at("A"), 2);
  // Frequencies (0.7, 0.1, 0.1, 0.1): mean 0.25, deviations (.45, -.15 x3).
  std::vector<std::string> seq(7, "O");
  seq.insert(seq.end(), {"X", "Y", "Z"});
  const auto st = dataset_stats({seq});
  const double m2 = (0.45 * 0.45 + 3 * 0.15 * 0.15) / 4;
  const double m4 = (std::pow(0.45, 4) + 3 * std::pow(0.15, 4)) / 4;
  EXPECT_NEAR(st.kurtosis, m4 / (m2 * m2) - 3, 1e-12);
  EXPECT_NEAR(st.entropy, -(0.7 * std::log(0.7) + 3 * 0.1 * std::log(0.1)), 1e-12);
  EXPECT_THROW(dataset_stats(std::vector<std::vector<std::string>>{}), UsageError);
}

TEST(DatasetStats, NegationCorpusUsesBioLabels) {
  NegSentence s;
  s.tokens = words("a b c d");
  s.instances = {{{0}, {1, 2}}};
  const auto st = dataset_stats({s});
  EXPECT_EQ(st.counts.at("B-Cue"), 1);
  EXPECT_EQ(st.counts.at("B-Scope"), 1);
  EXPECT_EQ(st.counts.at("I-Scope"), 1);
  EXPECT_EQ(st.tokens, 4);
  const auto cues = dataset_stats({s}, LabelFilter::kCuesOnly);
  EXPECT_EQ(cues.counts.at("O"), 3);
}

}  // namespace
}  // namespace negsent
