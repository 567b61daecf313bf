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

// Heuristic negation tagging, silver splits, data ablation helpers and label
// distribution statistics.

#ifndef NEGSENT_ANALYSIS_HPP_
#define NEGSENT_ANALYSIS_HPP_

#include <algorithm>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "negsent/corpus.hpp"

namespace negsent {

// Lowercased cue token sequences.
class CueLexicon {
 public:
  void add(const std::vector<std::string>& cue);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  int max_length() const { return max_length_; }
  bool contains(const std::vector<std::string>& lowered) const {
    return entries_.count(lowered) > 0;
  }
  const std::set<std::vector<std::string>>& entries() const { return entries_; }

 private:
  std::set<std::vector<std::string>> entries_;
  int max_length_ = 0;
};

// Every contiguous run of cue tokens of every instance becomes one entry.
CueLexicon build_cue_lexicon(const std::vector<NegSentence>& sentences);

// One cue per line, tokens separated by spaces.
void write_cue_lexicon(std::ostream& out, const CueLexicon& lex);
CueLexicon parse_cue_lexicon(std::istream& in, const std::string& source = "<lexicon>");
CueLexicon load_cue_lexicon(const std::filesystem::path& path);

bool is_punctuation(const std::string& token);  // . , ; : ! ?

enum class HeurFlag { kOut = 0, kCue = 1, kInScope = 2 };

// Greedy longest lexicon match from left to right marks cues; tokens after a
// cue up to the next punctuation token are in scope.
std::vector<HeurFlag> heur_tag(const std::vector<std::string>& tokens, const CueLexicon& lex);

// Flag-embedding rows for the HEUR model: 1 for in-scope tokens, else 0.
std::vector<int> heur_flag_ids(const std::vector<std::string>& tokens, const CueLexicon& lex);

bool has_cue(const std::vector<std::string>& tokens, const CueLexicon& lex);

struct SilverSplit {
  std::vector<SentimentExample> negated;
  std::vector<SentimentExample> non_negated;
};

// A sentence is negated when any lexicon cue matches it.
SilverSplit silver_split(const std::vector<SentimentExample>& data, const CueLexicon& lex);

// Indices of a uniform subset of size n, ascending.
std::vector<std::size_t> subsample_indices(std::size_t size, std::size_t n, std::uint64_t seed);

// Uniform subset without replacement, in original order.
template <typename T>
std::vector<T> subsample(const std::vector<T>& data, std::size_t n, std::uint64_t seed) {
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i : subsample_indices(data.size(), n, seed)) out.push_back(data[i]);
  return out;
}

std::vector<NegSentence> combine_corpora(const std::vector<NegSentence>& a,
                                         const std::vector<NegSentence>& b);

std::vector<NegSentence> negated_only(const std::vector<NegSentence>& sentences);

enum class LabelFilter { kBoth, kCuesOnly, kScopesOnly };

// Labels of the dropped category become O.
TagSequence filter_labels(const TagSequence& tags, LabelFilter keep);

struct DatasetStats {
  double entropy = 0.0;   // nats
  double kurtosis = 0.0;  // Fisher excess over label relative frequencies; NaN if undefined
  std::map<std::string, long> counts;
  long tokens = 0;
};

// Token-label distribution of a tagged corpus. Only labels that occur are
// part of the frequency vector.
DatasetStats dataset_stats(const std::vector<std::vector<std::string>>& label_sequences);
DatasetStats dataset_stats(const std::vector<NegSentence>& sentences,
                           LabelFilter keep = LabelFilter::kBoth);

}  // namespace negsent

#endif  // NEGSENT_ANALYSIS_HPP_
