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

#include "negsent/analysis.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace negsent {

void CueLexicon::add(const std::vector<std::string>& cue) {
  if (cue.empty()) throw UsageError("cue lexicon: empty cue");
  std::vector<std::string> lowered;
  lowered.reserve(cue.size());
  for (const auto& t : cue) lowered.push_back(to_lower(t));
  max_length_ = std::max(max_length_, static_cast<int>(lowered.size()));
  entries_.insert(std::move(lowered));
}

CueLexicon build_cue_lexicon(const std::vector<NegSentence>& sentences) {
  CueLexicon lex;
  for (const auto& s : sentences) {
    for (const auto& inst : s.instances) {
      std::vector<std::string> run;
      for (std::size_t k = 0; k < inst.cue.size(); ++k) {
        if (k > 0 && inst.cue[k] != inst.cue[k - 1] + 1) {
          lex.add(run);
          run.clear();
        }
        run.push_back(s.tokens.at(static_cast<std::size_t>(inst.cue[k])));
      }
      if (!run.empty()) lex.add(run);
    }
  }
  return lex;
}

void write_cue_lexicon(std::ostream& out, const CueLexicon& lex) {
  for (const auto& cue : lex.entries()) {
    for (std::size_t i = 0; i < cue.size(); ++i) out << (i ? " " : "") << cue[i];
    out << '\n';
  }
}

CueLexicon parse_cue_lexicon(std::istream& in, const std::string& source) {
  CueLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::vector<std::string> cue;
    for (std::string tok; fields >> tok;) cue.push_back(tok);
    if (!cue.empty()) lex.add(cue);
  }
  if (lex.empty()) throw ParseError(source, lineno, "cue lexicon is empty");
  return lex;
}

CueLexicon load_cue_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open");
  return parse_cue_lexicon(in, path.string());
}

bool is_punctuation(const std::string& token) {
  return token == "." || token == "," || token == ";" || token == ":" || token == "!" ||
         token == "?";
}

std::vector<HeurFlag> heur_tag(const std::vector<std::string>& tokens, const CueLexicon& lex) {
  const std::size_t n = tokens.size();
  std::vector<HeurFlag> flags(n, HeurFlag::kOut);
  if (lex.empty()) return flags;
  std::vector<std::string> lowered;
  lowered.reserve(n);
  for (const auto& t : tokens) lowered.push_back(to_lower(t));

  std::size_t i = 0;
  while (i < n) {
    std::size_t match = 0;
    const std::size_t longest = std::min<std::size_t>(static_cast<std::size_t>(lex.max_length()), n - i);
    for (std::size_t len = longest; len >= 1; --len) {
      std::vector<std::string> span(lowered.begin() + static_cast<std::ptrdiff_t>(i),
                                    lowered.begin() + static_cast<std::ptrdiff_t>(i + len));
      if (lex.contains(span)) {
        match = len;
        break;
      }
    }
    if (match == 0) {
      ++i;
      continue;
    }
    for (std::size_t k = i; k < i + match; ++k) flags[k] = HeurFlag::kCue;
    i += match;
    // Scope runs to the next punctuation; a later cue inside it is still a cue.
    for (std::size_t k = i; k < n && !is_punctuation(tokens[k]); ++k) {
      if (flags[k] == HeurFlag::kOut) flags[k] = HeurFlag::kInScope;
    }
  }
  return flags;
}

std::vector<int> heur_flag_ids(const std::vector<std::string>& tokens, const CueLexicon& lex) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (HeurFlag f : heur_tag(tokens, lex)) out.push_back(f == HeurFlag::kInScope ? 1 : 0);
  return out;
}

bool has_cue(const std::vector<std::string>& tokens, const CueLexicon& lex) {
  for (HeurFlag f : heur_tag(tokens, lex)) {
    if (f == HeurFlag::kCue) return true;
  }
  return false;
}

SilverSplit silver_split(const std::vector<SentimentExample>& data, const CueLexicon& lex) {
  SilverSplit out;
  for (const auto& e : data) (has_cue(e.tokens, lex) ? out.negated : out.non_negated).push_back(e);
  return out;
}

std::vector<std::size_t> subsample_indices(std::size_t size, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > size) {
    throw UsageError("subsample: n = " + std::to_string(n) + " outside 1.." + std::to_string(size));
  }
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(seed, RngStream::kSubsample);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<NegSentence> combine_corpora(const std::vector<NegSentence>& a,
                                         const std::vector<NegSentence>& b) {
  std::vector<NegSentence> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<NegSentence> negated_only(const std::vector<NegSentence>& sentences) {
  std::vector<NegSentence> out;
  for (const auto& s : sentences) {
    if (s.negated()) out.push_back(s);
  }
  return out;
}

TagSequence filter_labels(const TagSequence& tags, LabelFilter keep) {
  TagSequence out = tags;
  if (keep == LabelFilter::kBoth) return out;
  const TagCategory drop = keep == LabelFilter::kCuesOnly ? TagCategory::kScope : TagCategory::kCue;
  for (auto& l : out) {
    if (category_of(l) == drop) l = NegLabel::kO;
  }
  return out;
}

DatasetStats dataset_stats(const std::vector<std::vector<std::string>>& label_sequences) {
  DatasetStats st;
  for (const auto& seq : label_sequences) {
    for (const auto& l : seq) {
      ++st.counts[l];
      ++st.tokens;
    }
  }
  if (st.tokens == 0) throw UsageError("dataset_stats: empty corpus");
  std::vector<double> freq;
  for (const auto& [label, c] : st.counts) {
    freq.push_back(static_cast<double>(c) / static_cast<double>(st.tokens));
  }
  for (double p : freq) st.entropy -= p * std::log(p);
  if (st.entropy < 0) st.entropy = 0;  // -0.0 for a single label

  const double k = static_cast<double>(freq.size());
  const double mean = 1.0 / k;
  double m2 = 0, m4 = 0;
  for (double p : freq) {
    const double d = p - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= k;
  m4 /= k;
  st.kurtosis = m2 > 0 ? m4 / (m2 * m2) - 3.0 : std::numeric_limits<double>::quiet_NaN();
  return st;
}

DatasetStats dataset_stats(const std::vector<NegSentence>& sentences, LabelFilter keep) {
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::vector<std::string> names;
    for (NegLabel l : filter_labels(to_bio(s), keep)) names.emplace_back(neg_label_name(l));
    seqs.push_back(std::move(names));
  }
  return dataset_stats(seqs);
}

}  // namespace negsent
