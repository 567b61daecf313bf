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

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "negsent/corpus.hpp"

namespace negsent {

std::string_view corpus_name(CorpusId id) {
  switch (id) {
    case CorpusId::kSfu: return "sfu";
    case CorpusId::kCd: return "cd";
    case CorpusId::kOther: return "other";
  }
  return "other";
}

const std::vector<std::string>& neg_label_names() {
  static const std::vector<std::string> names{"O", "B-Cue", "I-Cue", "B-Scope", "I-Scope"};
  return names;
}

std::string_view neg_label_name(NegLabel label) {
  return neg_label_names()[static_cast<std::size_t>(label)];
}

NegLabel parse_neg_label(std::string_view name) {
  const auto& names = neg_label_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<NegLabel>(i);
  }
  throw UsageError("unknown negation label '" + std::string(name) + "'");
}

TagCategory category_of(NegLabel label) {
  switch (label) {
    case NegLabel::kBCue:
    case NegLabel::kICue: return TagCategory::kCue;
    case NegLabel::kBScope:
    case NegLabel::kIScope: return TagCategory::kScope;
    case NegLabel::kO: break;
  }
  return TagCategory::kNone;
}

TagSequence to_bio(const NegSentence& s) {
  const std::size_t n = s.tokens.size();
  std::vector<TagCategory> cat(n, TagCategory::kNone);
  for (const auto& inst : s.instances) {
    for (int i : inst.scope) {
      if (cat.at(static_cast<std::size_t>(i)) == TagCategory::kNone) cat[i] = TagCategory::kScope;
    }
  }
  for (const auto& inst : s.instances) {
    for (int i : inst.cue) cat.at(static_cast<std::size_t>(i)) = TagCategory::kCue;
  }

  TagSequence tags(n, NegLabel::kO);
  for (std::size_t i = 0; i < n; ++i) {
    const bool continues = i > 0 && cat[i - 1] == cat[i];
    switch (cat[i]) {
      case TagCategory::kCue: tags[i] = continues ? NegLabel::kICue : NegLabel::kBCue; break;
      case TagCategory::kScope: tags[i] = continues ? NegLabel::kIScope : NegLabel::kBScope; break;
      case TagCategory::kNone: break;
    }
  }
  return tags;
}

DecodedTags decode_bio(const TagSequence& tags) {
  DecodedTags out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    switch (category_of(tags[i])) {
      case TagCategory::kCue: out.cue.push_back(static_cast<int>(i)); break;
      case TagCategory::kScope: out.scope.push_back(static_cast<int>(i)); break;
      case TagCategory::kNone: break;
    }
  }
  return out;
}

bool bio_well_formed(const TagSequence& tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const bool inside = tags[i] == NegLabel::kICue || tags[i] == NegLabel::kIScope;
    if (!inside) continue;
    if (i == 0 || category_of(tags[i - 1]) != category_of(tags[i])) return false;
  }
  return true;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    cols.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cols;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

struct Block {
  std::vector<std::vector<std::string>> rows;
  std::size_t first_line = 0;
};

NegSentence build_sentence(const Block& block, CorpusId corpus, const std::string& source,
                           int base_columns) {
  const std::size_t width = block.rows.front().size();
  const auto base = static_cast<std::size_t>(base_columns);
  const bool no_negation = width == base + 1 && block.rows.front().back() == "***";
  if (!no_negation && (width < base + 3 || (width - base) % 3 != 0)) {
    throw ParseError(source, block.first_line,
                     "malformed column count " + std::to_string(width));
  }

  NegSentence s;
  s.corpus = corpus;
  const std::size_t k = no_negation ? 0 : (width - base) / 3;
  std::vector<std::set<int>> cues(k), scopes(k);
  for (std::size_t r = 0; r < block.rows.size(); ++r) {
    const auto& cols = block.rows[r];
    if (cols.size() != width) {
      throw ParseError(source, block.first_line + r,
                       "inconsistent instance columns: expected " + std::to_string(width) +
                           ", found " + std::to_string(cols.size()));
    }
    if (no_negation && cols.back() != "***") {
      throw ParseError(source, block.first_line + r, "expected '***' in negation column");
    }
    if (cols[3].empty()) throw ParseError(source, block.first_line + r, "empty token");
    s.tokens.push_back(cols[3]);
    const int idx = static_cast<int>(r);
    for (std::size_t j = 0; j < k; ++j) {
      const auto& cue = cols[base + 3 * j];
      const auto& scope = cols[base + 3 * j + 1];
      // Affixal cues ("un" of "unlikely") mark the whole token.
      if (!cue.empty() && cue != "_") cues[j].insert(idx);
      if (!scope.empty() && scope != "_") scopes[j].insert(idx);
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (cues[j].empty()) continue;
    NegInstance inst;
    inst.cue.assign(cues[j].begin(), cues[j].end());
    for (int i : scopes[j]) {
      if (!cues[j].count(i)) inst.scope.push_back(i);
    }
    s.instances.push_back(std::move(inst));
  }
  return s;
}

}  // namespace

std::vector<NegSentence> parse_negation_conll(std::istream& in, CorpusId corpus,
                                              const std::string& source, int base_columns) {
  if (base_columns < 4) throw UsageError("base_columns must be >= 4 (word is column 4)");
  std::vector<NegSentence> out;
  Block block;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!block.rows.empty()) out.push_back(build_sentence(block, corpus, source, base_columns));
    block = Block{};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) {
      flush();
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() <= static_cast<std::size_t>(base_columns)) {
      throw ParseError(source, lineno, "malformed column count " + std::to_string(cols.size()));
    }
    if (block.rows.empty()) block.first_line = lineno;
    block.rows.push_back(std::move(cols));
  }
  flush();
  return out;
}

std::vector<NegSentence> load_negation_conll(const std::filesystem::path& path, CorpusId corpus) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_negation_conll(in, corpus, path.string());
}

std::vector<NegSentence> load_negation_sfu(const std::filesystem::path& path) {
  return load_negation_conll(path, CorpusId::kSfu);
}

void write_negation_conll(std::ostream& out, const std::vector<NegSentence>& sentences,
                          const std::string& doc_id) {
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& sent = sentences[s];
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      out << doc_id << '\t' << s << '\t' << i << '\t' << sent.tokens[i] << "\t_\t_\t_";
      if (sent.instances.empty()) {
        out << "\t***";
      } else {
        const int idx = static_cast<int>(i);
        for (const auto& inst : sent.instances) {
          const bool cue = std::binary_search(inst.cue.begin(), inst.cue.end(), idx);
          const bool scope = std::binary_search(inst.scope.begin(), inst.scope.end(), idx);
          out << '\t' << (cue ? sent.tokens[i] : "_") << '\t' << (scope ? sent.tokens[i] : "_")
              << "\t_";
        }
      }
      out << '\n';
    }
    out << '\n';
  }
}

}  // namespace negsent
