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

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "negsent/corpus.hpp"

namespace negsent {

const std::vector<std::string>& sentiment_label_names(Granularity g, Unit u) {
  static const std::vector<std::string> fine5{"strong-neg", "neg", "neutral", "pos", "strong-pos"};
  static const std::vector<std::string> fine3{"neg", "neutral", "pos"};
  static const std::vector<std::string> binary{"neg", "pos"};
  if (g == Granularity::kBinary) return binary;
  return u == Unit::kTweet ? fine3 : fine5;
}

int num_sentiment_classes(Granularity g, Unit u) {
  return static_cast<int>(sentiment_label_names(g, u).size());
}

namespace {

std::string canonical_label(std::string_view text) {
  std::string s = to_lower(text);
  for (auto& c : s) {
    if (c == '_' || c == ' ') c = '-';
  }
  if (s == "negative") return "neg";
  if (s == "positive") return "pos";
  if (s == "very-negative" || s == "strong-negative" || s == "strongly-negative") return "strong-neg";
  if (s == "very-positive" || s == "strong-positive" || s == "strongly-positive") return "strong-pos";
  if (s == "objective" || s == "objective-or-neutral") return "neutral";
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

int parse_sentiment_label(std::string_view text, Granularity g, Unit u) {
  const auto& names = sentiment_label_names(g, u);
  // SST-style integer labels for five-way data.
  if (names.size() == 5 && text.size() == 1 && text[0] >= '0' && text[0] <= '4') {
    return text[0] - '0';
  }
  const std::string label = canonical_label(text);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == label) return static_cast<int>(i);
  }
  throw UsageError("unknown label '" + std::string(text) + "'");
}

std::optional<SentimentExample> to_binary(const SentimentExample& e) {
  if (e.granularity != Granularity::kFine) {
    throw UsageError("to_binary: example is already binary");
  }
  const std::string& name = sentiment_label_names(e.granularity, e.unit).at(
      static_cast<std::size_t>(e.label));
  SentimentExample out = e;
  out.granularity = Granularity::kBinary;
  if (name == "neutral") return std::nullopt;
  out.label = (name == "neg" || name == "strong-neg") ? 0 : 1;
  return out;
}

// --- trees ------------------------------------------------------------------

std::vector<std::string> ParseTree::yield() const {
  std::vector<std::string> out;
  std::vector<const ParseTree*> stack{this};
  while (!stack.empty()) {
    const ParseTree* t = stack.back();
    stack.pop_back();
    if (t->leaf()) {
      out.push_back(t->word);
      continue;
    }
    for (auto it = t->children.rbegin(); it != t->children.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

namespace {

class TreeReader {
 public:
  TreeReader(std::string_view text, const std::string& source, std::size_t line)
      : text_(text), source_(source), line_(line) {}

  ParseTree read() {
    ParseTree t = node();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after tree");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, line_, what + " (column " + std::to_string(pos_ + 1) + ")");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view atom() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  ParseTree node() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '(') fail("expected '('");
    ++pos_;
    ParseTree t;
    const auto label = atom();
    int value = -1;
    const auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), value);
    if (label.empty() || ec != std::errc() || ptr != label.data() + label.size()) {
      fail("unlabeled node");
    }
    t.label = value;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      while (true) {
        skip_ws();
        if (pos_ >= text_.size()) fail("unterminated node");
        if (text_[pos_] == ')') break;
        t.children.push_back(node());
      }
    } else {
      const auto word = atom();
      if (word.empty()) fail("empty leaf");
      t.word = std::string(word);
      skip_ws();
    }
    if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
    ++pos_;
    return t;
  }

  std::string_view text_;
  const std::string& source_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

void collect_phrases(const ParseTree& t, std::vector<SentimentExample>& out) {
  SentimentExample e;
  e.tokens = t.yield();
  e.label = t.label;
  e.granularity = Granularity::kFine;
  e.unit = Unit::kPhrase;
  out.push_back(std::move(e));
  for (const auto& c : t.children) collect_phrases(c, out);
}

}  // namespace

ParseTree parse_tree(std::string_view text, const std::string& source, std::size_t line) {
  ParseTree t = TreeReader(text, source, line).read();
  // Five-way labels only.
  std::vector<const ParseTree*> stack{&t};
  while (!stack.empty()) {
    const ParseTree* n = stack.back();
    stack.pop_back();
    if (n->label < 0 || n->label > 4) {
      throw ParseError(source, line, "node label " + std::to_string(n->label) + " outside 0..4");
    }
    for (const auto& c : n->children) stack.push_back(&c);
  }
  return t;
}

std::vector<ParseTree> load_treebank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<ParseTree> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (split_ws(line).empty()) continue;
    out.push_back(parse_tree(line, path.string(), lineno));
  }
  return out;
}

std::vector<SentimentExample> extract_phrases(const ParseTree& tree) {
  std::vector<SentimentExample> out;
  collect_phrases(tree, out);
  return out;
}

std::vector<SentimentExample> extract_phrase_corpus(const std::vector<ParseTree>& trees,
                                                    Granularity g, bool dedupe) {
  std::vector<SentimentExample> out;
  std::set<std::vector<std::string>> seen;
  for (const auto& tree : trees) {
    for (auto& e : extract_phrases(tree)) {
      if (dedupe && !seen.insert(e.tokens).second) continue;
      if (g == Granularity::kBinary) {
        auto b = to_binary(e);
        if (b) out.push_back(std::move(*b));
      } else {
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

// --- sentiment files --------------------------------------------------------

std::vector<SentimentExample> parse_sentiment(std::istream& in, Granularity g, Unit u,
                                              const std::string& source) {
  std::vector<SentimentExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_ws(line).empty()) continue;

    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '(') {
      ParseTree t = parse_tree(line, source, lineno);
      SentimentExample e;
      e.tokens = t.yield();
      e.label = t.label;
      e.granularity = Granularity::kFine;
      e.unit = u == Unit::kTweet ? Unit::kSentence : u;
      if (g == Granularity::kBinary) {
        auto b = to_binary(e);
        if (b) out.push_back(std::move(*b));
      } else {
        out.push_back(std::move(e));
      }
      continue;
    }

    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(source, lineno, "expected label<TAB>tokens");
    SentimentExample e;
    e.granularity = g;
    e.unit = u;
    try {
      e.label = parse_sentiment_label(line.substr(0, tab), g, u);
    } catch (const UsageError& err) {
      throw ParseError(source, lineno, err.what());
    }
    e.tokens = split_ws(std::string_view(line).substr(tab + 1));
    if (e.tokens.empty()) throw ParseError(source, lineno, "example without tokens");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SentimentExample> load_sentiment(const std::filesystem::path& path, Granularity g,
                                             Unit u) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_sentiment(in, g, u, path.string());
}

// --- two-column tagged corpora ---------------------------------------------

std::vector<TaggedSentence> parse_tagged(std::istream& in, const std::string& source) {
  std::vector<TaggedSentence> out;
  TaggedSentence cur;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_ws(line);
    if (fields.empty()) {
      if (!cur.tokens.empty()) out.push_back(std::move(cur));
      cur = TaggedSentence{};
      continue;
    }
    if (fields.size() != 2) {
      throw ParseError(source, lineno, "expected token<TAB>label, found " +
                                           std::to_string(fields.size()) + " fields");
    }
    cur.tokens.push_back(fields[0]);
    cur.labels.push_back(fields[1]);
  }
  if (!cur.tokens.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<TaggedSentence> load_tagged(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_tagged(in, path.string());
}

}  // namespace negsent
