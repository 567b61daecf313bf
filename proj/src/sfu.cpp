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

#include "negsent/sfu.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace negsent::sfu {

namespace {

struct Element {
  std::string name;
  std::map<std::string, std::string> attrs;
  int xcope_index = -1;
};

std::string decode_entities(std::string_view s) {
  static const std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [ent, ch] : kEntities) {
        if (s.substr(i, ent.size()) == ent) {
          out.push_back(ch);
          i += ent.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

struct Tag {
  std::string name;
  std::map<std::string, std::string> attrs;
  bool closing = false;
  bool self_closing = false;
};

Tag parse_tag(std::string_view body) {
  Tag t;
  std::size_t i = 0;
  if (!body.empty() && body[0] == '/') {
    t.closing = true;
    ++i;
  }
  if (!body.empty() && body.back() == '/') {
    t.self_closing = true;
    body.remove_suffix(1);
  }
  const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  const std::size_t name_start = i;
  while (i < body.size() && !is_ws(body[i])) ++i;
  t.name = std::string(body.substr(name_start, i - name_start));
  while (i < body.size()) {
    while (i < body.size() && is_ws(body[i])) ++i;
    const std::size_t k = i;
    while (i < body.size() && body[i] != '=' && !is_ws(body[i])) ++i;
    std::string key(body.substr(k, i - k));
    while (i < body.size() && (is_ws(body[i]) || body[i] == '=')) ++i;
    if (i < body.size() && (body[i] == '"' || body[i] == '\'')) {
      const char q = body[i++];
      const std::size_t v = i;
      while (i < body.size() && body[i] != q) ++i;
      if (!key.empty()) t.attrs[key] = decode_entities(body.substr(v, i - v));
      ++i;
    } else if (!key.empty()) {
      t.attrs[key] = "";
    }
  }
  return t;
}

class SentenceBuilder {
 public:
  void open(Element& e) {
    if (e.name == "xcope") {
      e.xcope_index = static_cast<int>(xcope_tokens_.size());
      xcope_tokens_.emplace_back();
      xcope_refs_.emplace_back();
    }
  }

  void ref(const std::vector<Element>& stack, const Tag& tag) {
    auto src = tag.attrs.find("SRC");
    if (src == tag.attrs.end()) src = tag.attrs.find("ID");
    if (src == tag.attrs.end()) return;
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      if (it->xcope_index >= 0) {
        xcope_refs_[static_cast<std::size_t>(it->xcope_index)].insert(src->second);
        return;
      }
    }
  }

  void token(const std::vector<Element>& stack, std::string word) {
    const int idx = static_cast<int>(tokens_.size());
    tokens_.push_back(std::move(word));
    for (const auto& e : stack) {
      if (e.name == "cue") {
        auto type = e.attrs.find("type");
        auto id = e.attrs.find("ID");
        if (type != e.attrs.end() && type->second == "negation" && id != e.attrs.end()) {
          if (!cue_tokens_.count(id->second)) cue_order_.push_back(id->second);
          cue_tokens_[id->second].insert(idx);
        }
      } else if (e.xcope_index >= 0) {
        xcope_tokens_[static_cast<std::size_t>(e.xcope_index)].insert(idx);
      }
    }
  }

  NegSentence finish() {
    NegSentence s;
    s.corpus = CorpusId::kSfu;
    s.tokens = std::move(tokens_);
    for (const auto& id : cue_order_) {
      const auto& cue = cue_tokens_[id];
      NegInstance inst;
      inst.cue.assign(cue.begin(), cue.end());
      std::set<int> scope;
      for (std::size_t x = 0; x < xcope_tokens_.size(); ++x) {
        if (!xcope_refs_[x].count(id)) continue;
        for (int i : xcope_tokens_[x]) {
          if (!cue.count(i)) scope.insert(i);
        }
      }
      inst.scope.assign(scope.begin(), scope.end());
      s.instances.push_back(std::move(inst));
    }
    *this = SentenceBuilder{};
    return s;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::string> cue_order_;
  std::map<std::string, std::set<int>> cue_tokens_;
  std::vector<std::set<int>> xcope_tokens_;
  std::vector<std::set<std::string>> xcope_refs_;
};

}  // namespace

std::vector<NegSentence> parse_xml(std::istream& in, const std::string& source) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<NegSentence> out;
  std::vector<Element> stack;
  SentenceBuilder builder;
  bool in_sentence = false;
  std::string token_text;
  bool in_token = false;

  auto line_of = [&](std::size_t pos) {
    return static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n')) + 1;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto lt = text.find('<', pos);
    if (in_token) token_text += text.substr(pos, lt == std::string::npos ? lt : lt - pos);
    if (lt == std::string::npos) break;
    if (text.compare(lt, 4, "<!--") == 0) {
      const auto end = text.find("-->", lt);
      if (end == std::string::npos) throw ParseError(source, line_of(lt), "unterminated comment");
      pos = end + 3;
      continue;
    }
    const auto gt = text.find('>', lt);
    if (gt == std::string::npos) throw ParseError(source, line_of(lt), "unterminated tag");
    pos = gt + 1;
    if (text[lt + 1] == '?' || text[lt + 1] == '!') continue;

    Tag tag = parse_tag(std::string_view(text).substr(lt + 1, gt - lt - 1));
    const bool is_token = tag.name == "W" || tag.name == "C";
    if (tag.closing) {
      if (stack.empty() || stack.back().name != tag.name) {
        throw ParseError(source, line_of(lt), "mismatched </" + tag.name + ">");
      }
      stack.pop_back();
      if (is_token && in_token) {
        in_token = false;
        const std::string word = trim(decode_entities(token_text));
        if (!word.empty() && in_sentence) builder.token(stack, word);
      } else if (tag.name == "SENTENCE") {
        in_sentence = false;
        out.push_back(builder.finish());
      }
      continue;
    }
    if (tag.name == "ref") {
      if (in_sentence) builder.ref(stack, tag);
      if (tag.self_closing) continue;
    }
    if (tag.self_closing) continue;
    Element e{tag.name, std::move(tag.attrs)};
    if (e.name == "SENTENCE") in_sentence = true;
    if (in_sentence) builder.open(e);
    stack.push_back(std::move(e));
    if (is_token) {
      in_token = true;
      token_text.clear();
    }
  }
  if (!stack.empty()) throw ParseError(source, 0, "unclosed <" + stack.back().name + ">");
  return out;
}

std::vector<SplitEntry> make_split(const std::vector<Document>& docs, const SplitSizes& sizes,
                                   std::uint64_t seed) {
  std::vector<SplitEntry> negated;
  for (const auto& d : docs) {
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      if (d.sentences[i].negated()) negated.push_back({"", d.id, static_cast<int>(i)});
    }
  }
  const std::size_t need = static_cast<std::size_t>(sizes.train + sizes.dev + sizes.test);
  if (negated.size() < need) {
    throw UsageError("SFU split needs " + std::to_string(need) + " negated sentences, found " +
                     std::to_string(negated.size()));
  }
  Rng rng = make_rng(seed, RngStream::kSubsample);
  std::shuffle(negated.begin(), negated.end(), rng);
  negated.resize(need);
  for (std::size_t i = 0; i < negated.size(); ++i) {
    const auto ii = static_cast<int>(i);
    negated[i].split = ii < sizes.train ? "train" : ii < sizes.train + sizes.dev ? "dev" : "test";
  }
  return negated;
}

void write_split(std::ostream& out, const std::vector<SplitEntry>& split) {
  for (const auto& e : split) out << e.split << '\t' << e.doc << '\t' << e.sentence << '\n';
}

std::vector<SplitEntry> read_split(std::istream& in, const std::string& source) {
  std::vector<SplitEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    SplitEntry e;
    if (!(std::getline(ls, e.split, '\t') && std::getline(ls, e.doc, '\t') && (ls >> e.sentence))) {
      throw ParseError(source, lineno, "expected split<TAB>doc<TAB>sentence");
    }
    if (e.split != "train" && e.split != "dev" && e.split != "test") {
      throw ParseError(source, lineno, "unknown split '" + e.split + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<NegSentence> apply_split(const std::vector<Document>& docs,
                                     const std::vector<SplitEntry>& split,
                                     const std::string& which) {
  std::map<std::string, const Document*> by_id;
  for (const auto& d : docs) by_id[d.id] = &d;
  std::vector<NegSentence> out;
  for (const auto& e : split) {
    if (e.split != which) continue;
    auto it = by_id.find(e.doc);
    if (it == by_id.end()) throw UsageError("split references unknown document " + e.doc);
    const auto& sents = it->second->sentences;
    if (e.sentence < 0 || static_cast<std::size_t>(e.sentence) >= sents.size()) {
      throw UsageError("split references missing sentence " + std::to_string(e.sentence) +
                       " of " + e.doc);
    }
    out.push_back(sents[static_cast<std::size_t>(e.sentence)]);
  }
  return out;
}

std::vector<Document> load_documents(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Document> docs;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ParseError(f.string(), 0, "cannot open file");
    Document d;
    d.id = std::filesystem::relative(f, root).generic_string();
    d.sentences = parse_xml(in, f.string());
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace negsent::sfu
