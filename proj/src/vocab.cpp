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
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <unordered_set>

#include "negsent/corpus.hpp"

namespace negsent {

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

int Vocabulary::add(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, static_cast<int>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocabulary::find(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? -1 : it->second;
}

int Vocabulary::lookup(const std::string& token) const {
  if (int id = find(token); id >= 0) return id;
  if (int id = find(to_lower(token)); id >= 0) return id;
  return kUnk;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(lookup(t));
  return ids;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sequences, int min_count) {
  if (min_count < 1) throw UsageError("min_count must be >= 1");
  std::map<std::string, int> counts;
  for (const auto& seq : sequences) {
    for (const auto& t : seq) ++counts[t];
  }
  std::vector<std::pair<std::string, int>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (const auto& [tok, n] : kept) v.add(tok);
  return v;
}

EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed) {
  if (dim < 1) throw UsageError("embedding dim must be >= 1");
  EmbeddingTable table;
  table.vectors.resize(vocab.size(), dim);
  Rng rng = make_rng(seed, RngStream::kEmbeddingFallback);
  std::uniform_real_distribution<double> uni(-0.1, 0.1);
  for (int r = 0; r < vocab.size(); ++r) {
    for (int c = 0; c < dim; ++c) table.vectors(r, c) = uni(rng);
  }
  table.vectors.row(Vocabulary::kPad).setZero();
  table.from_file.assign(static_cast<std::size_t>(vocab.size()), false);
  return table;
}

EmbeddingTable reseed_fallback(const EmbeddingTable& table, std::uint64_t seed) {
  EmbeddingTable out = table;
  const auto rows = static_cast<int>(table.vectors.rows());
  Rng rng = make_rng(seed, RngStream::kEmbeddingFallback);
  std::uniform_real_distribution<double> uni(-0.1, 0.1);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < table.dim(); ++c) {
      const double v = uni(rng);
      if (!table.from_file[static_cast<std::size_t>(r)]) out.vectors(r, c) = v;
    }
  }
  out.vectors.row(Vocabulary::kPad).setZero();
  return out;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string_view> fields_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool is_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](unsigned char c) { return std::isdigit(c) != 0; });
}

}  // namespace

EmbeddingTable parse_embeddings(std::istream& in, const Vocabulary& vocab, int dim,
                                std::uint64_t seed, const std::string& source) {
  EmbeddingTable table = random_embeddings(vocab, dim, seed);

  // Rows receiving a lowercased file vector, keyed by the lowercase form.
  std::unordered_map<std::string, std::vector<int>> by_lower;
  for (int id = 2; id < vocab.size(); ++id) {
    const std::string low = to_lower(vocab.token(id));
    if (low != vocab.token(id) && !vocab.contains(low)) by_lower[low].push_back(id);
  }

  std::vector<bool> filled(static_cast<std::size_t>(vocab.size()), false);
  std::vector<bool> exact(static_cast<std::size_t>(vocab.size()), false);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = fields_of(line);
    if (f.empty()) continue;
    if (lineno == 1 && f.size() == 2 && is_integer(f[0]) && is_integer(f[1])) continue;
    if (static_cast<int>(f.size()) - 1 != dim) {
      throw ParseError(source, lineno,
                       "dimension mismatch: expected " + std::to_string(dim) + ", found " +
                           std::to_string(f.size() - 1));
    }
    const std::string word(f[0]);
    const int exact_id = vocab.find(word);
    const auto lower_it = by_lower.find(word);
    if (exact_id < 2 && lower_it == by_lower.end()) continue;

    RowVector v(dim);
    for (int c = 0; c < dim; ++c) {
      const auto tok = f[static_cast<std::size_t>(c) + 1];
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError(source, lineno, "bad number '" + std::string(tok) + "'");
      }
      v(c) = x;
    }
    if (exact_id >= 2) {
      table.vectors.row(exact_id) = v;
      filled[static_cast<std::size_t>(exact_id)] = true;
      exact[static_cast<std::size_t>(exact_id)] = true;
    }
    if (lower_it != by_lower.end()) {
      // An exact file entry always beats a lowercased one.
      for (int id : lower_it->second) {
        if (exact[static_cast<std::size_t>(id)]) continue;
        table.vectors.row(id) = v;
        filled[static_cast<std::size_t>(id)] = true;
      }
    }
  }
  table.from_file = filled;
  table.found = static_cast<int>(std::count(filled.begin(), filled.end(), true));
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, int dim,
                               std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_embeddings(in, vocab, dim, seed, path.string());
}

std::vector<std::string> embedding_words(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<std::string> words;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = fields_of(line);
    if (f.empty()) continue;
    if (lineno == 1 && f.size() == 2 && is_integer(f[0]) && is_integer(f[1])) continue;
    words.emplace_back(f[0]);
  }
  return words;
}

}  // namespace negsent
