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

// Corpus ingestion: negation column files, sentiment files and treebanks,
// two-column tagged corpora, vocabularies and embedding tables.

#ifndef NEGSENT_CORPUS_HPP_
#define NEGSENT_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "negsent/common.hpp"

namespace negsent {

enum class CorpusId { kSfu, kCd, kOther };

std::string_view corpus_name(CorpusId id);

// Token positions are implicit: token i of a sentence is tokens[i].
struct NegInstance {
  std::vector<int> cue;    // sorted, unique, non-empty
  std::vector<int> scope;  // sorted, unique, disjoint from cue, may be empty
};

struct NegSentence {
  std::vector<std::string> tokens;
  std::vector<NegInstance> instances;
  CorpusId corpus = CorpusId::kOther;

  bool negated() const { return !instances.empty(); }
};

// Label ids double as CRF state indices; O is 0 so that ties decode to O.
enum class NegLabel : std::uint8_t { kO = 0, kBCue = 1, kICue = 2, kBScope = 3, kIScope = 4 };
inline constexpr int kNumNegLabels = 5;

using TagSequence = std::vector<NegLabel>;

std::string_view neg_label_name(NegLabel label);
NegLabel parse_neg_label(std::string_view name);
const std::vector<std::string>& neg_label_names();

enum class TagCategory { kNone, kCue, kScope };
TagCategory category_of(NegLabel label);

// Union-level joint BIO encoding. Cue membership in any instance beats scope
// membership; B/I follow contiguous runs inside each category.
TagSequence to_bio(const NegSentence& s);

// Inverse of to_bio at the union level.
struct DecodedTags {
  std::vector<int> cue;
  std::vector<int> scope;
};
DecodedTags decode_bio(const TagSequence& tags);

// True when no I-X follows O or a label of a different category.
bool bio_well_formed(const TagSequence& tags);

// *SEM 2012 column format. `base_columns` is the number of leading token
// columns (7 in the shared-task release: chapter, sentence, token, word,
// lemma, POS, parse); each negation instance adds a cue/scope/event triple,
// and a sentence without negation carries a single "***" column instead.
std::vector<NegSentence> parse_negation_conll(std::istream& in, CorpusId corpus,
                                              const std::string& source = "<stream>",
                                              int base_columns = 7);
std::vector<NegSentence> load_negation_conll(const std::filesystem::path& path,
                                             CorpusId corpus = CorpusId::kCd);
std::vector<NegSentence> load_negation_sfu(const std::filesystem::path& path);

void write_negation_conll(std::ostream& out, const std::vector<NegSentence>& sentences,
                          const std::string& doc_id = "doc");

// --- Sentiment --------------------------------------------------------------

enum class Granularity { kFine, kBinary };
enum class Unit { kSentence, kPhrase, kTweet };

struct SentimentExample {
  std::vector<std::string> tokens;
  int label = 0;  // index into sentiment_label_names(granularity, unit)
  Granularity granularity = Granularity::kFine;
  Unit unit = Unit::kSentence;
};

// fine/sentence|phrase: strong-neg neg neutral pos strong-pos
// fine/tweet:           neg neutral pos
// binary:               neg pos
const std::vector<std::string>& sentiment_label_names(Granularity g, Unit u);
int num_sentiment_classes(Granularity g, Unit u);
int parse_sentiment_label(std::string_view text, Granularity g, Unit u);

// Neutral maps to nullopt; strong and plain polarities merge.
std::optional<SentimentExample> to_binary(const SentimentExample& e);

// Reads either "label<TAB>tokens" lines or one parenthesized tree per line
// (SST); trees are read as fine-grained and mapped when binary is requested.
std::vector<SentimentExample> parse_sentiment(std::istream& in, Granularity g, Unit u,
                                              const std::string& source = "<stream>");
std::vector<SentimentExample> load_sentiment(const std::filesystem::path& path, Granularity g,
                                             Unit u);

// --- Treebank ---------------------------------------------------------------

struct ParseTree {
  int label = -1;
  std::string word;  // leaves only
  std::vector<ParseTree> children;

  bool leaf() const { return children.empty(); }
  std::vector<std::string> yield() const;
};

ParseTree parse_tree(std::string_view text, const std::string& source = "<tree>",
                     std::size_t line = 0);
std::vector<ParseTree> load_treebank(const std::filesystem::path& path);

// One fine-grained phrase example per node, preorder; element 0 is the root.
std::vector<SentimentExample> extract_phrases(const ParseTree& tree);

// Phrase examples for a whole split. With `dedupe`, a token span seen before
// in the split is skipped (SST's phrase statistics count unique phrases).
// Binary requests drop neutral phrases.
std::vector<SentimentExample> extract_phrase_corpus(const std::vector<ParseTree>& trees,
                                                    Granularity g, bool dedupe = true);

// --- Generic tagged corpora -------------------------------------------------

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
};

// "token<TAB>label" per line, blank line between sentences.
std::vector<TaggedSentence> parse_tagged(std::istream& in, const std::string& source = "<stream>");
std::vector<TaggedSentence> load_tagged(const std::filesystem::path& path);

// --- Vocabulary and embeddings ----------------------------------------------

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  int add(const std::string& token);
  bool contains(const std::string& token) const { return ids_.count(token) > 0; }
  // Exact id or -1.
  int find(const std::string& token) const;
  // Exact match, then lowercase, then UNK.
  int lookup(const std::string& token) const;
  std::vector<int> encode(const std::vector<std::string>& tokens) const;

  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Tokens ordered by descending frequency, ties lexicographic.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sequences, int min_count = 1);

struct EmbeddingTable {
  Matrix vectors;               // vocab size x dim, PAD row zero
  std::vector<bool> from_file;  // per row
  int found = 0;                // rows taken from the file

  int dim() const { return static_cast<int>(vectors.cols()); }
};

// Rows without a file vector are uniform(-0.1, 0.1) draws made in id order
// from the seed's fallback stream.
EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed);
EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, int dim,
                               std::uint64_t seed = 1);
EmbeddingTable parse_embeddings(std::istream& in, const Vocabulary& vocab, int dim,
                                std::uint64_t seed = 1, const std::string& source = "<stream>");

// Redraws every row that has no file vector as random_embeddings(seed) would,
// so one parsed file serves all seeds of an experiment.
EmbeddingTable reseed_fallback(const EmbeddingTable& table, std::uint64_t seed);

// Words of an embedding file, without reading vectors. Used to admit dev/test
// tokens that have pretrained vectors into the vocabulary.
std::vector<std::string> embedding_words(const std::filesystem::path& path);

}  // namespace negsent

#endif  // NEGSENT_CORPUS_HPP_
