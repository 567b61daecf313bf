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

// Converter from the SFU Review Corpus XML export to NegSentence, plus the
// fixed train/dev/test split used for it.

#ifndef NEGSENT_SFU_HPP_
#define NEGSENT_SFU_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "negsent/corpus.hpp"

namespace negsent::sfu {

// Reads <SENTENCE> elements. Tokens are <W> and <C> elements; negation cues
// are <cue type="negation" ID=..> elements and scopes are <xcope> elements
// whose <ref SRC=..> child names the cue ID. Speculation is ignored.
std::vector<NegSentence> parse_xml(std::istream& in, const std::string& source = "<xml>");

struct SplitEntry {
  std::string split;  // train | dev | test
  std::string doc;
  int sentence = 0;   // 0-based index within the document

  bool operator==(const SplitEntry&) const = default;
};

struct SplitSizes {
  int train = 800;
  int dev = 71;
  int test = 96;
};

struct Document {
  std::string id;
  std::vector<NegSentence> sentences;
};

// Seeded permutation of all negated sentences (documents in the given order),
// cut into consecutive train/dev/test blocks.
std::vector<SplitEntry> make_split(const std::vector<Document>& docs, const SplitSizes& sizes = {},
                                   std::uint64_t seed = 1);

void write_split(std::ostream& out, const std::vector<SplitEntry>& split);
std::vector<SplitEntry> read_split(std::istream& in, const std::string& source = "<split>");

// Sentences of one split, in split-file order.
std::vector<NegSentence> apply_split(const std::vector<Document>& docs,
                                     const std::vector<SplitEntry>& split,
                                     const std::string& which);

// Every *.xml file under `root`, sorted by relative path.
std::vector<Document> load_documents(const std::filesystem::path& root);

}  // namespace negsent::sfu

#endif  // NEGSENT_SFU_HPP_
