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

// Experiment orchestration behind the command-line tool: prepared-data
// layout, run directories, ablation suites, result tables, significance
// reports and corpus statistics.
//
// Prepared data root:
//   negation/{sfu,cd}/{train,dev,test}.conll   sfu/split.tsv
//   sentiment/<dataset>/{train,dev,test}.txt    label<TAB>tokens
//   sentiment/sst-phrase-{fine,binary}/train.txt
//   tagged/<name>/{train,dev,test}.tsv          generic auxiliary tasks
//   lexicon.txt                                 cue lexicon (SFU train)
//   embeddings.txt                              optional pretrained vectors

#ifndef NEGSENT_EXPERIMENT_HPP_
#define NEGSENT_EXPERIMENT_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "negsent/training.hpp"

namespace negsent::exp {

namespace fs = std::filesystem;

// sst-binary, sst-fine, semeval-binary, semeval-fine
const std::vector<std::string>& main_dataset_names();

// Environment variable naming the prepared data root.
inline constexpr const char* kDataRootEnv = "NEGSENT_DATA";

struct ExperimentSpec {
  std::string label;   // display name in tables
  std::string main;    // sentiment dataset; empty for negation-only runs
  TrainConfig train;   // train.aux_corpus: sfu | cd | sfu+cd | tagged:<name>
  bool phrase = false;                    // phrase-level SST training data
  std::optional<std::size_t> main_size;   // subsample of the main training set
  std::optional<std::size_t> aux_size;    // subsample of the auxiliary training set
  std::uint64_t subsample_seed = 1;       // one subset shared by all seeds
  std::string embeddings;  // empty: <root>/embeddings.txt when present, else random
  std::string lexicon;     // empty: <root>/lexicon.txt

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentSpec& s);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ExperimentSpec& s);

// Sets a dotted key ("train.lr", "main") from text. The value is read as JSON
// when it parses, otherwise as a string.
void apply_override(nlohmann::json& spec, const std::string& assignment);

struct LoadedData {
  SentimentTask main;
  AuxTask aux;
  Vocabulary vocab;
  EmbeddingTable embeddings;  // fallback rows drawn for seed 1
  std::vector<std::vector<std::string>> test_tokens;  // main test set
};

LoadedData load_data(const ExperimentSpec& spec, const fs::path& root);

// Size of the main training set before subsampling.
std::size_t main_train_size(const ExperimentSpec& spec, const fs::path& root);

struct RunOptions {
  int workers = 1;
  bool resume = false;  // continue an existing directory holding the same spec
  std::ostream* log = nullptr;
};

// Trains every seed of the spec into `out`:
//   spec.json, seed-N/{config.json, metrics.log, best.ckpt, predictions.txt,
//   gold.txt, result.json, DONE}, aggregate.tsv, aggregate.json.
// An existing directory is resumed only with options.resume and an identical
// spec; finished seeds are reloaded, unfinished ones retrained from scratch.
AggregateResult run_experiment(const ExperimentSpec& spec, const fs::path& root,
                               const fs::path& out, const RunOptions& options = {});

// --- tables -------------------------------------------------------------------

// "86.04 (0.3)"
std::string format_cell(double mean, double std);

struct Table {
  std::vector<std::string> columns;
  // Row label and cells by column; a missing cell is an empty entry.
  std::vector<std::pair<std::string, std::map<std::string, AggregateResult>>> rows;
};

// Score column plus one per-class column per class name.
Table experiment_table(const std::string& label, const AggregateResult& agg,
                       const std::vector<std::string>& class_names);

struct EmittedTable {
  std::string text;       // tab-separated, percentages
  nlohmann::json record;  // raw per-seed values
};

// Columns without any cell are omitted.
EmittedTable emit_table(const Table& table);

// --- ablations ----------------------------------------------------------------

const std::vector<std::string>& suite_names();

// Grid points of a suite derived from a base spec, in table order.
std::vector<ExperimentSpec> ablation_suite(const std::string& suite, const ExperimentSpec& base,
                                           const fs::path& root);

// Runs every grid point into out/<label>/ and writes out/table.{tsv,json}.
Table run_suite(const std::string& suite, const ExperimentSpec& base, const fs::path& root,
                const fs::path& out, const RunOptions& options = {});

// --- evaluation ---------------------------------------------------------------

struct RunFiles {
  std::uint64_t seed = 0;
  std::vector<std::string> predictions;
  std::vector<std::string> gold;
};

// Prediction and gold files of every finished seed, by seed.
std::vector<RunFiles> read_run(const fs::path& dir);

// Metrics recomputed from a run directory without retraining.
nlohmann::json evaluate_run(const fs::path& dir, const fs::path& root, bool silver);

// Seed i of `a` against seed i of `b`.
SignificanceResult compare_runs(const fs::path& a, const fs::path& b, int iterations = 10000,
                                std::uint64_t seed = 1);
nlohmann::json significance_record(const SignificanceResult& r);

// --- data preparation and statistics --------------------------------------------

struct PrepareInputs {
  std::optional<fs::path> sfu_xml;    // directory of SFU XML files
  std::optional<fs::path> sfu_split;  // existing split file to reuse
  std::optional<fs::path> cd_train, cd_dev, cd_test;
  std::optional<fs::path> sst;        // {train,dev,test}.txt trees
  std::optional<fs::path> semeval;    // {train,dev,test}.tsv, three-way labels
  std::vector<std::pair<std::string, fs::path>> tagged;  // name, directory
};

// Writes the prepared layout under `root` and returns sentence counts per
// dataset and split.
nlohmann::json prepare_data(const PrepareInputs& in, const fs::path& root);

// Label statistics of every prepared auxiliary corpus plus silver
// negated/non-negated test splits of the prepared SST datasets.
nlohmann::json corpus_statistics(const fs::path& root, LabelFilter filter);

}  // namespace negsent::exp

#endif  // NEGSENT_EXPERIMENT_HPP_
