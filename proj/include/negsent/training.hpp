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

// Single-task, alternating multi-task and two-stage transfer training with
// early stopping on development scores.

#ifndef NEGSENT_TRAINING_HPP_
#define NEGSENT_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "negsent/analysis.hpp"
#include "negsent/eval.hpp"
#include "negsent/models.hpp"

namespace negsent {

struct SentimentData {
  IdBatch ids;
  IdBatch flags;  // per-token flag rows; HEUR only, otherwise empty
  std::vector<int> labels;

  std::size_t size() const { return ids.size(); }
};

struct TagData {
  IdBatch ids;
  IdBatch tags;

  std::size_t size() const { return ids.size(); }
};

struct SentimentTask {
  SentimentData train, dev, test;
  std::vector<std::string> class_names;
};

struct AuxTask {
  TagData train, dev, test;
  std::vector<std::string> label_names;
};

enum class Mode { kStl, kMtl, kHeur, kTransfer, kNegation };

std::string mode_name(Mode m);
Mode parse_mode(const std::string& s);
std::string label_filter_name(LabelFilter f);
LabelFilter parse_label_filter(const std::string& s);

struct TrainConfig {
  Mode mode = Mode::kStl;
  int epochs = 10;
  double lr = 1e-3;
  double reduced_lr = 1e-4;
  double dropout_in = 0.5;
  double dropout_between = 0.3;
  double l2 = 1e-4;
  int batch_size = 32;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int embedding_dim = 300;
  int hidden = 100;
  int flag_dim = 50;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::string aux_corpus;  // empty unless MTL or transfer
  LabelFilter aux_label_filter = LabelFilter::kBoth;

  // Throws UsageError on out-of-range values.
  void validate() const;
  nn::AdamConfig adam(double learning_rate) const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, TrainConfig& c);

struct RunResult {
  std::uint64_t seed = 0;
  std::string metric = "accuracy";   // "token_f1" for negation-only runs
  std::vector<double> dev_scores;    // one per epoch
  std::vector<double> train_loss;    // mean main-task batch loss per epoch
  int selected_epoch = 0;            // 1-based
  double test_score = 0.0;
  std::map<int, double> per_class;   // sentiment runs only
  std::optional<Prf> aux_cue;
  std::optional<Prf> aux_scope;
  std::vector<int> test_predictions;  // flattened token labels for negation runs
  std::vector<int> test_gold;
};

void to_json(nlohmann::json& j, const RunResult& r);
void from_json(const nlohmann::json& j, RunResult& r);

struct AggregateResult {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1)
  std::vector<RunResult> runs;
};

AggregateResult aggregate_runs(const std::vector<RunResult>& results);

enum class Pass { kMain, kAux };

struct TrainHooks {
  std::function<void(int epoch, CascadeModel&)> on_epoch_end;
  // Replaces the measured dev score of an epoch before selection.
  std::function<double(int epoch, double measured)> dev_override;
  std::function<void(CascadeModel&)> on_stage2_start;
  std::function<void(Pass, int batches)> on_pass;
};

struct TrainedRun {
  RunResult result;
  CascadeModel model;
};

// Sentiment-only training of the full sentiment path. Mode kHeur uses the
// flag rows carried by the data.
TrainedRun train_stl(const TrainConfig& cfg, const SentimentTask& main, const Matrix& embeddings,
                     std::uint64_t seed, const TrainHooks& hooks = {});

// Per epoch: one pass over the main task, one over the auxiliary task, then
// main-task dev evaluation. An empty auxiliary set reduces to train_stl.
TrainedRun train_mtl(const TrainConfig& cfg, const SentimentTask& main, const AuxTask& aux,
                     const Matrix& embeddings, std::uint64_t seed, const TrainHooks& hooks = {});

// Negation tagging alone, selected on overall dev token F1.
TrainedRun train_negation(const TrainConfig& cfg, const AuxTask& aux, const Matrix& embeddings,
                          std::uint64_t seed, const TrainHooks& hooks = {});

// Stage 1 is train_negation; stage 2 copies the embeddings and shared BiLSTM
// into a fresh model and trains the sentiment path at reduced_lr.
TrainedRun train_transfer(const TrainConfig& cfg, const AuxTask& aux, const SentimentTask& main,
                          const Matrix& embeddings, std::uint64_t seed,
                          const TrainHooks& hooks = {});

// Length-bucketed minibatches of example indices for one epoch. With
// `min_two`, a trailing batch of one example is merged into its neighbour.
std::vector<std::vector<std::size_t>> make_batches(const IdBatch& ids, int batch_size, Rng& rng,
                                                   bool min_two);

std::vector<int> predict_classes(const CascadeModel& model, const SentimentData& data);
IdBatch predict_tags(const CascadeModel& model, const TagData& data);

}  // namespace negsent

#endif  // NEGSENT_TRAINING_HPP_
