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

// The cascading negation/sentiment network.
//
//   tokens -> embedding (+ heuristic flag embedding) -> dropout
//          -> shared BiLSTM ----------------------------> emission -> CRF
//          -> [embedding | shared BiLSTM] -> dropout
//          -> sentiment BiLSTM -> max pool -> batch norm -> softmax

#ifndef NEGSENT_MODELS_HPP_
#define NEGSENT_MODELS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "negsent/corpus.hpp"
#include "negsent/crf.hpp"
#include "negsent/nnet.hpp"

namespace negsent {

struct ModelConfig {
  int vocab_size = 2;
  int embedding_dim = 300;
  int hidden = 100;  // per direction
  int num_classes = 2;
  std::vector<std::string> aux_label_names = neg_label_names();
  double dropout_in = 0.5;
  double dropout_between = 0.3;
  bool heur = false;
  int flag_dim = 50;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct SharedEncoder {
  nn::Embedding embedding;
  nn::Embedding flags;  // two rows (out of scope, in scope); HEUR only
  nn::BiLstm lstm;
};

struct NegationHead {
  nn::Linear emission;  // 2h -> labels
  Crf crf;
};

struct SentimentHead {
  nn::BiLstm lstm;  // input: [embedding | shared output]
  nn::BatchNorm norm;
  nn::Linear output;  // 2h -> classes
};

using IdBatch = std::vector<std::vector<int>>;

class CascadeModel {
 public:
  // `embeddings` must be vocab_size x embedding_dim.
  CascadeModel(const ModelConfig& cfg, std::uint64_t seed, const Matrix& embeddings);

  const ModelConfig& config() const { return cfg_; }

  nn::ParamList shared_params();
  nn::ParamList negation_head_params();
  nn::ParamList sentiment_head_params();
  nn::ParamList sentiment_path_params();  // shared + sentiment head
  nn::ParamList negation_path_params();   // shared + negation head
  nn::ParamList all_params();

  // Forward pass in training or evaluation mode; with `backward`, gradients
  // are accumulated into the parameters. Returns the batch-mean loss.
  double negation_loss(const IdBatch& ids, const IdBatch& tags, bool training, Rng& rng,
                       bool backward = true);
  double sentiment_loss(const IdBatch& ids, const IdBatch& flags, std::span<const int> labels,
                        bool training, Rng& rng, bool backward = true);

  // Evaluation mode. Tagging decodes under BIO transition constraints.
  IdBatch tag(const IdBatch& ids) const;
  Matrix class_probabilities(const IdBatch& ids, const IdBatch& flags) const;

  SharedEncoder shared;
  NegationHead negation;
  SentimentHead sentiment;

 private:
  nn::Sequence embed(const IdBatch& ids, const IdBatch& flags) const;

  ModelConfig cfg_;
  CrfParams decode_mask_;
};

// Single-sentence conveniences in evaluation mode.
struct TaggerOutput {
  std::vector<int> labels;
  std::optional<double> loss;
};
TaggerOutput negation_forward(const std::vector<int>& ids, const CascadeModel& model,
                              const std::optional<std::vector<int>>& gold = std::nullopt);

struct ClassifierOutput {
  Vector probabilities;
  std::optional<double> loss;
};
ClassifierOutput sentiment_forward(const std::vector<int>& ids, const CascadeModel& model,
                                   const std::optional<int>& gold = std::nullopt,
                                   const std::vector<int>& flags = {});

// HEUR variant of a base configuration: same network plus a learned two-row
// flag embedding concatenated to the word embeddings before the shared layer.
ModelConfig make_heur_config(ModelConfig base, int flag_dim = 50);

// Parameter values and batch-norm statistics, for early-stopping restores.
struct ModelSnapshot {
  std::vector<Matrix> values;
  RowVector running_mean;
  RowVector running_var;
};
ModelSnapshot snapshot(CascadeModel& model);
void restore(CascadeModel& model, const ModelSnapshot& snap);

// --- checkpoints ------------------------------------------------------------

// Layout: a magic line, one JSON header line (config echo, vocabulary, label
// names, tensor table with names and shapes), then the tensors as raw
// little-endian IEEE doubles in header order.
struct Checkpoint {
  ModelConfig model_config;
  nlohmann::json run_config;
  std::vector<std::string> vocabulary;
  std::vector<std::string> class_names;
  std::vector<std::string> aux_label_names;
};

void save_checkpoint(const std::filesystem::path& path, CascadeModel& model,
                     const Checkpoint& meta);
// Returns the metadata and a model holding the stored parameters.
std::pair<Checkpoint, CascadeModel> load_checkpoint(const std::filesystem::path& path);

}  // namespace negsent

#endif  // NEGSENT_MODELS_HPP_
