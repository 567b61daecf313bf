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

#include "negsent/models.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace negsent {

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"vocab_size", c.vocab_size},   {"embedding_dim", c.embedding_dim},
                     {"hidden", c.hidden},           {"num_classes", c.num_classes},
                     {"aux_label_names", c.aux_label_names},   {"dropout_in", c.dropout_in},
                     {"dropout_between", c.dropout_between}, {"heur", c.heur},
                     {"flag_dim", c.flag_dim}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("vocab_size").get_to(c.vocab_size);
  j.at("embedding_dim").get_to(c.embedding_dim);
  j.at("hidden").get_to(c.hidden);
  j.at("num_classes").get_to(c.num_classes);
  j.at("aux_label_names").get_to(c.aux_label_names);
  j.at("dropout_in").get_to(c.dropout_in);
  j.at("dropout_between").get_to(c.dropout_between);
  j.at("heur").get_to(c.heur);
  j.at("flag_dim").get_to(c.flag_dim);
}

CascadeModel::CascadeModel(const ModelConfig& cfg, std::uint64_t seed, const Matrix& embeddings)
    : cfg_(cfg), decode_mask_(bio_constraints(cfg.aux_label_names)) {
  if (embeddings.rows() != cfg.vocab_size || embeddings.cols() != cfg.embedding_dim) {
    throw ShapeError("model: embedding table is " + std::to_string(embeddings.rows()) + "x" +
                     std::to_string(embeddings.cols()) + ", config wants " +
                     std::to_string(cfg.vocab_size) + "x" + std::to_string(cfg.embedding_dim));
  }
  if (cfg.num_classes < 2 || cfg.aux_label_names.empty() || cfg.hidden < 1) {
    throw UsageError("model: invalid dimensions");
  }
  const int d = cfg.embedding_dim;
  const int h = cfg.hidden;
  const int aux_labels = static_cast<int>(cfg.aux_label_names.size());
  const int layer1_in = d + (cfg.heur ? cfg.flag_dim : 0);

  shared.embedding = nn::Embedding("embedding", cfg.vocab_size, d);
  shared.embedding.table.value = embeddings;
  if (cfg.heur) {
    shared.flags = nn::Embedding("flags", 2, cfg.flag_dim);
    Rng rng = make_rng(seed, RngStream::kInitFlags);
    nn::uniform_fill(shared.flags.table.value, 0.1, rng);
  }
  shared.lstm = nn::BiLstm("shared", layer1_in, h);
  {
    Rng rng = make_rng(seed, RngStream::kInitShared);
    shared.lstm.init(rng);
  }

  negation.emission = nn::Linear("negation.emission", 2 * h, aux_labels);
  negation.crf = Crf("negation.crf", aux_labels);
  {
    Rng rng = make_rng(seed, RngStream::kInitNegationHead);
    negation.emission.init(rng);
  }

  sentiment.lstm = nn::BiLstm("sentiment.lstm", d + 2 * h, h);
  sentiment.norm = nn::BatchNorm("sentiment.norm", 2 * h);
  sentiment.output = nn::Linear("sentiment.output", 2 * h, cfg.num_classes);
  {
    Rng rng = make_rng(seed, RngStream::kInitSentimentHead);
    sentiment.lstm.init(rng);
    sentiment.output.init(rng);
  }
}

nn::ParamList CascadeModel::shared_params() {
  nn::ParamList out;
  shared.embedding.collect(out);
  if (cfg_.heur) shared.flags.collect(out);
  shared.lstm.collect(out);
  return out;
}

nn::ParamList CascadeModel::negation_head_params() {
  nn::ParamList out;
  negation.emission.collect(out);
  negation.crf.collect(out);
  return out;
}

nn::ParamList CascadeModel::sentiment_head_params() {
  nn::ParamList out;
  sentiment.lstm.collect(out);
  sentiment.norm.collect(out);
  sentiment.output.collect(out);
  return out;
}

nn::ParamList CascadeModel::sentiment_path_params() {
  nn::ParamList out = shared_params();
  for (auto* p : sentiment_head_params()) out.push_back(p);
  return out;
}

nn::ParamList CascadeModel::negation_path_params() {
  nn::ParamList out = shared_params();
  for (auto* p : negation_head_params()) out.push_back(p);
  return out;
}

nn::ParamList CascadeModel::all_params() {
  nn::ParamList out = shared_params();
  for (auto* p : negation_head_params()) out.push_back(p);
  for (auto* p : sentiment_head_params()) out.push_back(p);
  return out;
}

namespace {

std::vector<int> lengths_of(const IdBatch& ids) {
  std::vector<int> lengths;
  lengths.reserve(ids.size());
  for (const auto& row : ids) {
    if (row.empty()) throw UsageError("model: empty sentence");
    lengths.push_back(static_cast<int>(row.size()));
  }
  if (lengths.empty()) throw UsageError("model: empty batch");
  return lengths;
}

nn::Sequence concat(const nn::Sequence& a, const nn::Sequence& b) {
  nn::Sequence out(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    out[t].resize(a[t].rows(), a[t].cols() + b[t].cols());
    out[t] << a[t], b[t];
  }
  return out;
}

nn::Sequence left_cols(const nn::Sequence& x, Eigen::Index n) {
  nn::Sequence out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = x[t].leftCols(n);
  return out;
}

nn::Sequence right_cols(const nn::Sequence& x, Eigen::Index n) {
  nn::Sequence out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = x[t].rightCols(n);
  return out;
}

// Emission rows of batch row b.
Matrix sentence_rows(const nn::Sequence& x, Eigen::Index b, int length) {
  Matrix out(length, x.front().cols());
  for (int t = 0; t < length; ++t) out.row(t) = x[static_cast<std::size_t>(t)].row(b);
  return out;
}

}  // namespace

nn::Sequence CascadeModel::embed(const IdBatch& ids, const IdBatch& flags) const {
  nn::Sequence e = shared.embedding.forward(ids);
  if (!cfg_.heur) return e;
  if (flags.size() != ids.size()) throw UsageError("model: HEUR input needs per-token flags");
  for (std::size_t b = 0; b < ids.size(); ++b) {
    if (flags[b].size() != ids[b].size()) throw UsageError("model: flag/token length mismatch");
  }
  return concat(e, shared.flags.forward(flags));
}

double CascadeModel::negation_loss(const IdBatch& ids, const IdBatch& tags, bool training, Rng& rng,
                                   bool backward) {
  if (cfg_.heur) throw UsageError("model: the HEUR variant has no negation task");
  const auto lengths = lengths_of(ids);
  if (tags.size() != ids.size()) throw ShapeError("negation: tag batch size mismatch");
  const int steps = nn::max_length(lengths);
  const auto batch = static_cast<Eigen::Index>(ids.size());

  const nn::Sequence x = shared.embedding.forward(ids);
  nn::Sequence drop_mask;
  const nn::Sequence xd = nn::dropout(x, cfg_.dropout_in, training, rng, &drop_mask);
  nn::BiLstm::Cache lstm_cache;
  const nn::Sequence h = shared.lstm.forward(xd, lengths, &lstm_cache);
  nn::Sequence em(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) em[static_cast<std::size_t>(t)] = negation.emission.forward(h[t]);

  const CrfParams crf = negation.crf.params();
  CrfParams crf_grad = CrfParams::zeros(crf.labels());
  nn::Sequence d_em(static_cast<std::size_t>(steps), Matrix::Zero(batch, crf.labels()));
  double loss = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const int len = lengths[static_cast<std::size_t>(b)];
    const auto& gold = tags[static_cast<std::size_t>(b)];
    if (static_cast<int>(gold.size()) != len) throw ShapeError("negation: tag length mismatch");
    const Matrix e = sentence_rows(em, b, len);
    Matrix de;
    loss += crf_nll(e, gold, crf, backward ? &de : nullptr, backward ? &crf_grad : nullptr);
    if (backward) {
      for (int t = 0; t < len; ++t) d_em[static_cast<std::size_t>(t)].row(b) = de.row(t);
    }
  }
  const double scale = 1.0 / static_cast<double>(batch);
  if (!backward) return loss * scale;

  crf_grad.transitions *= scale;
  crf_grad.start *= scale;
  crf_grad.stop *= scale;
  negation.crf.accumulate(crf_grad);
  nn::Sequence dh(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    const auto k = static_cast<std::size_t>(t);
    dh[k] = negation.emission.backward(h[k], d_em[k] * scale);
  }
  const nn::Sequence dxd = shared.lstm.backward(dh, lstm_cache);
  shared.embedding.backward(ids, nn::dropout_backward(dxd, drop_mask));
  return loss * scale;
}

double CascadeModel::sentiment_loss(const IdBatch& ids, const IdBatch& flags,
                                    std::span<const int> labels, bool training, Rng& rng,
                                    bool backward) {
  const auto lengths = lengths_of(ids);
  if (labels.size() != ids.size()) throw ShapeError("sentiment: label batch size mismatch");
  const int steps = nn::max_length(lengths);
  const Eigen::Index d = cfg_.embedding_dim;
  const Eigen::Index width = 2 * cfg_.hidden;

  const nn::Sequence x = embed(ids, flags);
  nn::Sequence mask_in;
  const nn::Sequence xd = nn::dropout(x, cfg_.dropout_in, training, rng, &mask_in);
  nn::BiLstm::Cache shared_cache;
  const nn::Sequence h1 = shared.lstm.forward(xd, lengths, &shared_cache);
  const nn::Sequence skip = concat(left_cols(xd, d), h1);
  nn::Sequence mask_between;
  const nn::Sequence skip_d = nn::dropout(skip, cfg_.dropout_between, training, rng, &mask_between);
  nn::BiLstm::Cache task_cache;
  const nn::Sequence h2 = sentiment.lstm.forward(skip_d, lengths, &task_cache);
  Eigen::MatrixXi argmax;
  const Matrix pooled = nn::max_pool(h2, lengths, &argmax);
  nn::BatchNorm::Cache bn_cache;
  const Matrix normed = training ? sentiment.norm.forward(pooled, true, &bn_cache)
                                 : sentiment.norm.infer(pooled);
  const Matrix logits = sentiment.output.forward(normed);
  Matrix dlogits;
  const double loss = nn::softmax_ce(logits, labels, backward ? &dlogits : nullptr);
  if (!backward) return loss;
  if (!training) throw UsageError("sentiment: backward requires training mode");

  const Matrix dnormed = sentiment.output.backward(normed, dlogits);
  const Matrix dpooled = sentiment.norm.backward(dnormed, bn_cache);
  const nn::Sequence dh2 = nn::max_pool_backward(dpooled, argmax, steps);
  const nn::Sequence dskip =
      nn::dropout_backward(sentiment.lstm.backward(dh2, task_cache), mask_between);
  nn::Sequence dxd = shared.lstm.backward(right_cols(dskip, width), shared_cache);
  for (std::size_t t = 0; t < dxd.size(); ++t) dxd[t].leftCols(d) += dskip[t].leftCols(d);
  const nn::Sequence dx = nn::dropout_backward(dxd, mask_in);
  if (cfg_.heur) {
    shared.embedding.backward(ids, left_cols(dx, d));
    shared.flags.backward(flags, right_cols(dx, cfg_.flag_dim));
  } else {
    shared.embedding.backward(ids, dx);
  }
  return loss;
}

IdBatch CascadeModel::tag(const IdBatch& ids) const {
  if (cfg_.heur) throw UsageError("model: the HEUR variant has no negation task");
  const auto lengths = lengths_of(ids);
  const int steps = nn::max_length(lengths);
  const nn::Sequence h = shared.lstm.forward(shared.embedding.forward(ids), lengths, nullptr);
  nn::Sequence em(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) em[static_cast<std::size_t>(t)] = negation.emission.forward(h[t]);
  CrfParams crf = negation.crf.params();
  crf.transitions += decode_mask_.transitions;
  crf.start += decode_mask_.start;
  crf.stop += decode_mask_.stop;
  IdBatch out;
  out.reserve(ids.size());
  for (std::size_t b = 0; b < ids.size(); ++b) {
    out.push_back(viterbi(sentence_rows(em, static_cast<Eigen::Index>(b), lengths[b]), crf));
  }
  return out;
}

Matrix CascadeModel::class_probabilities(const IdBatch& ids, const IdBatch& flags) const {
  const auto lengths = lengths_of(ids);
  const Eigen::Index d = cfg_.embedding_dim;
  const nn::Sequence x = embed(ids, flags);
  const nn::Sequence h1 = shared.lstm.forward(x, lengths, nullptr);
  const nn::Sequence h2 = sentiment.lstm.forward(concat(left_cols(x, d), h1), lengths, nullptr);
  const Matrix pooled = nn::max_pool(h2, lengths, nullptr);
  return nn::softmax_rows(sentiment.output.forward(sentiment.norm.infer(pooled)));
}

TaggerOutput negation_forward(const std::vector<int>& ids, const CascadeModel& model,
                              const std::optional<std::vector<int>>& gold) {
  TaggerOutput out;
  out.labels = model.tag({ids}).front();
  if (gold) {
    // Loss in evaluation mode; the copy keeps the caller's model untouched.
    CascadeModel m = model;
    Rng unused(0);
    out.loss = m.negation_loss({ids}, {*gold}, false, unused, false);
  }
  return out;
}

ClassifierOutput sentiment_forward(const std::vector<int>& ids, const CascadeModel& model,
                                   const std::optional<int>& gold, const std::vector<int>& flags) {
  ClassifierOutput out;
  const IdBatch flag_batch = model.config().heur ? IdBatch{flags} : IdBatch{};
  out.probabilities = model.class_probabilities({ids}, flag_batch).row(0).transpose();
  if (gold) {
    if (*gold < 0 || *gold >= out.probabilities.size()) {
      throw UsageError("sentiment_forward: gold class out of range");
    }
    out.loss = -std::log(out.probabilities(*gold));
  }
  return out;
}

ModelConfig make_heur_config(ModelConfig base, int flag_dim) {
  base.heur = true;
  base.flag_dim = flag_dim;
  return base;
}

ModelSnapshot snapshot(CascadeModel& model) {
  ModelSnapshot s;
  for (const auto* p : model.all_params()) s.values.push_back(p->value);
  s.running_mean = model.sentiment.norm.running_mean;
  s.running_var = model.sentiment.norm.running_var;
  return s;
}

void restore(CascadeModel& model, const ModelSnapshot& snap) {
  auto params = model.all_params();
  if (params.size() != snap.values.size()) throw ShapeError("restore: snapshot does not match");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap.values[i];
  model.sentiment.norm.running_mean = snap.running_mean;
  model.sentiment.norm.running_var = snap.running_var;
}

// --- checkpoints ------------------------------------------------------------

namespace {

constexpr const char* kMagic = "NEGSENT-CHECKPOINT 1";

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

struct Tensor {
  std::string name;
  Matrix* value;
};

std::vector<Tensor> tensors_of(CascadeModel& model) {
  std::vector<Tensor> out;
  for (auto* p : model.all_params()) out.push_back({p->name, &p->value});
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, CascadeModel& model,
                     const Checkpoint& meta) {
  nlohmann::json header;
  header["model"] = model.config();
  header["run_config"] = meta.run_config;
  header["vocabulary"] = meta.vocabulary;
  header["class_names"] = meta.class_names;
  header["aux_label_names"] = meta.aux_label_names;
  Matrix running(2, model.sentiment.norm.running_mean.size());
  running.row(0) = model.sentiment.norm.running_mean;
  running.row(1) = model.sentiment.norm.running_var;
  auto tensors = tensors_of(model);
  tensors.push_back({"sentiment.norm.running", &running});
  for (const auto& t : tensors) {
    header["tensors"].push_back({{"name", t.name}, {"rows", t.value->rows()},
                                 {"cols", t.value->cols()}});
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write checkpoint " + path.string());
  out << kMagic << '\n' << header.dump() << '\n';
  for (const auto& t : tensors) {
    // Column-major, as Eigen stores it.
    out.write(reinterpret_cast<const char*>(t.value->data()),
              static_cast<std::streamsize>(t.value->size() * sizeof(double)));
  }
  if (!out) throw UsageError("short write on checkpoint " + path.string());
}

std::pair<Checkpoint, CascadeModel> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open checkpoint");
  std::string magic, header_line;
  std::getline(in, magic);
  if (magic != kMagic) throw ParseError(path.string(), 1, "not a checkpoint");
  std::getline(in, header_line);
  const auto header = nlohmann::json::parse(header_line);

  Checkpoint meta;
  meta.model_config = header.at("model").get<ModelConfig>();
  meta.run_config = header.at("run_config");
  meta.vocabulary = header.at("vocabulary").get<std::vector<std::string>>();
  meta.class_names = header.at("class_names").get<std::vector<std::string>>();
  meta.aux_label_names = header.at("aux_label_names").get<std::vector<std::string>>();

  const ModelConfig& mc = meta.model_config;
  CascadeModel model(mc, 0, Matrix::Zero(mc.vocab_size, mc.embedding_dim));
  Matrix running;
  auto tensors = tensors_of(model);
  tensors.push_back({"sentiment.norm.running", &running});
  const auto& table = header.at("tensors");
  if (table.size() != tensors.size()) throw ParseError(path.string(), 2, "tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& entry = table[i];
    if (entry.at("name").get<std::string>() != tensors[i].name) {
      throw ParseError(path.string(), 2, "unexpected tensor " + entry.at("name").get<std::string>());
    }
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    Matrix& m = *tensors[i].value;
    if (tensors[i].name != "sentiment.norm.running" && (m.rows() != rows || m.cols() != cols)) {
      throw ParseError(path.string(), 2, "shape mismatch for " + tensors[i].name);
    }
    m.resize(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw ParseError(path.string(), 0, "truncated tensor data");
  }
  model.sentiment.norm.running_mean = running.row(0);
  model.sentiment.norm.running_var = running.row(1);
  return {std::move(meta), std::move(model)};
}

}  // namespace negsent
