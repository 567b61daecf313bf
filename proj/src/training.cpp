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

#include "negsent/training.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>

namespace negsent {

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::kStl: return "stl";
    case Mode::kMtl: return "mtl";
    case Mode::kHeur: return "heur";
    case Mode::kTransfer: return "transfer";
    case Mode::kNegation: return "negation";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::kStl, Mode::kMtl, Mode::kHeur, Mode::kTransfer, Mode::kNegation}) {
    if (to_lower(s) == mode_name(m)) return m;
  }
  throw UsageError("unknown mode '" + s + "' (stl, mtl, heur, transfer, negation)");
}

std::string label_filter_name(LabelFilter f) {
  switch (f) {
    case LabelFilter::kBoth: return "both";
    case LabelFilter::kCuesOnly: return "cues-only";
    case LabelFilter::kScopesOnly: return "scopes-only";
  }
  return "?";
}

LabelFilter parse_label_filter(const std::string& s) {
  for (LabelFilter f : {LabelFilter::kBoth, LabelFilter::kCuesOnly, LabelFilter::kScopesOnly}) {
    if (s == label_filter_name(f)) return f;
  }
  throw UsageError("unknown label filter '" + s + "' (both, cues-only, scopes-only)");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw UsageError("config: " + what); };
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 2) fail("batch_size must be >= 2");
  if (!(lr >= 0) || !(reduced_lr >= 0)) fail("learning rates must be >= 0");
  if (!(dropout_in >= 0 && dropout_in < 1)) fail("dropout_in must be in [0, 1)");
  if (!(dropout_between >= 0 && dropout_between < 1)) fail("dropout_between must be in [0, 1)");
  if (!(l2 >= 0)) fail("l2 must be >= 0");
  if (seeds.empty()) fail("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    fail("seeds must be distinct");
  }
  if (embedding_dim < 1 || hidden < 1 || flag_dim < 1) fail("dimensions must be positive");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1)) {
    fail("Adam betas must be in [0, 1)");
  }
  if (!(adam_eps > 0)) fail("adam_eps must be > 0");
  if ((mode == Mode::kMtl || mode == Mode::kTransfer || mode == Mode::kNegation) &&
      aux_corpus.empty()) {
    fail("mode " + mode_name(mode) + " needs aux_corpus");
  }
}

nn::AdamConfig TrainConfig::adam(double learning_rate) const {
  return {learning_rate, adam_beta1, adam_beta2, adam_eps, l2};
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"mode", mode_name(c.mode)},
                     {"epochs", c.epochs},
                     {"lr", c.lr},
                     {"reduced_lr", c.reduced_lr},
                     {"dropout_in", c.dropout_in},
                     {"dropout_between", c.dropout_between},
                     {"l2", c.l2},
                     {"batch_size", c.batch_size},
                     {"seeds", c.seeds},
                     {"embedding_dim", c.embedding_dim},
                     {"hidden", c.hidden},
                     {"flag_dim", c.flag_dim},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_eps", c.adam_eps},
                     {"aux_corpus", c.aux_corpus},
                     {"aux_label_filter", label_filter_name(c.aux_label_filter)}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  nlohmann::json defaults = c;
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw UsageError("config: unknown key '" + key + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
  get("epochs", c.epochs);
  get("lr", c.lr);
  get("reduced_lr", c.reduced_lr);
  get("dropout_in", c.dropout_in);
  get("dropout_between", c.dropout_between);
  get("l2", c.l2);
  get("batch_size", c.batch_size);
  get("seeds", c.seeds);
  get("embedding_dim", c.embedding_dim);
  get("hidden", c.hidden);
  get("flag_dim", c.flag_dim);
  get("adam_beta1", c.adam_beta1);
  get("adam_beta2", c.adam_beta2);
  get("adam_eps", c.adam_eps);
  get("aux_corpus", c.aux_corpus);
  if (j.contains("aux_label_filter")) {
    c.aux_label_filter = parse_label_filter(j.at("aux_label_filter").get<std::string>());
  }
}

namespace {

nlohmann::json prf_json(const Prf& p) {
  return {{"tp", p.tp}, {"fp", p.fp}, {"fn", p.fn},
          {"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

Prf prf_from_json(const nlohmann::json& j) {
  return make_prf(j.at("tp").get<long>(), j.at("fp").get<long>(), j.at("fn").get<long>());
}

}  // namespace

void to_json(nlohmann::json& j, const RunResult& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [cls, acc] : r.per_class) per_class[std::to_string(cls)] = acc;
  j = nlohmann::json{{"seed", r.seed},
                     {"metric", r.metric},
                     {"dev_scores", r.dev_scores},
                     {"train_loss", r.train_loss},
                     {"selected_epoch", r.selected_epoch},
                     {"test_score", r.test_score},
                     {"per_class", per_class}};
  if (r.aux_cue) j["aux_cue"] = prf_json(*r.aux_cue);
  if (r.aux_scope) j["aux_scope"] = prf_json(*r.aux_scope);
}

void from_json(const nlohmann::json& j, RunResult& r) {
  j.at("seed").get_to(r.seed);
  j.at("metric").get_to(r.metric);
  j.at("dev_scores").get_to(r.dev_scores);
  j.at("train_loss").get_to(r.train_loss);
  j.at("selected_epoch").get_to(r.selected_epoch);
  j.at("test_score").get_to(r.test_score);
  r.per_class.clear();
  for (const auto& [k, v] : j.at("per_class").items()) r.per_class[std::stoi(k)] = v.get<double>();
  r.aux_cue.reset();
  r.aux_scope.reset();
  if (j.contains("aux_cue")) r.aux_cue = prf_from_json(j.at("aux_cue"));
  if (j.contains("aux_scope")) r.aux_scope = prf_from_json(j.at("aux_scope"));
}

AggregateResult aggregate_runs(const std::vector<RunResult>& results) {
  if (results.size() < 2) throw UsageError("aggregate_runs: need at least 2 runs");
  AggregateResult agg;
  agg.runs = results;
  double sum = 0;
  for (const auto& r : results) sum += r.test_score;
  const double n = static_cast<double>(results.size());
  agg.mean = sum / n;
  double ss = 0;
  for (const auto& r : results) ss += (r.test_score - agg.mean) * (r.test_score - agg.mean);
  agg.std = std::sqrt(ss / (n - 1));
  return agg;
}

std::vector<std::vector<std::size_t>> make_batches(const IdBatch& ids, int batch_size, Rng& rng,
                                                   bool min_two) {
  if (batch_size < 1) throw UsageError("make_batches: batch_size must be positive");
  const std::size_t bs = static_cast<std::size_t>(batch_size);
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  // Sort by length inside large chunks so batches hold similar lengths while
  // batch membership still varies from epoch to epoch.
  const std::size_t chunk = 50 * bs;
  for (std::size_t start = 0; start < order.size(); start += chunk) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
    const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + chunk));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return ids[a].size() < ids[b].size();
    });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += bs) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + bs)));
  }
  if (min_two && batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

namespace {

template <typename T>
std::vector<T> gather(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

constexpr std::size_t kEvalBatch = 128;

ModelConfig model_config(const TrainConfig& cfg, const Matrix& embeddings, int classes,
                         const std::vector<std::string>& aux_labels, bool heur) {
  if (embeddings.cols() != cfg.embedding_dim) {
    throw ShapeError("embedding table has dimension " + std::to_string(embeddings.cols()) +
                     ", config says " + std::to_string(cfg.embedding_dim));
  }
  ModelConfig mc;
  mc.vocab_size = static_cast<int>(embeddings.rows());
  mc.embedding_dim = cfg.embedding_dim;
  mc.hidden = cfg.hidden;
  mc.num_classes = classes;
  mc.aux_label_names = aux_labels;
  mc.dropout_in = cfg.dropout_in;
  mc.dropout_between = cfg.dropout_between;
  if (heur) mc = make_heur_config(mc, cfg.flag_dim);
  return mc;
}

int class_count(const SentimentTask& task) {
  if (task.class_names.size() < 2) throw UsageError("sentiment task needs at least 2 class names");
  return static_cast<int>(task.class_names.size());
}

std::vector<std::string> aux_labels_of(const AuxTask& aux) {
  return aux.label_names.empty() ? neg_label_names() : aux.label_names;
}

void check_sentiment(const SentimentTask& task, bool heur) {
  for (const auto* d : {&task.train, &task.dev, &task.test}) {
    if (d->labels.size() != d->ids.size()) throw ShapeError("sentiment data: label count mismatch");
    if (heur && d->flags.size() != d->ids.size()) {
      throw UsageError("HEUR training needs per-token flags for every example");
    }
  }
  if (task.train.size() < 2) throw UsageError("sentiment training set needs at least 2 examples");
  if (task.dev.size() == 0) throw UsageError("sentiment dev set is empty");
}

struct SentimentPass {
  const SentimentData& data;
  nn::ParamList params;
  int batch_size;
};

double run_sentiment_pass(CascadeModel& model, const SentimentPass& pass, nn::Adam& adam,
                          Rng& shuffle, Rng& dropout, const TrainHooks& hooks) {
  const auto batches = make_batches(pass.data.ids, pass.batch_size, shuffle, true);
  if (hooks.on_pass) hooks.on_pass(Pass::kMain, static_cast<int>(batches.size()));
  const bool heur = model.config().heur;
  double total = 0;
  for (const auto& b : batches) {
    nn::zero_grads(pass.params);
    const IdBatch ids = gather(pass.data.ids, b);
    const IdBatch flags = heur ? gather(pass.data.flags, b) : IdBatch{};
    const std::vector<int> labels = gather(pass.data.labels, b);
    total += model.sentiment_loss(ids, flags, labels, true, dropout, true);
    adam.step(pass.params);
  }
  return total / static_cast<double>(batches.size());
}

double run_aux_pass(CascadeModel& model, const TagData& data, const nn::ParamList& params,
                    int batch_size, nn::Adam& adam, Rng& shuffle, Rng& dropout,
                    const TrainHooks& hooks) {
  const auto batches = make_batches(data.ids, batch_size, shuffle, false);
  if (hooks.on_pass) hooks.on_pass(Pass::kAux, static_cast<int>(batches.size()));
  double total = 0;
  for (const auto& b : batches) {
    nn::zero_grads(params);
    total += model.negation_loss(gather(data.ids, b), gather(data.tags, b), true, dropout, true);
    adam.step(params);
  }
  return batches.empty() ? 0.0 : total / static_cast<double>(batches.size());
}

double sentiment_score(const CascadeModel& model, const SentimentData& data) {
  return accuracy(predict_classes(model, data), data.labels);
}

std::vector<int> categories_for(const AuxTask& aux) {
  return aux.label_names.empty() ? negation_categories() : label_categories(aux.label_names);
}

bool is_negation_inventory(const AuxTask& aux) {
  return aux.label_names.empty() || aux.label_names == neg_label_names();
}

double tag_score(const CascadeModel& model, const TagData& data, const std::vector<int>& cats) {
  return token_f1(predict_tags(model, data), data.tags, cats, kAnyCategory).f1;
}

void fill_aux_scores(RunResult& r, const CascadeModel& model, const AuxTask& aux) {
  if (aux.test.size() == 0 || !is_negation_inventory(aux)) return;
  const auto cats = negation_categories();
  const IdBatch pred = predict_tags(model, aux.test);
  r.aux_cue = token_f1(pred, aux.test.tags, cats, static_cast<int>(TagCategory::kCue));
  r.aux_scope = token_f1(pred, aux.test.tags, cats, static_cast<int>(TagCategory::kScope));
}

// Records the epoch's dev score and snapshots the model on improvement.
struct Selector {
  double best = -std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  std::optional<ModelSnapshot> snap;

  void observe(int epoch, double score, CascadeModel& model, RunResult& r) {
    r.dev_scores.push_back(score);
    if (score > best) {
      best = score;
      best_epoch = epoch;
      snap = snapshot(model);
    }
  }

  void finish(CascadeModel& model, RunResult& r) {
    restore(model, *snap);
    r.selected_epoch = best_epoch;
  }
};

void finish_sentiment(RunResult& r, const CascadeModel& model, const SentimentTask& main) {
  if (main.test.size() == 0) return;
  r.test_predictions = predict_classes(model, main.test);
  r.test_gold = main.test.labels;
  r.test_score = accuracy(r.test_predictions, r.test_gold);
  r.per_class = per_class_accuracy(r.test_predictions, r.test_gold);
}

// Shared body of STL and MTL; `aux` is null for STL.
TrainedRun train_sentiment(const TrainConfig& cfg, const SentimentTask& main, const AuxTask* aux,
                           const Matrix& embeddings, std::uint64_t seed, const TrainHooks& hooks) {
  cfg.validate();
  const bool heur = cfg.mode == Mode::kHeur;
  check_sentiment(main, heur);
  const ModelConfig mc = model_config(cfg, embeddings, class_count(main),
                                      aux ? aux_labels_of(*aux) : neg_label_names(), heur);
  CascadeModel model(mc, seed, embeddings);
  nn::Adam adam(cfg.adam(cfg.lr));
  Rng dropout = make_rng(seed, RngStream::kDropout);
  Rng shuffle_main = make_rng(seed, RngStream::kShuffleMain);
  Rng shuffle_aux = make_rng(seed, RngStream::kShuffleAux);
  const SentimentPass main_pass{main.train, model.sentiment_path_params(), cfg.batch_size};
  const nn::ParamList aux_params = model.negation_path_params();
  const std::vector<int> aux_cats = aux ? categories_for(*aux) : std::vector<int>{};

  RunResult r;
  r.seed = seed;
  Selector sel;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    r.train_loss.push_back(run_sentiment_pass(model, main_pass, adam, shuffle_main, dropout, hooks));
    if (aux) run_aux_pass(model, aux->train, aux_params, cfg.batch_size, adam, shuffle_aux, dropout, hooks);
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, model);
    double dev = sentiment_score(model, main.dev);
    if (hooks.dev_override) dev = hooks.dev_override(epoch, dev);
    sel.observe(epoch, dev, model, r);
  }
  sel.finish(model, r);
  finish_sentiment(r, model, main);
  if (aux) fill_aux_scores(r, model, *aux);
  return {std::move(r), std::move(model)};
}

void check_aux(const AuxTask& aux) {
  for (const auto* d : {&aux.train, &aux.dev, &aux.test}) {
    if (d->tags.size() != d->ids.size()) throw ShapeError("tag data: tag count mismatch");
  }
}

}  // namespace

TrainedRun train_stl(const TrainConfig& cfg, const SentimentTask& main, const Matrix& embeddings,
                     std::uint64_t seed, const TrainHooks& hooks) {
  return train_sentiment(cfg, main, nullptr, embeddings, seed, hooks);
}

TrainedRun train_mtl(const TrainConfig& cfg, const SentimentTask& main, const AuxTask& aux,
                     const Matrix& embeddings, std::uint64_t seed, const TrainHooks& hooks) {
  check_aux(aux);
  if (aux.train.size() == 0) {
    std::cerr << "warning: auxiliary training set is empty; training single-task\n";
    return train_sentiment(cfg, main, nullptr, embeddings, seed, hooks);
  }
  return train_sentiment(cfg, main, &aux, embeddings, seed, hooks);
}

TrainedRun train_negation(const TrainConfig& cfg, const AuxTask& aux, const Matrix& embeddings,
                          std::uint64_t seed, const TrainHooks& hooks) {
  cfg.validate();
  check_aux(aux);
  if (aux.train.size() == 0) throw UsageError("negation training set is empty");
  if (aux.dev.size() == 0) throw UsageError("negation dev set is empty");
  const ModelConfig mc = model_config(cfg, embeddings, 2, aux_labels_of(aux), false);
  CascadeModel model(mc, seed, embeddings);
  nn::Adam adam(cfg.adam(cfg.lr));
  Rng dropout = make_rng(seed, RngStream::kDropout);
  Rng shuffle = make_rng(seed, RngStream::kShuffleAux);
  const nn::ParamList params = model.negation_path_params();
  const auto cats = categories_for(aux);

  RunResult r;
  r.seed = seed;
  r.metric = "token_f1";
  Selector sel;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    r.train_loss.push_back(
        run_aux_pass(model, aux.train, params, cfg.batch_size, adam, shuffle, dropout, hooks));
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, model);
    double dev = tag_score(model, aux.dev, cats);
    if (hooks.dev_override) dev = hooks.dev_override(epoch, dev);
    sel.observe(epoch, dev, model, r);
  }
  sel.finish(model, r);
  if (aux.test.size() > 0) {
    const IdBatch pred = predict_tags(model, aux.test);
    r.test_score = token_f1(pred, aux.test.tags, cats, kAnyCategory).f1;
    for (std::size_t s = 0; s < pred.size(); ++s) {
      r.test_predictions.insert(r.test_predictions.end(), pred[s].begin(), pred[s].end());
      r.test_gold.insert(r.test_gold.end(), aux.test.tags[s].begin(), aux.test.tags[s].end());
    }
    fill_aux_scores(r, model, aux);
  }
  return {std::move(r), std::move(model)};
}

TrainedRun train_transfer(const TrainConfig& cfg, const AuxTask& aux, const SentimentTask& main,
                          const Matrix& embeddings, std::uint64_t seed, const TrainHooks& hooks) {
  cfg.validate();
  check_sentiment(main, false);
  TrainHooks stage1_hooks;
  stage1_hooks.on_pass = hooks.on_pass;
  TrainedRun stage1 = [&] {
    try {
      return train_negation(cfg, aux, embeddings, seed, stage1_hooks);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("transfer stage 1 (negation pretraining) failed: ") +
                               e.what());
    }
  }();

  const ModelConfig mc = model_config(cfg, embeddings, class_count(main), aux_labels_of(aux), false);
  CascadeModel model(mc, seed, embeddings);
  model.shared.embedding.table.value = stage1.model.shared.embedding.table.value;
  model.shared.lstm = stage1.model.shared.lstm;
  if (hooks.on_stage2_start) hooks.on_stage2_start(model);

  nn::Adam adam(cfg.adam(cfg.reduced_lr));
  Rng dropout = make_rng(seed, RngStream::kDropout);
  Rng shuffle = make_rng(seed, RngStream::kShuffleMain);
  const SentimentPass pass{main.train, model.sentiment_path_params(), cfg.batch_size};
  RunResult r;
  r.seed = seed;
  Selector sel;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    r.train_loss.push_back(run_sentiment_pass(model, pass, adam, shuffle, dropout, hooks));
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, model);
    double dev = sentiment_score(model, main.dev);
    if (hooks.dev_override) dev = hooks.dev_override(epoch, dev);
    sel.observe(epoch, dev, model, r);
  }
  sel.finish(model, r);
  finish_sentiment(r, model, main);
  r.aux_cue = stage1.result.aux_cue;
  r.aux_scope = stage1.result.aux_scope;
  return {std::move(r), std::move(model)};
}

std::vector<int> predict_classes(const CascadeModel& model, const SentimentData& data) {
  std::vector<int> out;
  out.reserve(data.size());
  const bool heur = model.config().heur;
  for (std::size_t start = 0; start < data.size(); start += kEvalBatch) {
    const std::size_t end = std::min(data.size(), start + kEvalBatch);
    const IdBatch ids(data.ids.begin() + static_cast<std::ptrdiff_t>(start),
                      data.ids.begin() + static_cast<std::ptrdiff_t>(end));
    const IdBatch flags = heur ? IdBatch(data.flags.begin() + static_cast<std::ptrdiff_t>(start),
                                         data.flags.begin() + static_cast<std::ptrdiff_t>(end))
                               : IdBatch{};
    const Matrix probs = model.class_probabilities(ids, flags);
    for (Eigen::Index b = 0; b < probs.rows(); ++b) {
      Eigen::Index best = 0;
      probs.row(b).maxCoeff(&best);
      out.push_back(static_cast<int>(best));
    }
  }
  return out;
}

IdBatch predict_tags(const CascadeModel& model, const TagData& data) {
  IdBatch out;
  out.reserve(data.size());
  for (std::size_t start = 0; start < data.size(); start += kEvalBatch) {
    const std::size_t end = std::min(data.size(), start + kEvalBatch);
    const IdBatch ids(data.ids.begin() + static_cast<std::ptrdiff_t>(start),
                      data.ids.begin() + static_cast<std::ptrdiff_t>(end));
    for (auto& row : model.tag(ids)) out.push_back(std::move(row));
  }
  return out;
}

}  // namespace negsent
