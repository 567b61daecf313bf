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

// Acceptance suite for the properties that need no external data. Prints one
// PASS/FAIL line per criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "negsent/crf.hpp"
#include "negsent/eval.hpp"
#include "negsent/models.hpp"
#include "negsent/training.hpp"
#include "oracles.hpp"
#include "test_util.hpp"
#include "toy_data.hpp"

namespace negsent {
namespace {

using testing::check_param_grads;
using testing::dot;
using testing::numeric_gradient;
using testing::random_matrix;
using testing::random_sequence;
using testing::relative_error;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// --- 1 ------------------------------------------------------------------------

Outcome crf_oracle() {
  Rng rng(1);
  std::uniform_int_distribution<int> len(1, 5), labels(1, 4);
  double worst_z = 0.0, worst_v = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = len(rng), k = labels(rng);
    const Matrix em = random_matrix(n, k, rng, 3.0);
    const CrfParams p{random_matrix(k, k, rng, 2.0), random_matrix(1, k, rng, 2.0),
                      random_matrix(1, k, rng, 2.0)};
    const auto brute = oracle::crf_enumerate(em, p);
    worst_z = std::max(worst_z, std::abs(crf_log_partition(em, p) - brute.log_partition));
    worst_v = std::max(worst_v, std::abs(oracle::path_score(em, viterbi(em, p), p) - brute.best_score));
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "200 instances; max |logZ diff| %.1e, max |viterbi diff| %.1e",
                worst_z, worst_v);
  return {worst_z < 1e-8 && worst_v < 1e-8, buf};
}

// --- 2 ------------------------------------------------------------------------

struct GradCase {
  std::string name;
  double error;
};

std::vector<GradCase> gradient_cases() {
  Rng rng(2);
  std::vector<GradCase> out;
  const auto seq_input = [&](nn::Sequence& xs, const std::function<double()>& loss,
                             const nn::Sequence& dx) {
    double e = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      e = std::max(e, relative_error(dx[t], numeric_gradient(xs[t], loss)));
    }
    return e;
  };

  for (bool reverse : {false, true}) {
    nn::Lstm lstm("lstm", 3, 2);
    lstm.init(rng);
    lstm.b.value = random_matrix(1, 8, rng, 0.5);
    const std::vector<int> lengths{3, 1, 2};
    auto xs = random_sequence(3, 3, 3, rng);
    const auto r = random_sequence(3, 3, 2, rng);
    nn::Lstm::Cache cache;
    lstm.forward(xs, lengths, reverse, &cache);
    nn::ParamList params;
    lstm.collect(params);
    nn::zero_grads(params);
    const auto dx = lstm.backward(r, cache);
    auto loss = [&] { return dot(r, lstm.forward(xs, lengths, reverse, nullptr)); };
    out.push_back({reverse ? "lstm (reverse)" : "lstm",
                   std::max(check_param_grads(params, loss).error, seq_input(xs, loss, dx))});
  }
  {
    nn::BiLstm bi("bilstm", 2, 3);
    bi.init(rng);
    const std::vector<int> lengths{2, 4};
    auto xs = random_sequence(4, 2, 2, rng);
    const auto r = random_sequence(4, 2, 6, rng);
    nn::BiLstm::Cache cache;
    bi.forward(xs, lengths, &cache);
    nn::ParamList params;
    bi.collect(params);
    nn::zero_grads(params);
    const auto dx = bi.backward(r, cache);
    auto loss = [&] { return dot(r, bi.forward(xs, lengths, nullptr)); };
    out.push_back({"bilstm", std::max(check_param_grads(params, loss).error, seq_input(xs, loss, dx))});
  }
  {
    nn::Linear lin("linear", 4, 3);
    lin.init(rng);
    lin.b.value = random_matrix(1, 3, rng);
    Matrix x = random_matrix(5, 4, rng);
    const Matrix r = random_matrix(5, 3, rng);
    nn::ParamList params;
    lin.collect(params);
    nn::zero_grads(params);
    const Matrix dx = lin.backward(x, r);
    auto loss = [&] { return (r.array() * lin.forward(x).array()).sum(); };
    out.push_back({"linear", std::max(check_param_grads(params, loss).error,
                                      relative_error(dx, numeric_gradient(x, loss)))});
  }
  {
    nn::Embedding emb("embedding", 5, 3);
    emb.table.value = random_matrix(5, 3, rng);
    const std::vector<std::vector<int>> ids{{1, 2, 1}, {4}};
    const auto r = random_sequence(3, 2, 3, rng);
    nn::ParamList params;
    emb.collect(params);
    nn::zero_grads(params);
    emb.backward(ids, r);
    auto loss = [&] {
      auto y = emb.forward(ids);
      testing::zero_padding(y, {3, 1});
      return dot(r, y);
    };
    out.push_back({"embedding", check_param_grads(params, loss).error});
  }
  {
    const std::vector<int> lengths{3, 2};
    auto xs = random_sequence(3, 2, 4, rng);
    const Matrix r = random_matrix(2, 4, rng);
    Eigen::MatrixXi arg;
    nn::max_pool(xs, lengths, &arg);
    const auto dx = nn::max_pool_backward(r, arg, 3);
    auto loss = [&] { return (r.array() * nn::max_pool(xs, lengths, nullptr).array()).sum(); };
    out.push_back({"max_pool", seq_input(xs, loss, dx)});
  }
  {
    nn::BatchNorm bn("batch_norm", 3);
    bn.gamma.value = random_matrix(1, 3, rng) + Matrix::Ones(1, 3);
    bn.beta.value = random_matrix(1, 3, rng);
    Matrix x = random_matrix(4, 3, rng);
    const Matrix r = random_matrix(4, 3, rng);
    nn::BatchNorm::Cache cache;
    bn.forward(x, true, &cache);
    nn::ParamList params;
    bn.collect(params);
    nn::zero_grads(params);
    const Matrix dx = bn.backward(r, cache);
    auto loss = [&] {
      nn::BatchNorm copy = bn;
      return (r.array() * copy.forward(x, true, nullptr).array()).sum();
    };
    out.push_back({"batch_norm", std::max(check_param_grads(params, loss).error,
                                          relative_error(dx, numeric_gradient(x, loss)))});
  }
  {
    Matrix logits = random_matrix(3, 4, rng, 2.0);
    const std::vector<int> gold{0, 3, 2};
    Matrix d;
    nn::softmax_ce(logits, gold, &d);
    auto loss = [&] { return nn::softmax_ce(logits, gold, nullptr); };
    out.push_back({"softmax_ce", relative_error(d, numeric_gradient(logits, loss))});
  }
  {
    // Dropout is linear for a fixed mask.
    auto xs = random_sequence(2, 3, 4, rng);
    const auto r = random_sequence(2, 3, 4, rng);
    nn::Sequence masks;
    Rng drop(5);
    nn::dropout(xs, 0.5, true, drop, &masks);
    const auto dx = nn::dropout_backward(r, masks);
    auto loss = [&] {
      Rng same(5);
      return dot(r, nn::dropout(xs, 0.5, true, same, nullptr));
    };
    out.push_back({"dropout", seq_input(xs, loss, dx)});
  }
  {
    Matrix em = random_matrix(4, 4, rng);
    CrfParams p{random_matrix(4, 4, rng, 2.0), random_matrix(1, 4, rng, 2.0),
                random_matrix(1, 4, rng, 2.0)};
    const std::vector<int> gold{1, 3, 0, 2};
    Matrix dem;
    CrfParams g = CrfParams::zeros(4);
    crf_nll(em, gold, p, &dem, &g);
    auto loss = [&] { return crf_nll(em, gold, p); };
    double e = std::max(relative_error(dem, numeric_gradient(em, loss)),
                        relative_error(g.transitions, numeric_gradient(p.transitions, loss)));
    Matrix start = p.start, stop = p.stop;
    auto loss_ends = [&] {
      CrfParams q = p;
      q.start = start.row(0);
      q.stop = stop.row(0);
      return crf_nll(em, gold, q);
    };
    e = std::max(e, relative_error(g.start, numeric_gradient(start, loss_ends)));
    e = std::max(e, relative_error(g.stop, numeric_gradient(stop, loss_ends)));
    out.push_back({"crf_nll", e});
  }

  // Full models.
  ModelConfig cfg;
  cfg.vocab_size = 8;
  cfg.embedding_dim = 4;
  cfg.hidden = 3;
  cfg.num_classes = 3;
  cfg.flag_dim = 2;
  Matrix emb = random_matrix(8, 4, rng, 0.5);
  emb.row(0).setZero();
  const IdBatch ids{{2, 3, 4, 5}, {6, 2}, {7, 1, 3}};
  const IdBatch flags{{0, 1, 1, 0}, {1, 0}, {0, 0, 1}};
  const IdBatch tags{{1, 3, 4, 0}, {0, 0}, {1, 2, 3}};
  const std::vector<int> labels{0, 2, 1};
  for (bool heur : {false, true}) {
    ModelConfig c = cfg;
    c.heur = heur;
    CascadeModel model(c, 5, emb);
    const IdBatch f = heur ? flags : IdBatch{};
    nn::zero_grads(model.all_params());
    const Rng start(77);
    Rng r1 = start;
    model.sentiment_loss(ids, f, labels, true, r1, true);
    auto loss = [&] {
      Rng r = start;
      return model.sentiment_loss(ids, f, labels, true, r, false);
    };
    out.push_back({heur ? "sentiment model (HEUR)" : "sentiment model",
                   check_param_grads(model.sentiment_path_params(), loss).error});
  }
  {
    CascadeModel model(cfg, 5, emb);
    model.negation.crf.transitions.value = random_matrix(5, 5, rng);
    model.negation.crf.start.value = random_matrix(1, 5, rng);
    model.negation.crf.stop.value = random_matrix(1, 5, rng);
    nn::zero_grads(model.all_params());
    const Rng start(12);
    Rng r1 = start;
    model.negation_loss(ids, tags, true, r1, true);
    auto loss = [&] {
      Rng r = start;
      return model.negation_loss(ids, tags, true, r, false);
    };
    out.push_back({"negation model", check_param_grads(model.negation_path_params(), loss).error});
  }
  return out;
}

Outcome gradients() {
  const auto cases = gradient_cases();
  Outcome o;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : cases) {
    if (!(c.error < 1e-4)) {
      o.pass = false;
      o.detail += c.name + " ";
    }
    if (c.error > worst) {
      worst = c.error;
      worst_name = c.name;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu checks; worst relative error %.1e (%s)", cases.size(), worst,
                worst_name.c_str());
  o.detail = o.pass ? buf : "failing: " + o.detail + "; " + buf;
  return o;
}

// --- 3 ------------------------------------------------------------------------

Outcome bio_properties() {
  Rng rng(3);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    NegSentence s = oracle::random_neg_sentence(rng);
    const TagSequence tags = to_bio(s);
    std::set<int> cue, scope;
    for (const auto& inst : s.instances) {
      cue.insert(inst.cue.begin(), inst.cue.end());
      scope.insert(inst.scope.begin(), inst.scope.end());
    }
    for (int c : cue) scope.erase(c);
    const auto decoded = decode_bio(tags);
    bool ok = bio_well_formed(tags) && tags == oracle::union_bio(s) &&
              std::set<int>(decoded.cue.begin(), decoded.cue.end()) == cue &&
              std::set<int>(decoded.scope.begin(), decoded.scope.end()) == scope;
    std::shuffle(s.instances.begin(), s.instances.end(), rng);
    ok = ok && to_bio(s) == tags;
    bad += !ok;
  }
  return {bad == 0, "1000 random sentences; " + std::to_string(bad) + " violations"};
}

// --- 4, 5, 7 --------------------------------------------------------------------

TrainConfig toy_config(Mode mode) {
  TrainConfig c;
  c.mode = mode;
  c.epochs = 3;
  c.batch_size = 8;
  c.embedding_dim = 6;
  c.hidden = 4;
  c.flag_dim = 3;
  if (mode != Mode::kStl && mode != Mode::kHeur) c.aux_corpus = "toy";
  return c;
}

Outcome mtl_reduction() {
  const toy::Toy data = toy::make_toy();
  const auto trajectory = [&](bool mtl) {
    std::vector<std::vector<Matrix>> values;
    TrainHooks hooks;
    hooks.on_epoch_end = [&](int, CascadeModel& m) {
      std::vector<Matrix> v;
      for (auto* p : m.sentiment_path_params()) v.push_back(p->value);
      values.push_back(v);
    };
    if (mtl) {
      AuxTask empty = data.aux;
      empty.train = {};
      train_mtl(toy_config(Mode::kMtl), data.main, empty, data.embeddings, 11, hooks);
    } else {
      train_stl(toy_config(Mode::kStl), data.main, data.embeddings, 11, hooks);
    }
    return values;
  };
  const auto a = trajectory(false);
  const auto b = trajectory(true);
  std::size_t tensors = 0;
  for (const auto& epoch : a) tensors += epoch.size();
  return {a == b && !a.empty(),
          std::to_string(a.size()) + " epochs, " + std::to_string(tensors) +
              " parameter tensors compared bit-for-bit"};
}

Outcome equal_capacity() {
  const toy::Toy data = toy::make_toy();
  TrainConfig cfg = toy_config(Mode::kMtl);
  cfg.epochs = 1;
  auto stl = train_stl(toy_config(Mode::kStl), data.main, data.embeddings, 1);
  auto mtl = train_mtl(cfg, data.main, data.aux, data.embeddings, 1);
  const auto s = nn::count_params(stl.model.sentiment_path_params());
  const auto m = nn::count_params(mtl.model.sentiment_path_params());
  // Default-size models as used in experiments.
  ModelConfig big;
  big.vocab_size = 1000;
  Matrix emb = Matrix::Zero(1000, 300);
  CascadeModel full(big, 1, emb);
  const auto full_count = nn::count_params(full.sentiment_path_params());
  return {s == m, "sentiment path " + std::to_string(s) + " (STL) vs " + std::to_string(m) +
                      " (MTL); " + std::to_string(full_count) + " at default sizes"};
}

Outcome determinism() {
  const toy::Toy data = toy::make_toy();
  const auto fingerprint = [&](Mode mode) {
    const TrainConfig cfg = toy_config(mode);
    TrainedRun run = [&] {
      switch (mode) {
        case Mode::kMtl: return train_mtl(cfg, data.main, data.aux, data.embeddings, 5);
        case Mode::kTransfer: return train_transfer(cfg, data.aux, data.main, data.embeddings, 5);
        case Mode::kNegation: return train_negation(cfg, data.aux, data.embeddings, 5);
        default: return train_stl(cfg, data.main, data.embeddings, 5);
      }
    }();
    nlohmann::json j = run.result;
    j["predictions"] = run.result.test_predictions;
    return j.dump();
  };
  int checked = 0;
  bool same = true;
  for (Mode m : {Mode::kStl, Mode::kMtl, Mode::kTransfer, Mode::kNegation}) {
    same = same && fingerprint(m) == fingerprint(m);
    ++checked;
  }
  const std::vector<int> a{1, 0, 1, 1, 0, 1, 0, 0}, b{1, 1, 0, 1, 0, 0, 0, 1},
      g{1, 0, 1, 0, 0, 1, 1, 0};
  same = same && approx_rand_test(a, b, g, 2000, 9) == approx_rand_test(a, b, g, 2000, 9);
  return {same, std::to_string(checked) +
                    " training modes repeated; all metrics, predictions and p-values identical"};
}

// --- 6 ------------------------------------------------------------------------

Outcome randomization_oracle() {
  Rng rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + trial % 9;
    std::uniform_int_distribution<int> label(0, 2);
    std::vector<int> a(n), b(n), gold(n);
    for (int i = 0; i < n; ++i) {
      gold[i] = label(rng);
      a[i] = label(rng) == 0 ? label(rng) : gold[i];
      b[i] = label(rng);
    }
    const double p = approx_rand_test(a, b, gold, 10000, static_cast<std::uint64_t>(trial));
    worst = std::max(worst, std::abs(p - oracle::exact_rand_p(a, b, gold)));
  }
  const std::vector<int> same{0, 1, 2, 1, 0}, gold{0, 1, 1, 1, 2};
  const double identical = approx_rand_test(same, same, gold);
  char buf[128];
  std::snprintf(buf, sizeof buf, "30 cases n<=12; max |p - exact| %.4f; identical predictions p=%g",
                worst, identical);
  return {worst <= 0.02 && identical == 1.0, buf};
}

}  // namespace
}  // namespace negsent

int main() {
  using negsent::Outcome;
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "CRF oracle equivalence", negsent::crf_oracle},
      {2, "gradient checks", negsent::gradients},
      {3, "BIO properties", negsent::bio_properties},
      {4, "MTL reduction", negsent::mtl_reduction},
      {5, "equal capacity", negsent::equal_capacity},
      {6, "randomization-test oracle", negsent::randomization_oracle},
      {7, "determinism", negsent::determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  criterion %d: %s (%s) [%.2fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    failed += !o.pass;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
