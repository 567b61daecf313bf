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

// Minimal neural substrate with hand-written backward passes. Sequences are
// time-major: element t of a Sequence is a (batch x features) matrix, and
// each batch row b is real for t < lengths[b] and padding afterwards.

#ifndef NEGSENT_NNET_HPP_
#define NEGSENT_NNET_HPP_

#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "negsent/common.hpp"

namespace negsent::nn {

using Sequence = std::vector<Matrix>;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

using ParamList = std::vector<Param*>;

Eigen::Index count_params(const ParamList& params);
void zero_grads(const ParamList& params);

void uniform_fill(Matrix& m, double bound, Rng& rng);

// 1 for real rows at step t, 0 for padding.
Eigen::ArrayXd step_mask(std::span<const int> lengths, int t);
int max_length(std::span<const int> lengths);

// --- LSTM -------------------------------------------------------------------

// Gate blocks are packed [input | forget | output | candidate] along columns.
class Lstm {
 public:
  struct Cache {
    bool reverse = false;
    std::vector<int> order;  // time indices in processing order
    Sequence x, h_prev, c_prev, i, f, o, g, tanh_c;
    std::vector<Eigen::ArrayXd> mask;
  };

  Lstm() = default;
  Lstm(const std::string& name, int input_dim, int hidden_dim);

  void init(Rng& rng);
  int input_dim() const { return static_cast<int>(wx.value.rows()); }
  int hidden_dim() const { return static_cast<int>(wh.value.rows()); }
  void collect(ParamList& out) { out.insert(out.end(), {&wx, &wh, &b}); }

  // Outputs and cell states are forced to zero on padding, so a reverse pass
  // starts every sequence from a zero state at its own last token.
  Sequence forward(const Sequence& xs, std::span<const int> lengths, bool reverse,
                   Cache* cache) const;
  // Accumulates parameter gradients, returns input gradients.
  Sequence backward(const Sequence& dh, const Cache& cache);

  Param wx;  // input_dim x 4h
  Param wh;  // h x 4h
  Param b;   // 1 x 4h
};

struct LstmStep {
  Vector h;
  Vector c;
};

// One unmasked recurrence step on a single example.
LstmStep lstm_step(const Vector& x, const Vector& h_prev, const Vector& c_prev, const Lstm& p);

class BiLstm {
 public:
  struct Cache {
    Lstm::Cache fwd, bwd;
  };

  BiLstm() = default;
  BiLstm(const std::string& name, int input_dim, int hidden_dim);

  void init(Rng& rng);
  int input_dim() const { return fwd.input_dim(); }
  int hidden_dim() const { return fwd.hidden_dim(); }
  int output_dim() const { return 2 * fwd.hidden_dim(); }
  void collect(ParamList& out);

  // output[t] = [forward state at t | backward state at t]
  Sequence forward(const Sequence& xs, std::span<const int> lengths, Cache* cache) const;
  Sequence backward(const Sequence& dy, const Cache& cache);

  Lstm fwd;
  Lstm bwd;
};

// --- small layers -----------------------------------------------------------

class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out);

  void init(Rng& rng);
  void collect(ParamList& out) { out.insert(out.end(), {&w, &b}); }

  Matrix forward(const Matrix& x) const;
  // Accumulates gradients, returns dx.
  Matrix backward(const Matrix& x, const Matrix& dy);

  Param w;  // in x out
  Param b;  // 1 x out
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(const std::string& name, int rows, int dim) : table(name, rows, dim) {}

  void collect(ParamList& out) { out.push_back(&table); }
  int dim() const { return static_cast<int>(table.value.cols()); }

  // ids[b] has lengths[b] entries; padded steps read row 0.
  Sequence forward(const std::vector<std::vector<int>>& ids) const;
  void backward(const std::vector<std::vector<int>>& ids, const Sequence& dx);

  Param table;
};

// Inverted dropout. At evaluation, or with rate 0, returns x unchanged and
// leaves `mask` empty.
Matrix dropout(const Matrix& x, double rate, bool training, Rng& rng, Matrix* mask);
Sequence dropout(const Sequence& x, double rate, bool training, Rng& rng, Sequence* masks);
Sequence dropout_backward(const Sequence& dy, const Sequence& masks);

// Elementwise max over the real steps of each row; padding acts as -inf.
Matrix max_pool(const Sequence& xs, std::span<const int> lengths, Eigen::MatrixXi* argmax);
Sequence max_pool_backward(const Matrix& dy, const Eigen::MatrixXi& argmax, int steps);

class BatchNorm {
 public:
  struct Cache {
    Matrix xhat;
    RowVector inv_std;
    bool training = false;
  };

  BatchNorm() = default;
  BatchNorm(const std::string& name, int dim);

  void collect(ParamList& out) { out.insert(out.end(), {&gamma, &beta}); }

  // Training standardizes with batch statistics (batch >= 2) and updates the
  // running estimates; evaluation uses the running estimates.
  Matrix forward(const Matrix& x, bool training, Cache* cache);
  Matrix backward(const Matrix& dy, const Cache& cache);
  // Evaluation-mode forward.
  Matrix infer(const Matrix& x) const;

  Param gamma;
  Param beta;
  RowVector running_mean;
  RowVector running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

Matrix softmax_rows(const Matrix& logits);

// -log softmax(logits)[gold].
double softmax_ce(const Vector& logits, int gold, Vector* dlogits = nullptr);
// Mean over rows.
double softmax_ce(const Matrix& logits, std::span<const int> gold, Matrix* dlogits = nullptr);

// --- optimizer --------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double l2 = 1e-4;  // coupled: added to the gradient as l2 * value
};

struct AdamSlot {
  Matrix m;
  Matrix v;
  long step = 0;
};

void adam_step(Param& p, AdamSlot& slot, const AdamConfig& cfg);

// Per-parameter moments and step counts, so updating a subset of parameters
// leaves the others (and their bias correction) untouched.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(const ParamList& params);
  AdamConfig& config() { return cfg_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::unordered_map<const Param*, AdamSlot> slots_;
};

}  // namespace negsent::nn

#endif  // NEGSENT_NNET_HPP_
