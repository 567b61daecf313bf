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

#include "negsent/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace negsent::nn {

Eigen::Index count_params(const ParamList& params) {
  Eigen::Index n = 0;
  for (const Param* p : params) n += p->size();
  return n;
}

void zero_grads(const ParamList& params) {
  for (Param* p : params) p->zero_grad();
}

void uniform_fill(Matrix& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> uni(-bound, bound);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = uni(rng);
  }
}

Eigen::ArrayXd step_mask(std::span<const int> lengths, int t) {
  Eigen::ArrayXd mask(static_cast<Eigen::Index>(lengths.size()));
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    mask(static_cast<Eigen::Index>(b)) = t < lengths[b] ? 1.0 : 0.0;
  }
  return mask;
}

int max_length(std::span<const int> lengths) {
  int n = 0;
  for (int l : lengths) n = std::max(n, l);
  return n;
}

namespace {

Matrix sigmoid(const Matrix& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

void check_sequence(const Sequence& xs, std::span<const int> lengths, Eigen::Index dim,
                    const char* who) {
  if (static_cast<int>(xs.size()) != max_length(lengths)) {
    throw ShapeError(std::string(who) + ": sequence length does not match lengths");
  }
  for (const auto& x : xs) {
    if (x.rows() != static_cast<Eigen::Index>(lengths.size()) || x.cols() != dim) {
      throw ShapeError(std::string(who) + ": expected " + std::to_string(lengths.size()) + "x" +
                       std::to_string(dim) + " step, got " + std::to_string(x.rows()) + "x" +
                       std::to_string(x.cols()));
    }
  }
}

}  // namespace

// --- LSTM -------------------------------------------------------------------

Lstm::Lstm(const std::string& name, int input_dim, int hidden_dim)
    : wx(name + ".wx", input_dim, 4 * hidden_dim),
      wh(name + ".wh", hidden_dim, 4 * hidden_dim),
      b(name + ".b", 1, 4 * hidden_dim) {}

void Lstm::init(Rng& rng) {
  const int h = hidden_dim();
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  uniform_fill(wx.value, bound, rng);
  uniform_fill(wh.value, bound, rng);
  b.value.setZero();
  b.value.block(0, h, 1, h).setOnes();  // forget gate bias
}

Sequence Lstm::forward(const Sequence& xs, std::span<const int> lengths, bool reverse,
                       Cache* cache) const {
  check_sequence(xs, lengths, wx.value.rows(), "lstm");
  const int steps = static_cast<int>(xs.size());
  const auto batch = static_cast<Eigen::Index>(lengths.size());
  const Eigen::Index h = wh.value.rows();

  Sequence out(static_cast<std::size_t>(steps));
  Matrix hs = Matrix::Zero(batch, h);
  Matrix cs = Matrix::Zero(batch, h);
  if (cache) {
    *cache = Cache{};
    cache->reverse = reverse;
  }
  for (int k = 0; k < steps; ++k) {
    const int t = reverse ? steps - 1 - k : k;
    const Matrix& x = xs[static_cast<std::size_t>(t)];
    Matrix z = x * wx.value;
    z.noalias() += hs * wh.value;
    z.rowwise() += b.value.row(0);

    Matrix gi = sigmoid(z.leftCols(h));
    Matrix gf = sigmoid(z.middleCols(h, h));
    Matrix go = sigmoid(z.middleCols(2 * h, h));
    Matrix gg = z.rightCols(h).array().tanh().matrix();
    Eigen::ArrayXd mask = step_mask(lengths, t);

    Matrix c_new = (gf.array() * cs.array() + gi.array() * gg.array()).matrix();
    Matrix tc = c_new.array().tanh().matrix();
    Matrix h_new = (go.array() * tc.array()).matrix();
    c_new.array().colwise() *= mask;
    h_new.array().colwise() *= mask;

    if (cache) {
      cache->order.push_back(t);
      cache->x.push_back(x);
      cache->h_prev.push_back(hs);
      cache->c_prev.push_back(cs);
      cache->i.push_back(std::move(gi));
      cache->f.push_back(std::move(gf));
      cache->o.push_back(std::move(go));
      cache->g.push_back(std::move(gg));
      cache->tanh_c.push_back(std::move(tc));
      cache->mask.push_back(std::move(mask));
    }
    out[static_cast<std::size_t>(t)] = h_new;
    hs = std::move(h_new);
    cs = std::move(c_new);
  }
  return out;
}

Sequence Lstm::backward(const Sequence& dh, const Cache& cache) {
  const std::size_t steps = cache.order.size();
  if (dh.size() != steps) throw ShapeError("lstm backward: gradient length mismatch");
  const Eigen::Index h = wh.value.rows();
  Sequence dx(steps);
  if (steps == 0) return dx;
  const Eigen::Index batch = cache.x.front().rows();

  Matrix dh_carry = Matrix::Zero(batch, h);
  Matrix dc_carry = Matrix::Zero(batch, h);
  Matrix dz(batch, 4 * h);
  for (std::size_t k = steps; k-- > 0;) {
    const auto t = static_cast<std::size_t>(cache.order[k]);
    const auto& mask = cache.mask[k];
    const auto& i = cache.i[k].array();
    const auto& f = cache.f[k].array();
    const auto& o = cache.o[k].array();
    const auto& g = cache.g[k].array();
    const auto& tc = cache.tanh_c[k].array();

    Eigen::ArrayXXd dht = (dh[t] + dh_carry).array();
    dht.colwise() *= mask;
    Eigen::ArrayXXd dc = dc_carry.array();
    dc.colwise() *= mask;
    dc += dht * o * (1.0 - tc.square());

    dz.leftCols(h) = (dc * g * i * (1.0 - i)).matrix();
    dz.middleCols(h, h) = (dc * cache.c_prev[k].array() * f * (1.0 - f)).matrix();
    dz.middleCols(2 * h, h) = (dht * tc * o * (1.0 - o)).matrix();
    dz.rightCols(h) = (dc * i * (1.0 - g.square())).matrix();

    wx.grad.noalias() += cache.x[k].transpose() * dz;
    wh.grad.noalias() += cache.h_prev[k].transpose() * dz;
    b.grad += dz.colwise().sum();
    dx[t] = dz * wx.value.transpose();
    dh_carry = dz * wh.value.transpose();
    dc_carry = (dc * f).matrix();
  }
  return dx;
}

LstmStep lstm_step(const Vector& x, const Vector& h_prev, const Vector& c_prev, const Lstm& p) {
  if (x.size() != p.input_dim() || h_prev.size() != p.hidden_dim() ||
      c_prev.size() != p.hidden_dim()) {
    throw ShapeError("lstm_step: shape mismatch");
  }
  const Eigen::Index h = p.hidden_dim();
  Vector z = p.wx.value.transpose() * x + p.wh.value.transpose() * h_prev +
             p.b.value.row(0).transpose();
  auto sig = [](const Vector& v) -> Vector { return (1.0 / (1.0 + (-v.array()).exp())).matrix(); };
  const Vector i = sig(z.segment(0, h));
  const Vector f = sig(z.segment(h, h));
  const Vector o = sig(z.segment(2 * h, h));
  const Vector g = z.segment(3 * h, h).array().tanh().matrix();
  LstmStep s;
  s.c = (f.array() * c_prev.array() + i.array() * g.array()).matrix();
  s.h = (o.array() * s.c.array().tanh()).matrix();
  return s;
}

BiLstm::BiLstm(const std::string& name, int input_dim, int hidden_dim)
    : fwd(name + ".fwd", input_dim, hidden_dim), bwd(name + ".bwd", input_dim, hidden_dim) {}

void BiLstm::init(Rng& rng) {
  fwd.init(rng);
  bwd.init(rng);
}

void BiLstm::collect(ParamList& out) {
  fwd.collect(out);
  bwd.collect(out);
}

Sequence BiLstm::forward(const Sequence& xs, std::span<const int> lengths, Cache* cache) const {
  Sequence f = fwd.forward(xs, lengths, false, cache ? &cache->fwd : nullptr);
  Sequence b = bwd.forward(xs, lengths, true, cache ? &cache->bwd : nullptr);
  const Eigen::Index h = fwd.hidden_dim();
  Sequence out(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    out[t].resize(f[t].rows(), 2 * h);
    out[t] << f[t], b[t];
  }
  return out;
}

Sequence BiLstm::backward(const Sequence& dy, const Cache& cache) {
  const Eigen::Index h = fwd.hidden_dim();
  Sequence df(dy.size()), db(dy.size());
  for (std::size_t t = 0; t < dy.size(); ++t) {
    df[t] = dy[t].leftCols(h);
    db[t] = dy[t].rightCols(h);
  }
  Sequence dx = fwd.backward(df, cache.fwd);
  Sequence dxb = bwd.backward(db, cache.bwd);
  for (std::size_t t = 0; t < dx.size(); ++t) dx[t] += dxb[t];
  return dx;
}

// --- small layers -----------------------------------------------------------

Linear::Linear(const std::string& name, int in, int out)
    : w(name + ".w", in, out), b(name + ".b", 1, out) {}

void Linear::init(Rng& rng) {
  uniform_fill(w.value, 1.0 / std::sqrt(static_cast<double>(w.value.rows())), rng);
  b.value.setZero();
}

Matrix Linear::forward(const Matrix& x) const {
  if (x.cols() != w.value.rows()) throw ShapeError("linear: input width mismatch");
  Matrix y = x * w.value;
  y.rowwise() += b.value.row(0);
  return y;
}

Matrix Linear::backward(const Matrix& x, const Matrix& dy) {
  w.grad.noalias() += x.transpose() * dy;
  b.grad += dy.colwise().sum();
  return dy * w.value.transpose();
}

Sequence Embedding::forward(const std::vector<std::vector<int>>& ids) const {
  int steps = 0;
  for (const auto& row : ids) steps = std::max(steps, static_cast<int>(row.size()));
  const auto batch = static_cast<Eigen::Index>(ids.size());
  const Eigen::Index d = table.value.cols();
  Sequence out(static_cast<std::size_t>(steps), Matrix::Zero(batch, d));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& row = ids[static_cast<std::size_t>(b)];
    for (std::size_t t = 0; t < row.size(); ++t) {
      const int id = row[t];
      if (id < 0 || id >= table.value.rows()) throw ShapeError("embedding: id out of range");
      out[t].row(b) = table.value.row(id);
    }
  }
  return out;
}

void Embedding::backward(const std::vector<std::vector<int>>& ids, const Sequence& dx) {
  for (std::size_t b = 0; b < ids.size(); ++b) {
    const auto& row = ids[b];
    for (std::size_t t = 0; t < row.size(); ++t) {
      table.grad.row(row[t]) += dx[t].row(static_cast<Eigen::Index>(b));
    }
  }
}

Matrix dropout(const Matrix& x, double rate, bool training, Rng& rng, Matrix* mask) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("dropout rate must be in [0, 1)");
  if (mask) mask->resize(0, 0);
  if (!training || rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Matrix m(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = keep(rng) ? scale : 0.0;
  }
  Matrix y = (x.array() * m.array()).matrix();
  if (mask) *mask = std::move(m);
  return y;
}

Sequence dropout(const Sequence& x, double rate, bool training, Rng& rng, Sequence* masks) {
  Sequence out(x.size());
  if (masks) masks->assign(x.size(), Matrix());
  for (std::size_t t = 0; t < x.size(); ++t) {
    out[t] = dropout(x[t], rate, training, rng, masks ? &(*masks)[t] : nullptr);
  }
  return out;
}

Sequence dropout_backward(const Sequence& dy, const Sequence& masks) {
  Sequence dx(dy.size());
  for (std::size_t t = 0; t < dy.size(); ++t) {
    const bool identity = t >= masks.size() || masks[t].size() == 0;
    dx[t] = identity ? dy[t] : Matrix((dy[t].array() * masks[t].array()).matrix());
  }
  return dx;
}

Matrix max_pool(const Sequence& xs, std::span<const int> lengths, Eigen::MatrixXi* argmax) {
  if (xs.empty()) throw UsageError("max_pool: empty sequence");
  const auto batch = static_cast<Eigen::Index>(lengths.size());
  const Eigen::Index d = xs.front().cols();
  for (int len : lengths) {
    if (len < 1) throw UsageError("max_pool: fully masked sequence");
  }
  check_sequence(xs, lengths, d, "max_pool");
  Matrix out = Matrix::Constant(batch, d, -std::numeric_limits<double>::infinity());
  Eigen::MatrixXi arg = Eigen::MatrixXi::Zero(batch, d);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (int t = 0; t < lengths[static_cast<std::size_t>(b)]; ++t) {
      const auto& x = xs[static_cast<std::size_t>(t)];
      for (Eigen::Index j = 0; j < d; ++j) {
        if (x(b, j) > out(b, j)) {
          out(b, j) = x(b, j);
          arg(b, j) = t;
        }
      }
    }
  }
  if (argmax) *argmax = std::move(arg);
  return out;
}

Sequence max_pool_backward(const Matrix& dy, const Eigen::MatrixXi& argmax, int steps) {
  Sequence dx(static_cast<std::size_t>(steps), Matrix::Zero(dy.rows(), dy.cols()));
  for (Eigen::Index b = 0; b < dy.rows(); ++b) {
    for (Eigen::Index j = 0; j < dy.cols(); ++j) {
      dx[static_cast<std::size_t>(argmax(b, j))](b, j) += dy(b, j);
    }
  }
  return dx;
}

BatchNorm::BatchNorm(const std::string& name, int dim)
    : gamma(name + ".gamma", 1, dim),
      beta(name + ".beta", 1, dim),
      running_mean(RowVector::Zero(dim)),
      running_var(RowVector::Ones(dim)) {
  gamma.value.setOnes();
}

Matrix BatchNorm::forward(const Matrix& x, bool training, Cache* cache) {
  if (x.cols() != gamma.value.cols()) throw ShapeError("batch_norm: width mismatch");
  RowVector mean, var;
  if (training) {
    if (x.rows() < 2) throw UsageError("batch_norm: training batch needs at least 2 rows");
    const double n = static_cast<double>(x.rows());
    mean = x.colwise().mean();
    var = (x.rowwise() - mean).array().square().colwise().sum().matrix() / n;
    running_mean = (1.0 - momentum) * running_mean + momentum * mean;
    running_var = (1.0 - momentum) * running_var + momentum * (var * (n / (n - 1.0)));
  } else {
    mean = running_mean;
    var = running_var;
  }
  RowVector inv_std = (var.array() + eps).rsqrt().matrix();
  Matrix xhat = ((x.rowwise() - mean).array().rowwise() * inv_std.array()).matrix();
  Matrix y = (xhat.array().rowwise() * gamma.value.row(0).array()).matrix();
  y.rowwise() += beta.value.row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
    cache->training = training;
  }
  return y;
}

Matrix BatchNorm::infer(const Matrix& x) const {
  if (x.cols() != gamma.value.cols()) throw ShapeError("batch_norm: width mismatch");
  const RowVector inv_std = (running_var.array() + eps).rsqrt().matrix();
  Matrix y = ((x.rowwise() - running_mean).array().rowwise() *
              (inv_std.array() * gamma.value.row(0).array()))
                 .matrix();
  y.rowwise() += beta.value.row(0);
  return y;
}

Matrix BatchNorm::backward(const Matrix& dy, const Cache& cache) {
  gamma.grad += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  beta.grad += dy.colwise().sum();
  Matrix dxhat = (dy.array().rowwise() * gamma.value.row(0).array()).matrix();
  if (!cache.training) {
    return (dxhat.array().rowwise() * cache.inv_std.array()).matrix();
  }
  const double n = static_cast<double>(dy.rows());
  const RowVector sum_d = dxhat.colwise().sum();
  const RowVector sum_dx = (dxhat.array() * cache.xhat.array()).colwise().sum().matrix();
  Matrix dx = n * dxhat;
  dx.rowwise() -= sum_d;
  dx -= (cache.xhat.array().rowwise() * sum_dx.array()).matrix();
  return ((dx.array().rowwise() * cache.inv_std.array()) / n).matrix();
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double m = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - m).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

double softmax_ce(const Vector& logits, int gold, Vector* dlogits) {
  if (gold < 0 || gold >= logits.size()) throw UsageError("softmax_ce: gold class out of range");
  const double m = logits.maxCoeff();
  const Vector shifted = logits.array() - m;
  const double lse = std::log(shifted.array().exp().sum());
  if (dlogits) {
    *dlogits = (shifted.array() - lse).exp().matrix();
    (*dlogits)(gold) -= 1.0;
  }
  return lse - shifted(gold);
}

double softmax_ce(const Matrix& logits, std::span<const int> gold, Matrix* dlogits) {
  if (static_cast<Eigen::Index>(gold.size()) != logits.rows()) {
    throw ShapeError("softmax_ce: batch size mismatch");
  }
  const double n = static_cast<double>(logits.rows());
  double loss = 0.0;
  if (dlogits) dlogits->resize(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Vector d;
    loss += softmax_ce(logits.row(r).transpose(), gold[static_cast<std::size_t>(r)],
                       dlogits ? &d : nullptr);
    if (dlogits) dlogits->row(r) = d.transpose() / n;
  }
  return loss / n;
}

// --- optimizer --------------------------------------------------------------

void adam_step(Param& p, AdamSlot& slot, const AdamConfig& cfg) {
  if (slot.m.size() == 0) {
    slot.m = Matrix::Zero(p.value.rows(), p.value.cols());
    slot.v = Matrix::Zero(p.value.rows(), p.value.cols());
  }
  if (slot.m.rows() != p.value.rows() || slot.m.cols() != p.value.cols()) {
    throw ShapeError("adam: moment shape does not match " + p.name);
  }
  ++slot.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(slot.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(slot.step));
  auto g = p.grad.array() + cfg.l2 * p.value.array();
  slot.m.array() = cfg.beta1 * slot.m.array() + (1.0 - cfg.beta1) * g;
  slot.v.array() = cfg.beta2 * slot.v.array() + (1.0 - cfg.beta2) * g.square();
  p.value.array() -= cfg.lr * (slot.m.array() / c1) / ((slot.v.array() / c2).sqrt() + cfg.eps);
}

void Adam::step(const ParamList& params) {
  for (Param* p : params) adam_step(*p, slots_[p], cfg_);
}

}  // namespace negsent::nn
