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

#include <gtest/gtest.h>

#include <cmath>

#include "negsent/nnet.hpp"
#include "test_util.hpp"

namespace negsent {
namespace {

using testing::check_param_grads;
using testing::dot;
using testing::numeric_gradient;
using testing::random_matrix;
using testing::random_sequence;
using testing::relative_error;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Element-by-element LSTM recurrence written independently of the library.
std::vector<std::vector<double>> scalar_lstm(const nn::Lstm& p,
                                             const std::vector<std::vector<double>>& xs) {
  const int h = p.hidden_dim();
  const int in = p.input_dim();
  std::vector<double> hs(h, 0.0), cs(h, 0.0);
  std::vector<std::vector<double>> out;
  for (const auto& x : xs) {
    std::vector<double> z(4 * h, 0.0);
    for (int j = 0; j < 4 * h; ++j) {
      z[j] = p.b.value(0, j);
      for (int k = 0; k < in; ++k) z[j] += x[k] * p.wx.value(k, j);
      for (int k = 0; k < h; ++k) z[j] += hs[k] * p.wh.value(k, j);
    }
    for (int j = 0; j < h; ++j) {
      const double i = sigmoid(z[j]);
      const double f = sigmoid(z[h + j]);
      const double o = sigmoid(z[2 * h + j]);
      const double g = std::tanh(z[3 * h + j]);
      cs[j] = f * cs[j] + i * g;
      hs[j] = o * std::tanh(cs[j]);
    }
    out.push_back(hs);
  }
  return out;
}

TEST(Lstm, ForwardMatchesScalarRecurrence) {
  Rng rng(7);
  nn::Lstm lstm("l", 3, 4);
  lstm.init(rng);
  lstm.b.value = random_matrix(1, 16, rng, 0.5);
  const auto xs = random_sequence(5, 1, 3, rng);
  std::vector<std::vector<double>> raw;
  for (const auto& x : xs) raw.push_back({x(0, 0), x(0, 1), x(0, 2)});
  const std::vector<int> lengths{5};
  const auto out = lstm.forward(xs, lengths, false, nullptr);
  const auto expect = scalar_lstm(lstm, raw);
  for (int t = 0; t < 5; ++t) {
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(out[t](0, j), expect[t][j], 1e-12);
  }
  // Reverse direction equals the forward recurrence over the reversed input.
  std::vector<std::vector<double>> reversed(raw.rbegin(), raw.rend());
  const auto back = lstm.forward(xs, lengths, true, nullptr);
  const auto expect_back = scalar_lstm(lstm, reversed);
  for (int t = 0; t < 5; ++t) {
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(back[4 - t](0, j), expect_back[t][j], 1e-12);
  }
}

TEST(Lstm, ForwardMatchesSingleStep) {
  Rng rng(3);
  nn::Lstm lstm("l", 2, 3);
  lstm.init(rng);
  const auto xs = random_sequence(1, 1, 2, rng);
  const auto out = lstm.forward(xs, std::vector<int>{1}, false, nullptr);
  const auto step = lstm_step(xs[0].row(0).transpose(), Vector::Zero(3), Vector::Zero(3), lstm);
  EXPECT_LT((out[0].row(0).transpose() - step.h).norm(), 1e-14);
}

TEST(Lstm, PaddedBatchEqualsIndividualRuns) {
  Rng rng(11);
  nn::BiLstm bi("bi", 3, 4);
  bi.init(rng);
  const std::vector<int> lengths{4, 2, 3};
  auto xs = random_sequence(4, 3, 3, rng);
  testing::zero_padding(xs, lengths);
  const auto batched = bi.forward(xs, lengths, nullptr);
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    nn::Sequence single;
    for (int t = 0; t < lengths[b]; ++t) single.push_back(xs[t].row(static_cast<Eigen::Index>(b)));
    const auto alone = bi.forward(single, std::vector<int>{lengths[b]}, nullptr);
    for (int t = 0; t < lengths[b]; ++t) {
      EXPECT_LT((alone[t].row(0) - batched[t].row(static_cast<Eigen::Index>(b))).norm(), 1e-13);
    }
    for (int t = lengths[b]; t < 4; ++t) {
      EXPECT_EQ(batched[t].row(static_cast<Eigen::Index>(b)).norm(), 0.0);
    }
  }
}

// Scalar projection loss L = <R, f(x)> for gradient checks.
class GradCheck : public ::testing::Test {
 protected:
  Rng rng{2024};
};

TEST_F(GradCheck, Lstm) {
  for (bool reverse : {false, true}) {
    nn::Lstm lstm("l", 3, 2);
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
    const auto worst = check_param_grads(params, loss);
    EXPECT_LT(worst.error, 1e-4) << worst.name << " reverse=" << reverse;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      EXPECT_LT(relative_error(dx[t], numeric_gradient(xs[t], loss)), 1e-4);
    }
  }
}

TEST_F(GradCheck, BiLstm) {
  nn::BiLstm bi("bi", 2, 3);
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
  const auto worst = check_param_grads(params, loss);
  EXPECT_LT(worst.error, 1e-4) << worst.name;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    EXPECT_LT(relative_error(dx[t], numeric_gradient(xs[t], loss)), 1e-4);
  }
}

TEST_F(GradCheck, Linear) {
  nn::Linear lin("lin", 4, 3);
  lin.init(rng);
  lin.b.value = random_matrix(1, 3, rng);
  Matrix x = random_matrix(5, 4, rng);
  const Matrix r = random_matrix(5, 3, rng);
  nn::ParamList params;
  lin.collect(params);
  nn::zero_grads(params);
  const Matrix dx = lin.backward(x, r);
  auto loss = [&] { return (r.array() * lin.forward(x).array()).sum(); };
  EXPECT_LT(check_param_grads(params, loss).error, 1e-4);
  EXPECT_LT(relative_error(dx, numeric_gradient(x, loss)), 1e-4);
}

TEST_F(GradCheck, Embedding) {
  nn::Embedding emb("e", 5, 3);
  emb.table.value = random_matrix(5, 3, rng);
  const std::vector<std::vector<int>> ids{{1, 2, 1}, {4}};
  const auto r = random_sequence(3, 2, 3, rng);
  nn::ParamList params;
  emb.collect(params);
  nn::zero_grads(params);
  emb.backward(ids, r);
  // Padding steps read row 0 but must not receive gradient.
  auto loss = [&] {
    auto out = emb.forward(ids);
    testing::zero_padding(out, {3, 1});
    return dot(r, out);
  };
  EXPECT_LT(check_param_grads(params, loss).error, 1e-4);
}

TEST_F(GradCheck, MaxPool) {
  const std::vector<int> lengths{3, 2};
  auto xs = random_sequence(3, 2, 4, rng);
  const Matrix r = random_matrix(2, 4, rng);
  Eigen::MatrixXi arg;
  nn::max_pool(xs, lengths, &arg);
  const auto dx = nn::max_pool_backward(r, arg, 3);
  auto loss = [&] { return (r.array() * nn::max_pool(xs, lengths, nullptr).array()).sum(); };
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const Matrix num = numeric_gradient(xs[t], loss);
    // Padded entries are ignored by the pool entirely.
    if (t >= 2) EXPECT_EQ(num.row(1).norm(), 0.0);
    EXPECT_LT(relative_error(dx[t], num), 1e-4);
  }
}

TEST_F(GradCheck, BatchNormTraining) {
  nn::BatchNorm bn("bn", 3);
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
    nn::BatchNorm copy = bn;  // keep running statistics out of the picture
    return (r.array() * copy.forward(x, true, nullptr).array()).sum();
  };
  EXPECT_LT(check_param_grads(params, loss).error, 1e-4);
  EXPECT_LT(relative_error(dx, numeric_gradient(x, loss)), 1e-4);
}

TEST_F(GradCheck, SoftmaxCrossEntropy) {
  Matrix logits = random_matrix(3, 4, rng, 2.0);
  const std::vector<int> gold{0, 3, 2};
  Matrix d;
  nn::softmax_ce(logits, gold, &d);
  auto loss = [&] { return nn::softmax_ce(logits, gold, nullptr); };
  EXPECT_LT(relative_error(d, numeric_gradient(logits, loss)), 1e-4);
}

TEST_F(GradCheck, Dropout) {
  const auto x = random_sequence(2, 3, 4, rng);
  nn::Sequence masks;
  Rng drop(5);
  const auto y = nn::dropout(x, 0.5, true, drop, &masks);
  const auto r = random_sequence(2, 3, 4, rng);
  const auto dx = nn::dropout_backward(r, masks);
  for (std::size_t t = 0; t < x.size(); ++t) {
    EXPECT_LT((dx[t] - (r[t].array() * y[t].array() / x[t].array()).matrix()).norm(), 1e-12);
  }
}

TEST(Dropout, MonteCarloKeepRateAndScale) {
  Rng rng(99);
  const Matrix ones = Matrix::Ones(200, 200);
  Matrix mask;
  const Matrix y = nn::dropout(ones, 0.3, true, rng, &mask);
  const double zero_fraction = (y.array() == 0.0).cast<double>().mean();
  EXPECT_NEAR(zero_fraction, 0.3, 0.01);
  EXPECT_NEAR(y.mean(), 1.0, 0.02);  // inverted scaling preserves expectation
  EXPECT_NEAR(y.maxCoeff(), 1.0 / 0.7, 1e-12);
}

TEST(Dropout, EvaluationIsIdentity) {
  Rng rng(1);
  const Matrix x = Matrix::Random(3, 3);
  Matrix mask;
  EXPECT_EQ(nn::dropout(x, 0.5, false, rng, &mask), x);
  EXPECT_EQ(mask.size(), 0);
  EXPECT_THROW(nn::dropout(x, 1.0, true, rng, &mask), UsageError);
}

TEST(MaxPool, FullyMaskedRowIsRejected) {
  const nn::Sequence xs{Matrix::Zero(2, 3)};
  EXPECT_THROW(nn::max_pool(xs, std::vector<int>{1, 0}, nullptr), UsageError);
}

TEST(BatchNorm, RunningStatisticsAndInference) {
  nn::BatchNorm bn("bn", 2);
  Matrix x(4, 2);
  x << 1, 2, 3, 4, 5, 6, 7, 9;
  bn.forward(x, true, nullptr);
  // mean (4, 5.25); unbiased variance (20/3, 26.75/3)
  EXPECT_NEAR(bn.running_mean(0), 0.4, 1e-12);
  EXPECT_NEAR(bn.running_mean(1), 0.525, 1e-12);
  EXPECT_NEAR(bn.running_var(0), 0.9 + 0.1 * 20.0 / 3.0, 1e-12);
  EXPECT_NEAR(bn.running_var(1), 0.9 + 0.1 * 26.75 / 3.0, 1e-12);
  EXPECT_LT((bn.infer(x) - bn.forward(x, false, nullptr)).norm(), 1e-12);
  EXPECT_THROW(bn.forward(x.topRows(1), true, nullptr), UsageError);
}

TEST(Softmax, RowsSumToOne) {
  Rng rng(4);
  const Matrix p = nn::softmax_rows(random_matrix(6, 5, rng, 30.0));
  for (Eigen::Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
  nn::Param p("p", 1, 2);
  p.value << 1.0, -2.0;
  p.grad << 0.3, -40.0;
  nn::AdamSlot slot;
  nn::AdamConfig cfg;
  cfg.l2 = 0.0;
  nn::adam_step(p, slot, cfg);
  // Bias-corrected first step is lr * g / (|g| + eps).
  EXPECT_NEAR(p.value(0, 0), 1.0 - 1e-3, 1e-9);
  EXPECT_NEAR(p.value(0, 1), -2.0 + 1e-3, 1e-9);
}

TEST(Adam, MinimizesQuadratic) {
  nn::Param p("p", 1, 1);
  p.value(0, 0) = -4.0;
  nn::Adam adam({0.05, 0.9, 0.999, 1e-8, 0.0});
  for (int i = 0; i < 2000; ++i) {
    p.grad(0, 0) = 2 * (p.value(0, 0) - 3.0);
    adam.step({&p});
  }
  EXPECT_NEAR(p.value(0, 0), 3.0, 1e-3);
}

TEST(Adam, L2ShrinksTowardsZero) {
  nn::Param p("p", 1, 1);
  p.value(0, 0) = 1.0;
  nn::Adam adam({0.01, 0.9, 0.999, 1e-8, 1.0});
  for (int i = 0; i < 500; ++i) {
    p.zero_grad();
    adam.step({&p});
  }
  EXPECT_LT(std::abs(p.value(0, 0)), 0.05);
}

TEST(Adam, SubsetStepLeavesOthersUntouched) {
  nn::Param a("a", 1, 1), b("b", 1, 1);
  a.grad(0, 0) = 1.0;
  b.grad(0, 0) = 1.0;
  nn::Adam adam;
  adam.step({&a});
  EXPECT_NE(a.value(0, 0), 0.0);
  EXPECT_EQ(b.value(0, 0), 0.0);
}

TEST(Params, CountAndZero) {
  nn::BiLstm bi("bi", 3, 2);
  nn::ParamList params;
  bi.collect(params);
  // Per direction: 3*8 + 2*8 + 8.
  EXPECT_EQ(nn::count_params(params), 2 * (24 + 16 + 8));
}

TEST(Lstm, ZeroParametersGiveZeroState) {
  Rng rng(4);
  nn::Lstm lstm("l", 3, 5);
  const auto xs = random_sequence(4, 2, 3, rng);
  for (const auto& h : lstm.forward(xs, std::vector<int>{4, 4}, false, nullptr)) {
    EXPECT_EQ(h.norm(), 0.0);
  }
}

TEST(BiLstm, SingleTokenConcatenatesBothDirections) {
  Rng rng(12);
  nn::BiLstm bi("bi", 2, 3);
  bi.init(rng);
  const auto xs = random_sequence(1, 1, 2, rng);
  const auto out = bi.forward(xs, std::vector<int>{1}, nullptr);
  const Vector x = xs[0].row(0).transpose();
  const auto f = lstm_step(x, Vector::Zero(3), Vector::Zero(3), bi.fwd);
  const auto b = lstm_step(x, Vector::Zero(3), Vector::Zero(3), bi.bwd);
  EXPECT_LT((out[0].row(0).head(3).transpose() - f.h).norm(), 1e-14);
  EXPECT_LT((out[0].row(0).tail(3).transpose() - b.h).norm(), 1e-14);
}

TEST(BiLstm, ReversingInputSwapsDirections) {
  Rng rng(13);
  nn::BiLstm bi("bi", 3, 4);
  bi.init(rng);
  // With swapped weights the model reading reversed input mirrors the original.
  nn::BiLstm swapped = bi;
  std::swap(swapped.fwd, swapped.bwd);
  const int n = 6;
  const auto xs = random_sequence(n, 1, 3, rng);
  const nn::Sequence rev(xs.rbegin(), xs.rend());
  const std::vector<int> len{n};
  const auto out = bi.forward(xs, len, nullptr);
  const auto out_rev = swapped.forward(rev, len, nullptr);
  for (int t = 0; t < n; ++t) {
    const RowVector a = out_rev[t].row(0);
    const RowVector b = out[n - 1 - t].row(0);
    EXPECT_LT((a.head(4) - b.tail(4)).norm(), 1e-12);
    EXPECT_LT((a.tail(4) - b.head(4)).norm(), 1e-12);
  }
}

TEST(MaxPool, OrderAndPaddingInvariance) {
  Rng rng(14);
  auto xs = random_sequence(4, 1, 5, rng);
  const std::vector<int> len{4};
  const Matrix pooled = nn::max_pool(xs, len, nullptr);
  const nn::Sequence one{xs[2]};
  EXPECT_EQ(nn::max_pool(one, std::vector<int>{1}, nullptr), xs[2]);
  const nn::Sequence shuffled{xs[3], xs[0], xs[2], xs[1]};
  EXPECT_EQ(nn::max_pool(shuffled, len, nullptr), pooled);
  // Row 0 is xs padded to length 6 with large values; row 1 is a longer neighbor.
  nn::Sequence batch;
  for (int t = 0; t < 6; ++t) {
    Matrix step(2, 5);
    step.row(0) = t < 4 ? RowVector(xs[t].row(0)) : RowVector::Constant(5, 100.0);
    step.row(1) = random_matrix(1, 5, rng);
    batch.push_back(step);
  }
  EXPECT_EQ(nn::max_pool(batch, std::vector<int>{4, 6}, nullptr).row(0), pooled.row(0));
}

TEST(Softmax, UniformAndSaturatedLogits) {
  EXPECT_NEAR(nn::softmax_ce(Vector::Zero(5), 2), std::log(5.0), 1e-15);
  Vector logits = Vector::Zero(3);
  logits(1) = 50.0;
  EXPECT_LT(nn::softmax_ce(logits, 1), 1e-20);
  EXPECT_THROW(nn::softmax_ce(logits, 3), UsageError);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Rng rng(15);
  nn::Param p("p", 2, 3);
  p.value = random_matrix(2, 3, rng);
  const Matrix before = p.value;
  nn::AdamSlot slot;
  nn::AdamConfig cfg;
  cfg.l2 = 0.0;
  nn::adam_step(p, slot, cfg);
  EXPECT_EQ(p.value, before);
}

}  // namespace
}  // namespace negsent
