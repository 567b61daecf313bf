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

#include "negsent/eval.hpp"
#include "oracles.hpp"

namespace negsent {
namespace {

using L = NegLabel;

TEST(Accuracy, Basics) {
  const std::vector<int> gold{1, 0, 1, 1};
  EXPECT_EQ(accuracy(gold, gold), 1.0);
  EXPECT_EQ(accuracy(std::vector<int>{1, 0, 0, 1}, gold), 0.75);
  EXPECT_THROW(accuracy(std::vector<int>{1}, gold), ShapeError);
  EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), UsageError);
}

TEST(Accuracy, PerClassOverGoldSubsets) {
  const std::vector<int> gold{0, 0, 1, 1, 1, 2};
  const std::vector<int> pred{0, 1, 1, 1, 0, 3};
  const auto pc = per_class_accuracy(pred, gold);
  ASSERT_EQ(pc.size(), 3u);  // class 3 never gold: omitted
  EXPECT_DOUBLE_EQ(pc.at(0), 0.5);
  EXPECT_DOUBLE_EQ(pc.at(1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(pc.at(2), 0.0);
}

TEST(TokenF1, PerfectAndEmpty) {
  const std::vector<TagSequence> gold{{L::kBCue, L::kBScope, L::kIScope, L::kO}};
  EXPECT_EQ(token_f1(gold, gold, TagCategory::kScope).f1, 1.0);
  EXPECT_EQ(token_f1(gold, gold, TagCategory::kCue).f1, 1.0);
  const std::vector<TagSequence> none{{L::kO, L::kO, L::kO, L::kO}};
  const auto r = token_f1(none, gold, TagCategory::kScope);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.f1, 0.0);
}

TEST(TokenF1, HandCountedExample) {
  // Predicted scope tokens {1,2,3}, gold scope tokens {1,2,4,5}.
  const std::vector<TagSequence> pred{{L::kO, L::kBScope, L::kIScope, L::kIScope, L::kO, L::kO}};
  const std::vector<TagSequence> gold{{L::kO, L::kIScope, L::kBScope, L::kO, L::kBScope, L::kIScope}};
  // gold has an I after O on purpose: B/I are collapsed, so only categories count.
  const auto r = token_f1(pred, gold, TagCategory::kScope);
  EXPECT_EQ(r.tp, 2);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_NEAR(r.f1, 4.0 / 7.0, 1e-12);
  const auto swapped = token_f1(gold, pred, TagCategory::kScope);
  EXPECT_DOUBLE_EQ(swapped.precision, r.recall);
  EXPECT_DOUBLE_EQ(swapped.recall, r.precision);
  EXPECT_DOUBLE_EQ(swapped.f1, r.f1);
}

TEST(TokenF1, MicroAveragesOverCorpus) {
  const std::vector<TagSequence> pred{{L::kBCue}, {L::kO, L::kBCue}};
  const std::vector<TagSequence> gold{{L::kBCue}, {L::kBCue, L::kO}};
  const auto r = token_f1(pred, gold, TagCategory::kCue);
  EXPECT_EQ(r.tp, 1);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.fn, 1);
  EXPECT_THROW(token_f1(pred, {{L::kO}}, TagCategory::kCue), ShapeError);
}

TEST(TokenF1, GenericLabelsAndAnyCategory) {
  const std::vector<std::string> names{"O", "B-PER", "I-PER", "B-LOC", "NN"};
  const auto cats = label_categories(names);
  EXPECT_EQ(cats, (std::vector<int>{0, 1, 1, 2, 3}));
  const std::vector<std::vector<int>> gold{{1, 2, 0, 3, 4}};
  const std::vector<std::vector<int>> pred{{1, 1, 3, 1, 4}};
  const auto any = token_f1(pred, gold, cats, kAnyCategory);
  // Positives: pred 5, gold 4; matches at 0, 1, 4.
  EXPECT_EQ(any.tp, 3);
  EXPECT_EQ(any.fp, 2);
  EXPECT_EQ(any.fn, 1);
  EXPECT_EQ(negation_categories(), (std::vector<int>{0, 1, 1, 2, 2}));
}

TEST(ApproxRand, IdenticalPredictionsGivePOne) {
  const std::vector<int> gold{0, 1, 1, 0, 1};
  const std::vector<int> a{0, 1, 0, 0, 0};
  EXPECT_EQ(correct_difference(a, a, gold), 0);
  EXPECT_EQ(approx_rand_test(a, a, gold, 1000, 3), 1.0);
}

TEST(ApproxRand, ExtremeDifferenceIsSignificant) {
  std::vector<int> gold(100), a(100), b(100);
  for (int i = 0; i < 100; ++i) {
    gold[i] = i % 2;
    a[i] = gold[i];
    b[i] = 1 - gold[i];
  }
  const double p = approx_rand_test(a, b, gold, 10000, 1);
  EXPECT_LT(p, 0.001);
  EXPECT_DOUBLE_EQ(p, 1.0 / 10001.0);
}

TEST(ApproxRand, MatchesExhaustiveEnumeration) {
  Rng rng(17);
  std::uniform_int_distribution<int> len(1, 12), cls(0, 2);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = len(rng);
    std::vector<int> gold(n), a(n), b(n);
    for (int i = 0; i < n; ++i) {
      gold[i] = cls(rng);
      a[i] = cls(rng) == 0 ? gold[i] : cls(rng);
      b[i] = cls(rng);
    }
    const double exact = oracle::exact_rand_p(a, b, gold);
    const double sampled = approx_rand_test(a, b, gold, 10000, static_cast<std::uint64_t>(trial));
    EXPECT_NEAR(sampled, exact, 0.02) << "n=" << n;
  }
}

TEST(ApproxRand, DeterministicAndMonotone) {
  std::vector<int> gold(40, 1), b(40, 0);
  for (int i = 0; i < 40; i += 3) b[i] = 1;
  double prev = 2.0;
  for (int k = 0; k <= 40; k += 5) {
    std::vector<int> a(40, 0);
    for (int i = 0; i < k; ++i) a[i] = 1;
    // Family with growing observed statistic relative to b once k passes b's hits.
    const double p = approx_rand_test(a, b, gold, 2000, 9);
    EXPECT_EQ(p, approx_rand_test(a, b, gold, 2000, 9));
    if (k >= 14) {
      EXPECT_LE(p, prev);
      prev = p;
    }
  }
  EXPECT_THROW(approx_rand_test(gold, b, std::vector<int>{1}, 10, 1), ShapeError);
}

TEST(Significance, ThreeOfFiveRule) {
  EXPECT_TRUE(significance_decision(std::vector<double>{0.005, 0.005, 0.005, 0.5, 0.5}));
  EXPECT_FALSE(significance_decision(std::vector<double>{0.005, 0.005, 0.5, 0.5, 0.5}));
  EXPECT_FALSE(significance_decision(std::vector<double>{0.01, 0.01, 0.01, 0.01, 0.01}));
  EXPECT_THROW(significance_decision(std::vector<double>{0.001, 0.001, 0.001}), UsageError);
}

}  // namespace
}  // namespace negsent
