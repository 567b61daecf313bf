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

// Accuracy, token-level span-category F1, and approximate randomization
// significance testing.

#ifndef NEGSENT_EVAL_HPP_
#define NEGSENT_EVAL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "negsent/corpus.hpp"

namespace negsent {

double accuracy(std::span<const int> pred, std::span<const int> gold);

// Accuracy within each gold class; classes absent from gold are omitted.
std::map<int, double> per_class_accuracy(std::span<const int> pred, std::span<const int> gold);

struct Prf {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision/recall/F1 from counts; empty denominators give 0.
Prf make_prf(long tp, long fp, long fn);

// Micro-averaged over the corpus. A token is positive when its label falls in
// the category; B and I are collapsed.
Prf token_f1(const std::vector<TagSequence>& pred, const std::vector<TagSequence>& gold,
             TagCategory category);

// Label-id form. `categories[label]` is the category id of each label with 0
// meaning "outside". With `category` = kAnyCategory every non-outside token is
// positive and a true positive needs matching categories.
inline constexpr int kAnyCategory = -1;
Prf token_f1(const std::vector<std::vector<int>>& pred, const std::vector<std::vector<int>>& gold,
             std::span<const int> categories, int category);

// Category ids of arbitrary label names: "O" is 0, and "B-X"/"I-X"/"X" share
// one id per distinct X, numbered in order of first appearance.
std::vector<int> label_categories(const std::vector<std::string>& label_names);

// Category ids for the negation label inventory: O=0, cue=1, scope=2.
std::vector<int> negation_categories();

struct ScoreReport {
  double accuracy = 0.0;
  std::map<int, double> per_class;
  std::optional<Prf> cue;
  std::optional<Prf> scope;
};

// Observed statistic of the randomization test: |#correct(a) - #correct(b)|.
long correct_difference(std::span<const int> a, std::span<const int> b,
                        std::span<const int> gold);

// Each iteration swaps every example's pair of predictions with probability
// 1/2 using counter-based draws, so the result does not depend on scheduling.
// p = (#{pseudo >= observed} + 1) / (iters + 1).
double approx_rand_test(std::span<const int> a, std::span<const int> b, std::span<const int> gold,
                        int iters = 10000, std::uint64_t seed = 1);

// True iff at least three of exactly five p-values are below 0.01.
bool significance_decision(std::span<const double> p_values);

struct SignificanceResult {
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracy_a;
  std::vector<double> accuracy_b;
  std::vector<long> observed;
  std::vector<double> p_values;
  bool significant = false;
  int iterations = 0;
};

}  // namespace negsent

#endif  // NEGSENT_EVAL_HPP_
