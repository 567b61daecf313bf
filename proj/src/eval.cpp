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

#include "negsent/eval.hpp"

#include <cstdlib>
#include <unordered_map>

namespace negsent {

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
  }
}

}  // namespace

double accuracy(std::span<const int> pred, std::span<const int> gold) {
  check_aligned(pred.size(), gold.size(), "accuracy");
  if (gold.empty()) throw UsageError("accuracy: empty input");
  long correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += pred[i] == gold[i];
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

std::map<int, double> per_class_accuracy(std::span<const int> pred, std::span<const int> gold) {
  check_aligned(pred.size(), gold.size(), "per_class_accuracy");
  std::map<int, std::pair<long, long>> counts;  // class -> (correct, total)
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto& c = counts[gold[i]];
    c.first += pred[i] == gold[i];
    ++c.second;
  }
  std::map<int, double> out;
  for (const auto& [cls, c] : counts) {
    out[cls] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

Prf make_prf(long tp, long fp, long fn) {
  Prf r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

Prf token_f1(const std::vector<std::vector<int>>& pred, const std::vector<std::vector<int>>& gold,
             std::span<const int> categories, int category) {
  check_aligned(pred.size(), gold.size(), "token_f1");
  auto cat = [&](int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= categories.size()) {
      throw UsageError("token_f1: label " + std::to_string(label) + " outside the inventory");
    }
    return categories[static_cast<std::size_t>(label)];
  };
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    check_aligned(pred[s].size(), gold[s].size(), "token_f1");
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      const int p = cat(pred[s][t]);
      const int g = cat(gold[s][t]);
      const bool pp = category == kAnyCategory ? p != 0 : p == category;
      const bool gp = category == kAnyCategory ? g != 0 : g == category;
      if (pp && gp && p == g) {
        ++tp;
      } else {
        fp += pp;
        fn += gp;
      }
    }
  }
  return make_prf(tp, fp, fn);
}

std::vector<int> negation_categories() {
  std::vector<int> out(kNumNegLabels);
  for (int i = 0; i < kNumNegLabels; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(category_of(static_cast<NegLabel>(i)));
  }
  return out;
}

Prf token_f1(const std::vector<TagSequence>& pred, const std::vector<TagSequence>& gold,
             TagCategory category) {
  auto ids = [](const std::vector<TagSequence>& seqs) {
    std::vector<std::vector<int>> out;
    out.reserve(seqs.size());
    for (const auto& s : seqs) {
      std::vector<int> row;
      row.reserve(s.size());
      for (NegLabel l : s) row.push_back(static_cast<int>(l));
      out.push_back(std::move(row));
    }
    return out;
  };
  if (category == TagCategory::kNone) throw UsageError("token_f1: category must be cue or scope");
  const auto cats = negation_categories();
  return token_f1(ids(pred), ids(gold), cats, static_cast<int>(category));
}

std::vector<int> label_categories(const std::vector<std::string>& label_names) {
  std::unordered_map<std::string, int> ids;
  std::vector<int> out;
  out.reserve(label_names.size());
  for (const auto& name : label_names) {
    if (name == "O") {
      out.push_back(0);
      continue;
    }
    std::string base = name;
    if (base.size() > 2 && (base[0] == 'B' || base[0] == 'I') && base[1] == '-') base = base.substr(2);
    auto [it, inserted] = ids.emplace(base, static_cast<int>(ids.size()) + 1);
    out.push_back(it->second);
  }
  return out;
}

long correct_difference(std::span<const int> a, std::span<const int> b,
                        std::span<const int> gold) {
  check_aligned(a.size(), gold.size(), "approx_rand_test");
  check_aligned(b.size(), gold.size(), "approx_rand_test");
  long diff = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    diff += static_cast<long>(a[i] == gold[i]) - static_cast<long>(b[i] == gold[i]);
  }
  return std::labs(diff);
}

double approx_rand_test(std::span<const int> a, std::span<const int> b, std::span<const int> gold,
                        int iters, std::uint64_t seed) {
  const long observed = correct_difference(a, b, gold);
  if (iters < 1) throw UsageError("approx_rand_test: iters must be positive");
  // Only examples where exactly one system is right move the statistic.
  std::vector<std::size_t> index;
  std::vector<long> delta;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const long d = static_cast<long>(a[i] == gold[i]) - static_cast<long>(b[i] == gold[i]);
    if (d != 0) {
      index.push_back(i);
      delta.push_back(d);
    }
  }
  const std::uint64_t base = mix64(seed);
  long count = 0;
  for (int it = 0; it < iters; ++it) {
    const std::uint64_t iter_key = mix64(base ^ mix64(static_cast<std::uint64_t>(it) + 1));
    long sum = 0;
    std::uint64_t word = 0;
    std::size_t word_index = static_cast<std::size_t>(-1);
    for (std::size_t k = 0; k < index.size(); ++k) {
      // Bit `index[k]` of the iteration's swap pattern.
      const std::size_t w = index[k] / 64;
      if (w != word_index) {
        word = mix64(iter_key + w);
        word_index = w;
      }
      const bool swap = (word >> (index[k] % 64)) & 1U;
      sum += swap ? -delta[k] : delta[k];
    }
    count += std::labs(sum) >= observed;
  }
  return static_cast<double>(count + 1) / static_cast<double>(iters + 1);
}

bool significance_decision(std::span<const double> p_values) {
  if (p_values.size() != 5) {
    throw UsageError("significance_decision: expected 5 p-values, got " +
                     std::to_string(p_values.size()));
  }
  int below = 0;
  for (double p : p_values) below += p < 0.01;
  return below >= 3;
}

}  // namespace negsent
